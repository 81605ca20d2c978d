#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sketchcorr/common.hpp"
#include "sketchcorr/image_io.hpp"

namespace sketchcorr::data {

namespace fs = std::filesystem;

// One photo and one sketch drawn from it. Images load lazily; everything is
// resized to kImageSide on load.
struct ImagePair {
  std::string photo_id;
  std::string sketch_id;
  std::string category;
  fs::path photo_path;
  fs::path sketch_path;

  torch::Tensor load_photo() const { return load_image(photo_path, kImageSide); }
  torch::Tensor load_sketch() const { return load_image(sketch_path, kImageSide); }
};

struct PhotoEntry {
  std::string photo_id;
  std::string category;
  fs::path photo_path;
  std::vector<std::string> sketch_ids;
  std::vector<fs::path> sketch_paths;
};

struct Corpus {
  std::vector<PhotoEntry> photos;          // sorted by (category, photo_id)
  std::vector<std::string> categories;     // sorted, unique
  int64_t sketch_count = 0;

  std::vector<ImagePair> pairs() const {
    std::vector<ImagePair> out;
    for (const auto& p : photos) {
      for (size_t i = 0; i < p.sketch_ids.size(); ++i) {
        out.push_back({p.photo_id, p.sketch_ids[i], p.category, p.photo_path, p.sketch_paths[i]});
      }
    }
    return out;
  }
};

inline bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

// Layout: <root>/<split>/photo/<category>/<photo_id>.<ext>
//         <root>/<split>/sketch/<category>/<photo_id>-<k>.<ext>
// An optional <root>/exclusions.txt lists sketch ids (one per line) to skip.
inline Corpus load_corpus(const fs::path& root, const std::string& split,
                          std::ostream& log = std::cerr) {
  const auto photo_dir = root / split / "photo";
  const auto sketch_dir = root / split / "sketch";
  check(fs::is_directory(photo_dir), "missing photo directory: " + photo_dir.string());
  check(fs::is_directory(sketch_dir), "missing sketch directory: " + sketch_dir.string());

  std::set<std::string> excluded;
  if (auto exfile = root / "exclusions.txt"; fs::exists(exfile)) {
    std::ifstream in(exfile);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) excluded.insert(line);
    }
  }

  std::map<std::pair<std::string, std::string>, PhotoEntry> photos;
  for (const auto& cat_entry : fs::directory_iterator(photo_dir)) {
    if (!cat_entry.is_directory()) continue;
    const auto category = cat_entry.path().filename().string();
    for (const auto& f : fs::directory_iterator(cat_entry.path())) {
      if (!f.is_regular_file() || !is_image_file(f.path())) continue;
      PhotoEntry e;
      e.photo_id = f.path().stem().string();
      e.category = category;
      e.photo_path = f.path();
      photos[{category, e.photo_id}] = std::move(e);
    }
  }

  Corpus corpus;
  int64_t skipped = 0;
  if (fs::is_directory(sketch_dir)) {
    for (const auto& cat_entry : fs::directory_iterator(sketch_dir)) {
      if (!cat_entry.is_directory()) continue;
      const auto category = cat_entry.path().filename().string();
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(cat_entry.path())) {
        if (f.is_regular_file() && is_image_file(f.path())) files.push_back(f.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        const auto stem = f.stem().string();
        const auto sketch_id = category + "/" + stem;
        if (excluded.count(sketch_id) || excluded.count(stem)) continue;
        const auto dash = stem.rfind('-');
        if (dash == std::string::npos) {
          log << "[corpus] warning: sketch without photo id, skipped: " << f << "\n";
          ++skipped;
          continue;
        }
        const auto photo_id = stem.substr(0, dash);
        auto it = photos.find({category, photo_id});
        if (it == photos.end()) {
          log << "[corpus] warning: sketch " << sketch_id
              << " has no photo " << photo_id << ", skipped\n";
          ++skipped;
          continue;
        }
        it->second.sketch_ids.push_back(sketch_id);
        it->second.sketch_paths.push_back(f);
      }
    }
  }

  std::map<std::string, std::pair<int64_t, int64_t>> per_category;  // photos, sketches
  for (auto& [key, entry] : photos) {
    auto& cat_counts = per_category[entry.category];
    cat_counts.first += 1;
    cat_counts.second += static_cast<int64_t>(entry.sketch_ids.size());
    corpus.sketch_count += static_cast<int64_t>(entry.sketch_ids.size());
    corpus.photos.push_back(std::move(entry));
  }
  for (const auto& [cat, counts] : per_category) {
    corpus.categories.push_back(cat);
    log << "[corpus] " << split << "/" << cat << ": " << counts.first
        << " photos, " << counts.second << " sketches\n";
  }
  if (corpus.photos.empty()) log << "[corpus] warning: no photos found under " << photo_dir << "\n";
  if (skipped > 0) log << "[corpus] skipped " << skipped << " unresolvable sketches\n";
  return corpus;
}

// One pair per photo; the sketch choice is a stateless hash of
// (photo_id, seed) so parallel loaders agree without shared state. Pass a
// seed already combined with the epoch for per-epoch resampling.
inline std::vector<ImagePair> sample_epoch_pairs(const Corpus& corpus, uint64_t seed,
                                                 std::ostream& log = std::cerr) {
  std::vector<ImagePair> out;
  out.reserve(corpus.photos.size());
  for (const auto& p : corpus.photos) {
    if (p.sketch_ids.empty()) {
      log << "[corpus] warning: photo " << p.category << "/" << p.photo_id
          << " has no sketches, excluded\n";
      continue;
    }
    Rng rng(hash_combine(seed, hash64(p.category + "/" + p.photo_id)));
    const auto i = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(p.sketch_ids.size()) - 1));
    out.push_back({p.photo_id, p.sketch_ids[i], p.category, p.photo_path, p.sketch_paths[i]});
  }
  return out;
}

inline Corpus restrict_categories(const Corpus& corpus, const std::vector<std::string>& keep) {
  std::set<std::string> keep_set(keep.begin(), keep.end());
  Corpus out;
  for (const auto& p : corpus.photos) {
    if (keep_set.count(p.category)) {
      out.photos.push_back(p);
      out.sketch_count += static_cast<int64_t>(p.sketch_ids.size());
    }
  }
  for (const auto& c : corpus.categories) {
    if (keep_set.count(c)) out.categories.push_back(c);
  }
  return out;
}

}  // namespace sketchcorr::data

#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sketchcorr/common.hpp"

namespace sketchcorr::data {

inline constexpr int kKeypointsPerPair = 8;

struct Point {
  double x = 0, y = 0;
};

struct AnnotationRecord {
  std::string pair_id;
  int keypoint_index = 0;       // in [0, 8)
  Point sketch_xy;
  Point annotator_xy;
  std::string annotator_id;
};

struct BenchmarkPair {
  std::string pair_id;
  std::array<Point, kKeypointsPerPair> sketch_keypoints{};
  std::array<Point, kKeypointsPerPair> photo_keypoints_gt{};
  std::vector<AnnotationRecord> raw;  // empty when loaded from the aggregated file only

  std::string category() const {
    auto slash = pair_id.find('/');
    return slash == std::string::npos ? std::string{} : pair_id.substr(0, slash);
  }
};

namespace csv {

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline bool parse_int(const std::string& s, int& out) {
  try {
    size_t pos = 0;
    out = std::stoi(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace csv

// ---------------------------------------------------------------------------
// Raw annotation interchange: one CSV row per annotation,
//   pair_id,keypoint_index,sketch_x,sketch_y,photo_x,photo_y,annotator_id
// Coordinates are pixels in the 256x256 frame, origin top-left.
// ---------------------------------------------------------------------------

inline void save_raw_annotations(const std::vector<AnnotationRecord>& records,
                                 const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  check(out.good(), "cannot open for writing: " + path.string());
  out << "pair_id,keypoint_index,sketch_x,sketch_y,photo_x,photo_y,annotator_id\n";
  for (const auto& r : records) {
    out << r.pair_id << ',' << r.keypoint_index << ',' << csv::fmt(r.sketch_xy.x) << ','
        << csv::fmt(r.sketch_xy.y) << ',' << csv::fmt(r.annotator_xy.x) << ','
        << csv::fmt(r.annotator_xy.y) << ',' << r.annotator_id << '\n';
  }
}

inline std::vector<AnnotationRecord> load_raw_annotations(const std::filesystem::path& path,
                                                          std::ostream& log = std::cerr) {
  std::ifstream in(path);
  check(in.good(), "cannot open raw annotation file: " + path.string());
  std::vector<AnnotationRecord> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || lineno == 1) continue;  // header
    auto f = csv::split(line);
    AnnotationRecord r;
    bool ok = f.size() == 7 && csv::parse_int(f[1], r.keypoint_index) &&
              csv::parse_double(f[2], r.sketch_xy.x) && csv::parse_double(f[3], r.sketch_xy.y) &&
              csv::parse_double(f[4], r.annotator_xy.x) && csv::parse_double(f[5], r.annotator_xy.y);
    if (!ok) {
      log << "[benchmark] malformed raw row " << lineno << " in " << path << ", skipped\n";
      continue;
    }
    r.pair_id = f[0];
    r.annotator_id = f[6];
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregated benchmark: one CSV row per keypoint,
//   pair_id,keypoint_index,sketch_x,sketch_y,gt_x,gt_y
// Exactly 8 keypoints per pair; violating pairs are rejected with an error
// message and the remainder is loaded.
// ---------------------------------------------------------------------------

inline void save_benchmark(const std::vector<BenchmarkPair>& pairs,
                           const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  check(out.good(), "cannot open for writing: " + path.string());
  out << "pair_id,keypoint_index,sketch_x,sketch_y,gt_x,gt_y\n";
  for (const auto& p : pairs) {
    for (int k = 0; k < kKeypointsPerPair; ++k) {
      out << p.pair_id << ',' << k << ',' << csv::fmt(p.sketch_keypoints[k].x) << ','
          << csv::fmt(p.sketch_keypoints[k].y) << ',' << csv::fmt(p.photo_keypoints_gt[k].x)
          << ',' << csv::fmt(p.photo_keypoints_gt[k].y) << '\n';
    }
  }
}

inline std::vector<BenchmarkPair> load_benchmark(const std::filesystem::path& path,
                                                 std::ostream& log = std::cerr) {
  std::ifstream in(path);
  check(in.good(), "cannot open benchmark file: " + path.string());

  struct Partial {
    std::map<int, std::pair<Point, Point>> keypoints;
    bool malformed = false;
  };
  std::map<std::string, Partial> partials;
  std::vector<std::string> order;

  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || lineno == 1) continue;
    auto f = csv::split(line);
    int k = -1;
    Point skp, gt;
    bool ok = f.size() == 6 && csv::parse_int(f[1], k) && csv::parse_double(f[2], skp.x) &&
              csv::parse_double(f[3], skp.y) && csv::parse_double(f[4], gt.x) &&
              csv::parse_double(f[5], gt.y) && k >= 0 && k < kKeypointsPerPair;
    const std::string pair_id = f.empty() ? ("<line " + std::to_string(lineno) + ">") : f[0];
    if (partials.find(pair_id) == partials.end()) order.push_back(pair_id);
    auto& partial = partials[pair_id];
    if (!ok) {
      log << "[benchmark] malformed row " << lineno << " in " << path
          << "; pair " << pair_id << " rejected\n";
      partial.malformed = true;
      continue;
    }
    partial.keypoints[k] = {skp, gt};
  }

  std::vector<BenchmarkPair> out;
  for (const auto& pair_id : order) {
    const auto& partial = partials[pair_id];
    if (partial.malformed) continue;
    if (partial.keypoints.size() != kKeypointsPerPair) {
      log << "[benchmark] error: pair " << pair_id << " has " << partial.keypoints.size()
          << " keypoints, expected " << kKeypointsPerPair << "; rejected\n";
      continue;
    }
    BenchmarkPair bp;
    bp.pair_id = pair_id;
    for (const auto& [k, pts] : partial.keypoints) {
      bp.sketch_keypoints[k] = pts.first;
      bp.photo_keypoints_gt[k] = pts.second;
    }
    out.push_back(std::move(bp));
  }
  return out;
}

}  // namespace sketchcorr::data

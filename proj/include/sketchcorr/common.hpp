#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sketchcorr {

inline constexpr int kImageSide = 256;

// Thrown for contract violations (bad shapes, bad configs, malformed files).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename... Args>
[[noreturn]] inline void fail(const std::string& msg) {
  throw Error(msg);
}

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

// FNV-1a, used for config hashes and stateless per-item seeding.
inline uint64_t hash64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over the xor; good avalanche for seed derivation
  uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

// Deterministic RNG handed out per (item, epoch, seed) so loaders can run in
// parallel without shared state.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen_);
  }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    std::uniform_int_distribution<int> d(lo, hi);
    return d(gen_);
  }
  double normal(double mean, double stddev) {
    std::normal_distribution<double> d(mean, stddev);
    return d(gen_);
  }
  bool bernoulli(double p) {
    std::bernoulli_distribution d(p);
    return d(gen_);
  }
  uint64_t next() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline Rng item_rng(uint64_t run_seed, std::string_view item_id, uint64_t epoch) {
  return Rng(hash_combine(hash_combine(run_seed, hash64(item_id)), epoch));
}

enum class Domain { photo, sketch };

inline const char* domain_name(Domain d) {
  return d == Domain::photo ? "photo" : "sketch";
}

inline Domain domain_from_name(std::string_view s) {
  if (s == "photo") return Domain::photo;
  if (s == "sketch") return Domain::sketch;
  throw Error("unknown domain tag: " + std::string(s));
}

}  // namespace sketchcorr

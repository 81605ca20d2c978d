#pragma once

#include <torch/torch.h>

#include <cmath>
#include <optional>

#include "sketchcorr/common.hpp"
#include "sketchcorr/warpcore/flow.hpp"
#include "sketchcorr/warpcore/tps.hpp"

namespace sketchcorr::data {

struct AugmentConfig {
  // photometric
  double jitter_prob = 0.8;
  double brightness = 0.4;  // factor range [1-b, 1+b]
  double contrast = 0.4;
  double saturation = 0.4;
  double hue = 0.1;  // shift range in turns of the hue circle, [-h, h]
  double grayscale_prob = 0.2;
  double blur_prob = 0.5;
  double blur_sigma_min = 0.1;
  double blur_sigma_max = 2.0;
  // spatial: affine composed with a TPS perturbation, both backward maps
  bool spatial = true;
  double rotate_deg = 15.0;
  double scale_min = 0.85;
  double scale_max = 1.15;
  double translate_frac = 0.1;   // of the image side
  int tps_grid = 3;              // control grid is tps_grid x tps_grid
  double tps_frac = 0.15;        // max control displacement, of the image side
};

struct AugmentedView {
  torch::Tensor image;                    // (3, H, W)
  Domain domain_tag = Domain::photo;
  std::optional<torch::Tensor> gt_flow;   // (1, 2, H, W), present iff spatially transformed
};

namespace detail {

inline torch::Tensor rgb_to_hsv(const torch::Tensor& rgb) {
  auto r = rgb.select(0, 0), g = rgb.select(0, 1), b = rgb.select(0, 2);
  auto maxc = std::get<0>(rgb.max(0));
  auto minc = std::get<0>(rgb.min(0));
  auto v = maxc;
  auto delta = maxc - minc;
  auto s = torch::where(maxc > 0, delta / maxc.clamp_min(1e-12), torch::zeros_like(maxc));
  auto safe = delta.clamp_min(1e-12);
  auto hr = ((g - b) / safe).remainder(6.0);
  auto hg = (b - r) / safe + 2.0;
  auto hb = (r - g) / safe + 4.0;
  auto h = torch::where(maxc == r, hr, torch::where(maxc == g, hg, hb));
  h = torch::where(delta > 0, h / 6.0, torch::zeros_like(h));
  return torch::stack({h, s, v});
}

inline torch::Tensor hsv_to_rgb(const torch::Tensor& hsv) {
  auto h = hsv.select(0, 0).remainder(1.0) * 6.0;
  auto s = hsv.select(0, 1), v = hsv.select(0, 2);
  auto i = h.floor();
  auto f = h - i;
  auto p = v * (1 - s);
  auto q = v * (1 - s * f);
  auto t = v * (1 - s * (1 - f));
  auto ii = i.to(torch::kLong).remainder(6);
  auto pick = [&](const torch::Tensor& a, int64_t which) { return (ii == which).to(a.dtype()) * a; };
  auto r = pick(v, 0) + pick(q, 1) + pick(p, 2) + pick(p, 3) + pick(t, 4) + pick(v, 5);
  auto g = pick(t, 0) + pick(v, 1) + pick(v, 2) + pick(q, 3) + pick(p, 4) + pick(p, 5);
  auto b = pick(p, 0) + pick(p, 1) + pick(t, 2) + pick(v, 3) + pick(v, 4) + pick(q, 5);
  return torch::stack({r, g, b});
}

inline torch::Tensor grayscale(const torch::Tensor& img) {
  auto y = 0.299 * img.select(0, 0) + 0.587 * img.select(0, 1) + 0.114 * img.select(0, 2);
  return y.unsqueeze(0).expand({3, -1, -1}).contiguous();
}

inline torch::Tensor gaussian_blur(const torch::Tensor& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  auto xs = torch::arange(-radius, radius + 1, torch::kFloat);
  auto k = torch::exp(-xs.pow(2) / (2.0 * sigma * sigma));
  k /= k.sum();
  auto x = img.unsqueeze(0);
  namespace F = torch::nn::functional;
  x = F::pad(x, F::PadFuncOptions({radius, radius, radius, radius}).mode(torch::kReplicate));
  auto kx = k.view({1, 1, 1, -1}).expand({3, 1, 1, -1});
  auto ky = k.view({1, 1, -1, 1}).expand({3, 1, -1, 1});
  x = F::conv2d(x, kx, F::Conv2dFuncOptions().groups(3));
  x = F::conv2d(x, ky, F::Conv2dFuncOptions().groups(3));
  return x.squeeze(0);
}

inline torch::Tensor photometric(const torch::Tensor& input, const AugmentConfig& cfg, Rng& rng) {
  auto img = input;
  if (cfg.jitter_prob > 0 && rng.bernoulli(cfg.jitter_prob)) {
    // torchvision-style order: brightness, contrast, saturation, hue
    img = img * rng.uniform(1.0 - cfg.brightness, 1.0 + cfg.brightness);
    img = img.clamp(0, 1);
    auto mean = grayscale(img).mean();
    img = ((img - mean) * rng.uniform(1.0 - cfg.contrast, 1.0 + cfg.contrast) + mean).clamp(0, 1);
    auto gray = grayscale(img);
    img = (gray + (img - gray) * rng.uniform(1.0 - cfg.saturation, 1.0 + cfg.saturation)).clamp(0, 1);
    if (cfg.hue > 0) {
      auto hsv = rgb_to_hsv(img);
      hsv.select(0, 0) += rng.uniform(-cfg.hue, cfg.hue);
      img = hsv_to_rgb(hsv).clamp(0, 1);
    }
  }
  if (cfg.grayscale_prob > 0 && rng.bernoulli(cfg.grayscale_prob)) img = grayscale(img);
  if (cfg.blur_prob > 0 && rng.bernoulli(cfg.blur_prob)) {
    img = gaussian_blur(img, rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max)).clamp(0, 1);
  }
  return img;
}

}  // namespace detail

// Backward affine map p -> A p + t about the image center; rows are x, y.
struct AffineMap {
  double a00 = 1, a01 = 0, a10 = 0, a11 = 1;
  double tx = 0, ty = 0;

  double det() const { return a00 * a11 - a01 * a10; }

  torch::Tensor displacement_field(int64_t h, int64_t w) const {
    auto ys = torch::arange(h, torch::kDouble);
    auto xs = torch::arange(w, torch::kDouble);
    auto grid = torch::meshgrid({ys, xs}, "ij");
    auto x = grid[1], y = grid[0];
    auto dx = a00 * x + a01 * y + tx - x;
    auto dy = a10 * x + a11 * y + ty - y;
    return torch::stack({dx, dy}).unsqueeze(0).to(torch::kFloat);
  }
};

inline AffineMap sample_affine(const AugmentConfig& cfg, int side, Rng& rng) {
  // resample degenerate draws; cannot happen with sane scale ranges but the
  // config does not forbid them
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double th = rng.uniform(-cfg.rotate_deg, cfg.rotate_deg) * M_PI / 180.0;
    const double s = rng.uniform(cfg.scale_min, cfg.scale_max);
    const double tx = rng.uniform(-cfg.translate_frac, cfg.translate_frac) * side;
    const double ty = rng.uniform(-cfg.translate_frac, cfg.translate_frac) * side;
    const double c = side / 2.0;
    AffineMap m;
    m.a00 = s * std::cos(th);
    m.a01 = -s * std::sin(th);
    m.a10 = s * std::sin(th);
    m.a11 = s * std::cos(th);
    // rotate/scale about the center, then translate
    m.tx = c - (m.a00 * c + m.a01 * c) + tx;
    m.ty = c - (m.a10 * c + m.a11 * c) + ty;
    if (std::abs(m.det()) > 1e-6) return m;
  }
  throw Error("could not sample an invertible affine transform");
}

inline warpcore::TpsWarp sample_tps(const AugmentConfig& cfg, int side, Rng& rng) {
  const int g = cfg.tps_grid;
  check(g >= 2, "TPS control grid must be at least 2x2");
  std::vector<double> cs, ds;
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      cs.push_back(ix * (side - 1.0) / (g - 1.0));
      cs.push_back(iy * (side - 1.0) / (g - 1.0));
      ds.push_back(rng.uniform(-cfg.tps_frac, cfg.tps_frac) * side);
      ds.push_back(rng.uniform(-cfg.tps_frac, cfg.tps_frac) * side);
    }
  }
  auto controls = torch::tensor(cs, torch::kDouble).view({g * g, 2});
  auto disp = torch::tensor(ds, torch::kDouble).view({g * g, 2});
  return warpcore::fit_tps(controls, disp);
}

// Sample the spatial part of the augmentation as a single backward
// displacement field (affine composed additively with the TPS perturbation).
inline torch::Tensor sample_spatial_field(const AugmentConfig& cfg, int64_t h, int64_t w, Rng& rng) {
  auto field = sample_affine(cfg, static_cast<int>(w), rng).displacement_field(h, w);
  if (cfg.tps_frac != 0.0) {
    field = field + warpcore::tps_field(sample_tps(cfg, static_cast<int>(w), rng), h, w);
  }
  return field;
}

inline AugmentedView augment_one(const torch::Tensor& image, Domain domain,
                                 const AugmentConfig& cfg, Rng& rng) {
  torch::NoGradGuard ng;
  AugmentedView out;
  out.domain_tag = domain;
  out.image = detail::photometric(image, cfg, rng);
  if (cfg.spatial) {
    auto flow = sample_spatial_field(cfg, image.size(1), image.size(2), rng);
    out.image = warpcore::warp(out.image.unsqueeze(0), flow).squeeze(0);
    out.gt_flow = flow;
  }
  return out;
}

// Photo and sketch views of a pair, independently transformed. Returns
// {photo view, sketch view}.
inline std::pair<AugmentedView, AugmentedView> augment(const torch::Tensor& photo,
                                                       const torch::Tensor& sketch,
                                                       const AugmentConfig& cfg,
                                                       uint64_t seed) {
  Rng rng_photo(hash_combine(seed, hash64("photo")));
  Rng rng_sketch(hash_combine(seed, hash64("sketch")));
  return {augment_one(photo, Domain::photo, cfg, rng_photo),
          augment_one(sketch, Domain::sketch, cfg, rng_sketch)};
}

}  // namespace sketchcorr::data

#pragma once

#include <torch/torch.h>

#include "sketchcorr/common.hpp"

namespace sketchcorr::warpcore {

// Displacement fields are (B, 2, H, W) tensors on the output (target) grid:
// the value at grid point p is the offset, in pixels of that grid, added to p
// to find the source sampling location. Channel 0 is the x offset (rightward),
// channel 1 the y offset (downward). The identity field is all zeros.

inline torch::Tensor identity_flow(int64_t h, int64_t w,
                                   torch::TensorOptions opts = {}) {
  return torch::zeros({1, 2, h, w}, opts);
}

namespace detail {

inline void check_field(const torch::Tensor& f) {
  check(f.dim() == 4 && f.size(1) == 2,
        "displacement field must be (B, 2, H, W)");
  check(f.isfinite().all().item<bool>(), "displacement field has non-finite offsets");
}

// Absolute source sampling coordinates p + F(p), shape (B, H, W) each.
inline std::pair<torch::Tensor, torch::Tensor> source_coords(const torch::Tensor& field) {
  const auto h = field.size(2), w = field.size(3);
  auto opts = field.options();
  auto xs = torch::arange(w, opts).view({1, 1, w});
  auto ys = torch::arange(h, opts).view({1, h, 1});
  return {xs + field.select(1, 0), ys + field.select(1, 1)};
}

}  // namespace detail

// Backward bilinear warp: output(p) = input(p + F(p)), border-clamped.
//
// Built from gathers rather than grid_sample so that a zero field reproduces
// the input bit-exactly and so that the same code path handles images and
// fields. Differentiable in both the input values and the field; the field
// gradient vanishes in a clamped dimension because the two gathered samples
// coincide there.
inline torch::Tensor warp(const torch::Tensor& input, const torch::Tensor& field) {
  check(input.dim() == 4, "warp expects (B, C, H, W) input");
  detail::check_field(field);
  const auto b = input.size(0), c = input.size(1), h = input.size(2), w = input.size(3);
  check(field.size(2) == h && field.size(3) == w,
        "field resolution must match the input");
  check(field.size(0) == b || field.size(0) == 1 || b == 1,
        "batch mismatch between input and field");

  auto [sx, sy] = detail::source_coords(field);
  auto x0 = sx.floor();
  auto y0 = sy.floor();
  auto fx = sx - x0;  // keeps the autograd path to the field
  auto fy = sy - y0;

  auto ix0 = x0.detach().to(torch::kLong).clamp(0, w - 1);
  auto iy0 = y0.detach().to(torch::kLong).clamp(0, h - 1);
  auto ix1 = (x0.detach().to(torch::kLong) + 1).clamp(0, w - 1);
  auto iy1 = (y0.detach().to(torch::kLong) + 1).clamp(0, h - 1);

  const auto bout = std::max(b, field.size(0));
  auto flat = input.reshape({b, c, h * w});
  if (b != bout) flat = flat.expand({bout, c, h * w});
  auto gather_at = [&](const torch::Tensor& iy, const torch::Tensor& ix) {
    auto idx = (iy * w + ix).reshape({-1, 1, h * w}).expand({bout, c, h * w});
    return torch::gather(flat, 2, idx).reshape({bout, c, h, w});
  };

  auto v00 = gather_at(iy0, ix0);
  auto v01 = gather_at(iy0, ix1);
  auto v10 = gather_at(iy1, ix0);
  auto v11 = gather_at(iy1, ix1);

  auto wfx = fx.unsqueeze(1);
  auto wfy = fy.unsqueeze(1);
  auto top = v00 + (v01 - v00) * wfx;
  auto bot = v10 + (v11 - v10) * wfx;
  return top + (bot - top) * wfy;
}

// Bilinear resize of a field to (h, w) with offsets rescaled from the source
// grid's pixel units to the destination grid's; offsets are per-grid pixels.
inline torch::Tensor upsample_flow(const torch::Tensor& field, int64_t h, int64_t w) {
  detail::check_field(field);
  if (field.size(2) == h && field.size(3) == w) return field;
  namespace F = torch::nn::functional;
  auto resized = F::interpolate(
      field, F::InterpolateFuncOptions()
                 .size(std::vector<int64_t>{h, w})
                 .mode(torch::kBilinear)
                 .align_corners(false));
  auto scale = torch::tensor(
      {static_cast<double>(w) / static_cast<double>(field.size(3)),
       static_cast<double>(h) / static_cast<double>(field.size(2))},
      field.options());
  return resized * scale.view({1, 2, 1, 1});
}

// Residual of the round trip through `outer` after `inner`:
//   compose(outer, inner)(p) = inner(p) + outer(p + inner(p)).
// Zero everywhere iff the two fields are mutual inverses along this direction.
inline torch::Tensor compose_flow(const torch::Tensor& outer, const torch::Tensor& inner) {
  detail::check_field(outer);
  detail::check_field(inner);
  check(outer.size(2) == inner.size(2) && outer.size(3) == inner.size(3),
        "compose_flow: resolution mismatch");
  return inner + warp(outer, inner);
}

// Bilinear read of a (B, C, H, W) tensor at continuous pixel coords
// (x, y), border-clamped. `points` is (N, 2) in x, y order; returns (B, N, C).
inline torch::Tensor sample_at_points(const torch::Tensor& input, const torch::Tensor& points) {
  check(input.dim() == 4, "sample_at_points expects (B, C, H, W)");
  check(points.dim() == 2 && points.size(1) == 2, "points must be (N, 2)");
  const auto h = input.size(2), w = input.size(3);
  auto pts = points.to(input.options());
  auto sx = pts.select(1, 0);
  auto sy = pts.select(1, 1);
  auto x0 = sx.floor();
  auto y0 = sy.floor();
  auto fx = (sx - x0).view({1, -1, 1});
  auto fy = (sy - y0).view({1, -1, 1});
  auto ix0 = x0.to(torch::kLong).clamp(0, w - 1);
  auto iy0 = y0.to(torch::kLong).clamp(0, h - 1);
  auto ix1 = (x0.to(torch::kLong) + 1).clamp(0, w - 1);
  auto iy1 = (y0.to(torch::kLong) + 1).clamp(0, h - 1);

  auto flat = input.reshape({input.size(0), input.size(1), h * w});
  auto take = [&](const torch::Tensor& iy, const torch::Tensor& ix) {
    auto idx = (iy * w + ix).view({1, 1, -1}).expand({input.size(0), input.size(1), -1});
    return torch::gather(flat, 2, idx).permute({0, 2, 1});  // (B, N, C)
  };
  auto v00 = take(iy0, ix0);
  auto v01 = take(iy0, ix1);
  auto v10 = take(iy1, ix0);
  auto v11 = take(iy1, ix1);
  auto top = v00 + (v01 - v00) * fx;
  auto bot = v10 + (v11 - v10) * fx;
  return top + (bot - top) * fy;
}

}  // namespace sketchcorr::warpcore

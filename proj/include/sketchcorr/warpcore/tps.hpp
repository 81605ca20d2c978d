#pragma once

#include <torch/torch.h>

#include "sketchcorr/common.hpp"

namespace sketchcorr::warpcore {

// Thin plate spline interpolation of 2-D displacements given control points.
// Solved in double precision; the radial basis is U(r) = r^2 log r.
struct TpsWarp {
  torch::Tensor controls;  // (N, 2) double, pixel coords (x, y)
  torch::Tensor weights;   // (N + 3, 2) double: N kernel weights then affine a0, ax, ay

  // Displacement at arbitrary query points (M, 2) -> (M, 2), double.
  torch::Tensor displacement_at(const torch::Tensor& points) const {
    auto pts = points.to(torch::kDouble);
    const auto n = controls.size(0);
    auto diff = pts.unsqueeze(1) - controls.unsqueeze(0);  // (M, N, 2)
    auto r2 = diff.pow(2).sum(-1);                         // (M, N)
    auto u = torch::where(r2 > 0, 0.5 * r2 * torch::log(r2.clamp_min(1e-300)),
                          torch::zeros_like(r2));
    auto kernel_part = u.matmul(weights.narrow(0, 0, n));  // (M, 2)
    auto a0 = weights.select(0, n);
    auto ax = weights.select(0, n + 1);
    auto ay = weights.select(0, n + 2);
    return kernel_part + a0 + pts.select(1, 0).unsqueeze(1) * ax +
           pts.select(1, 1).unsqueeze(1) * ay;
  }
};

// Fit a TPS whose displacement equals `displacements` at `controls`.
inline TpsWarp fit_tps(const torch::Tensor& controls, const torch::Tensor& displacements) {
  check(controls.dim() == 2 && controls.size(1) == 2, "controls must be (N, 2)");
  check(displacements.sizes() == controls.sizes(), "displacements must match controls");
  auto c = controls.to(torch::kDouble);
  auto d = displacements.to(torch::kDouble);
  const auto n = c.size(0);
  check(n >= 3, "TPS needs at least 3 control points");

  auto diff = c.unsqueeze(1) - c.unsqueeze(0);
  auto r2 = diff.pow(2).sum(-1);
  auto k = torch::where(r2 > 0, 0.5 * r2 * torch::log(r2.clamp_min(1e-300)),
                        torch::zeros_like(r2));
  auto p = torch::cat({torch::ones({n, 1}, torch::kDouble), c}, 1);  // (N, 3)

  auto sys = torch::zeros({n + 3, n + 3}, torch::kDouble);
  sys.narrow(0, 0, n).narrow(1, 0, n).copy_(k);
  sys.narrow(0, 0, n).narrow(1, n, 3).copy_(p);
  sys.narrow(0, n, 3).narrow(1, 0, n).copy_(p.t());
  // tiny ridge keeps the system solvable for collinear control grids
  sys += 1e-9 * torch::eye(n + 3, torch::kDouble);

  auto rhs = torch::cat({d, torch::zeros({3, 2}, torch::kDouble)}, 0);
  auto w = torch::linalg_solve(sys, rhs);
  return TpsWarp{c, w};
}

// Dense displacement field of the spline over an (h, w) grid, shape (1, 2, H, W).
inline torch::Tensor tps_field(const TpsWarp& tps, int64_t h, int64_t w,
                               torch::ScalarType dtype = torch::kFloat) {
  auto ys = torch::arange(h, torch::kDouble);
  auto xs = torch::arange(w, torch::kDouble);
  auto grid = torch::meshgrid({ys, xs}, "ij");
  auto pts = torch::stack({grid[1].reshape(-1), grid[0].reshape(-1)}, 1);  // (HW, 2) x,y
  auto disp = tps.displacement_at(pts);                                    // (HW, 2)
  return disp.t().reshape({1, 2, h, w}).to(dtype);
}

}  // namespace sketchcorr::warpcore

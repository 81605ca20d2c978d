#include <catch2/catch_amalgamated.hpp>

#include <torch/torch.h>

#include "sketchcorr/data/augment.hpp"
#include "sketchcorr/warpcore/flow.hpp"
#include "sketchcorr/warpcore/tps.hpp"

using namespace sketchcorr;
namespace wc = sketchcorr::warpcore;

namespace {

torch::Tensor ramp_image(int64_t h, int64_t w) {
  auto xs = torch::arange(w, torch::kFloat).view({1, 1, 1, w}).expand({1, 1, h, w});
  return xs.contiguous();
}

torch::Tensor constant_flow(int64_t h, int64_t w, double dx, double dy,
                            torch::ScalarType dtype = torch::kFloat) {
  auto f = torch::empty({1, 2, h, w}, dtype);
  f.select(1, 0).fill_(dx);
  f.select(1, 1).fill_(dy);
  return f;
}

}  // namespace

TEST_CASE("identity warp reproduces the input exactly", "[warp]") {
  torch::manual_seed(7);
  auto img = torch::rand({2, 3, 17, 23});
  auto out = wc::warp(img, wc::identity_flow(17, 23));
  REQUIRE(torch::equal(out, img.expand({2, 3, 17, 23})));
}

TEST_CASE("warp is linear in the image argument", "[warp]") {
  torch::manual_seed(8);
  // dyadic values make every intermediate exactly representable, so the
  // algebraic identity holds bitwise
  auto i1 = torch::randint(0, 17, {1, 2, 12, 12}).to(torch::kFloat);
  auto i2 = torch::randint(0, 17, {1, 2, 12, 12}).to(torch::kFloat);
  auto f = (torch::randint(-8, 9, {1, 2, 12, 12}).to(torch::kFloat)) / 4.0f;
  const float a = 0.5f, b = 0.25f;
  auto lhs = wc::warp(a * i1 + b * i2, f);
  auto rhs = a * wc::warp(i1, f) + b * wc::warp(i2, f);
  REQUIRE(torch::equal(lhs, rhs));

  // general floats agree to rounding error
  auto r1 = torch::rand({1, 2, 12, 12});
  auto r2 = torch::rand({1, 2, 12, 12});
  auto rf = torch::rand({1, 2, 12, 12}) * 3.0 - 1.5;
  auto d = (wc::warp(0.3f * r1 + 0.6f * r2, rf) -
            (0.3f * wc::warp(r1, rf) + 0.6f * wc::warp(r2, rf)));
  REQUIRE(d.abs().max().item<float>() < 1e-6f);
}

TEST_CASE("bilinear sample at the cell center of a 2x2 image", "[warp]") {
  auto img = torch::tensor({{0.f, 1.f}, {2.f, 3.f}}).view({1, 1, 2, 2});
  // query grid point (0, 0) with offset (0.5, 0.5) lands on the cell center
  auto f = constant_flow(2, 2, 0.5, 0.5);
  auto out = wc::warp(img, f);
  REQUIRE(out[0][0][0][0].item<float>() == Catch::Approx(1.5).margin(1e-7));

  auto pt = wc::sample_at_points(img, torch::tensor({{0.5, 0.5}}));
  REQUIRE(pt[0][0][0].item<float>() == Catch::Approx(1.5).margin(1e-7));
}

TEST_CASE("constant offset shifts a ramp like an integer pixel shift", "[warp]") {
  auto img = ramp_image(16, 32);
  auto out = wc::warp(img, constant_flow(16, 32, -8.0, 0.0));
  // oracle: content moves 8 px to the right
  auto shifted = torch::roll(img, 8, 3);
  auto interior = out.narrow(3, 8, 24) - shifted.narrow(3, 8, 24);
  REQUIRE(interior.abs().max().item<float>() < 1e-6f);
}

TEST_CASE("out-of-bounds samples clamp to the border", "[warp]") {
  auto img = ramp_image(4, 4);
  auto out = wc::warp(img, constant_flow(4, 4, -10.0, 0.0));
  REQUIRE(torch::equal(out, torch::zeros_like(out)));
  auto out2 = wc::warp(img, constant_flow(4, 4, 10.0, 0.0));
  REQUIRE(torch::equal(out2, torch::full_like(out2, 3.0f)));
}

TEST_CASE("warp rejects non-finite fields", "[warp]") {
  auto img = torch::rand({1, 1, 4, 4});
  auto f = constant_flow(4, 4, 0.0, 0.0);
  f[0][0][1][1] = std::numeric_limits<float>::quiet_NaN();
  REQUIRE_THROWS_AS(wc::warp(img, f), Error);
}

TEST_CASE("composing with the identity returns the field exactly", "[flow]") {
  torch::manual_seed(9);
  auto f = torch::rand({1, 2, 9, 9}) * 4 - 2;
  auto id = wc::identity_flow(9, 9);
  REQUIRE(torch::equal(wc::compose_flow(f, id), f));
  // other order: identity composed through F leaves exactly F as the residual
  REQUIRE(torch::equal(wc::compose_flow(id, f), f));
}

TEST_CASE("flow upsampling rescales offsets to destination pixels", "[flow]") {
  auto f = constant_flow(4, 4, 1.25, -0.5);
  auto up = wc::upsample_flow(f, 16, 16);
  REQUIRE(up.sizes() == torch::IntArrayRef({1, 2, 16, 16}));
  REQUIRE(up.select(1, 0).min().item<float>() == Catch::Approx(5.0));
  REQUIRE(up.select(1, 0).max().item<float>() == Catch::Approx(5.0));
  REQUIRE(up.select(1, 1).mean().item<float>() == Catch::Approx(-2.0));
  // same-resolution call is a no-op
  REQUIRE(torch::equal(wc::upsample_flow(f, 4, 4), f));
}

TEST_CASE("warp gradients match central finite differences", "[warp][grad]") {
  torch::manual_seed(10);
  const int64_t n = 8;
  // offsets with fractional parts well inside (0, 1): away from both the
  // border clamp and the bilinear lattice kinks
  auto base_field = torch::rand({1, 2, n, n}, torch::kDouble) * 0.3 + 0.2;
  auto img = torch::rand({1, 1, n, n}, torch::kDouble);
  auto weights = torch::rand({1, 1, n, n}, torch::kDouble);

  auto field = base_field.clone().requires_grad_(true);
  auto image = img.clone().requires_grad_(true);
  auto loss = (wc::warp(image, field) * weights).sum();
  loss.backward();

  auto scalar_at = [&](const torch::Tensor& f, const torch::Tensor& im) {
    torch::NoGradGuard ng;
    return (wc::warp(im, f) * weights).sum().item<double>();
  };

  const double eps = 1e-6;
  double max_rel = 0.0;
  for (int64_t c = 0; c < 2; ++c) {
    for (int64_t y = 0; y < n; ++y) {
      for (int64_t x = 0; x < n; ++x) {
        auto fp = base_field.clone();
        fp[0][c][y][x] += eps;
        auto fm = base_field.clone();
        fm[0][c][y][x] -= eps;
        const double fd = (scalar_at(fp, img) - scalar_at(fm, img)) / (2 * eps);
        const double an = field.grad()[0][c][y][x].item<double>();
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  REQUIRE(max_rel < 1e-3);

  // image gradient: warp is linear in the image, so FD is exact up to roundoff
  auto ip = img.clone();
  ip[0][0][3][4] += eps;
  auto im2 = img.clone();
  im2[0][0][3][4] -= eps;
  const double fd_img = (scalar_at(base_field, ip) - scalar_at(base_field, im2)) / (2 * eps);
  REQUIRE(std::abs(fd_img - image.grad()[0][0][3][4].item<double>()) < 1e-6);
}

TEST_CASE("TPS with zero control displacements is the identity", "[tps]") {
  data::AugmentConfig cfg;
  Rng rng(3);
  std::vector<double> cs;
  const int g = 3, side = 64;
  for (int iy = 0; iy < g; ++iy)
    for (int ix = 0; ix < g; ++ix) {
      cs.push_back(ix * (side - 1.0) / (g - 1.0));
      cs.push_back(iy * (side - 1.0) / (g - 1.0));
    }
  auto controls = torch::tensor(cs, torch::kDouble).view({g * g, 2});
  auto tps = wc::fit_tps(controls, torch::zeros({g * g, 2}, torch::kDouble));
  auto field = wc::tps_field(tps, side, side);
  REQUIRE(field.abs().max().item<float>() < 1e-6f);
}

TEST_CASE("TPS interpolates its control displacements", "[tps]") {
  torch::manual_seed(11);
  auto controls = torch::rand({7, 2}, torch::kDouble) * 100;
  auto disp = torch::randn({7, 2}, torch::kDouble) * 5;
  auto tps = wc::fit_tps(controls, disp);
  auto at = tps.displacement_at(controls);
  REQUIRE((at - disp).abs().max().item<double>() < 1e-6);
}

TEST_CASE("identity augmentation config returns the inputs unchanged", "[augment]") {
  torch::manual_seed(12);
  auto photo = torch::rand({3, 32, 32});
  auto sketch = torch::rand({3, 32, 32});
  data::AugmentConfig cfg;
  cfg.jitter_prob = 0;
  cfg.grayscale_prob = 0;
  cfg.blur_prob = 0;
  cfg.rotate_deg = 0;
  cfg.scale_min = cfg.scale_max = 1.0;
  cfg.translate_frac = 0;
  cfg.tps_frac = 0;
  auto [vp, vs] = data::augment(photo, sketch, cfg, 99);
  REQUIRE(torch::equal(vp.image, photo));
  REQUIRE(torch::equal(vs.image, sketch));
  REQUIRE(vp.gt_flow.has_value());
  REQUIRE(vp.gt_flow->abs().max().item<float>() < 1e-6f);
  REQUIRE(vp.domain_tag == Domain::photo);
  REQUIRE(vs.domain_tag == Domain::sketch);
}

TEST_CASE("no spatial transform means no gt_flow", "[augment]") {
  auto img = torch::rand({3, 16, 16});
  data::AugmentConfig cfg;
  cfg.spatial = false;
  Rng rng(5);
  auto view = data::augment_one(img, Domain::sketch, cfg, rng);
  REQUIRE_FALSE(view.gt_flow.has_value());
}

TEST_CASE("pure forward translation yields a constant backward flow", "[augment]") {
  // content moved +8 px in x corresponds to sampling offsets of (-8, 0)
  data::AffineMap m;
  m.tx = -8.0;
  auto field = m.displacement_field(16, 32);
  REQUIRE(field.select(1, 0).min().item<float>() == Catch::Approx(-8.0));
  REQUIRE(field.select(1, 0).max().item<float>() == Catch::Approx(-8.0));
  REQUIRE(field.select(1, 1).abs().max().item<float>() == Catch::Approx(0.0));

  auto img = ramp_image(16, 32);
  auto warped = wc::warp(img, field);
  auto oracle = torch::roll(img, 8, 3);
  auto diff = (warped - oracle).narrow(3, 8, 24);
  REQUIRE(diff.abs().max().item<float>() < 1e-6f);
}

TEST_CASE("photometric transforms stay in [0,1] and are deterministic", "[augment]") {
  torch::manual_seed(13);
  auto photo = torch::rand({3, 24, 24});
  auto sketch = torch::rand({3, 24, 24});
  data::AugmentConfig cfg;  // defaults: all photometric branches active
  for (uint64_t seed = 0; seed < 12; ++seed) {
    auto [vp, vs] = data::augment(photo, sketch, cfg, seed);
    REQUIRE(vp.image.min().item<float>() >= 0.0f);
    REQUIRE(vp.image.max().item<float>() <= 1.0f);
    REQUIRE(vs.image.min().item<float>() >= 0.0f);
    REQUIRE(vs.image.max().item<float>() <= 1.0f);
    auto [vp2, vs2] = data::augment(photo, sketch, cfg, seed);
    REQUIRE(torch::equal(vp.image, vp2.image));
    REQUIRE(torch::equal(vs.image, vs2.image));
    REQUIRE(vp.gt_flow.has_value());
    REQUIRE(torch::equal(*vp.gt_flow, *vp2.gt_flow));
  }
}

TEST_CASE("gt_flow rewarps the untransformed image onto the augmented view", "[augment]") {
  torch::manual_seed(14);
  // smooth test image so interpolation error stays small
  auto img = data::detail::gaussian_blur(torch::rand({3, 64, 64}), 2.0);
  data::AugmentConfig cfg;
  cfg.jitter_prob = cfg.grayscale_prob = cfg.blur_prob = 0;  // isolate the spatial part
  for (uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(seed);
    auto view = data::augment_one(img, Domain::photo, cfg, rng);
    REQUIRE(view.gt_flow.has_value());
    auto rewarped = wc::warp(img.unsqueeze(0), *view.gt_flow).squeeze(0);
    auto err = (rewarped - view.image).abs();
    auto interior = err.narrow(1, 8, 48).narrow(2, 8, 48);
    REQUIRE(interior.mean().item<float>() < 2.0f / 255.0f);
  }
}

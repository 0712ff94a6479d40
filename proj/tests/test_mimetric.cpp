#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "test_util.hpp"
#include "vtalign/mimetric.hpp"

using namespace vtalign;
using Catch::Matchers::WithinAbs;

namespace {

MetricConfig small_cfg(int bins = 8) {
  MetricConfig cfg;
  cfg.bin_count = bins;
  return cfg;
}

TransformMatrix random_small_transform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-0.2, 0.2);
  std::uniform_real_distribution<double> scale(0.9, 1.1);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  TransformParams p;
  p.kind = TransformKind::Similarity;
  p.values = {angle(rng), scale(rng), shift(rng), shift(rng)};
  return to_matrix(p);
}

}  // namespace

TEST_CASE("joint histogram of a two-valued self pair matches hand computation") {
  // half 0, half 255; identity transform; 8 bins
  Raster img(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) img.at(x, y) = (x < 8) ? 0.0 : 255.0;
  const MetricConfig cfg = small_cfg(8);
  const IntensityStats sv = intensity_stats(img, 8);
  const IntensityStats st = sv;
  const Interpolator interp(img, InterpolationKind::CubicSpline);
  const JointHistogram jh =
      build_joint(img, interp, TransformMatrix::identity(), cfg, sv, st);

  double sum = 0.0;
  for (double v : jh.joint) sum += v;
  CHECK_THAT(sum, WithinAbs(1.0, 1e-9));

  // visual columns: only bins 0 and 7 carry mass, half each
  CHECK_THAT(jh.marginal_v[0], WithinAbs(0.5, 1e-9));
  CHECK_THAT(jh.marginal_v[7], WithinAbs(0.5, 1e-9));
  // thermal coordinate clamps to [1, 6]; the cubic window spreads each half
  // over <= 4 rows around those centers
  const auto oracle = testutil::oracle_build_joint(img, interp, TransformMatrix::identity(), 8,
                                                   sv, st);
  for (int t = 0; t < 8; ++t)
    for (int v = 0; v < 8; ++v) REQUIRE_THAT(jh.at(t, v), WithinAbs(oracle.at(t, v), 1e-12));
}

TEST_CASE("constant images concentrate mass in one visual column") {
  const Raster fixed(16, 16, 5.0);
  const Raster moving(16, 16, 9.0);
  const MetricConfig cfg = small_cfg(8);
  const IntensityStats sv = intensity_stats(fixed, 8);
  const IntensityStats st = intensity_stats(moving, 8);
  const Interpolator interp(moving, InterpolationKind::CubicSpline);
  const JointHistogram jh =
      build_joint(fixed, interp, TransformMatrix::identity(), cfg, sv, st);
  double sum = 0.0;
  for (double v : jh.joint) sum += v;
  CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  CHECK_THAT(jh.marginal_v[0], WithinAbs(1.0, 1e-12));
  for (int v = 1; v < 8; ++v) CHECK(jh.marginal_v[size_t(v)] == 0.0);
}

TEST_CASE("transform pushing the moving image away raises InsufficientOverlap") {
  const Raster fixed = testutil::structured_image(32, 32, 1);
  const Raster moving = testutil::structured_image(32, 32, 2);
  const Interpolator interp(moving, InterpolationKind::CubicSpline);
  const MetricConfig cfg = small_cfg(8);
  const IntensityStats sv = intensity_stats(fixed, 8);
  const IntensityStats st = intensity_stats(moving, 8);
  CHECK_THROWS_AS(
      build_joint(fixed, interp, TransformMatrix::translation(1000, 1000), cfg, sv, st),
      InsufficientOverlap);
}

TEST_CASE("marginals are row and column sums") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Raster fixed = testutil::random_image(12, 12, 100 + trial);
    const Raster moving = testutil::random_image(12, 12, 200 + trial);
    const Interpolator interp(moving, InterpolationKind::CubicSpline);
    const MetricConfig cfg = small_cfg(8);
    const IntensityStats sv = intensity_stats(fixed, 8);
    const IntensityStats st = intensity_stats(moving, 8);
    const JointHistogram jh =
        build_joint(fixed, interp, random_small_transform(rng), cfg, sv, st);

    for (int t = 0; t < 8; ++t) {
      double row = 0.0;
      for (int v = 0; v < 8; ++v) row += jh.at(t, v);
      REQUIRE_THAT(marginal_T(jh)[size_t(t)], WithinAbs(row, 1e-12));
    }
    for (int v = 0; v < 8; ++v) {
      double col = 0.0;
      for (int t = 0; t < 8; ++t) col += jh.at(t, v);
      REQUIRE_THAT(marginal_V(jh)[size_t(v)], WithinAbs(col, 1e-12));
    }
    for (double p : jh.joint) REQUIRE(p >= 0.0);
  }
}

TEST_CASE("single-cell joint yields an indicator thermal marginal") {
  JointHistogram jh;
  jh.bin_count = 8;
  jh.joint.assign(64, 0.0);
  jh.at(3, 5) = 1.0;
  jh.marginal_t.assign(8, 0.0);
  jh.marginal_v.assign(8, 0.0);
  jh.marginal_t[3] = 1.0;
  jh.marginal_v[5] = 1.0;
  const auto mt = marginal_T(jh);
  for (int t = 0; t < 8; ++t) CHECK(mt[size_t(t)] == (t == 3 ? 1.0 : 0.0));
  CHECK_THAT(mi_cost(jh), WithinAbs(0.0, 1e-12));
}

TEST_CASE("mi_cost of an independent joint is zero") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> pt(8), pv(8);
  double st = 0, sv = 0;
  for (int i = 0; i < 8; ++i) {
    st += pt[size_t(i)] = u(rng);
    sv += pv[size_t(i)] = u(rng);
  }
  JointHistogram jh;
  jh.bin_count = 8;
  jh.joint.resize(64);
  jh.marginal_t.resize(8);
  jh.marginal_v.resize(8);
  for (int t = 0; t < 8; ++t) {
    jh.marginal_t[size_t(t)] = pt[size_t(t)] / st;
    for (int v = 0; v < 8; ++v) jh.at(t, v) = (pt[size_t(t)] / st) * (pv[size_t(v)] / sv);
  }
  for (int v = 0; v < 8; ++v) jh.marginal_v[size_t(v)] = pv[size_t(v)] / sv;
  CHECK_THAT(mi_cost(jh), WithinAbs(0.0, 1e-12));
}

TEST_CASE("self registration at identity gives cost = -entropy of the smoothed marginal") {
  const Raster img = testutil::structured_image(32, 32, 3);
  const Interpolator interp(img, InterpolationKind::CubicSpline);
  const MetricConfig cfg = small_cfg(16);
  const IntensityStats s = intensity_stats(img, 16);
  const JointHistogram jh = build_joint(img, interp, TransformMatrix::identity(), cfg, s, s);
  // independent route: MI from the entropy decomposition of the same joint
  const double mi = testutil::oracle_mi_from_joint(jh.joint, jh.bin_count);
  CHECK_THAT(mi_cost(jh), WithinAbs(-mi, 1e-9));
}

TEST_CASE("brute-force equivalence on small images") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 25; ++trial) {
    const Raster fixed = testutil::random_image(16, 16, 300 + trial);
    const Raster moving = testutil::structured_image(16, 16, 400 + trial);
    const Interpolator interp(moving, InterpolationKind::CubicSpline);
    const MetricConfig cfg = small_cfg(8);
    const IntensityStats sv = intensity_stats(fixed, 8);
    const IntensityStats st = intensity_stats(moving, 8);
    const TransformMatrix m = random_small_transform(rng);
    const JointHistogram jh = build_joint(fixed, interp, m, cfg, sv, st);
    const auto oracle = testutil::oracle_build_joint(fixed, interp, m, 8, sv, st);
    REQUIRE(jh.contributing_samples == oracle.contributing);
    for (int t = 0; t < 8; ++t)
      for (int v = 0; v < 8; ++v) REQUIRE_THAT(jh.at(t, v), WithinAbs(oracle.at(t, v), 1e-12));
  }
}

TEST_CASE("MI bounds: nonnegative and below min marginal entropy") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    const Raster fixed = testutil::structured_image(20, 20, 500 + trial);
    const Raster moving = testutil::structured_image(20, 20, 600 + trial);
    const Interpolator interp(moving, InterpolationKind::CubicSpline);
    const MetricConfig cfg = small_cfg(12);
    const IntensityStats sv = intensity_stats(fixed, 12);
    const IntensityStats st = intensity_stats(moving, 12);
    const JointHistogram jh =
        build_joint(fixed, interp, random_small_transform(rng), cfg, sv, st);
    const double mi = -mi_cost(jh);
    REQUIRE(mi >= -1e-12);
    const double ht = testutil::marginal_entropy(jh.marginal_t);
    const double hv = testutil::marginal_entropy(jh.marginal_v);
    REQUIRE(mi <= std::min(ht, hv) + 1e-9);
  }
}

TEST_CASE("evaluate ranks identity above a misalignment for a self pair") {
  const Raster img = testutil::structured_image(64, 64, 9);
  const Interpolator interp(img, InterpolationKind::CubicSpline);
  MetricConfig cfg;
  cfg.bin_count = 32;
  const IntensityStats s = intensity_stats(img, 32);
  const double cx = 31.5, cy = 31.5;
  TransformParams ident = TransformParams::identity(TransformKind::Similarity);
  TransformParams shifted = ident;
  shifted.values[2] = 5.0;
  shifted.values[3] = 5.0;
  const double c0 = evaluate(img, interp, ident, cfg, s, s, cx, cy);
  const double c1 = evaluate(img, interp, shifted, cfg, s, s, cx, cy);
  CHECK(c0 < c1);
}

TEST_CASE("evaluate is deterministic under subsampling with a fixed seed") {
  const Raster fixed = testutil::structured_image(48, 48, 13);
  const Raster moving = testutil::structured_image(48, 48, 14);
  const Interpolator interp(moving, InterpolationKind::CubicSpline);
  MetricConfig cfg;
  cfg.bin_count = 16;
  cfg.sampling_fraction = 0.5;
  cfg.sample_seed = 99;
  const IntensityStats sv = intensity_stats(fixed, 16);
  const IntensityStats st = intensity_stats(moving, 16);
  const TransformParams p = TransformParams::identity(TransformKind::Similarity);
  const double a = evaluate(fixed, interp, p, cfg, sv, st, 23.5, 23.5);
  const double b = evaluate(fixed, interp, p, cfg, sv, st, 23.5, 23.5);
  CHECK(a == b);
}

TEST_CASE("constant fixed image carries no information") {
  const Raster fixed(32, 32, 7.0);
  const Raster moving = testutil::structured_image(32, 32, 15);
  const Interpolator interp(moving, InterpolationKind::CubicSpline);
  MetricConfig cfg;
  cfg.bin_count = 16;
  const IntensityStats sv = intensity_stats(fixed, 16);
  const IntensityStats st = intensity_stats(moving, 16);
  const double c = evaluate(fixed, interp, TransformParams::identity(TransformKind::Similarity),
                            cfg, sv, st, 15.5, 15.5);
  CHECK_THAT(c, WithinAbs(0.0, 1e-12));
}

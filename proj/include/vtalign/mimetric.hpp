#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "vtalign/geometry.hpp"
#include "vtalign/raster.hpp"
#include "vtalign/resample.hpp"

namespace vtalign {

struct MetricConfig {
  int bin_count = 50;
  double sampling_fraction = 1.0;  // 1.0 = every pixel
  std::uint64_t sample_seed = 0;
  double min_valid_fraction = 0.25;

  void validate() const {
    if (bin_count < 8) throw std::invalid_argument("MetricConfig: binCount must be >= 8");
    if (!(sampling_fraction > 0.0 && sampling_fraction <= 1.0))
      throw std::invalid_argument("MetricConfig: samplingFraction must be in (0,1]");
    if (!(min_valid_fraction > 0.0 && min_valid_fraction <= 1.0))
      throw std::invalid_argument("MetricConfig: minValidFraction must be in (0,1]");
  }
};

// Parzen-smoothed joint distribution. Index [thermal][visual].
struct JointHistogram {
  int bin_count = 0;
  std::vector<double> joint;       // bin_count x bin_count, row = thermal bin
  std::vector<double> marginal_t;  // row sums
  std::vector<double> marginal_v;  // column sums
  std::uint64_t contributing_samples = 0;

  double at(int t, int v) const { return joint[static_cast<size_t>(t) * bin_count + v]; }
  double& at(int t, int v) { return joint[static_cast<size_t>(t) * bin_count + v]; }
};

struct InsufficientOverlap : std::runtime_error {
  InsufficientOverlap()
      : std::runtime_error("insufficient overlap: too few samples map inside the moving image") {}
};

namespace detail {

// Visual axis uses the box window: single bin per sample.
inline int beta0_bin(double u, int bins) {
  if (u < 0.0) u = 0.0;
  if (u > bins - 1.0) u = bins - 1.0;
  int k = static_cast<int>(std::ceil(u - 0.5));
  if (k < 0) k = 0;
  if (k > bins - 1) k = bins - 1;
  return k;
}

// Thermal axis uses the cubic window; clamp the continuous coordinate so
// every nonzero tap lands in [0, bins-1].
inline double beta3_coord(double v, int bins) {
  if (v < 1.0) return 1.0;
  if (v > bins - 2.0) return bins - 2.0;
  return v;
}

}  // namespace detail

inline JointHistogram build_joint(const Raster& fixed, const Interpolator& moving,
                                  const TransformMatrix& m, const MetricConfig& cfg,
                                  const IntensityStats& stats_v, const IntensityStats& stats_t) {
  cfg.validate();
  const int bins = cfg.bin_count;
  JointHistogram jh;
  jh.bin_count = bins;
  jh.joint.assign(static_cast<size_t>(bins) * bins, 0.0);

  std::mt19937_64 rng(cfg.sample_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool subsample = cfg.sampling_fraction < 1.0;

  std::uint64_t selected = 0;
  double total_weight = 0.0;
  for (int y = 0; y < fixed.height; ++y) {
    for (int x = 0; x < fixed.width; ++x) {
      if (subsample && unit(rng) >= cfg.sampling_fraction) continue;
      ++selected;
      const Point p = apply(m, {double(x), double(y)});
      const auto ft = moving(p.x, p.y);
      if (!ft) continue;  // out-of-bounds samples contribute nothing
      ++jh.contributing_samples;

      const double u = (fixed.at(x, y) - stats_v.min) / stats_v.bin_width;
      const double v = detail::beta3_coord((*ft - stats_t.min) / stats_t.bin_width, bins);
      const int kappa = detail::beta0_bin(u, bins);
      const int base = static_cast<int>(std::floor(v));
      for (int iota = base - 1; iota <= base + 2; ++iota) {
        if (iota < 0 || iota >= bins) continue;
        const double w = beta3(iota - v);
        if (w == 0.0) continue;
        jh.at(iota, kappa) += w;
        total_weight += w;
      }
    }
  }

  if (selected == 0 ||
      double(jh.contributing_samples) / double(selected) < cfg.min_valid_fraction)
    throw InsufficientOverlap();

  const double a = 1.0 / total_weight;
  for (double& c : jh.joint) c *= a;

  jh.marginal_t.assign(static_cast<size_t>(bins), 0.0);
  jh.marginal_v.assign(static_cast<size_t>(bins), 0.0);
  for (int t = 0; t < bins; ++t)
    for (int v = 0; v < bins; ++v) {
      jh.marginal_t[static_cast<size_t>(t)] += jh.at(t, v);
      jh.marginal_v[static_cast<size_t>(v)] += jh.at(t, v);
    }
  return jh;
}

inline std::vector<double> marginal_T(const JointHistogram& j) { return j.marginal_t; }
inline std::vector<double> marginal_V(const JointHistogram& j) { return j.marginal_v; }

// Negative mutual information in nats; lower is better.
inline double mi_cost(const JointHistogram& j) {
  double mi = 0.0;
  for (int t = 0; t < j.bin_count; ++t) {
    const double pt = j.marginal_t[static_cast<size_t>(t)];
    if (pt == 0.0) continue;
    for (int v = 0; v < j.bin_count; ++v) {
      const double p = j.at(t, v);
      const double pv = j.marginal_v[static_cast<size_t>(v)];
      if (p == 0.0 || pv == 0.0) continue;
      mi += p * std::log(p / (pt * pv));
    }
  }
  return -mi;
}

// Full metric evaluation for a candidate transform about the given center.
inline double evaluate(const Raster& fixed, const Interpolator& moving,
                       const TransformParams& params, const MetricConfig& cfg,
                       const IntensityStats& stats_v, const IntensityStats& stats_t,
                       double center_x, double center_y) {
  const TransformMatrix m = to_matrix_centered(params, center_x, center_y);
  return mi_cost(build_joint(fixed, moving, m, cfg, stats_v, stats_t));
}

}  // namespace vtalign

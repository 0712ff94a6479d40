#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "vtalign/geometry.hpp"
#include "vtalign/image_io.hpp"
#include "vtalign/raster.hpp"
#include "vtalign/resample.hpp"

namespace vtalign {

struct SizeMismatch : std::runtime_error {
  SizeMismatch() : std::runtime_error("images must have identical dimensions") {}
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // row-major, 3 bytes per pixel
};

namespace detail {

// per-image min/max rescale to [0,255]; constant images map to 0
inline Raster rescale_255(const Raster& r) {
  double lo = r.data[0], hi = r.data[0];
  for (double v : r.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Raster out(r.width, r.height);
  const double span = hi - lo;
  for (size_t i = 0; i < r.pixel_count(); ++i)
    out.data[i] = span > 0.0 ? 255.0 * (r.data[i] - lo) / span : 0.0;
  return out;
}

}  // namespace detail

inline RgbImage overlay_redcyan(const Raster& fixed, const Raster& aligned_moving) {
  if (fixed.width != aligned_moving.width || fixed.height != aligned_moving.height)
    throw SizeMismatch();
  const Raster rf = detail::rescale_255(fixed);
  const Raster rm = detail::rescale_255(aligned_moving);
  RgbImage out{fixed.width, fixed.height,
               std::vector<unsigned char>(static_cast<size_t>(fixed.width) * fixed.height * 3)};
  for (size_t i = 0; i < rf.pixel_count(); ++i) {
    out.rgb[3 * i] = detail::clamp_u8(rf.data[i]);
    out.rgb[3 * i + 1] = out.rgb[3 * i + 2] = detail::clamp_u8(rm.data[i]);
  }
  return out;
}

inline Raster overlay_difference(const Raster& fixed, const Raster& aligned_moving) {
  if (fixed.width != aligned_moving.width || fixed.height != aligned_moving.height)
    throw SizeMismatch();
  const Raster rf = detail::rescale_255(fixed);
  const Raster rm = detail::rescale_255(aligned_moving);
  Raster out(fixed.width, fixed.height);
  for (size_t i = 0; i < rf.pixel_count(); ++i) out.data[i] = std::abs(rf.data[i] - rm.data[i]);
  return out;
}

inline Raster overlay_checkerboard(const Raster& fixed, const Raster& aligned_moving, int tile) {
  if (fixed.width != aligned_moving.width || fixed.height != aligned_moving.height)
    throw SizeMismatch();
  if (tile < 4) throw std::invalid_argument("overlay_checkerboard: tile must be >= 4");
  Raster out(fixed.width, fixed.height);
  for (int y = 0; y < fixed.height; ++y)
    for (int x = 0; x < fixed.width; ++x)
      out.at(x, y) = ((x / tile + y / tile) % 2 == 0) ? fixed.at(x, y) : aligned_moving.at(x, y);
  return out;
}

struct Corner {
  int x = 0;
  int y = 0;
  double score = 0.0;  // max threshold at which the segment test still passes
};

namespace detail {

// Bresenham circle of radius 3, clockwise from 12 o'clock.
inline constexpr int kFastRing[16][2] = {
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},   {2, 2},   {1, 3},
    {0, 3},  {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};

// Longest contiguous brighter-or-darker run on the ring (capped at 16);
// the segment test passes when this reaches n.
inline int segment_arc(const Raster& r, int x, int y, double threshold) {
  const double c = r.at(x, y);
  int flags[16];  // +1 brighter, -1 darker, 0 neither
  for (int i = 0; i < 16; ++i) {
    const double v = r.at(x + kFastRing[i][0], y + kFastRing[i][1]);
    flags[i] = v > c + threshold ? 1 : (v < c - threshold ? -1 : 0);
  }
  int best = 0;
  for (int sign : {1, -1}) {
    int cur = 0;
    for (int i = 0; i < 32; ++i) {  // wrap around the ring
      if (flags[i % 16] == sign) {
        best = std::max(best, std::min(++cur, 16));
      } else {
        cur = 0;
      }
    }
  }
  return best;
}

inline bool segment_test(const Raster& r, int x, int y, double threshold, int n) {
  return segment_arc(r, x, y, threshold) >= n;
}

inline double fast_score(const Raster& r, int x, int y, double threshold, int n) {
  // binary search for the largest passing threshold (intensities are
  // real-valued, so bisect to a fixed precision)
  double lo = threshold, hi = 65536.0;
  if (!segment_test(r, x, y, lo, n)) return 0.0;
  for (int it = 0; it < 48 && hi - lo > 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (segment_test(r, x, y, mid, n))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

// FAST-N segment-test detector with 3x3 non-maximum suppression on score.
inline std::vector<Corner> fast_detect(const Raster& r, double threshold, int n = 9) {
  if (threshold <= 0.0) throw std::invalid_argument("fast_detect: threshold must be > 0");
  if (r.width < 7 || r.height < 7) throw std::invalid_argument("fast_detect: image must be >= 7x7");

  Raster score(r.width, r.height, 0.0);
  Raster arc(r.width, r.height, 0.0);
  for (int y = 3; y < r.height - 3; ++y)
    for (int x = 3; x < r.width - 3; ++x) {
      const int a = detail::segment_arc(r, x, y, threshold);
      if (a >= n) {
        score.at(x, y) = detail::fast_score(r, x, y, threshold, n);
        arc.at(x, y) = a;
      }
    }

  // NMS key: score, then arc length, then raster order; the arc tiebreak
  // keeps the geometric corner when flat regions saturate the score.
  auto key_less = [&](int ax, int ay, int bx, int by) {
    if (score.at(ax, ay) != score.at(bx, by)) return score.at(ax, ay) < score.at(bx, by);
    if (arc.at(ax, ay) != arc.at(bx, by)) return arc.at(ax, ay) < arc.at(bx, by);
    return ay > by || (ay == by && ax > bx);
  };

  std::vector<Corner> corners;
  for (int y = 3; y < r.height - 3; ++y)
    for (int x = 3; x < r.width - 3; ++x) {
      if (score.at(x, y) <= 0.0) continue;
      bool maximal = true;
      for (int dy = -1; dy <= 1 && maximal; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 3 || ny < 3 || nx >= r.width - 3 || ny >= r.height - 3) continue;
          if (score.at(nx, ny) > 0.0 && key_less(x, y, nx, ny)) {
            maximal = false;
            break;
          }
        }
      if (maximal) corners.push_back({x, y, score.at(x, y)});
    }
  return corners;
}

struct PatchPair {
  Raster visual_patch;   // 32x32
  Raster thermal_patch;  // 32x32
  Point visual_center;
  Point thermal_center;
};

struct NotEnoughCorners : std::runtime_error {
  NotEnoughCorners() : std::runtime_error("fewer usable corner patch pairs than requested") {}
};

constexpr int kPatchSize = 32;

inline std::vector<PatchPair> extract_patch_pairs(const Raster& visual, const Raster& thermal,
                                                  const TransformMatrix& m,
                                                  std::vector<Corner> corners, int k,
                                                  std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("extract_patch_pairs: k must be >= 1");
  std::mt19937_64 rng(seed);
  std::shuffle(corners.begin(), corners.end(), rng);

  const double half = kPatchSize / 2.0;
  const Interpolator thermal_interp(thermal, InterpolationKind::CubicSpline);
  std::vector<PatchPair> pairs;
  for (const Corner& c : corners) {
    if (static_cast<int>(pairs.size()) == k) break;
    const int vx0 = c.x - kPatchSize / 2, vy0 = c.y - kPatchSize / 2;
    if (vx0 < 0 || vy0 < 0 || vx0 + kPatchSize > visual.width || vy0 + kPatchSize > visual.height)
      continue;
    const Point tc = apply(m, {double(c.x), double(c.y)});
    if (tc.x - half < 0 || tc.y - half < 0 || tc.x + half > thermal.width - 1 ||
        tc.y + half > thermal.height - 1)
      continue;

    PatchPair pp;
    pp.visual_center = {double(c.x), double(c.y)};
    pp.thermal_center = tc;
    pp.visual_patch = Raster(kPatchSize, kPatchSize);
    pp.thermal_patch = Raster(kPatchSize, kPatchSize);
    for (int y = 0; y < kPatchSize; ++y)
      for (int x = 0; x < kPatchSize; ++x) {
        pp.visual_patch.at(x, y) = visual.at(vx0 + x, vy0 + y);
        const auto v = thermal_interp(tc.x + (x - kPatchSize / 2), tc.y + (y - kPatchSize / 2));
        pp.thermal_patch.at(x, y) = v.value_or(0.0);
      }
    pairs.push_back(std::move(pp));
  }
  if (static_cast<int>(pairs.size()) < k) throw NotEnoughCorners();
  return pairs;
}

struct SynthPair {
  Raster visual;
  Raster pseudo_thermal;
  TransformParams truth;
};

namespace detail {

inline Raster gaussian_blur(const Raster& r, double sigma) {
  if (sigma <= 0.0) return r;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i)
    sum += kernel[static_cast<size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& k : kernel) k /= sum;

  Raster tmp(r.width, r.height), out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<size_t>(i + radius)] *
               r.at(std::clamp(x + i, 0, r.width - 1), y);
      tmp.at(x, y) = acc;
    }
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<size_t>(i + radius)] *
               tmp.at(x, std::clamp(y + i, 0, r.height - 1));
      out.at(x, y) = acc;
    }
  return out;
}

inline double box_muller(std::mt19937_64& rng) {
  const double u1 = (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  const double u2 = double(rng() >> 11) * (1.0 / 9007199254740992.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

// Ground-truth benchmark pair: the pseudo-thermal frame is the source seen
// through the *inverse* of the truth transform, so that registering
// visual -> pseudo-thermal recovers exactly `true_params`. The transform is
// realized about the image center, matching the registration pipeline.
inline SynthPair synth_pair(const Raster& source, const TransformParams& true_params, double gamma,
                            double noise_sigma, double blur_sigma, std::uint64_t seed) {
  if (source.width < 64 || source.height < 64)
    throw TooSmall("synth_pair: source must be at least 64x64");

  const double cx = (source.width - 1) / 2.0, cy = (source.height - 1) / 2.0;
  const TransformMatrix fwd = to_matrix_centered(true_params, cx, cy);
  WarpResult warped = warp(source, invert(fwd), source.width, source.height);

  Raster pt = std::move(warped.image);
  if (gamma != 1.0)
    for (double& v : pt.data) v = 255.0 * std::pow(std::clamp(v, 0.0, 255.0) / 255.0, gamma);
  pt = detail::gaussian_blur(pt, blur_sigma);
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    for (double& v : pt.data) v += noise_sigma * detail::box_muller(rng);
  }
  return {source, std::move(pt), true_params};
}

}  // namespace vtalign

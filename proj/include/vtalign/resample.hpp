#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vtalign/geometry.hpp"
#include "vtalign/raster.hpp"

namespace vtalign {

enum class InterpolationKind { NearestNeighbor, Linear, CubicSpline };

// Zero-order spline Parzen window, support [-0.5, 0.5).
inline double beta0(double x) { return (x >= -0.5 && x < 0.5) ? 1.0 : 0.0; }

// Centered cubic B-spline Parzen window, support (-2, 2).
inline double beta3(double x) {
  const double ax = std::abs(x);
  if (ax < 1.0) return 2.0 / 3.0 - ax * ax + ax * ax * ax / 2.0;
  if (ax < 2.0) {
    const double t = 2.0 - ax;
    return t * t * t / 6.0;
  }
  return 0.0;
}

struct SplineCoefficients {
  int width = 0;
  int height = 0;
  std::vector<double> coeffs;

  double at(int x, int y) const { return coeffs[static_cast<size_t>(y) * width + x]; }
};

struct TooSmall : std::runtime_error {
  explicit TooSmall(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

// Mirror (whole-sample symmetric) index into [0, n-1].
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

// In-place cubic B-spline prefilter of one line, pole z1 = sqrt(3) - 2,
// mirror boundaries (Unser's recursive causal/anticausal scheme).
inline void prefilter_line(double* c, size_t n, size_t stride) {
  constexpr double z1 = -0.26794919243112270647;  // sqrt(3) - 2
  const double lambda = (1.0 - z1) * (1.0 - 1.0 / z1);
  for (size_t i = 0; i < n; ++i) c[i * stride] *= lambda;

  // causal init: exact closed-form sum over the mirrored period
  {
    double zk = z1;
    const double iz = 1.0 / z1;
    double z2k = std::pow(z1, static_cast<double>(n) - 1.0);
    double sum = c[0] + z2k * c[(n - 1) * stride];
    z2k = z2k * z2k * iz;
    for (size_t k = 1; k + 1 < n; ++k) {
      sum += (zk + z2k) * c[k * stride];
      zk *= z1;
      z2k *= iz;
    }
    c[0] = sum / (1.0 - zk * zk);
  }
  for (size_t i = 1; i < n; ++i) c[i * stride] += z1 * c[(i - 1) * stride];

  // anticausal init for mirror boundary
  c[(n - 1) * stride] = (z1 / (z1 * z1 - 1.0)) * (z1 * c[(n - 2) * stride] + c[(n - 1) * stride]);
  for (size_t i = n - 1; i-- > 0;) c[i * stride] = z1 * (c[(i + 1) * stride] - c[i * stride]);
}

}  // namespace detail

inline SplineCoefficients prefilter(const Raster& r) {
  if (r.width < 4 || r.height < 4)
    throw TooSmall("prefilter: image must be at least 4x4");
  SplineCoefficients sc;
  sc.width = r.width;
  sc.height = r.height;
  sc.coeffs = r.data;
  for (int y = 0; y < r.height; ++y)
    detail::prefilter_line(sc.coeffs.data() + static_cast<size_t>(y) * r.width,
                           static_cast<size_t>(r.width), 1);
  for (int x = 0; x < r.width; ++x)
    detail::prefilter_line(sc.coeffs.data() + x, static_cast<size_t>(r.height),
                           static_cast<size_t>(r.width));
  return sc;
}

inline bool in_bounds(double x, double y, int w, int h) {
  return x >= 0.0 && y >= 0.0 && x <= w - 1.0 && y <= h - 1.0;
}

// Cubic spline value at (x, y); caller must have checked bounds.
inline double interpolate_cubic(const SplineCoefficients& sc, double x, double y) {
  const int ix = static_cast<int>(std::floor(x));
  const int iy = static_cast<int>(std::floor(y));
  double out = 0.0;
  for (int dy = -1; dy <= 2; ++dy) {
    const double wy = beta3(y - (iy + dy));
    if (wy == 0.0) continue;
    const int yy = detail::mirror_index(iy + dy, sc.height);
    double row = 0.0;
    for (int dx = -1; dx <= 2; ++dx) {
      const double wx = beta3(x - (ix + dx));
      if (wx == 0.0) continue;
      row += wx * sc.at(detail::mirror_index(ix + dx, sc.width), yy);
    }
    out += wy * row;
  }
  return out;
}

// Sampler pairing the raw raster (nearest/linear) with its spline
// coefficients (cubic). OutOfBounds is the nullopt value, not an error.
class Interpolator {
 public:
  Interpolator(const Raster& source, InterpolationKind kind)
      : source_(source), kind_(kind) {
    if (kind == InterpolationKind::CubicSpline) coeffs_ = prefilter(source);
  }

  std::optional<double> operator()(double x, double y) const {
    if (!in_bounds(x, y, source_.width, source_.height)) return std::nullopt;
    switch (kind_) {
      case InterpolationKind::NearestNeighbor: {
        const int ix = static_cast<int>(std::floor(x + 0.5));
        const int iy = static_cast<int>(std::floor(y + 0.5));
        return source_.at(std::min(ix, source_.width - 1), std::min(iy, source_.height - 1));
      }
      case InterpolationKind::Linear: {
        const int x0 = std::min(static_cast<int>(std::floor(x)), source_.width - 2);
        const int y0 = std::min(static_cast<int>(std::floor(y)), source_.height - 2);
        const double fx = x - x0, fy = y - y0;
        return (1 - fx) * (1 - fy) * source_.at(x0, y0) + fx * (1 - fy) * source_.at(x0 + 1, y0) +
               (1 - fx) * fy * source_.at(x0, y0 + 1) + fx * fy * source_.at(x0 + 1, y0 + 1);
      }
      case InterpolationKind::CubicSpline:
        return interpolate_cubic(coeffs_, x, y);
    }
    return std::nullopt;
  }

  const SplineCoefficients& coefficients() const { return coeffs_; }

 private:
  const Raster& source_;
  InterpolationKind kind_;
  SplineCoefficients coeffs_;
};

struct WarpResult {
  Raster image;
  std::vector<bool> valid;  // row-major, same shape as image
};

// Inverse-mapped warp: output (x,y) samples the source at apply(m, (x,y)).
inline WarpResult warp(const Raster& source, const TransformMatrix& m, int out_w, int out_h,
                       InterpolationKind kind = InterpolationKind::CubicSpline) {
  Interpolator interp(source, kind);
  WarpResult res{Raster(out_w, out_h, 0.0),
                 std::vector<bool>(static_cast<size_t>(out_w) * out_h, false)};
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Point p = apply(m, {double(x), double(y)});
      if (auto v = interp(p.x, p.y)) {
        res.image.at(x, y) = *v;
        res.valid[static_cast<size_t>(y) * out_w + x] = true;
      }
    }
  }
  return res;
}

}  // namespace vtalign

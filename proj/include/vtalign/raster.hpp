#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vtalign {

// Single-channel floating-point image, row-major.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Raster() = default;
  Raster(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Raster dimensions must be positive");
  }

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t pixel_count() const { return data.size(); }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct IntensityStats {
  double min = 0.0;
  double max = 0.0;
  double bin_width = 1.0;
};

struct Histogram {
  int bin_count = 0;
  std::vector<std::uint64_t> counts;
  IntensityStats range;
};

inline IntensityStats intensity_stats(const Raster& r, int bin_count) {
  if (bin_count < 2) throw std::invalid_argument("intensity_stats: binCount must be >= 2");
  IntensityStats s;
  s.min = r.data[0];
  s.max = r.data[0];
  for (double v : r.data) {
    if (v < s.min) s.min = v;
    if (v > s.max) s.max = v;
  }
  // Constant image: binWidth 1 by convention so downstream bin math stays finite.
  s.bin_width = (s.max > s.min) ? (s.max - s.min) / bin_count : 1.0;
  return s;
}

inline Histogram histogram(const Raster& r, int bin_count) {
  if (bin_count < 2) throw std::invalid_argument("histogram: binCount must be >= 2");
  Histogram h;
  h.bin_count = bin_count;
  h.range = intensity_stats(r, bin_count);
  h.counts.assign(static_cast<size_t>(bin_count), 0);
  for (double v : r.data) {
    int idx = static_cast<int>(std::floor((v - h.range.min) / h.range.bin_width));
    if (idx < 0) idx = 0;
    if (idx >= bin_count) idx = bin_count - 1;
    ++h.counts[static_cast<size_t>(idx)];
  }
  return h;
}

}  // namespace vtalign

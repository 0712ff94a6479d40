#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vtalign/evo.hpp"
#include "vtalign/geometry.hpp"
#include "vtalign/image_io.hpp"
#include "vtalign/mimetric.hpp"
#include "vtalign/raster.hpp"
#include "vtalign/resample.hpp"
#include "vtalign/version.hpp"

namespace vtalign {

struct RegistrationConfig {
  TransformKind kind = TransformKind::Similarity;
  MetricConfig metric;
  EvoConfig evo;
  int pyramid_levels = 0;  // 0 = full resolution only
  TransformParams initial = TransformParams::identity(TransformKind::Similarity);

  void validate() const {
    if (pyramid_levels < 0 || pyramid_levels > 4)
      throw std::invalid_argument("RegistrationConfig: pyramidLevels must be in [0,4]");
    if (initial.kind != kind)
      throw std::invalid_argument("RegistrationConfig: initial params kind mismatch");
    if (!initial.valid()) throw std::invalid_argument("RegistrationConfig: invalid initial params");
  }
};

struct LevelTrace {
  int level = 0;  // 0 = finest
  std::vector<TracePoint> trace;
};

struct RegistrationResult {
  TransformParams params;
  TransformMatrix matrix;  // centered realization mapping visual -> thermal pixels
  double final_cost = 0.0;
  StopReason stop_reason = StopReason::MaxIterations;
  int iterations = 0;
  std::vector<LevelTrace> per_level_traces;
  bool degenerate = false;
};

struct ImageTooSmall : std::runtime_error {
  explicit ImageTooSmall(const std::string& msg) : std::runtime_error(msg) {}
};

inline Raster pyramid_downsample(const Raster& r) {
  if (r.width < 8 || r.height < 8)
    throw TooSmall("pyramid_downsample: image must be at least 8x8");
  Raster out(r.width / 2, r.height / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(x, y) = 0.25 * (r.at(2 * x, 2 * y) + r.at(2 * x + 1, 2 * y) +
                             r.at(2 * x, 2 * y + 1) + r.at(2 * x + 1, 2 * y + 1));
  return out;
}

namespace detail {

inline bool is_constant(const Raster& r) {
  for (double v : r.data)
    if (v != r.data[0]) return false;
  return true;
}

// Parameter vector layout matches TransformParams::values. Translation
// entries get a mutation scale of max(W,H) so one radius unit moves every
// parameter by a comparable image-space amount.
inline std::vector<double> default_scales(TransformKind kind, int w, int h) {
  const double t = double(std::max(w, h));
  if (kind == TransformKind::Similarity) return {1.0, 1.0, t, t};
  return {1.0, 1.0, 1.0, 1.0, 1.0, t, t};
}

inline void scale_translation(TransformParams& p, double factor) {
  const size_t off = p.kind == TransformKind::Similarity ? 2 : 5;
  p.values[off] *= factor;
  p.values[off + 1] *= factor;
}

}  // namespace detail

inline RegistrationResult register_pair(const Raster& fixed, const Raster& moving,
                                        const RegistrationConfig& cfg) {
  cfg.validate();
  if (fixed.width < 32 || fixed.height < 32 || moving.width < 32 || moving.height < 32)
    throw ImageTooSmall("register: both images must be at least 32x32");

  RegistrationResult res;
  if (detail::is_constant(fixed) || detail::is_constant(moving)) {
    res.params = TransformParams::identity(cfg.kind);
    res.matrix = to_matrix(res.params);
    res.final_cost = 0.0;
    res.degenerate = true;
    return res;
  }

  std::vector<Raster> fixed_pyr{fixed}, moving_pyr{moving};
  for (int l = 0; l < cfg.pyramid_levels; ++l) {
    fixed_pyr.push_back(pyramid_downsample(fixed_pyr.back()));
    moving_pyr.push_back(pyramid_downsample(moving_pyr.back()));
  }

  TransformParams params = cfg.initial;
  detail::scale_translation(params, std::pow(0.5, cfg.pyramid_levels));

  double final_cost = 0.0;
  StopReason reason = StopReason::MaxIterations;
  for (int level = cfg.pyramid_levels; level >= 0; --level) {
    const Raster& f = fixed_pyr[static_cast<size_t>(level)];
    const Raster& mv = moving_pyr[static_cast<size_t>(level)];
    const IntensityStats stats_v = intensity_stats(f, cfg.metric.bin_count);
    const IntensityStats stats_t = intensity_stats(mv, cfg.metric.bin_count);
    const Interpolator interp(mv, InterpolationKind::CubicSpline);
    const double cx = (f.width - 1) / 2.0, cy = (f.height - 1) / 2.0;

    EvoConfig evo = cfg.evo;
    if (evo.scales.empty()) evo.scales = detail::default_scales(cfg.kind, f.width, f.height);

    const TransformKind kind = cfg.kind;
    auto cost = [&, cx, cy](const std::vector<double>& v) {
      TransformParams p{kind, v};
      if (!p.valid()) return std::numeric_limits<double>::infinity();
      return evaluate(f, interp, p, cfg.metric, stats_v, stats_t, cx, cy);
    };

    EvoResult er = run(params.values, cost, evo);
    params.values = er.best;
    final_cost = er.best_cost;
    reason = er.reason;
    res.iterations += static_cast<int>(er.trace.size());
    res.per_level_traces.push_back({level, std::move(er.trace)});
    if (level > 0) detail::scale_translation(params, 2.0);
  }

  res.params = params;
  res.matrix = to_matrix_centered(params, (fixed.width - 1) / 2.0, (fixed.height - 1) / 2.0);
  res.final_cost = final_cost;
  res.stop_reason = reason;
  return res;
}

struct PairManifest {
  std::string visual_path;
  std::string thermal_path;
  RegistrationResult result;
  std::string error;  // nonempty if this pair failed
};

inline nlohmann::json manifest_json(const PairManifest& pm, bool with_timestamp) {
  nlohmann::json j{{"visual", pm.visual_path},
                   {"thermal", pm.thermal_path},
                   {"transform", to_json(pm.result.params, pm.result.matrix)},
                   {"cost", pm.result.final_cost},
                   {"iterations", pm.result.iterations},
                   {"stop", to_string(pm.result.stop_reason)},
                   {"degenerate", pm.result.degenerate},
                   {"version", kVersion}};
  if (!pm.error.empty()) j["error"] = pm.error;
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = buf;
  }
  return j;
}

namespace detail {

// tmp + rename so a concurrent reader never sees a half-written manifest
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

struct NoPairsFound : std::runtime_error {
  explicit NoPairsFound(const std::string& dir)
      : std::runtime_error("no visual/thermal pairs found under " + dir) {}
};

struct BatchOptions {
  std::string visual_subdir = "visual";
  std::string thermal_subdir = "thermal";
  std::string out_dir;
  int jobs = 0;  // 0 = hardware concurrency
  bool with_timestamp = true;
};

struct BatchSummary {
  std::vector<PairManifest> pairs;
  std::vector<std::string> unpaired;
};

inline BatchSummary batch(const std::string& root_dir, const RegistrationConfig& cfg,
                          const BatchOptions& opt) {
  namespace fs = std::filesystem;
  const fs::path vdir = fs::path(root_dir) / opt.visual_subdir;
  const fs::path tdir = fs::path(root_dir) / opt.thermal_subdir;
  if (!fs::is_directory(vdir) || !fs::is_directory(tdir))
    throw NoPairsFound(root_dir);

  std::map<std::string, fs::path> visual, thermal;
  for (const auto& e : fs::directory_iterator(vdir))
    if (e.is_regular_file()) visual[e.path().stem().string()] = e.path();
  for (const auto& e : fs::directory_iterator(tdir))
    if (e.is_regular_file()) thermal[e.path().stem().string()] = e.path();

  BatchSummary summary;
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> work;
  for (const auto& [stem, vpath] : visual) {
    auto it = thermal.find(stem);
    if (it == thermal.end()) {
      summary.unpaired.push_back(vpath.string());
    } else {
      work.emplace_back(stem, std::make_pair(vpath, it->second));
    }
  }
  for (const auto& [stem, tpath] : thermal)
    if (!visual.count(stem)) summary.unpaired.push_back(tpath.string());
  if (work.empty()) throw NoPairsFound(root_dir);

  const fs::path out_dir = opt.out_dir.empty() ? fs::path(root_dir) / "aligned" : fs::path(opt.out_dir);
  fs::create_directories(out_dir);

  summary.pairs.resize(work.size());
  std::mutex next_mutex;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= work.size()) return;
        i = next++;
      }
      const auto& [stem, paths] = work[i];
      PairManifest& pm = summary.pairs[i];
      pm.visual_path = paths.first.string();
      pm.thermal_path = paths.second.string();
      try {
        const Raster vis = load_image(pm.visual_path);
        const Raster thm = load_image(pm.thermal_path);
        pm.result = register_pair(vis, thm, cfg);
        const WarpResult aligned = warp(thm, pm.result.matrix, vis.width, vis.height);
        save_image(aligned.image, (out_dir / (stem + "_thermal_aligned.png")).string());
      } catch (const std::exception& e) {
        pm.error = e.what();
      }
      detail::write_atomic(out_dir / (stem + ".json"),
                           manifest_json(pm, opt.with_timestamp).dump(2) + "\n");
    }
  };

  int jobs = opt.jobs > 0 ? opt.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  std::vector<std::thread> threads;
  for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  nlohmann::json sj{{"pairs", nlohmann::json::array()},
                    {"unpaired", summary.unpaired},
                    {"version", kVersion}};
  for (const auto& pm : summary.pairs)
    sj["pairs"].push_back({{"visual", pm.visual_path},
                           {"thermal", pm.thermal_path},
                           {"ok", pm.error.empty()}});
  detail::write_atomic(out_dir / "batch_summary.json", sj.dump(2) + "\n");
  return summary;
}

}  // namespace vtalign

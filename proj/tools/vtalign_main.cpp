// vtalign command-line tool: registration, batch processing, overlays,
// histograms, patch extraction and synthetic pair generation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "vtalign/vtalign.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitRegistration = 3;

struct CommonTuning {
  std::string kind = "similarity";
  int bins = 50;
  int pyramid = 0;
  std::uint64_t seed = 0;
  double growth = 1.05;
  double shrink = 0.98;
  double radius = 6.25e-3;
  double epsilon = 1.5e-6;
  int max_iters = 300;

  void add_flags(CLI::App* app) {
    app->add_option("--kind", kind, "Transform family: similarity|affine")
        ->check(CLI::IsMember({"similarity", "affine"}));
    app->add_option("--bins", bins, "Metric histogram bins");
    app->add_option("--pyramid", pyramid, "Pyramid levels (0 = full resolution only)");
    app->add_option("--seed", seed, "Optimizer RNG seed");
    app->add_option("--growth", growth, "Radius growth factor on acceptance");
    app->add_option("--shrink", shrink, "Radius shrink factor on rejection");
    app->add_option("--radius", radius, "Initial search radius");
    app->add_option("--epsilon", epsilon, "Stop when radius drops below this");
    app->add_option("--max-iters", max_iters, "Iteration cap per pyramid level");
  }

  vtalign::RegistrationConfig to_config() const {
    vtalign::RegistrationConfig cfg;
    cfg.kind = vtalign::transform_kind_from_string(kind);
    cfg.metric.bin_count = bins;
    cfg.pyramid_levels = pyramid;
    cfg.evo.seed = seed;
    cfg.evo.growth_factor = growth;
    cfg.evo.shrink_factor = shrink;
    cfg.evo.initial_radius = radius;
    cfg.evo.epsilon = epsilon;
    cfg.evo.max_iterations = max_iters;
    cfg.initial = vtalign::TransformParams::identity(cfg.kind);
    return cfg;
  }
};

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vtalign::IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw vtalign::IoError(path + ": write failed");
}

int cmd_register(const std::string& visual, const std::string& thermal, const CommonTuning& tuning,
                 const std::string& out_path, const std::string& aligned_path, bool no_timestamp) {
  const vtalign::Raster vis = vtalign::load_image(visual);
  const vtalign::Raster thm = vtalign::load_image(thermal);

  vtalign::PairManifest pm;
  pm.visual_path = visual;
  pm.thermal_path = thermal;
  try {
    pm.result = vtalign::register_pair(vis, thm, tuning.to_config());
  } catch (const vtalign::InvalidStart& e) {
    std::cerr << "registration failed: " << e.what() << "\n";
    return kExitRegistration;
  } catch (const vtalign::ImageTooSmall& e) {
    std::cerr << "registration failed: " << e.what() << "\n";
    return kExitRegistration;
  }
  write_text(out_path, vtalign::manifest_json(pm, !no_timestamp).dump(2) + "\n");
  if (!aligned_path.empty()) {
    const auto aligned = vtalign::warp(thm, pm.result.matrix, vis.width, vis.height);
    vtalign::save_image(aligned.image, aligned_path);
  }
  return kExitOk;
}

int cmd_overlay(const std::string& mode, const std::string& visual, const std::string& aligned,
                const std::string& out_path, int tile) {
  const vtalign::Raster vis = vtalign::load_image(visual);
  const vtalign::Raster mov = vtalign::load_image(aligned);
  if (mode == "redcyan") {
    const auto img = vtalign::overlay_redcyan(vis, mov);
    vtalign::detail::save_png_rgb8(img.rgb, img.width, img.height, out_path);
  } else if (mode == "difference") {
    vtalign::save_image(vtalign::overlay_difference(vis, mov), out_path);
  } else {
    vtalign::save_image(vtalign::overlay_checkerboard(vis, mov, tile), out_path);
  }
  return kExitOk;
}

int cmd_histogram(const std::string& image, int bins, const std::string& out_path) {
  const vtalign::Raster img = vtalign::load_image(image);
  const vtalign::Histogram h = vtalign::histogram(img, bins);
  std::string csv = "bin,count\n";
  for (int b = 0; b < h.bin_count; ++b)
    csv += std::to_string(b) + "," + std::to_string(h.counts[static_cast<size_t>(b)]) + "\n";
  write_text(out_path, csv);
  return kExitOk;
}

int cmd_patches(const std::string& visual, const std::string& thermal,
                const std::string& manifest_path, int count, std::uint64_t seed, double threshold,
                const std::string& out_dir) {
  const vtalign::Raster vis = vtalign::load_image(visual);
  const vtalign::Raster thm = vtalign::load_image(thermal);
  std::ifstream mf(manifest_path);
  if (!mf) throw vtalign::IoError(manifest_path + ": cannot open manifest");
  json j;
  mf >> j;
  const vtalign::TransformMatrix m = vtalign::matrix_from_json(j.at("transform"));

  const auto corners = vtalign::fast_detect(vis, threshold);
  std::vector<vtalign::PatchPair> pairs;
  try {
    pairs = vtalign::extract_patch_pairs(vis, thm, m, corners, count, seed);
  } catch (const vtalign::NotEnoughCorners& e) {
    std::cerr << "patches failed: " << e.what() << "\n";
    return kExitRegistration;
  }
  fs::create_directories(out_dir);
  const std::string stem = fs::path(visual).stem().string();
  for (size_t i = 0; i < pairs.size(); ++i) {
    const std::string base = (fs::path(out_dir) / (stem + "_pair" + std::to_string(i))).string();
    vtalign::save_image(pairs[i].visual_patch, base + "_vis.png");
    vtalign::save_image(pairs[i].thermal_patch, base + "_thm.png");
  }
  return kExitOk;
}

int cmd_synth(const std::string& source, double tx, double ty, double rot_deg, double scale,
              double gamma, double noise, double blur, std::uint64_t seed,
              const std::string& out_dir) {
  const vtalign::Raster src = vtalign::load_image(source);
  vtalign::TransformParams truth;
  truth.kind = vtalign::TransformKind::Similarity;
  truth.values = {rot_deg * M_PI / 180.0, scale, tx, ty};
  const auto sp = vtalign::synth_pair(src, truth, gamma, noise, blur, seed);

  fs::create_directories(out_dir);
  const std::string stem = fs::path(source).stem().string();
  vtalign::save_image(sp.visual, (fs::path(out_dir) / (stem + "_visual.png")).string());
  vtalign::save_image(sp.pseudo_thermal, (fs::path(out_dir) / (stem + "_thermal.png")).string());
  const double cx = (src.width - 1) / 2.0, cy = (src.height - 1) / 2.0;
  json tj = {{"transform", vtalign::to_json(truth, vtalign::to_matrix_centered(truth, cx, cy))},
             {"gamma", gamma},
             {"noise_sigma", noise},
             {"blur_sigma", blur},
             {"seed", seed},
             {"version", vtalign::kVersion}};
  write_text((fs::path(out_dir) / (stem + "_truth.json")).string(), tj.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vtalign: calibration-free visual-thermal image registration"};
  app.require_subcommand(1);

  // register
  auto* reg = app.add_subcommand("register", "Register one visual/thermal pair");
  std::string reg_visual, reg_thermal, reg_out, reg_aligned;
  bool reg_no_ts = false;
  CommonTuning reg_tuning;
  reg->add_option("--visual", reg_visual, "Visual (fixed) image")->required();
  reg->add_option("--thermal", reg_thermal, "Thermal (moving) image")->required();
  reg->add_option("--out", reg_out, "Output manifest JSON")->required();
  reg->add_option("--aligned", reg_aligned, "Optional warped thermal output image");
  reg->add_flag("--no-timestamp", reg_no_ts, "Omit timestamp for byte-exact reruns");
  reg_tuning.add_flags(reg);

  // batch
  auto* bat = app.add_subcommand("batch", "Register every pair under a dataset root");
  std::string bat_root, bat_out_dir;
  int bat_jobs = 0;
  bool bat_no_ts = false;
  CommonTuning bat_tuning;
  bat->add_option("--root", bat_root, "Dataset root with visual/ and thermal/ subdirs")->required();
  bat->add_option("--out-dir", bat_out_dir, "Output directory (default <root>/aligned)");
  bat->add_option("--jobs", bat_jobs, "Parallel workers (default: all cores)");
  bat->add_flag("--no-timestamp", bat_no_ts, "Omit timestamps for byte-exact reruns");
  bat_tuning.add_flags(bat);

  // overlay
  auto* ovl = app.add_subcommand("overlay", "Render an alignment QA overlay");
  std::string ovl_mode, ovl_visual, ovl_aligned, ovl_out;
  int ovl_tile = 32;
  ovl->add_option("--mode", ovl_mode, "redcyan|difference|checkerboard")
      ->required()
      ->check(CLI::IsMember({"redcyan", "difference", "checkerboard"}));
  ovl->add_option("--visual", ovl_visual, "Visual image")->required();
  ovl->add_option("--aligned", ovl_aligned, "Aligned thermal image")->required();
  ovl->add_option("--out", ovl_out, "Output image")->required();
  ovl->add_option("--tile", ovl_tile, "Checkerboard tile size");

  // histogram
  auto* his = app.add_subcommand("histogram", "Emit a bin,count CSV intensity histogram");
  std::string his_image, his_out;
  int his_bins = 256;
  his->add_option("--image", his_image, "Input image")->required();
  his->add_option("--bins", his_bins, "Bin count");
  his->add_option("--out", his_out, "Output CSV path")->required();

  // patches
  auto* pat = app.add_subcommand("patches", "Extract cross-modal FAST corner patch pairs");
  std::string pat_visual, pat_thermal, pat_manifest, pat_out_dir;
  int pat_count = 6;
  std::uint64_t pat_seed = 0;
  double pat_threshold = 20.0;
  pat->add_option("--visual", pat_visual, "Visual image")->required();
  pat->add_option("--thermal", pat_thermal, "Thermal image")->required();
  pat->add_option("--manifest", pat_manifest, "Registration manifest JSON")->required();
  pat->add_option("--count", pat_count, "Number of patch pairs");
  pat->add_option("--seed", pat_seed, "Corner sampling seed");
  pat->add_option("--threshold", pat_threshold, "FAST detection threshold");
  pat->add_option("--out-dir", pat_out_dir, "Output directory")->required();

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic ground-truth pair");
  std::string syn_source, syn_out_dir;
  double syn_tx = 0, syn_ty = 0, syn_rot = 0, syn_scale = 1.0, syn_gamma = 1.0, syn_noise = 0,
         syn_blur = 0;
  std::uint64_t syn_seed = 0;
  syn->add_option("--source", syn_source, "Source image")->required();
  syn->add_option("--tx", syn_tx, "Truth translation x (px)");
  syn->add_option("--ty", syn_ty, "Truth translation y (px)");
  syn->add_option("--rot-deg", syn_rot, "Truth rotation (degrees)");
  syn->add_option("--scale", syn_scale, "Truth uniform scale");
  syn->add_option("--gamma", syn_gamma, "Intensity remap exponent");
  syn->add_option("--noise", syn_noise, "Additive Gaussian noise sigma");
  syn->add_option("--blur", syn_blur, "Gaussian blur sigma (px)");
  syn->add_option("--seed", syn_seed, "Noise seed");
  syn->add_option("--out-dir", syn_out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (reg->parsed())
      return cmd_register(reg_visual, reg_thermal, reg_tuning, reg_out, reg_aligned, reg_no_ts);
    if (bat->parsed()) {
      vtalign::BatchOptions opt;
      opt.out_dir = bat_out_dir;
      opt.jobs = bat_jobs;
      opt.with_timestamp = !bat_no_ts;
      vtalign::batch(bat_root, bat_tuning.to_config(), opt);
      return kExitOk;
    }
    if (ovl->parsed()) return cmd_overlay(ovl_mode, ovl_visual, ovl_aligned, ovl_out, ovl_tile);
    if (his->parsed()) return cmd_histogram(his_image, his_bins, his_out);
    if (pat->parsed())
      return cmd_patches(pat_visual, pat_thermal, pat_manifest, pat_count, pat_seed, pat_threshold,
                         pat_out_dir);
    if (syn->parsed())
      return cmd_synth(syn_source, syn_tx, syn_ty, syn_rot, syn_scale, syn_gamma, syn_noise,
                       syn_blur, syn_seed, syn_out_dir);
  } catch (const vtalign::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const vtalign::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitIo;
  } catch (const vtalign::NoPairsFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRegistration;
  }
  return kExitUsage;
}

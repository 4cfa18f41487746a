// metamer: statistics dumps, synthesis, texture descriptors, gradient check and log-polar warps.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or input error, 3 numerical abort.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "metamer/descriptors.hpp"
#include "metamer/dump.hpp"
#include "metamer/error.hpp"
#include "metamer/logpolar.hpp"
#include "metamer/pipeline.hpp"
#include "metamer/png_io.hpp"
#include "metamer/statistics.hpp"
#include "metamer/synthesis.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace metamer;
using metamer::cli::RunConfig;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

// Layering: defaults < --config file < --set key=value < dedicated flags.
struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;

  RunConfig build() const {
    RunConfig rc;
    if (!config_file.empty()) rc.load(config_file);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
      rc.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : flags) rc.set(k, v);
    return rc;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "override one config key (key=value), repeatable");
}

// Registers a flag that feeds a config key when given.
template <typename T>
void key_option(CLI::App* sub, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<T>(
      flag, [&c, key](const T& v) { c.flags.emplace_back(key, CLI::detail::to_string(v)); }, help);
}

void gaze_option(CLI::App* sub, Common& c) {
  sub->add_option_function<std::string>(
         "--gaze",
         [&c](const std::string& v) {
           const auto [x, y] = cli::parse_pair(v);
           c.flags.emplace_back("pooling", "gaze");
           c.flags.emplace_back("gaze_x", CLI::detail::to_string(x));
           c.flags.emplace_back("gaze_y", CLI::detail::to_string(y));
         },
         "gaze point X,Y in pixels")
      ->type_name("X,Y");
  key_option<double>(sub, c, "--rate", "eccentricity_rate", "pooling diameter per pixel of eccentricity");
}

void pooling_options(CLI::App* sub, Common& c) {
  sub->add_option_function<double>(
      "--uniform-diameter",
      [&c](double d) {
        c.flags.emplace_back("pooling", "uniform");
        c.flags.emplace_back("region_diameter", CLI::detail::to_string(d));
      },
      "uniform pooling with this region diameter (pixels)");
  sub->add_flag_callback("--global", [&c] { c.flags.emplace_back("pooling", "global"); },
                         "one pooling region over the whole image");
  gaze_option(sub, c);
}

std::string channel_name(const StatisticKind& k) {
  return k.is_cross_color() ? to_string(k.pair) : to_string(k.channel);
}

ImageBuffer load_input(const std::string& path) {
  if (path.empty()) throw InvalidArgument("no input image given");
  if (!fs::exists(path)) throw IoError("input file not found: " + path);
  return load_image(path);
}

// ---- stats --------------------------------------------------------------------------

struct StatsArgs {
  Common common;
  bool pooled = false;
};

int run_stats(const StatsArgs& a) {
  const RunConfig rc = a.common.build();
  const ImageBuffer img = load_input(rc.input);
  if (rc.output.empty()) throw InvalidArgument("stats needs --output");
  rc.pyramid.validate(img.width(), img.height());
  const bool pooled = a.pooled || std::any_of(a.common.flags.begin(), a.common.flags.end(),
                                              [](const auto& kv) { return kv.first == "pooling"; });
  if (pooled) {
    const PooledStatistics p = compute_pooled_statistics(img, rc.pyramid, rc.geometry(), rc.synthesis.opponent);
    write_pooled_dump(rc.output, p, rc.pyramid);
    std::cout << "pooled " << p.entries.size() << " statistics (" << to_string(p.geometry.mode) << ") -> "
              << dump_manifest_path(rc.output).string() << "\n";
  } else {
    const StatisticSet s = compute_statistics(img, rc.pyramid, rc.synthesis.opponent);
    write_statistics_dump(rc.output, s, rc.pyramid);
    std::cout << "wrote " << s.entries.size() << " statistics -> " << dump_manifest_path(rc.output).string() << "\n";
  }
  return kOk;
}

// ---- synthesize ---------------------------------------------------------------------

int run_synthesize(const Common& common) {
  const RunConfig rc = common.build();
  const ImageBuffer target = load_input(rc.input);
  if (rc.output.empty()) throw InvalidArgument("synthesize needs --output");
  SynthesisConfig cfg = rc.synthesis_config();
  if (!rc.seed_from.empty()) {
    cfg.seed_mode = SeedMode::FromImage;
    cfg.seed_image = load_input(rc.seed_from);
  }
  const SynthesisResult r = synthesize(target, rc.geometry(), cfg);

  const fs::path trace_path = rc.trace.empty() ? fs::path(rc.output).replace_extension(".trace.csv") : fs::path(rc.trace);
  {
    std::ofstream os(trace_path);
    if (!os) throw IoError("cannot write trace " + trace_path.string());
    write_trace_csv(r.trace, os);
  }
  if (r.trace.status == SynthesisStatus::NonFinite) {
    std::cerr << "error: non-finite loss at iteration " << r.trace.iterations.back().iteration
              << "; partial trace in " << trace_path.string() << "\n";
    return kNumerical;
  }
  save_image(r.metamer, rc.output);

  const auto& it = r.trace.iterations;
  int within = 0;
  double worst = 0.0;
  for (const KindError& e : r.trace.final_errors) {
    std::cout << e.kind.label() << " " << channel_name(e.kind) << " " << e.relative_rms << "\n";
    if (e.relative_rms <= 0.02) ++within;
    worst = std::max(worst, e.relative_rms);
  }
  const double ratio = r.trace.initial_loss > 0.0 ? r.trace.final_loss / r.trace.initial_loss : 0.0;
  std::cout << "status " << to_string(r.trace.status) << ", " << it.size() << " iterations, loss "
            << r.trace.initial_loss << " -> " << r.trace.final_loss << " (ratio " << ratio << "), " << within << "/" << r.trace.final_errors.size()
            << " kinds within 2% (worst " << worst << "), " << r.trace.seconds << " s\n";
  return kOk;
}

// ---- descriptors --------------------------------------------------------------------

struct DescriptorArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string calibrate_out;
  std::string apply;
  std::string corpus_id;
  bool raw = false;
};

std::vector<fs::path> collect_images(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (e.is_regular_file() && ext == ".png") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      out.emplace_back(in);
    } else {
      throw IoError("input not found: " + in);
    }
  }
  if (out.empty()) throw InvalidArgument("no PNG images found");
  return out;
}

int run_descriptors(const DescriptorArgs& a) {
  const RunConfig rc = a.common.build();
  if (!a.calibrate_out.empty() && !a.apply.empty())
    throw InvalidArgument("--calibrate and --apply are mutually exclusive");
  const DescriptorConfig cfg = rc.descriptor_config();
  const std::vector<fs::path> files = collect_images(a.inputs);

  std::optional<Calibration> calib;
  const std::string apply = !a.apply.empty() ? a.apply : rc.calibration;
  if (!apply.empty()) calib = read_calibration(apply);

  std::vector<DescriptorMeasurements> measured;
  for (const fs::path& f : files) {
    const ImageBuffer img = load_image(f);
    const ImageBuffer lum = img.channels() == 1 ? img : to_luminance(img);
    measured.push_back(measure_descriptors(lum.plane(0), cfg));
  }
  if (!a.calibrate_out.empty()) {
    const std::string id = a.corpus_id.empty() ? fs::path(a.inputs.front()).filename().string() : a.corpus_id;
    calib = calibrate(measured, cfg, id);
    write_calibration(a.calibrate_out, *calib);
    std::cerr << "calibration for corpus '" << id << "' (" << files.size() << " images) -> " << a.calibrate_out << "\n";
  }
  const Calibration use = calib ? *calib : Calibration::intrinsic(cfg);

  std::vector<DescriptorRow> rows;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const DescriptorResult r = evaluate_descriptors(measured[i], use);
    if (r.clamped && !a.raw) std::cerr << "warning: " << files[i].string() << " falls outside the calibrated range\n";
    rows.push_back({files[i].filename().string(), a.raw ? r.raw : r.calibrated});
  }
  if (rc.output.empty()) {
    write_descriptor_csv(std::cout, rows);
  } else {
    std::ofstream os(rc.output);
    if (!os) throw IoError("cannot write " + rc.output);
    write_descriptor_csv(os, rows);
  }
  return kOk;
}

// ---- gradcheck ----------------------------------------------------------------------

struct GradCheckArgs {
  int size = 16;
  int scales = 4;
  int orientations = 4;
  double tolerance = 1e-3;
  int pixels = 100;
  double step = 1e-3;
  std::uint64_t seed = 1;
  std::string output;
};

int run_gradcheck(const GradCheckArgs& a) {
  PyramidConfig cfg;
  cfg.scales = a.scales;
  cfg.orientations = a.orientations;
  const GradCheckReport r = grad_check(a.size, cfg, a.tolerance, a.pixels, a.seed, a.step);
  write_grad_check(r, std::cout);
  if (!a.output.empty()) {
    std::ofstream os(a.output);
    if (!os) throw IoError("cannot write " + a.output);
    write_grad_check(r, os);
  }
  return r.passed ? kOk : kValidationFailure;
}

// ---- warp ---------------------------------------------------------------------------

struct WarpArgs {
  Common common;
  bool inverse = false;
  std::string size;
};

int run_warp(const WarpArgs& a) {
  const RunConfig rc = a.common.build();
  if (rc.pooling != "gaze") throw InvalidArgument("warp needs --gaze X,Y");
  if (rc.output.empty()) throw InvalidArgument("warp needs --output");
  const ImageBuffer img = load_input(rc.input);
  const PoolingGeometry geom = rc.geometry();
  const int align = 1 << rc.pyramid.scales;
  if (!a.inverse) {
    const LogPolarMap map(geom, img.width(), img.height(), align);
    const EdgeFill fill = rc.edge_fill == "zero" ? EdgeFill::Zero : EdgeFill::Replicate;
    save_image(logpolar_warp(img, map, fill), rc.output);
    std::cout << "warped " << img.width() << "x" << img.height() << " -> " << map.radial_samples() << "x"
              << map.azimuth_samples() << "\n";
    return kOk;
  }
  if (a.size.empty()) throw InvalidArgument("--inverse needs --size WxH of the original image");
  const auto [w, h] = cli::parse_pair(a.size, 'x');
  const LogPolarMap map(geom, static_cast<int>(w), static_cast<int>(h), align);
  if (img.width() != map.radial_samples() || img.height() != map.azimuth_samples())
    throw InvalidArgument("warped input is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                          ", expected " + std::to_string(map.radial_samples()) + "x" +
                          std::to_string(map.azimuth_samples()) + " for that gaze and size");
  save_image(logpolar_unwarp(img, map), rc.output);
  return kOk;
}

void io_options(CLI::App* sub, Common& c, bool with_input = true) {
  if (with_input) {
    sub->add_option_function<std::string>(
           "input", [&c](const std::string& v) { c.flags.emplace_back("input", v); }, "input image")
        ->required();
  }
  key_option<std::string>(sub, c, "-o,--output", "output", "output path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pooled texture statistics, metamer synthesis and texture descriptors"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");
  app.footer("Config keys: " + [] {
    std::string s;
    for (const auto& k : RunConfig::keys()) s += (s.empty() ? "" : ", ") + k;
    return s;
  }());

  int code = kOk;
  auto guard = [&code](auto&& fn) {
    return [&code, fn] {
      try {
        code = fn();
      } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = kNumerical;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = kUsage;
      }
    };
  };

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "compute statistics (or pooled statistics) and write a dump");
  io_options(s, stats.common);
  add_common(s, stats.common);
  s->add_flag("--pooled", stats.pooled, "pool with the configured geometry");
  pooling_options(s, stats.common);
  key_option<int>(s, stats.common, "--scales", "scales", "pyramid scales");
  key_option<int>(s, stats.common, "--orientations", "orientations", "pyramid orientations");
  s->callback(guard([&] { return run_stats(stats); }));

  Common synth;
  auto* y = app.add_subcommand("synthesize", "synthesize a metamer of the input image");
  io_options(y, synth);
  add_common(y, synth);
  pooling_options(y, synth);
  key_option<std::string>(y, synth, "--trace", "trace", "trace CSV path (default <output>.trace.csv)");
  key_option<std::string>(y, synth, "--seed-from", "seed_from", "start from this image instead of matched noise");
  key_option<int>(y, synth, "--max-iters", "max_iters", "iteration cap");
  key_option<std::uint64_t>(y, synth, "--rng-seed", "rng_seed", "seed for all random streams");
  key_option<std::string>(y, synth, "--update", "update", "adam | normalized_gradient | lbfgs");
  key_option<int>(y, synth, "--scales", "scales", "pyramid scales");
  key_option<int>(y, synth, "--orientations", "orientations", "pyramid orientations");
  y->callback(guard([&] { return run_synthesize(synth); }));

  DescriptorArgs desc;
  auto* d = app.add_subcommand("descriptors", "texture descriptors for images or directories of PNGs");
  d->add_option("inputs", desc.inputs, "images or directories")->required();
  io_options(d, desc.common, false);
  add_common(d, desc.common);
  d->add_option("--calibrate", desc.calibrate_out, "fit a calibration over the inputs and write it here");
  d->add_option("--apply", desc.apply, "apply this calibration file");
  d->add_option("--corpus-id", desc.corpus_id, "identifier stored with --calibrate");
  d->add_flag("--raw", desc.raw, "write uncalibrated values");
  key_option<std::uint64_t>(d, desc.common, "--rng-seed", "rng_seed", "seed for all random streams");
  d->callback(guard([&] { return run_descriptors(desc); }));

  GradCheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "compare the analytic gradient with central differences");
  g->add_option("--size", gc.size, "image side (<= 64)")->capture_default_str();
  g->add_option("--tol", gc.tolerance, "max relative error to pass")->capture_default_str();
  g->add_option("--scales", gc.scales)->capture_default_str();
  g->add_option("--orientations", gc.orientations)->capture_default_str();
  g->add_option("--pixels", gc.pixels, "pixels probed")->capture_default_str();
  g->add_option("--step", gc.step, "finite-difference step")->capture_default_str();
  g->add_option("--rng-seed", gc.seed)->capture_default_str();
  g->add_option("-o,--output", gc.output, "also write the report here");
  g->callback(guard([&] { return run_gradcheck(gc); }));

  WarpArgs warp;
  auto* w = app.add_subcommand("warp", "log-polar warp about a gaze point, or its inverse");
  io_options(w, warp.common);
  add_common(w, warp.common);
  gaze_option(w, warp.common);
  w->add_flag("--inverse", warp.inverse, "unwarp a warped image");
  w->add_option("--size", warp.size, "original image size for --inverse")->type_name("WxH");
  key_option<double>(w, warp.common, "--fovea-radius", "fovea_radius", "fovea radius in pixels");
  key_option<std::string>(w, warp.common, "--fill", "edge_fill", "replicate | zero");
  key_option<int>(w, warp.common, "--scales", "scales", "pyramid depth the warped size is aligned to");
  w->callback(guard([&] { return run_warp(warp); }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  return code;
}

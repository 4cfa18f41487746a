#include "run_config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string_view>

#include "metamer/error.hpp"

namespace metamer::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw InvalidArgument("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw InvalidArgument("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = "config key '" + key + "': '" + v + "' is not one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw InvalidArgument(msg);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [&](const char* name, auto member) {
      t[name] = [member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_double(k, v); };
    };
    auto integer = [&](const char* name, auto member) {
      t[name] = [member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_int<int>(k, v); };
    };
    auto text = [&](const char* name, auto member) {
      t[name] = [member](RunConfig& c, const std::string&, const std::string& v) { member(c) = v; };
    };

    integer("scales", [](RunConfig& c) -> int& { return c.pyramid.scales; });
    integer("orientations", [](RunConfig& c) -> int& { return c.pyramid.orientations; });
    dbl("end_stop_shift", [](RunConfig& c) -> double& { return c.pyramid.end_stop_shift; });

    t["pooling"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.pooling = one_of(k, v, {"uniform", "global", "gaze"});
    };
    dbl("region_diameter", [](RunConfig& c) -> double& { return c.region_diameter; });
    dbl("eccentricity_rate", [](RunConfig& c) -> double& { return c.eccentricity_rate; });
    dbl("spacing_fraction", [](RunConfig& c) -> double& { return c.spacing_fraction; });
    dbl("gaze_x", [](RunConfig& c) -> double& { return c.gaze_x; });
    dbl("gaze_y", [](RunConfig& c) -> double& { return c.gaze_y; });
    dbl("fovea_radius", [](RunConfig& c) -> double& { return c.fovea_radius; });
    dbl("warped_diameter", [](RunConfig& c) -> double& { return c.warped_diameter; });
    dbl("screen_width_px", [](RunConfig& c) -> double& { return c.screen_width_px; });
    dbl("field_of_view_deg", [](RunConfig& c) -> double& { return c.field_of_view_deg; });
    dbl("fovea_deg", [](RunConfig& c) -> double& { return c.fovea_deg; });
    t["edge_fill"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.edge_fill = one_of(k, v, {"replicate", "zero"});
    };

    integer("max_iters", [](RunConfig& c) -> int& { return c.synthesis.max_iters; });
    dbl("step_size", [](RunConfig& c) -> double& { return c.synthesis.step_size; });
    dbl("step_decay", [](RunConfig& c) -> double& { return c.synthesis.step_decay; });
    dbl("stop_rel_change", [](RunConfig& c) -> double& { return c.synthesis.stop_rel_change; });
    integer("window", [](RunConfig& c) -> int& { return c.synthesis.window; });
    integer("history", [](RunConfig& c) -> int& { return c.synthesis.history; });
    integer("coarse_to_fine", [](RunConfig& c) -> int& { return c.synthesis.coarse_to_fine; });
    t["update"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      const std::string r = one_of(k, v, {"adam", "normalized_gradient", "lbfgs"});
      c.synthesis.update = r == "adam"    ? UpdateRule::Adam
                           : r == "lbfgs" ? UpdateRule::Lbfgs
                                          : UpdateRule::NormalizedGradient;
    };
    t["opponent"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthesis.opponent = one_of(k, v, {"lab", "linear_test"}) == "lab" ? OpponentMode::Lab : OpponentMode::LinearTest;
    };

    t["window_sizes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      std::vector<int> sizes;
      std::size_t start = 0;
      while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const std::string item = trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        sizes.push_back(to_int<int>(k, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      c.descriptors.window_sizes = sizes;
    };
    integer("windows_per_size", [](RunConfig& c) -> int& { return c.descriptors.windows_per_size; });
    dbl("variance_floor", [](RunConfig& c) -> double& { return c.descriptors.variance_floor; });
    dbl("contrast_epsilon", [](RunConfig& c) -> double& { return c.descriptors.contrast_epsilon; });
    integer("orientation_bins", [](RunConfig& c) -> int& { return c.descriptors.orientation_bins; });
    integer("descriptor_scales", [](RunConfig& c) -> int& { return c.descriptors.scales; });

    t["rng_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.rng_seed = to_int<std::uint64_t>(k, v);
    };

    text("input", [](RunConfig& c) -> std::string& { return c.input; });
    text("output", [](RunConfig& c) -> std::string& { return c.output; });
    text("trace", [](RunConfig& c) -> std::string& { return c.trace; });
    text("seed_from", [](RunConfig& c) -> std::string& { return c.seed_from; });
    text("calibration", [](RunConfig& c) -> std::string& { return c.calibration; });
    return t;
  }();
  return table;
}

std::uint64_t stream_seed(std::uint64_t seed, std::string_view name) {
  std::uint32_t h = 2166136261u;  // FNV-1a
  for (char ch : name) h = (h ^ static_cast<unsigned char>(ch)) * 16777619u;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), h};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw InvalidArgument("unknown config key '" + key + "'");
  it->second(*this, key, value);
}

void RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(path.string() + ":" + std::to_string(number) + ": expected key = value");
    try {
      set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

double RunConfig::effective_fovea_radius() const {
  if (fovea_radius > 0.0) return fovea_radius;
  if (!(screen_width_px > 0.0) || !(field_of_view_deg > 0.0) || !(fovea_deg > 0.0))
    throw InvalidArgument("viewing geometry must be positive");
  return fovea_radius_pixels(screen_width_px, field_of_view_deg, fovea_deg);
}

PoolingGeometry RunConfig::geometry() const {
  PoolingGeometry g;
  if (pooling == "global") {
    g = PoolingGeometry::global();
  } else if (pooling == "gaze") {
    g = PoolingGeometry::gaze_centric(gaze_x, gaze_y, eccentricity_rate, effective_fovea_radius(), spacing_fraction);
    g.warped_diameter = warped_diameter;
  } else {
    g = PoolingGeometry::uniform(region_diameter, spacing_fraction);
  }
  g.validate();
  return g;
}

SynthesisConfig RunConfig::synthesis_config() const {
  SynthesisConfig s = synthesis;
  s.pyramid = pyramid;
  s.rng_seed = stream_seed(rng_seed, "synthesis");
  return s;
}

DescriptorConfig RunConfig::descriptor_config() const {
  DescriptorConfig d = descriptors;
  d.rng_seed = stream_seed(rng_seed, "descriptors");
  return d;
}

std::pair<double, double> parse_pair(const std::string& text, char sep) {
  const auto at = text.find(sep);
  if (at == std::string::npos) throw InvalidArgument("expected A" + std::string(1, sep) + "B, got '" + text + "'");
  return {to_double(text, trim(text.substr(0, at))), to_double(text, trim(text.substr(at + 1)))};
}

}  // namespace metamer::cli

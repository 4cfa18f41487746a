// Test helper for the CLI script: writes PNG fixtures and measures outputs.
//   make DIR
//   annulus A.png B.png GX GY FOVEA   relative RMS of A-B on [2 fovea, 0.9 e_max]
//   spread DUMP                       largest (max - min) within any dumped plane

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "fixtures.hpp"
#include "metamer/dump.hpp"
#include "metamer/logpolar.hpp"
#include "metamer/png_io.hpp"

using namespace metamer;

namespace {

int make(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "corpus");
  std::filesystem::create_directories(dir / "single");
  save_image(fixtures::gray(fixtures::constant(64, 64, 0.5)), dir / "constant.png");
  save_image(fixtures::gray(fixtures::natural_image(64, 64, 21)), dir / "texture.png");
  save_image(fixtures::gray(fixtures::smooth_image(128, 128, 22)), dir / "smooth.png");
  save_image(fixtures::gray(fixtures::constant(128, 128, 0.4)), dir / "flat128.png");
  save_image(fixtures::gray(fixtures::grating(128, 128, 1.0 / 8.0, 0.0)), dir / "corpus" / "grating.png");
  save_image(fixtures::gray(fixtures::uniform_noise(128, 128, 23)), dir / "corpus" / "noise.png");
  save_image(fixtures::gray(fixtures::checkerboard(128, 128, 8)), dir / "corpus" / "checker.png");
  save_image(fixtures::gray(fixtures::block_noise(128, 128, 16, 24)), dir / "corpus" / "blocks.png");
  save_image(fixtures::gray(fixtures::natural_image(128, 128, 25)), dir / "single" / "only.png");
  return 0;
}

int annulus(const std::string& a_path, const std::string& b_path, double gx, double gy, double fovea) {
  const Plane a = load_image(a_path).plane(0), b = load_image(b_path).plane(0);
  const LogPolarMap map(PoolingGeometry::gaze_centric(gx, gy, 0.5, fovea), a.width, a.height);
  double s = 0.0, lo = 1e300, hi = -1e300;
  std::size_t n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      lo = std::min(lo, a(x, y));
      hi = std::max(hi, a(x, y));
      const double e = std::hypot(x - gx, y - gy);
      if (e < 2 * fovea || e > 0.9 * map.max_eccentricity()) continue;
      s += (a(x, y) - b(x, y)) * (a(x, y) - b(x, y));
      ++n;
    }
  std::cout << std::sqrt(s / static_cast<double>(n)) / (hi - lo) << "\n";
  return 0;
}

int spread(const std::filesystem::path& dump) {
  const DumpManifest m = read_dump_manifest(dump_manifest_path(dump));
  const std::vector<float> v = read_dump_values(dump_binary_path(dump));
  std::size_t offset = 0;
  double worst = 0.0;
  for (const auto& row : m.rows) {
    const std::size_t count = static_cast<std::size_t>(row.width) * row.height;
    const auto [lo, hi] = std::minmax_element(v.begin() + offset, v.begin() + offset + count);
    worst = std::max(worst, static_cast<double>(*hi - *lo));
    offset += count;
  }
  std::cout << worst << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string verb = argc > 1 ? argv[1] : "";
  try {
    if (verb == "make" && argc == 3) return make(argv[2]);
    if (verb == "annulus" && argc == 7)
      return annulus(argv[2], argv[3], std::stod(argv[4]), std::stod(argv[5]), std::stod(argv[6]));
    if (verb == "spread" && argc == 3) return spread(argv[2]);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::cerr << "usage: cli_helper make DIR | annulus A B GX GY FOVEA | spread DUMP\n";
  return 2;
}

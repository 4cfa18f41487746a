#include "metamer/dump.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "metamer/error.hpp"

namespace metamer {

namespace {

struct Block {
  const StatisticKind* kind;
  const Plane* plane;
};

void put_le(std::ofstream& os, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_dump(const std::filesystem::path& out, const std::vector<Block>& blocks,
                const std::vector<std::pair<std::string, std::string>>& header) {
  const auto bin = dump_binary_path(out);
  const auto man = dump_manifest_path(out);
  std::ofstream b(bin, std::ios::binary);
  if (!b) throw IoError("cannot open " + bin.string() + " for writing");
  for (const Block& blk : blocks)
    for (double v : blk.plane->data) {
      if (!std::isfinite(v)) throw NumericalError("non-finite value in " + blk.kind->label());
      put_le(b, static_cast<float>(v));
    }
  if (!b) throw IoError("write failed: " + bin.string());

  std::ofstream m(man);
  if (!m) throw IoError("cannot open " + man.string() + " for writing");
  m << "format=float32-le\n";
  m << "layout=entry-major,row-major\n";
  m << "binary=" << bin.filename().string() << "\n";
  for (const auto& [k, v] : header) m << k << "=" << v << "\n";
  m << "entries=" << blocks.size() << "\n";
  m << "index\tkind\tchannel\twidth\theight\n";
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const StatisticKind& k = *blocks[i].kind;
    m << i << "\t" << k.label() << "\t" << (k.is_cross_color() ? to_string(k.pair) : to_string(k.channel)) << "\t"
      << blocks[i].plane->width << "\t" << blocks[i].plane->height << "\n";
  }
  if (!m) throw IoError("write failed: " + man.string());
}

std::vector<std::pair<std::string, std::string>> pyramid_header(const PyramidConfig& cfg) {
  return {{"scales", std::to_string(cfg.scales)},
          {"orientations", std::to_string(cfg.orientations)},
          {"end_stop_shift", fmt(cfg.end_stop_shift)}};
}

}  // namespace

std::filesystem::path dump_binary_path(const std::filesystem::path& out) {
  auto p = out;
  return p.replace_extension(".bin");
}

std::filesystem::path dump_manifest_path(const std::filesystem::path& out) {
  auto p = out;
  return p.replace_extension(".manifest");
}

void write_statistics_dump(const std::filesystem::path& out, const StatisticSet& stats, const PyramidConfig& cfg) {
  std::vector<Block> blocks;
  for (const auto& e : stats.entries) blocks.push_back({&e.kind, &e.image});
  auto header = pyramid_header(cfg);
  header.push_back({"content", "statistics"});
  header.push_back({"source", std::to_string(stats.width) + "x" + std::to_string(stats.height)});
  header.push_back({"color", stats.color ? "1" : "0"});
  write_dump(out, blocks, header);
}

void write_pooled_dump(const std::filesystem::path& out, const PooledStatistics& pooled, const PyramidConfig& cfg) {
  std::vector<Block> blocks;
  for (const auto& e : pooled.entries) blocks.push_back({&e.kind, &e.values});
  const PoolingGeometry& g = pooled.geometry;
  auto header = pyramid_header(cfg);
  header.push_back({"content", "pooled"});
  header.push_back({"source", std::to_string(pooled.source_width) + "x" + std::to_string(pooled.source_height)});
  header.push_back({"pooling", to_string(g.mode)});
  header.push_back({"spacing_fraction", fmt(g.spacing_fraction)});
  switch (g.mode) {
    case PoolingMode::Uniform:
      header.push_back({"region_diameter", fmt(g.region_diameter)});
      header.push_back({"step", std::to_string(g.step())});
      break;
    case PoolingMode::GazeCentric:
      header.push_back({"gaze", fmt(g.gaze_x) + "," + fmt(g.gaze_y)});
      header.push_back({"eccentricity_rate", fmt(g.eccentricity_rate)});
      header.push_back({"fovea_radius", fmt(g.fovea_radius)});
      header.push_back({"warped_diameter", fmt(g.warped_diameter)});
      break;
    case PoolingMode::Global:
      break;
  }
  write_dump(out, blocks, header);
}

DumpManifest read_dump_manifest(const std::filesystem::path& manifest) {
  std::ifstream is(manifest);
  if (!is) throw IoError("cannot open " + manifest.string());
  DumpManifest m;
  std::string line;
  bool table = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (!table) {
      if (line.rfind("index\t", 0) == 0) {
        table = true;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw IoError("malformed manifest line: " + line);
      m.header[line.substr(0, eq)] = line.substr(eq + 1);
      continue;
    }
    std::istringstream ls(line);
    DumpRow r;
    std::string idx, w, h;
    if (!std::getline(ls, idx, '\t') || !std::getline(ls, r.kind, '\t') || !std::getline(ls, r.channel, '\t') ||
        !std::getline(ls, w, '\t') || !std::getline(ls, h, '\t'))
      throw IoError("malformed manifest row: " + line);
    r.index = std::stoi(idx);
    r.width = std::stoi(w);
    r.height = std::stoi(h);
    m.rows.push_back(r);
  }
  return m;
}

std::vector<float> read_dump_values(const std::filesystem::path& binary) {
  std::ifstream is(binary, std::ios::binary);
  if (!is) throw IoError("cannot open " + binary.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) throw IoError("truncated dump " + binary.string());
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[4 * i + static_cast<std::size_t>(k)]) << (8 * k);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

}  // namespace metamer

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "metamer/pooling.hpp"
#include "metamer/statistics.hpp"

namespace metamer {

/// Dump layout: `<stem>.bin` holds little-endian float32 values, entry-major then
/// row-major; `<stem>.manifest` is text with `key=value` header lines followed by a
/// tab-separated table (index, kind, channel, width, height).
struct DumpRow {
  int index = 0;
  std::string kind;
  std::string channel;
  int width = 0;
  int height = 0;
};

struct DumpManifest {
  std::map<std::string, std::string> header;
  std::vector<DumpRow> rows;
};

/// Paths written for a given output path (extension replaced).
std::filesystem::path dump_binary_path(const std::filesystem::path& out);
std::filesystem::path dump_manifest_path(const std::filesystem::path& out);

void write_statistics_dump(const std::filesystem::path& out, const StatisticSet& stats, const PyramidConfig& cfg);
void write_pooled_dump(const std::filesystem::path& out, const PooledStatistics& pooled, const PyramidConfig& cfg);

DumpManifest read_dump_manifest(const std::filesystem::path& manifest);
std::vector<float> read_dump_values(const std::filesystem::path& binary);

}  // namespace metamer

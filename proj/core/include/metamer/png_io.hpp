#pragma once

#include <filesystem>

#include "metamer/image.hpp"

namespace metamer {

/// Reads an 8- or 16-bit grayscale or RGB PNG (alpha is dropped) and applies the
/// sRGB decode. Returns a Gray or LinearRGB buffer.
ImageBuffer load_image(const std::filesystem::path& path);

/// Writes a 16-bit PNG after sRGB encoding; values are clamped to [0, 1].
/// Accepts Gray and LinearRGB buffers.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

}  // namespace metamer

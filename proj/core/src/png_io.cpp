#include "metamer/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "metamer/error.hpp"

namespace metamer {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) { throw IoError(msg); }
void png_warning_handler(png_structp, png_const_charp) {}

const std::array<double, 256>& decode_table_8bit() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = srgb_decode(i / 255.0);
    return t;
  }();
  return table;
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open image '" + path.string() + "'");

  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), file.get()) != sig.size() || png_sig_cmp(sig.data(), 0, 8) != 0)
    throw IoError("'" + path.string() + "' is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  struct ReadGuard {
    png_structp* png;
    png_infop* info;
    ~ReadGuard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};

  try {
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));

    if (bit_depth != 8 && bit_depth != 16)
      throw IoError("'" + path.string() + "': unsupported bit depth " + std::to_string(bit_depth) +
                    " (expected 8 or 16)");
    int channels = 0;
    switch (color_type) {
      case PNG_COLOR_TYPE_GRAY: channels = 1; break;
      case PNG_COLOR_TYPE_GRAY_ALPHA: channels = 1; png_set_strip_alpha(png); break;
      case PNG_COLOR_TYPE_RGB: channels = 3; break;
      case PNG_COLOR_TYPE_RGB_ALPHA: channels = 3; png_set_strip_alpha(png); break;
      default:
        throw IoError("'" + path.string() + "': unsupported PNG color type (expected grayscale or RGB)");
    }
    png_read_update_info(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> raw(rowbytes * static_cast<std::size_t>(height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = raw.data() + rowbytes * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    ImageBuffer img(width, height, channels, channels == 1 ? ColorSpace::Gray : ColorSpace::LinearRGB);
    const auto& lut = decode_table_8bit();
    for (int y = 0; y < height; ++y) {
      const unsigned char* row = rows[static_cast<std::size_t>(y)];
      for (int x = 0; x < width; ++x) {
        for (int c = 0; c < channels; ++c) {
          const std::size_t idx = static_cast<std::size_t>(x) * channels + c;
          double v;
          if (bit_depth == 8) {
            v = lut[row[idx]];
          } else {
            const unsigned hi = row[2 * idx], lo = row[2 * idx + 1];
            v = srgb_decode(static_cast<double>((hi << 8) | lo) / 65535.0);
          }
          img.channel(c)[static_cast<std::size_t>(y) * width + x] = v;
        }
      }
    }
    return img;
  } catch (const IoError& e) {
    std::string msg = e.what();
    if (msg.find(path.string()) == std::string::npos) msg = "'" + path.string() + "': " + msg;
    throw IoError(msg);
  }
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.space() != ColorSpace::Gray && img.space() != ColorSpace::LinearRGB)
    throw InvalidArgument(std::string("save_image: cannot store color space ") + to_string(img.space()));
  if (img.channels() != 1 && img.channels() != 3)
    throw InvalidArgument("save_image: expected 1 or 3 channels");
  for (double v : img.data())
    if (!std::isfinite(v)) throw InvalidArgument("save_image: non-finite sample");

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write image '" + path.string() + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  struct WriteGuard {
    png_structp* png;
    png_infop* info;
    ~WriteGuard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};

  const int w = img.width(), h = img.height(), channels = img.channels();
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 16,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<std::size_t>(w) * channels * 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = std::clamp(img.channel(c)[static_cast<std::size_t>(y) * w + x], 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(srgb_encode(v) * 65535.0));
        const std::size_t idx = (static_cast<std::size_t>(x) * channels + c) * 2;
        row[idx] = static_cast<unsigned char>(q >> 8);
        row[idx + 1] = static_cast<unsigned char>(q & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

}  // namespace metamer

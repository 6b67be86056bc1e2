#include "hsipnp/png_export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <png.h>

#include "hsipnp/error.hpp"

namespace hsipnp::io {
namespace {

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

void write_gray(const std::vector<unsigned char>& pixels, std::size_t rows, std::size_t cols,
                const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  std::FILE* fp = std::fopen(tmp.c_str(), "wb");
  require(fp != nullptr, ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    std::fclose(fp);
    fail(ErrorCode::Io, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    std::filesystem::remove(tmp);
    fail(ErrorCode::Io, "libpng failed writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < rows; ++r)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + r * cols));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  require(std::fclose(fp) == 0, ErrorCode::Io, "write failed: " + tmp.string());
  std::filesystem::rename(tmp, path);
}

void require_band(const Cube& cube, std::size_t band) {
  require(!cube.empty(), ErrorCode::InvalidArgument, "png export: empty cube");
  require(band < cube.bands(), ErrorCode::InvalidArgument,
          "png export: band " + std::to_string(band) + " out of range (cube has " +
              std::to_string(cube.bands()) + ")");
}

}  // namespace

void write_band_png(const Cube& cube, std::size_t band, const std::filesystem::path& path) {
  require_band(cube, band);
  std::vector<unsigned char> pixels(cube.rows() * cube.cols());
  const auto plane = cube.band(band);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(plane[i]);
  write_gray(pixels, cube.rows(), cube.cols(), path);
}

void write_error_map_png(const Cube& gt, const Cube& pred, std::size_t band,
                         const std::filesystem::path& path, double gain) {
  require(gt.extent() == pred.extent(), ErrorCode::DimensionMismatch,
          "error map: extent mismatch");
  require(gain > 0.0, ErrorCode::InvalidArgument, "error map: gain must be positive");
  require_band(gt, band);
  std::vector<unsigned char> pixels(gt.rows() * gt.cols());
  const auto g = gt.band(band);
  const auto p = pred.band(band);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(gain * std::abs(g[i] - p[i]));
  write_gray(pixels, gt.rows(), gt.cols(), path);
}

}  // namespace hsipnp::io

#include "fkp/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "fkp/errors.hpp"

namespace fkp {

double image_mean(const GrayImage& img) {
  double sum = 0.0;
  for (double v : img.pixels) sum += v;
  return img.pixels.empty() ? 0.0 : sum / static_cast<double>(img.pixels.size());
}

GrayImage minmax_stretch(const GrayImage& img) {
  GrayImage out(img.width, img.height);
  if (img.pixels.empty()) return out;
  auto [lo_it, hi_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) return out;  // constant image -> all zeros
  const double inv = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = (img.pixels[i] - lo) * inv;
  return out;
}

double bilinear_at(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
  const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
  return top * (1.0 - fy) + bot * fy;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

GrayImage read_png_gray(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoFailure(path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoFailure(path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoFailure(path.string());
  }

  std::vector<png_bytep> row_ptrs;
  std::vector<png_byte> data;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoFailure(path.string() + " (png decode error)");
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoFailure(path.string() + " (expected 8-bit grayscale png)");
  }

  data.resize(static_cast<std::size_t>(w) * h);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = data.data() + static_cast<std::size_t>(y) * w;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = data[i] / 255.0;
  return img;
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& img) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoFailure(path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoFailure(path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoFailure(path.string());
  }

  std::vector<png_byte> data(img.pixels.size());
  std::vector<png_bytep> row_ptrs(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoFailure(path.string() + " (png encode error)");
  }

  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 1.0);
    data[i] = static_cast<png_byte>(std::lround(v * 255.0));
  }
  for (int y = 0; y < img.height; ++y)
    row_ptrs[y] = data.data() + static_cast<std::size_t>(y) * img.width;

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Fixed compression settings keep output bytes reproducible run to run.
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace fkp

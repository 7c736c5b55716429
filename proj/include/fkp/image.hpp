#ifndef FKP_IMAGE_HPP_
#define FKP_IMAGE_HPP_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace fkp {

// Row-major grayscale raster with intensities in [0,1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::size_t size() const { return pixels.size(); }
};

double image_mean(const GrayImage& img);

// Affine-stretches intensities so min -> 0 and max -> 1. A constant image maps to all zeros.
GrayImage minmax_stretch(const GrayImage& img);

// Bilinear sample at a real-valued pixel position; coordinates are clamped to
// the image rectangle. (x, y) in pixel units, (0, 0) = center of the top-left pixel.
double bilinear_at(const GrayImage& img, double x, double y);

// 8-bit single-channel PNG I/O. Loading maps [0,255] -> [0,1]; writing rounds
// back. Only 8-bit grayscale files are accepted.
GrayImage read_png_gray(const std::filesystem::path& path);
void write_png_gray(const std::filesystem::path& path, const GrayImage& img);

}  // namespace fkp

#endif  // FKP_IMAGE_HPP_

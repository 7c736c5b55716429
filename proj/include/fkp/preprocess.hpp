#ifndef FKP_PREPROCESS_HPP_
#define FKP_PREPROCESS_HPP_

#include <cstdint>
#include <vector>

#include "fkp/image.hpp"

namespace fkp {

inline constexpr int kRoiWidth = 220;
inline constexpr int kRoiHeight = 110;

struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> edges;  // row-major booleans

  EdgeMap() = default;
  EdgeMap(int w, int h) : width(w), height(h), edges(static_cast<std::size_t>(w) * h, 0) {}
  bool at(int x, int y) const { return edges[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { edges[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
};

// Per-pixel convexity codes over {-1, 0, +1}; nonzero only at edge pixels.
struct ConvexityCodeMap {
  int width = 0;
  int height = 0;
  std::vector<std::int8_t> codes;

  ConvexityCodeMap() = default;
  ConvexityCodeMap(int w, int h) : width(w), height(h), codes(static_cast<std::size_t>(w) * h, 0) {}
  std::int8_t at(int x, int y) const { return codes[static_cast<std::size_t>(y) * width + x]; }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;  // pixel row at column 0
};

struct RoiParams {
  int factor = 2;          // down-sampling factor for edge analysis
  double sigma = 1.4;      // Canny smoothing
  double low = 0.1;        // hysteresis thresholds, fractions of the max gradient
  double high = 0.3;
  int window = 9;          // convexity fit window (columns, odd)
  double eps = 1e-3;       // curvature dead zone
  int ycols = 20;          // Y-axis balance window half-width (columns)
  bool bypass = false;     // accept pre-cropped 220x110 inputs unchanged
};

// Gaussian blur (sigma = 0.5 * factor) followed by decimation. Output
// dimensions are floor(dim / factor); throws DegenerateOutput when that is 0.
GrayImage downsample(const GrayImage& img, int factor);

// Standard Canny. `low`/`high` are fractions of the maximum gradient magnitude
// (normalized-threshold mode), so edge maps are invariant to affine intensity
// rescaling of the input. Gradients are 3x3 Sobel on the blurred image,
// interior pixels only; non-maximum suppression keeps ties; hysteresis is
// 8-connected.
EdgeMap canny(const GrayImage& img, double sigma, double low, double high);

// For each edge pixel, fits y = a*x^2 + b*x + c to the topmost edge pixel of
// each column within a horizontal window centered on it, and codes the sign of
// `a` against `curvature_eps`. Pixels with fewer than 3 support columns code 0.
ConvexityCodeMap convex_direction_code(const EdgeMap& edges, int window, double curvature_eps);

// Least-squares line through the bottom-most edge pixel of each column,
// restricted to the bottom third of the image: the lower finger boundary.
LineFit find_x_axis(const EdgeMap& edges);

// Column x* minimizing |sum of codes in columns [x - window_cols, x + window_cols]|
// (window clipped at the image border); ties break toward the smallest x.
int find_y_axis(const ConvexityCodeMap& codes, int window_cols);

// Full pipeline: down-sample, detect edges, code convexity, fit both axes,
// level the X-axis, and crop the 220x110 region centered on x* directly above
// it. Output intensities are min-max stretched to [0,1].
GrayImage extract_roi(const GrayImage& img, const RoiParams& params);

}  // namespace fkp

#endif  // FKP_PREPROCESS_HPP_

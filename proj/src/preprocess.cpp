#include "fkp/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fkp/errors.hpp"

namespace fkp {

namespace {

std::vector<double> gaussian_kernel_1d(double sigma, int& radius) {
  radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

GrayImage blur_separable(const GrayImage& img, double sigma) {
  int r = 0;
  const auto k = gaussian_kernel_1d(sigma, r);
  GrayImage tmp(img.width, img.height), out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * img.at(clampi(x + i, 0, img.width - 1), y);
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, clampi(y + i, 0, img.height - 1));
      out.at(x, y) = acc;
    }
  }
  return out;
}

// Dense 2D blur used by canny(); kernel is normalized over the full 2D window
// and accumulation is row-major, which the reference implementation in the
// test suite mirrors.
GrayImage blur_dense(const GrayImage& img, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const int n = 2 * r + 1;
  std::vector<double> k(static_cast<std::size_t>(n) * n);
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k[(dy + r) * n + (dx + r)] = v;
      sum += v;
    }
  for (auto& v : k) v /= sum;

  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          acc += k[(dy + r) * n + (dx + r)] *
                 img.at(clampi(x + dx, 0, img.width - 1), clampi(y + dy, 0, img.height - 1));
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

GrayImage downsample(const GrayImage& img, int factor) {
  if (factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
  const int ow = img.width / factor, oh = img.height / factor;
  if (ow == 0 || oh == 0)
    throw DegenerateOutput("downsample by " + std::to_string(factor) + " empties a " +
                           std::to_string(img.width) + "x" + std::to_string(img.height) + " image");

  const GrayImage blurred = blur_separable(img, 0.5 * factor);
  const int off = (factor - 1) / 2;
  GrayImage out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) out.at(x, y) = blurred.at(x * factor + off, y * factor + off);
  return out;
}

EdgeMap canny(const GrayImage& img, double sigma, double low, double high) {
  if (!(sigma > 0)) throw std::invalid_argument("canny sigma must be > 0");
  if (low < 0 || low > high) throw InvalidThresholds("need 0 <= low <= high");

  const int w = img.width, h = img.height;
  EdgeMap result(w, h);
  if (w < 3 || h < 3) return result;

  const GrayImage smooth = blur_dense(img, sigma);

  std::vector<double> mag(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> gxv(mag.size(), 0.0), gyv(mag.size(), 0.0);
  double gmax = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double gx = -smooth.at(x - 1, y - 1) + smooth.at(x + 1, y - 1)        //
                        - 2.0 * smooth.at(x - 1, y) + 2.0 * smooth.at(x + 1, y)   //
                        - smooth.at(x - 1, y + 1) + smooth.at(x + 1, y + 1);
      const double gy = -smooth.at(x - 1, y - 1) - 2.0 * smooth.at(x, y - 1) -
                        smooth.at(x + 1, y - 1)                                   //
                        + smooth.at(x - 1, y + 1) + 2.0 * smooth.at(x, y + 1) +
                        smooth.at(x + 1, y + 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gxv[i] = gx;
      gyv[i] = gy;
      mag[i] = std::sqrt(gx * gx + gy * gy);
      gmax = std::max(gmax, mag[i]);
    }
  }
  // Flat images produce only rounding-level gradients; with thresholds
  // expressed relative to the maximum, those would be amplified into edges.
  if (gmax <= 1e-12) return result;

  const double lo_t = low * gmax, hi_t = high * gmax;

  // gradient-direction offsets per angle sector
  static constexpr int kDir[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  std::vector<std::uint8_t> cls(mag.size(), 0);  // 0 none, 1 weak, 2 strong
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m = mag[i];
      if (m < lo_t || m <= 0.0) continue;
      double angle = std::atan2(gyv[i], gxv[i]);
      if (angle < 0) angle += std::numbers::pi;
      const int sector =
          static_cast<int>((angle + std::numbers::pi / 8.0) / (std::numbers::pi / 4.0)) % 4;
      const int dx = kDir[sector][0], dy = kDir[sector][1];
      const double m1 = mag[static_cast<std::size_t>(y + dy) * w + (x + dx)];
      const double m2 = mag[static_cast<std::size_t>(y - dy) * w + (x - dx)];
      if (m >= m1 && m >= m2) cls[i] = (m >= hi_t) ? 2 : 1;
    }
  }

  // hysteresis: grow from strong pixels through weak ones (8-connected)
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (cls[i] == 2) {
      result.edges[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (cls[j] == 1 && !result.edges[j]) {
          result.edges[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return result;
}

ConvexityCodeMap convex_direction_code(const EdgeMap& edges, int window, double curvature_eps) {
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("window must be odd and >= 3");
  if (!(curvature_eps > 0)) throw std::invalid_argument("curvature_eps must be > 0");

  const int w = edges.width, h = edges.height;
  ConvexityCodeMap out(w, h);

  std::vector<int> top_y(w, -1);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y)
      if (edges.at(x, y)) {
        top_y[x] = y;
        break;
      }

  // The support set depends only on the column, so codes are computed per
  // column and painted onto that column's edge pixels.
  const int hw = window / 2;
  std::vector<std::int8_t> col_code(w, 0);
  for (int x = 0; x < w; ++x) {
    if (top_y[x] < 0) continue;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    int n = 0;
    for (int xi = std::max(0, x - hw); xi <= std::min(w - 1, x + hw); ++xi) {
      if (top_y[xi] < 0) continue;
      const double u = xi - x;  // center for conditioning; leaves 'a' unchanged
      const double yv = top_y[xi];
      const double u2 = u * u;
      s1 += u;
      s2 += u2;
      s3 += u2 * u;
      s4 += u2 * u2;
      t0 += yv;
      t1 += u * yv;
      t2 += u2 * yv;
      ++n;
    }
    if (n < 3) continue;
    const double s0 = n;
    // Cramer's rule on the quadratic normal equations
    const double det = s4 * (s2 * s0 - s1 * s1) - s3 * (s3 * s0 - s1 * s2) +
                       s2 * (s3 * s1 - s2 * s2);
    if (std::abs(det) < 1e-12) continue;
    const double det_a = t2 * (s2 * s0 - s1 * s1) - s3 * (t1 * s0 - t0 * s1) +
                         s2 * (t1 * s1 - t0 * s2);
    const double a = det_a / det;
    col_code[x] = a > curvature_eps ? 1 : (a < -curvature_eps ? -1 : 0);
  }

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (edges.at(x, y)) out.codes[static_cast<std::size_t>(y) * w + x] = col_code[x];
  return out;
}

LineFit find_x_axis(const EdgeMap& edges) {
  const int w = edges.width, h = edges.height;
  const int band_start = (2 * h) / 3;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int x = 0; x < w; ++x) {
    int bottom = -1;
    for (int y = h - 1; y >= band_start; --y)
      if (edges.at(x, y)) {
        bottom = y;
        break;
      }
    if (bottom < 0) continue;
    sx += x;
    sy += bottom;
    sxx += static_cast<double>(x) * x;
    sxy += static_cast<double>(x) * bottom;
    ++n;
  }
  if (n < 2) throw InsufficientBoundary("need >= 2 boundary columns in the bottom third, got " +
                                        std::to_string(n));

  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InsufficientBoundary("boundary columns are degenerate");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

int find_y_axis(const ConvexityCodeMap& codes, int window_cols) {
  if (window_cols < 1) throw std::invalid_argument("window_cols must be >= 1");
  const int w = codes.width, h = codes.height;

  std::vector<long long> col_sum(w, 0);
  bool any = false;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int c = codes.at(x, y);
      if (c != 0) {
        col_sum[x] += c;
        any = true;
      }
    }
  if (!any) throw EmptyCodeMap();

  std::vector<long long> prefix(w + 1, 0);
  for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + col_sum[x];

  int best_x = 0;
  long long best = -1;
  for (int x = 0; x < w; ++x) {
    const int lo = std::max(0, x - window_cols);
    const int hi = std::min(w - 1, x + window_cols);
    const long long s = std::llabs(prefix[hi + 1] - prefix[lo]);
    if (best < 0 || s < best) {
      best = s;
      best_x = x;
    }
  }
  return best_x;
}

GrayImage extract_roi(const GrayImage& img, const RoiParams& params) {
  if (params.bypass) {
    if (img.width != kRoiWidth || img.height != kRoiHeight)
      throw RoiOutOfBounds("bypass requires a " + std::to_string(kRoiWidth) + "x" +
                           std::to_string(kRoiHeight) + " input, got " +
                           std::to_string(img.width) + "x" + std::to_string(img.height));
    return minmax_stretch(img);
  }

  const GrayImage ds = downsample(img, params.factor);
  const EdgeMap edges = canny(ds, params.sigma, params.low, params.high);
  const ConvexityCodeMap codes = convex_direction_code(edges, params.window, params.eps);
  const LineFit axis_ds = find_x_axis(edges);
  const int xstar_ds = find_y_axis(codes, params.ycols);

  // back to full-resolution coordinates (decimation keeps pixel (i*f + off))
  const double f = params.factor;
  const double off = (params.factor - 1) / 2;
  const double slope = axis_ds.slope;
  const double intercept = axis_ds.intercept * f + off * (1.0 - slope);
  const double x0 = xstar_ds * f + off;
  const double y0 = slope * x0 + intercept;

  const double theta = std::atan(slope);
  const double c = std::cos(theta), s = std::sin(theta);

  // corners of the crop rectangle in the leveled frame, mapped back to source
  const double half_w = kRoiWidth / 2.0;
  for (const auto& [rx, ry] : {std::pair{-half_w, -double(kRoiHeight)}, {half_w, -double(kRoiHeight)},
                               {-half_w, 0.0}, {half_w, 0.0}}) {
    const double sx = x0 + c * rx - s * ry;
    const double sy = y0 + s * rx + c * ry;
    if (sx < -0.5 || sx > img.width - 0.5 || sy < -0.5 || sy > img.height - 0.5)
      throw RoiOutOfBounds("crop corner (" + std::to_string(sx) + ", " + std::to_string(sy) +
                           ") outside source image");
  }

  GrayImage roi(kRoiWidth, kRoiHeight);
  for (int v = 0; v < kRoiHeight; ++v) {
    for (int u = 0; u < kRoiWidth; ++u) {
      const double rx = u + 0.5 - half_w;
      const double ry = v + 0.5 - kRoiHeight;
      const double sx = x0 + c * rx - s * ry;
      const double sy = y0 + s * rx + c * ry;
      roi.at(u, v) = bilinear_at(img, sx, sy);
    }
  }
  return minmax_stretch(roi);
}

}  // namespace fkp

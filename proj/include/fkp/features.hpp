#ifndef FKP_FEATURES_HPP_
#define FKP_FEATURES_HPP_

#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <vector>

#include "fkp/dataset.hpp"
#include "fkp/image.hpp"

namespace fkp {

struct LogGaborParams {
  int orientations = 6;
  int scales = 1;
  double f0 = 1.0 / 12.0;   // base center frequency, cycles/pixel
  double mult = 2.0;        // scale multiplier between consecutive scales
  double sigma_ratio = 0.65;  // sigma_f / f0 of the radial log-Gaussian
  double angular_sigma = (std::numbers::pi / 6.0) / 1.2;  // radians
  int grid_x = 16;          // sampling blocks along x
  int grid_y = 32;          // sampling blocks along y
  int taper_px = 8;         // raised-cosine border width applied before the transform
};

// Frequency-domain log-Gabor filter bank for a fixed raster size. Radial
// profile exp(-(log(f/f0))^2 / (2 log(sigma_ratio)^2)) peaks at 1 and is
// exactly 0 at the DC bin; the angular Gaussian is one-sided so responses
// stay complex.
class LogGaborBank {
public:
  LogGaborBank(const LogGaborParams& params, int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  const LogGaborParams& params() const { return params_; }
  int num_filters() const { return params_.scales * params_.orientations; }

  double center_frequency(int scale) const;
  double orientation(int o) const { return o * std::numbers::pi / params_.orientations; }
  double radial(int scale, double f) const;

  // transfer function raster for (scale, orientation), row-major over FFT bins
  const std::vector<double>& transfer(int scale, int orientation) const {
    return transfer_[static_cast<std::size_t>(scale) * params_.orientations + orientation];
  }

  // feature dimension D = 2 * O * S * Gx * Gy
  std::size_t feature_dim() const {
    return 2ull * params_.orientations * params_.scales * params_.grid_x * params_.grid_y;
  }

private:
  LogGaborParams params_;
  int width_, height_;
  std::vector<std::vector<double>> transfer_;  // scale-major, orientation-minor
};

struct ComplexRaster {
  int width = 0;
  int height = 0;
  std::vector<std::complex<double>> values;
};

// Frequency-domain filtering: inverse transform of (forward transform of the
// input x transfer function), one complex raster per (scale, orientation) in
// bank order. The input is taken as-is; see prepare_field for the encoding
// front end.
std::vector<ComplexRaster> filter_image(const GrayImage& roi, const LogGaborBank& bank);

// Mean-subtracted, border-tapered copy of the ROI. Subtracting the mean keeps
// encodings invariant to global intensity offsets; the raised-cosine taper
// suppresses periodic wrap-around edges.
GrayImage prepare_field(const GrayImage& roi, int taper_px);

// Block means of each response on a grid_x x grid_y grid, concatenated as
// (real, imaginary) per block in (scale-major, orientation-minor, row-major
// grid) order. Length is feature_dim().
std::vector<double> encode_features(const std::vector<ComplexRaster>& responses, int grid_x,
                                    int grid_y);

// prepare_field -> filter_image -> encode_features with the bank's grid.
std::vector<double> encode_roi(const GrayImage& roi, const LogGaborBank& bank);

struct SampleKey {
  std::uint32_t subject = 0;
  std::uint8_t session = 1;
  std::uint16_t sample = 1;

  friend auto operator<=>(const SampleKey&, const SampleKey&) = default;
};

struct FeatureVector {
  std::vector<double> values;
  FingerInstance instance = FingerInstance::RI;
  SampleKey key;
};

struct FeatureFileHeader {
  std::uint32_t dim = 0;
  std::uint32_t count = 0;
  std::uint32_t orientations = 0;
  std::uint32_t scales = 0;
  std::uint32_t grid_x = 0;
  std::uint32_t grid_y = 0;
};

struct FeatureStore {
  FeatureFileHeader header;
  std::vector<FeatureVector> records;
};

// FKPF1 container: magic "FKPF1", six little-endian u32 header fields, then
// per record subject (u32), instance code (u8), session (u8), sample (u16),
// and dim 32-bit little-endian floats.
void save_features(const std::filesystem::path& path, const FeatureStore& store);
FeatureStore load_features(const std::filesystem::path& path);

}  // namespace fkp

#endif  // FKP_FEATURES_HPP_

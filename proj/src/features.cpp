#include "fkp/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>

#include "fkp/errors.hpp"
#include "fkp/image.hpp"

namespace fkp {

namespace {

double signed_frequency(int index, int size) {
  return (index <= size / 2 ? index : index - size) / static_cast<double>(size);
}

}  // namespace

LogGaborBank::LogGaborBank(const LogGaborParams& params, int width, int height)
    : params_(params), width_(width), height_(height) {
  if (params.orientations < 1 || params.scales < 1)
    throw std::invalid_argument("bank needs >= 1 orientation and scale");
  if (!(params.f0 > 0) || !(params.mult > 0))
    throw std::invalid_argument("f0 and mult must be positive");
  if (!(params.sigma_ratio > 0) || !(params.sigma_ratio < 1))
    throw std::invalid_argument("sigma_ratio must be in (0,1)");
  if (!(params.angular_sigma > 0)) throw std::invalid_argument("angular_sigma must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("raster must be non-empty");
  for (int s = 0; s < params.scales; ++s) {
    if (center_frequency(s) >= 0.5) throw NyquistViolation(center_frequency(s));
  }

  const double log_sr = std::log(params.sigma_ratio);
  const double radial_denom = 2.0 * log_sr * log_sr;
  const double angular_denom = 2.0 * params.angular_sigma * params.angular_sigma;

  transfer_.reserve(static_cast<std::size_t>(params.scales) * params.orientations);
  for (int s = 0; s < params.scales; ++s) {
    const double f0 = center_frequency(s);
    for (int o = 0; o < params.orientations; ++o) {
      const double theta0 = orientation(o);
      const double c0 = std::cos(theta0), s0 = std::sin(theta0);
      std::vector<double> t(static_cast<std::size_t>(width) * height, 0.0);
      for (int v = 0; v < height; ++v) {
        const double fy = signed_frequency(v, height);
        for (int u = 0; u < width; ++u) {
          const double fx = signed_frequency(u, width);
          const double f = std::sqrt(fx * fx + fy * fy);
          if (f <= 0.0) continue;  // DC stays exactly 0
          const double lr = std::log(f / f0);
          const double radial = std::exp(-(lr * lr) / radial_denom);
          // wrapped angle distance to the filter direction (one-sided, period 2*pi)
          const double dtheta =
              std::atan2(fy * c0 - fx * s0, fx * c0 + fy * s0);
          const double angular = std::exp(-(dtheta * dtheta) / angular_denom);
          t[static_cast<std::size_t>(v) * width + u] = radial * angular;
        }
      }
      transfer_.push_back(std::move(t));
    }
  }
}

double LogGaborBank::center_frequency(int scale) const {
  return params_.f0 * std::pow(params_.mult, scale);
}

double LogGaborBank::radial(int scale, double f) const {
  if (f <= 0.0) return 0.0;
  const double log_sr = std::log(params_.sigma_ratio);
  const double lr = std::log(f / center_frequency(scale));
  return std::exp(-(lr * lr) / (2.0 * log_sr * log_sr));
}

// ---------------------------------------------------------------------------
// FFT engine (FFTW, complex-to-complex, FFTW_ESTIMATE for reproducible plans)
// ---------------------------------------------------------------------------

namespace {

class FftEngine {
public:
  FftEngine(int width, int height) : width_(width), height_(height) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    forward_ = fftw_plan_dft_2d(height, width, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(height, width, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~FftEngine() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(in_);
    fftw_free(out_);
  }

  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& data) {
    return run(forward_, data);
  }

  // unnormalized inverse; caller divides by N
  std::vector<std::complex<double>> backward(const std::vector<std::complex<double>>& data) {
    return run(backward_, data);
  }

private:
  std::vector<std::complex<double>> run(fftw_plan plan,
                                        const std::vector<std::complex<double>>& data) {
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    // std::complex<double> is layout-compatible with fftw_complex (double[2])
    std::memcpy(static_cast<void*>(in_), static_cast<const void*>(data.data()),
                n * sizeof(fftw_complex));
    fftw_execute(plan);
    std::vector<std::complex<double>> result(n);
    std::memcpy(static_cast<void*>(result.data()), static_cast<const void*>(out_),
                n * sizeof(fftw_complex));
    return result;
  }

  int width_, height_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan forward_;
  fftw_plan backward_;
};

// Single-threaded plan cache, keyed by raster size.
FftEngine& engine_for(int width, int height) {
  static std::map<std::pair<int, int>, std::unique_ptr<FftEngine>> cache;
  auto& slot = cache[{width, height}];
  if (!slot) slot = std::make_unique<FftEngine>(width, height);
  return *slot;
}

}  // namespace

std::vector<ComplexRaster> filter_image(const GrayImage& roi, const LogGaborBank& bank) {
  if (roi.width != bank.width() || roi.height != bank.height())
    throw DimensionMismatch("image is " + std::to_string(roi.width) + "x" +
                            std::to_string(roi.height) + ", bank is " +
                            std::to_string(bank.width()) + "x" + std::to_string(bank.height()));

  const std::size_t n = roi.pixels.size();
  FftEngine& engine = engine_for(roi.width, roi.height);

  std::vector<std::complex<double>> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = roi.pixels[i];
  const auto spectrum = engine.forward(field);

  std::vector<ComplexRaster> responses;
  responses.reserve(bank.num_filters());
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::complex<double>> product(n);
  for (int s = 0; s < bank.params().scales; ++s) {
    for (int o = 0; o < bank.params().orientations; ++o) {
      const auto& t = bank.transfer(s, o);
      for (std::size_t i = 0; i < n; ++i) product[i] = spectrum[i] * t[i];
      auto back = engine.backward(product);
      for (auto& v : back) v *= inv_n;
      responses.push_back(ComplexRaster{roi.width, roi.height, std::move(back)});
    }
  }
  return responses;
}

GrayImage prepare_field(const GrayImage& roi, int taper_px) {
  GrayImage out(roi.width, roi.height);
  const double mean = image_mean(roi);

  auto taper = [taper_px](int i, int size) {
    if (taper_px <= 0) return 1.0;
    const int d = std::min(i, size - 1 - i);
    if (d >= taper_px) return 1.0;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * (d + 0.5) / taper_px));
  };

  for (int y = 0; y < roi.height; ++y) {
    const double wy = taper(y, roi.height);
    for (int x = 0; x < roi.width; ++x)
      out.at(x, y) = (roi.at(x, y) - mean) * wy * taper(x, roi.width);
  }
  return out;
}

std::vector<double> encode_features(const std::vector<ComplexRaster>& responses, int grid_x,
                                    int grid_y) {
  if (responses.empty()) throw std::invalid_argument("no responses to encode");
  const int w = responses.front().width, h = responses.front().height;
  if (grid_x < 1 || grid_y < 1) throw std::invalid_argument("grid must be >= 1x1");
  if (grid_x > w || grid_y > h)
    throw GridTooFine(std::to_string(grid_x) + "x" + std::to_string(grid_y) + " grid on a " +
                      std::to_string(w) + "x" + std::to_string(h) + " raster");

  std::vector<double> features;
  features.reserve(2ull * responses.size() * grid_x * grid_y);
  for (const auto& resp : responses) {
    if (resp.width != w || resp.height != h)
      throw DimensionMismatch("response rasters differ in size");
    for (int gy = 0; gy < grid_y; ++gy) {
      const int y0 = gy * h / grid_y, y1 = (gy + 1) * h / grid_y;
      for (int gx = 0; gx < grid_x; ++gx) {
        const int x0 = gx * w / grid_x, x1 = (gx + 1) * w / grid_x;
        std::complex<double> acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x)
            acc += resp.values[static_cast<std::size_t>(y) * w + x];
        acc /= static_cast<double>((y1 - y0) * (x1 - x0));
        features.push_back(acc.real());
        features.push_back(acc.imag());
      }
    }
  }
  return features;
}

std::vector<double> encode_roi(const GrayImage& roi, const LogGaborBank& bank) {
  const GrayImage prepared = prepare_field(roi, bank.params().taper_px);
  return encode_features(filter_image(prepared, bank), bank.params().grid_x,
                         bank.params().grid_y);
}

// ---------------------------------------------------------------------------
// FKPF1 feature container
// ---------------------------------------------------------------------------

namespace {

constexpr char kFeatureMagic[5] = {'F', 'K', 'P', 'F', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(std::uint16_t(b[0]) | (std::uint16_t(b[1]) << 8));
}

float read_f32(std::istream& in) {
  const std::uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_features(const std::filesystem::path& path, const FeatureStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path.string());

  out.write(kFeatureMagic, sizeof(kFeatureMagic));
  write_u32(out, store.header.dim);
  write_u32(out, static_cast<std::uint32_t>(store.records.size()));
  write_u32(out, store.header.orientations);
  write_u32(out, store.header.scales);
  write_u32(out, store.header.grid_x);
  write_u32(out, store.header.grid_y);

  for (const auto& rec : store.records) {
    if (rec.values.size() != store.header.dim)
      throw DimensionMismatch("record has " + std::to_string(rec.values.size()) +
                              " values, header says " + std::to_string(store.header.dim));
    write_u32(out, rec.key.subject);
    out.put(static_cast<char>(rec.instance));
    out.put(static_cast<char>(rec.key.session));
    write_u16(out, rec.key.sample);
    for (double v : rec.values) write_f32(out, static_cast<float>(v));
  }
  if (!out) throw IoFailure(path.string());
}

FeatureStore load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure(path.string());

  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kFeatureMagic, 5) != 0)
    throw Error("not a FKPF1 feature file: " + path.string());

  FeatureStore store;
  store.header.dim = read_u32(in);
  const std::uint32_t count = read_u32(in);
  store.header.count = count;
  store.header.orientations = read_u32(in);
  store.header.scales = read_u32(in);
  store.header.grid_x = read_u32(in);
  store.header.grid_y = read_u32(in);
  if (!in) throw Error("truncated feature file header: " + path.string());

  const std::uint64_t expected_dim = 2ull * store.header.orientations * store.header.scales *
                                     store.header.grid_x * store.header.grid_y;
  if (store.header.dim != expected_dim)
    throw Error("feature header dim inconsistent with bank geometry: " + path.string());

  store.records.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    FeatureVector rec;
    rec.key.subject = read_u32(in);
    const int inst = in.get();
    const int session = in.get();
    rec.key.sample = read_u16(in);
    if (inst < 0 || inst > 3 || (session != 1 && session != 2))
      throw Error("corrupt feature record " + std::to_string(r) + " in " + path.string());
    rec.instance = static_cast<FingerInstance>(inst);
    rec.key.session = static_cast<std::uint8_t>(session);
    rec.values.resize(store.header.dim);
    for (auto& v : rec.values) v = read_f32(in);
    if (!in) throw Error("truncated feature record " + std::to_string(r) + " in " + path.string());
    store.records.push_back(std::move(rec));
  }
  return store;
}

}  // namespace fkp

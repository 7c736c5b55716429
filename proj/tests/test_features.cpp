#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fkp/errors.hpp"
#include "fkp/features.hpp"
#include "fkp/preprocess.hpp"
#include "oracles/naive_dft.hpp"
#include "test_util.hpp"

using namespace fkp;

namespace {

GrayImage random_roi(std::uint32_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  GrayImage img(kRoiWidth, kRoiHeight);
  for (auto& p : img.pixels) p = dist(rng);
  return img;
}

LogGaborBank default_bank() { return LogGaborBank(LogGaborParams{}, kRoiWidth, kRoiHeight); }

}  // namespace

TEST_CASE("bank transfer functions are exactly zero at the DC bin") {
  const LogGaborBank bank = default_bank();
  for (int s = 0; s < bank.params().scales; ++s)
    for (int o = 0; o < bank.params().orientations; ++o) {
      const auto& t = bank.transfer(s, o);
      CHECK(t[0] == 0.0);  // bit-level
    }
}

TEST_CASE("radial profile peaks at exactly 1 at the center frequency") {
  const LogGaborBank bank = default_bank();
  for (int s = 0; s < bank.params().scales; ++s) {
    CHECK(bank.radial(s, bank.center_frequency(s)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bank.radial(s, bank.center_frequency(s) * 2.1) < 1.0);
    CHECK(bank.radial(s, bank.center_frequency(s) * 0.4) < 1.0);
  }
}

TEST_CASE("orientations are evenly spaced over [0, pi)") {
  const LogGaborBank bank = default_bank();
  REQUIRE(bank.params().orientations == 6);
  for (int o = 0; o < 6; ++o)
    CHECK(bank.orientation(o) == doctest::Approx(o * std::numbers::pi / 6.0).epsilon(1e-15));
}

TEST_CASE("center frequencies at or beyond Nyquist are rejected") {
  LogGaborParams params;
  params.f0 = 0.3;
  params.mult = 2.0;
  params.scales = 2;  // 0.3 * 2 = 0.6 >= 0.5
  CHECK_THROWS_AS(LogGaborBank(params, kRoiWidth, kRoiHeight), NyquistViolation);
}

TEST_CASE("feature dimension follows 2*O*S*Gx*Gy") {
  const LogGaborBank bank = default_bank();
  CHECK(bank.feature_dim() == 2ull * 6 * 1 * 16 * 32);
  CHECK(bank.feature_dim() == 6144);
}

TEST_CASE("constant images produce negligible responses") {
  const LogGaborBank bank = default_bank();
  const GrayImage roi(kRoiWidth, kRoiHeight, 0.5);
  const auto responses = filter_image(roi, bank);
  REQUIRE(responses.size() == 6);
  for (const auto& resp : responses)
    for (const auto& v : resp.values) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("impulse response equals the filter's spatial kernel") {
  LogGaborParams params;
  params.orientations = 2;
  const LogGaborBank bank(params, kRoiWidth, kRoiHeight);

  GrayImage impulse(kRoiWidth, kRoiHeight, 0.0);
  const int cx = kRoiWidth / 2, cy = kRoiHeight / 2;
  impulse.at(cx, cy) = 1.0;
  const auto responses = filter_image(impulse, bank);

  for (int o = 0; o < params.orientations; ++o) {
    const auto& t = bank.transfer(0, o);
    std::vector<std::complex<double>> spectrum(t.begin(), t.end());
    const auto kernel = fkp_tests::naive_dft_2d(spectrum, kRoiWidth, kRoiHeight, +1);

    double max_err = 0.0;
    for (int y = 0; y < kRoiHeight; ++y)
      for (int x = 0; x < kRoiWidth; ++x) {
        const int sy = ((y - cy) % kRoiHeight + kRoiHeight) % kRoiHeight;
        const int sx = ((x - cx) % kRoiWidth + kRoiWidth) % kRoiWidth;
        const auto expected = kernel[static_cast<std::size_t>(sy) * kRoiWidth + sx];
        const auto got = responses[o].values[static_cast<std::size_t>(y) * kRoiWidth + x];
        max_err = std::max(max_err, std::abs(got - expected));
      }
    CHECK(max_err <= 1e-9);
  }
}

TEST_CASE("a sinusoid at f0 excites its own orientation most") {
  const LogGaborBank bank = default_bank();
  const double f0 = bank.center_frequency(0);
  GrayImage roi(kRoiWidth, kRoiHeight);
  for (int y = 0; y < kRoiHeight; ++y)
    for (int x = 0; x < kRoiWidth; ++x)
      roi.at(x, y) = 0.5 + 0.4 * std::cos(2.0 * std::numbers::pi * f0 * x);

  const auto responses = filter_image(roi, bank);
  auto mean_mag = [](const ComplexRaster& r) {
    double acc = 0;
    for (const auto& v : r.values) acc += std::abs(v);
    return acc / r.values.size();
  };
  // orientation 0 is along fx, i.e. a horizontally varying sinusoid
  CHECK(mean_mag(responses[0]) > mean_mag(responses[3]));
}

TEST_CASE("grid 1x1 encoding is the raster mean per filter") {
  LogGaborParams params;
  params.orientations = 2;
  const LogGaborBank bank(params, kRoiWidth, kRoiHeight);
  const GrayImage roi = random_roi(5);
  const auto responses = filter_image(roi, bank);
  const auto features = encode_features(responses, 1, 1);
  REQUIRE(features.size() == 4);  // 2 filters x (re, im)

  for (int o = 0; o < 2; ++o) {
    std::complex<double> mean = 0.0;
    for (const auto& v : responses[o].values) mean += v;
    mean /= static_cast<double>(responses[o].values.size());
    CHECK(features[2 * o] == doctest::Approx(mean.real()).epsilon(1e-12));
    CHECK(features[2 * o + 1] == doctest::Approx(mean.imag()).epsilon(1e-12));
  }
}

TEST_CASE("encoding rejects grids finer than the raster") {
  const LogGaborBank bank = default_bank();
  const auto responses = filter_image(random_roi(6), bank);
  CHECK_THROWS_AS(encode_features(responses, kRoiWidth + 1, 4), GridTooFine);
  CHECK_THROWS_AS(encode_features(responses, 4, kRoiHeight + 1), GridTooFine);
}

TEST_CASE("filter_image requires matching dimensions") {
  const LogGaborBank bank = default_bank();
  const GrayImage wrong(64, 64, 0.5);
  CHECK_THROWS_AS(filter_image(wrong, bank), DimensionMismatch);
}

TEST_CASE("encodings are invariant to a global intensity offset") {
  const LogGaborBank bank = default_bank();
  const GrayImage roi = random_roi(7, 0.1, 0.7);
  GrayImage shifted = roi;
  for (auto& p : shifted.pixels) p += 0.2;

  const auto a = encode_roi(roi, bank);
  const auto b = encode_roi(shifted, bank);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
}

TEST_CASE("filtering is linear") {
  const LogGaborBank bank = default_bank();
  const GrayImage r1 = random_roi(8), r2 = random_roi(9);
  const double a = 0.3, b = 0.45;
  GrayImage mix(kRoiWidth, kRoiHeight);
  for (std::size_t i = 0; i < mix.pixels.size(); ++i)
    mix.pixels[i] = a * r1.pixels[i] + b * r2.pixels[i];

  const auto f1 = filter_image(r1, bank);
  const auto f2 = filter_image(r2, bank);
  const auto fm = filter_image(mix, bank);
  for (std::size_t k = 0; k < fm.size(); ++k)
    for (std::size_t i = 0; i < fm[k].values.size(); ++i) {
      const auto expected = a * f1[k].values[i] + b * f2[k].values[i];
      CHECK(std::abs(fm[k].values[i] - expected) <= 1e-9);
    }
}

TEST_CASE("encoding is deterministic") {
  const LogGaborBank bank = default_bank();
  const GrayImage roi = random_roi(10);
  CHECK(encode_roi(roi, bank) == encode_roi(roi, bank));
}

TEST_CASE("feature files round-trip through FKPF1") {
  fkp_tests::TempDir dir("fkpf");
  const std::uint32_t dim = 2 * 1 * 1 * 2 * 2;

  FeatureStore store;
  store.header = {dim, 0, 1, 1, 2, 2};
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int r = 0; r < 5; ++r) {
    FeatureVector v;
    v.instance = static_cast<FingerInstance>(r % 4);
    v.key = {static_cast<std::uint32_t>(r + 1), static_cast<std::uint8_t>(1 + r % 2),
             static_cast<std::uint16_t>(r + 1)};
    for (std::uint32_t i = 0; i < dim; ++i) v.values.push_back(dist(rng));
    store.records.push_back(std::move(v));
  }
  store.header.count = 5;

  const auto path = dir.path() / "features.fkpf";
  save_features(path, store);
  const FeatureStore loaded = load_features(path);

  CHECK(loaded.header.dim == dim);
  CHECK(loaded.header.count == 5);
  CHECK(loaded.header.grid_x == 2);
  REQUIRE(loaded.records.size() == 5);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(loaded.records[r].instance == store.records[r].instance);
    CHECK(loaded.records[r].key == store.records[r].key);
    REQUIRE(loaded.records[r].values.size() == dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      // values survive exactly up to the format's f32 quantization
      CHECK(loaded.records[r].values[i] ==
            static_cast<double>(static_cast<float>(store.records[r].values[i])));
    }
  }
}

TEST_CASE("feature loader rejects foreign files") {
  fkp_tests::TempDir dir("fkpf_bad");
  fkp_tests::write_file(dir.path() / "bad.fkpf", "not a feature file at all");
  CHECK_THROWS_AS(load_features(dir.path() / "bad.fkpf"), Error);
  CHECK_THROWS_AS(load_features(dir.path() / "missing.fkpf"), IoFailure);
}

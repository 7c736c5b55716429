#include "fkp/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fkp/errors.hpp"

namespace fkp {

const char* scheme_name(NormScheme scheme) {
  switch (scheme) {
    case NormScheme::MinMax: return "minmax";
    case NormScheme::ZScore: return "zscore";
    case NormScheme::MedianMad: return "mad";
    case NormScheme::Tanh: return "tanh";
  }
  return "?";
}

std::optional<NormScheme> parse_scheme(std::string_view name) {
  if (name == "minmax") return NormScheme::MinMax;
  if (name == "zscore") return NormScheme::ZScore;
  if (name == "mad") return NormScheme::MedianMad;
  if (name == "tanh") return NormScheme::Tanh;
  return std::nullopt;
}

namespace {

// median with the even-count midpoint rule; sorts its argument
double median_inplace(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

NormalizationStats fit_stats(const std::vector<FeatureVector>& training, NormScheme scheme) {
  if (training.size() < 2) throw EmptyTrainingSet(training.size());
  const std::size_t dim = training.front().values.size();
  for (const auto& v : training)
    if (v.values.size() != dim)
      throw DimensionMismatch("training vectors have mixed dimensions");

  NormalizationStats stats;
  stats.scheme = scheme;
  stats.n_train = training.size();
  stats.param1.resize(dim);
  stats.param2.resize(dim);
  stats.degenerate_mask.assign(dim, 0);

  const double n = static_cast<double>(training.size());
  std::vector<double> column(training.size());
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < training.size(); ++i) column[i] = training[i].values[j];
    const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
    const bool constant = (*lo_it == *hi_it);

    switch (scheme) {
      case NormScheme::MinMax: {
        stats.param1[j] = *lo_it;
        stats.param2[j] = *hi_it;
        stats.degenerate_mask[j] = constant;
        break;
      }
      case NormScheme::ZScore:
      case NormScheme::Tanh: {
        double mean = 0.0;
        for (double v : column) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : column) var += (v - mean) * (v - mean);
        var /= n;  // population variance
        stats.param1[j] = mean;
        stats.param2[j] = constant ? 0.0 : std::sqrt(var);
        stats.degenerate_mask[j] = constant;
        break;
      }
      case NormScheme::MedianMad: {
        std::vector<double> col = column;
        const double med = median_inplace(col);
        for (auto& v : col) v = std::abs(v - med);
        const double mad = median_inplace(col);
        stats.param1[j] = med;
        stats.param2[j] = mad;
        stats.degenerate_mask[j] = (mad == 0.0);
        break;
      }
    }
    if (stats.degenerate_mask[j]) stats.degenerate_dims.push_back(static_cast<std::uint32_t>(j));
  }
  return stats;
}

NormalizedFeature normalize(const FeatureVector& v, const NormalizationStats& stats) {
  if (v.values.size() != stats.dim())
    throw DimensionMismatch("vector has " + std::to_string(v.values.size()) +
                            " dims, stats have " + std::to_string(stats.dim()));

  NormalizedFeature out;
  out.instance = v.instance;
  out.key = v.key;
  out.scheme = stats.scheme;
  out.values.resize(v.values.size());

  for (std::size_t j = 0; j < v.values.size(); ++j) {
    if (stats.degenerate_mask[j]) {
      out.values[j] = 0.0;
      continue;
    }
    const double s = v.values[j];
    switch (stats.scheme) {
      case NormScheme::MinMax:
        out.values[j] = (s - stats.param1[j]) / (stats.param2[j] - stats.param1[j]);
        break;
      case NormScheme::ZScore:
        out.values[j] = (s - stats.param1[j]) / stats.param2[j];
        break;
      case NormScheme::MedianMad:
        out.values[j] = (s - stats.param1[j]) / stats.param2[j];
        break;
      case NormScheme::Tanh:
        out.values[j] =
            0.5 * (std::tanh(0.01 * ((s - stats.param1[j]) / stats.param2[j])) + 1.0);
        break;
    }
  }
  return out;
}

FusedTemplate fuse(const std::vector<NormalizedFeature>& components) {
  if (components.empty() || components.size() > 4)
    throw std::invalid_argument("fuse takes 1-4 components");

  for (std::size_t i = 1; i < components.size(); ++i) {
    if (components[i].scheme != components.front().scheme) throw MixedSchemes();
    if (components[i].key != components.front().key)
      throw KeyMismatch("component " + std::to_string(i) + " has a different sample key");
  }

  std::vector<const NormalizedFeature*> ordered;
  ordered.reserve(components.size());
  for (const auto& c : components) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return static_cast<int>(a->instance) < static_cast<int>(b->instance);
  });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i]->instance == ordered[i - 1]->instance)
      throw DuplicateInstance(to_code(ordered[i]->instance));

  FusedTemplate fused;
  fused.scheme = components.front().scheme;
  fused.key = components.front().key;
  for (const auto* c : ordered) {
    fused.instance_set.push_back(c->instance);
    fused.component_dims.push_back(static_cast<std::uint32_t>(c->values.size()));
    fused.values.insert(fused.values.end(), c->values.begin(), c->values.end());
  }
  return fused;
}

std::vector<NormalizedFeature> split(const FusedTemplate& fused) {
  std::vector<NormalizedFeature> parts;
  parts.reserve(fused.instance_set.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < fused.instance_set.size(); ++i) {
    NormalizedFeature part;
    part.instance = fused.instance_set[i];
    part.key = fused.key;
    part.scheme = fused.scheme;
    part.values.assign(fused.values.begin() + offset,
                       fused.values.begin() + offset + fused.component_dims[i]);
    offset += fused.component_dims[i];
    parts.push_back(std::move(part));
  }
  return parts;
}

// ---------------------------------------------------------------------------
// FKN1 sidecar
// ---------------------------------------------------------------------------

namespace {

constexpr char kStatsMagic[4] = {'F', 'K', 'N', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_stats(const std::filesystem::path& path, const NormalizationStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path.string());
  out.write(kStatsMagic, sizeof(kStatsMagic));
  out.put(static_cast<char>(stats.scheme));
  write_u32(out, static_cast<std::uint32_t>(stats.dim()));
  for (std::size_t j = 0; j < stats.dim(); ++j) {
    write_f64(out, stats.param1[j]);
    write_f64(out, stats.param2[j]);
  }
  write_u32(out, static_cast<std::uint32_t>(stats.degenerate_dims.size()));
  for (auto idx : stats.degenerate_dims) write_u32(out, idx);
  if (!out) throw IoFailure(path.string());
}

NormalizationStats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure(path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kStatsMagic, 4) != 0)
    throw Error("not a FKN1 stats file: " + path.string());

  NormalizationStats stats;
  const int scheme = in.get();
  if (scheme < 0 || scheme > 3) throw Error("bad scheme code in " + path.string());
  stats.scheme = static_cast<NormScheme>(scheme);
  const std::uint32_t dim = read_u32(in);
  stats.param1.resize(dim);
  stats.param2.resize(dim);
  stats.degenerate_mask.assign(dim, 0);
  for (std::uint32_t j = 0; j < dim; ++j) {
    stats.param1[j] = read_f64(in);
    stats.param2[j] = read_f64(in);
  }
  const std::uint32_t num_degenerate = read_u32(in);
  stats.degenerate_dims.resize(num_degenerate);
  for (auto& idx : stats.degenerate_dims) {
    idx = read_u32(in);
    if (idx >= dim) throw Error("degenerate index out of range in " + path.string());
    stats.degenerate_mask[idx] = 1;
  }
  if (!in) throw Error("truncated stats file: " + path.string());
  return stats;
}

}  // namespace fkp

#ifndef FKP_FUSION_HPP_
#define FKP_FUSION_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "fkp/features.hpp"

namespace fkp {

enum class NormScheme : std::uint8_t { MinMax = 0, ZScore = 1, MedianMad = 2, Tanh = 3 };

const char* scheme_name(NormScheme scheme);
std::optional<NormScheme> parse_scheme(std::string_view name);

// Per-dimension location/scale parameters fitted on a training set.
// param1/param2 hold (min, max) for MinMax, (mean, population sigma) for
// ZScore and Tanh, and (median, MAD) for MedianMad. Dimensions with zero
// scale are listed in degenerate_dims and normalize to 0.
struct NormalizationStats {
  NormScheme scheme = NormScheme::MinMax;
  std::size_t n_train = 0;
  std::vector<double> param1;
  std::vector<double> param2;
  std::vector<std::uint32_t> degenerate_dims;  // ascending
  std::vector<std::uint8_t> degenerate_mask;

  std::size_t dim() const { return param1.size(); }
};

NormalizationStats fit_stats(const std::vector<FeatureVector>& training, NormScheme scheme);

struct NormalizedFeature {
  std::vector<double> values;
  FingerInstance instance = FingerInstance::RI;
  SampleKey key;
  NormScheme scheme = NormScheme::MinMax;
};

// Element-wise scheme formula; no clamping, so MinMax outputs can leave [0,1]
// for probe values outside the training bounds.
NormalizedFeature normalize(const FeatureVector& v, const NormalizationStats& stats);

struct FusedTemplate {
  std::vector<double> values;
  std::vector<FingerInstance> instance_set;     // canonical order RI, RM, LI, LM
  std::vector<std::uint32_t> component_dims;    // split boundaries
  NormScheme scheme = NormScheme::MinMax;
  SampleKey key;
};

// Concatenates 1-4 same-key, same-scheme components in canonical instance
// order; a single component passes through unchanged.
FusedTemplate fuse(const std::vector<NormalizedFeature>& components);

// Inverse of fuse at the recorded boundaries.
std::vector<NormalizedFeature> split(const FusedTemplate& fused);

// FKN1 sidecar: magic "FKN1", scheme code (u8), D (u32), per-dimension f64
// little-endian parameter pairs, then degenerate count (u32) and indices.
// The training count is not part of the format.
void save_stats(const std::filesystem::path& path, const NormalizationStats& stats);
NormalizationStats load_stats(const std::filesystem::path& path);

}  // namespace fkp

#endif  // FKP_FUSION_HPP_

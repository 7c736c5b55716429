#ifndef FKP_MATCHER_HPP_
#define FKP_MATCHER_HPP_

#include <optional>
#include <string_view>

#include "fkp/fusion.hpp"

namespace fkp {

enum class MatcherKind : std::uint8_t { Cosine = 0, NegEuclidean = 1, CenteredCosine = 2 };

const char* matcher_name(MatcherKind kind);
std::optional<MatcherKind> parse_matcher(std::string_view name);

// Scalar similarity between two templates of identical shape (length,
// instance set, scheme). Plain cosine lies in [-1, 1]; centered cosine
// subtracts each template's own mean first, which makes it blind to the
// constant offsets some normalization schemes introduce while keeping the
// quality-averaging behavior concatenation relies on; negated Euclidean
// distance is available for ablation and is unbounded below. All symmetric.
double similarity(const FusedTemplate& a, const FusedTemplate& b,
                  MatcherKind kind = MatcherKind::Cosine);

}  // namespace fkp

#endif  // FKP_MATCHER_HPP_

#include "fkp/matcher.hpp"

#include <cmath>

#include "fkp/errors.hpp"

namespace fkp {

const char* matcher_name(MatcherKind kind) {
  switch (kind) {
    case MatcherKind::Cosine: return "cosine";
    case MatcherKind::NegEuclidean: return "euclidean";
    case MatcherKind::CenteredCosine: return "centered";
  }
  return "?";
}

std::optional<MatcherKind> parse_matcher(std::string_view name) {
  if (name == "cosine") return MatcherKind::Cosine;
  if (name == "euclidean") return MatcherKind::NegEuclidean;
  if (name == "centered") return MatcherKind::CenteredCosine;
  return std::nullopt;
}

double similarity(const FusedTemplate& a, const FusedTemplate& b, MatcherKind kind) {
  if (a.values.size() != b.values.size())
    throw ShapeMismatch("lengths " + std::to_string(a.values.size()) + " vs " +
                        std::to_string(b.values.size()));
  if (a.instance_set != b.instance_set) throw ShapeMismatch("different instance sets");
  if (a.scheme != b.scheme) throw ShapeMismatch("different normalization schemes");

  if (kind == MatcherKind::NegEuclidean) {
    double dist2 = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      const double d = a.values[i] - b.values[i];
      dist2 += d * d;
    }
    return -std::sqrt(dist2);
  }

  double mean_a = 0.0, mean_b = 0.0;
  if (kind == MatcherKind::CenteredCosine) {
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      mean_a += a.values[i];
      mean_b += b.values[i];
    }
    mean_a /= static_cast<double>(a.values.size());
    mean_b /= static_cast<double>(b.values.size());
  }

  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double va = a.values[i] - mean_a;
    const double vb = b.values[i] - mean_b;
    dot += va * vb;
    na += va * va;
    nb += vb * vb;
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVector();
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace fkp

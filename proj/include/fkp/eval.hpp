#ifndef FKP_EVAL_HPP_
#define FKP_EVAL_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fkp/dataset.hpp"
#include "fkp/features.hpp"
#include "fkp/fusion.hpp"
#include "fkp/matcher.hpp"

namespace fkp {

// Verification protocol, fixed across the artifact:
//   - session 1 is the enrollment/statistics-fitting split, session 2 probes;
//   - genuine pairs: every cross-session same-subject sample-tuple pair;
//   - impostor pairs: the first session-1 tuple of each subject against the
//     first session-2 tuple of every other subject (ordered pairs).
// A multi-instance "sample" is the tuple of same-(session, sample) images
// across the instance set.
struct SamplePair {
  SampleKey enrolled;  // session 1
  SampleKey probe;     // session 2
};

struct PairList {
  std::vector<SamplePair> genuine;
  std::vector<SamplePair> impostor;
};

PairList make_pairs(const DatasetManifest& manifest,
                    const std::vector<FingerInstance>& instances);
PairList make_pairs(const FeatureStore& store, const std::vector<FingerInstance>& instances);

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
  std::vector<std::pair<std::string, std::string>> metadata;
};

// Fits per-instance stats on session-1 features, normalizes everything, fuses
// per sample tuple, and scores all protocol pairs. Centered cosine is the
// default matcher: Tanh normalization is an affine map of ZScore almost
// everywhere, and a plain angular score would read mostly its constant
// offset rather than the pattern.
ScoreSet run_verification(const FeatureStore& store, const std::vector<FingerInstance>& instances,
                          NormScheme scheme, MatcherKind matcher = MatcherKind::CenteredCosine);

// FAR = fraction of impostor scores >= threshold, GAR likewise for genuine
// (accept-if-greater-or-equal convention).
std::pair<double, double> far_gar_at(const ScoreSet& scores, double threshold);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double gar = 0.0;
};

// One point per distinct observed score (descending) plus a sentinel above
// the maximum; FAR and GAR are non-decreasing along the curve.
struct RocCurve {
  std::vector<RocPoint> points;
};

RocCurve roc(const ScoreSet& scores);

// Conservative step convention: GAR of the point with the largest FAR that
// does not exceed far_target; 0 if no point qualifies.
double gar_at_far(const RocCurve& curve, double far_target);

// Crossing of FAR and FRR = 1 - GAR, linearly interpolated between the two
// bracketing curve points.
double eer(const RocCurve& curve);

// Instance subsets of size k in the reporting format's canonical column
// order when drawing
// from the full four-finger pool; canonical lexicographic order otherwise.
std::vector<std::vector<FingerInstance>> instance_combinations(
    const std::vector<FingerInstance>& pool, int k);

std::string combination_label(const std::vector<FingerInstance>& instances);

// CSV block: header "FAR%,<label>,...", one row per operating point with GAR
// rendered in percent with 2 decimals. far_labels are echoed verbatim as row
// labels. Empty column set yields the bare "FAR%" header.
std::string emit_table(const std::vector<std::string>& far_labels,
                       const std::vector<std::pair<std::string, std::vector<double>>>& columns);

// CSV with header "threshold,far,gar".
std::string emit_roc(const RocCurve& curve);

std::string emit_metadata(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace fkp

#endif  // FKP_EVAL_HPP_

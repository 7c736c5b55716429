#include "fkp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fkp/errors.hpp"

namespace fkp {

namespace {

struct RecordId {
  std::uint32_t subject;
  FingerInstance instance;
  std::uint8_t session;
  std::uint16_t sample;
};

PairList make_pairs_impl(const std::vector<RecordId>& records,
                         const std::vector<FingerInstance>& instances) {
  if (instances.empty()) throw std::invalid_argument("instance set is empty");

  // sample indices per (subject, instance, session)
  std::map<std::uint32_t, std::map<std::pair<FingerInstance, int>, std::set<std::uint16_t>>> by_subject;
  for (const auto& r : records)
    by_subject[r.subject][{r.instance, r.session}].insert(r.sample);

  // per subject and session: sample indices present for *all* requested instances
  std::map<std::uint32_t, std::array<std::vector<std::uint16_t>, 2>> tuples;
  for (const auto& [subject, slots] : by_subject) {
    for (int session = 1; session <= 2; ++session) {
      std::vector<std::uint16_t> common;
      bool first = true;
      for (const FingerInstance inst : instances) {
        const auto it = slots.find({inst, session});
        if (it == slots.end() || it->second.empty()) throw MissingInstance(subject, to_code(inst));
        if (first) {
          common.assign(it->second.begin(), it->second.end());
          first = false;
        } else {
          std::vector<std::uint16_t> kept;
          std::set_intersection(common.begin(), common.end(), it->second.begin(),
                                it->second.end(), std::back_inserter(kept));
          common = std::move(kept);
        }
      }
      if (common.empty()) throw MissingInstance(subject, to_code(instances.front()));
      tuples[subject][session - 1] = std::move(common);
    }
  }

  PairList pairs;
  for (const auto& [subject, sessions] : tuples) {
    for (const std::uint16_t a : sessions[0])
      for (const std::uint16_t b : sessions[1])
        pairs.genuine.push_back({SampleKey{subject, 1, a}, SampleKey{subject, 2, b}});
  }
  for (const auto& [subj_a, sess_a] : tuples) {
    for (const auto& [subj_b, sess_b] : tuples) {
      if (subj_a == subj_b) continue;
      pairs.impostor.push_back(
          {SampleKey{subj_a, 1, sess_a[0].front()}, SampleKey{subj_b, 2, sess_b[1].front()}});
    }
  }
  return pairs;
}

}  // namespace

PairList make_pairs(const DatasetManifest& manifest,
                    const std::vector<FingerInstance>& instances) {
  std::vector<RecordId> ids;
  ids.reserve(manifest.records.size());
  for (const auto& r : manifest.records)
    ids.push_back({r.subject, r.instance, r.session, r.sample});
  return make_pairs_impl(ids, instances);
}

PairList make_pairs(const FeatureStore& store, const std::vector<FingerInstance>& instances) {
  std::vector<RecordId> ids;
  ids.reserve(store.records.size());
  for (const auto& r : store.records)
    ids.push_back({r.key.subject, r.instance, r.key.session, r.key.sample});
  return make_pairs_impl(ids, instances);
}

ScoreSet run_verification(const FeatureStore& store, const std::vector<FingerInstance>& instances,
                          NormScheme scheme, MatcherKind matcher) {
  const PairList pairs = make_pairs(store, instances);

  // fit per-instance stats on all session-1 vectors of that instance
  std::map<FingerInstance, NormalizationStats> stats;
  for (const FingerInstance inst : instances) {
    std::vector<FeatureVector> training;
    for (const auto& r : store.records)
      if (r.instance == inst && r.key.session == 1) training.push_back(r);
    stats.emplace(inst, fit_stats(training, scheme));
  }

  // normalize and fuse every sample tuple that appears in some pair
  std::map<FingerInstance, std::map<SampleKey, const FeatureVector*>> by_instance;
  for (const auto& r : store.records) by_instance[r.instance][r.key] = &r;

  std::map<SampleKey, FusedTemplate> templates;
  auto template_for = [&](const SampleKey& key) -> const FusedTemplate& {
    auto it = templates.find(key);
    if (it != templates.end()) return it->second;
    std::vector<NormalizedFeature> parts;
    parts.reserve(instances.size());
    for (const FingerInstance inst : instances) {
      const auto& slot = by_instance.at(inst);
      const auto rec = slot.find(key);
      if (rec == slot.end()) throw MissingInstance(key.subject, to_code(inst));
      parts.push_back(normalize(*rec->second, stats.at(inst)));
    }
    return templates.emplace(key, fuse(parts)).first->second;
  };

  ScoreSet scores;
  scores.genuine.reserve(pairs.genuine.size());
  scores.impostor.reserve(pairs.impostor.size());
  for (const auto& p : pairs.genuine)
    scores.genuine.push_back(similarity(template_for(p.enrolled), template_for(p.probe), matcher));
  for (const auto& p : pairs.impostor)
    scores.impostor.push_back(similarity(template_for(p.enrolled), template_for(p.probe), matcher));

  std::vector<std::string> codes;
  for (const FingerInstance inst : instances) codes.push_back(to_code(inst));
  std::string label = codes.empty() ? "" : codes.front();
  for (std::size_t i = 1; i < codes.size(); ++i) label += "+" + codes[i];

  scores.metadata = {
      {"instances", label},
      {"scheme", scheme_name(scheme)},
      {"matcher", matcher_name(matcher)},
      {"feature_dim", std::to_string(store.header.dim)},
      {"genuine_pairs", std::to_string(scores.genuine.size())},
      {"impostor_pairs", std::to_string(scores.impostor.size())},
      {"protocol", "session1-enroll/session2-probe, cross-session genuine, "
                   "first-sample impostor"},
  };
  return scores;
}

std::pair<double, double> far_gar_at(const ScoreSet& scores, double threshold) {
  if (scores.genuine.empty()) throw EmptyScoreSet("genuine");
  if (scores.impostor.empty()) throw EmptyScoreSet("impostor");
  std::size_t fa = 0, ga = 0;
  for (double s : scores.impostor) fa += (s >= threshold);
  for (double s : scores.genuine) ga += (s >= threshold);
  return {static_cast<double>(fa) / scores.impostor.size(),
          static_cast<double>(ga) / scores.genuine.size()};
}

RocCurve roc(const ScoreSet& scores) {
  if (scores.genuine.empty()) throw EmptyScoreSet("genuine");
  if (scores.impostor.empty()) throw EmptyScoreSet("impostor");

  std::vector<double> thresholds;
  thresholds.reserve(scores.genuine.size() + scores.impostor.size() + 1);
  thresholds.insert(thresholds.end(), scores.genuine.begin(), scores.genuine.end());
  thresholds.insert(thresholds.end(), scores.impostor.begin(), scores.impostor.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.insert(thresholds.begin(), thresholds.front() + 1.0);  // accepts nothing

  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto [far, gar] = far_gar_at(scores, t);
    curve.points.push_back({t, far, gar});
  }
  return curve;
}

double gar_at_far(const RocCurve& curve, double far_target) {
  double best = 0.0;
  bool found = false;
  for (const auto& p : curve.points) {
    if (p.far <= far_target) {
      best = p.gar;  // FAR and GAR are non-decreasing, keep the last qualifier
      found = true;
    }
  }
  return found ? best : 0.0;
}

double eer(const RocCurve& curve) {
  if (curve.points.empty()) throw EmptyScoreSet("roc curve");
  double prev_d = 0.0, prev_far = 0.0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double far = curve.points[i].far;
    const double frr = 1.0 - curve.points[i].gar;
    const double d = far - frr;
    if (d == 0.0) return far;
    if (d > 0.0) {
      if (i == 0) return far;  // curve starts past the crossing
      // interpolate the FAR = FRR crossing between the bracketing points
      const double lambda = -prev_d / (d - prev_d);
      return prev_far + lambda * (far - prev_far);
    }
    prev_d = d;
    prev_far = far;
  }
  return 1.0;  // FAR never reaches FRR; degenerate, treat as total overlap
}

std::vector<std::vector<FingerInstance>> instance_combinations(
    const std::vector<FingerInstance>& pool, int k) {
  if (k < 1 || k > static_cast<int>(pool.size()))
    throw std::invalid_argument("combination size out of range");

  std::vector<FingerInstance> sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  using I = FingerInstance;
  const bool full_pool = sorted.size() == 4;
  if (full_pool && k == 2) {
    // canonical two-instance column order of the reporting format
    return {{I::RI, I::RM}, {I::RI, I::LI}, {I::RI, I::LM},
            {I::LI, I::LM}, {I::RM, I::LM}, {I::RM, I::LI}};
  }
  if (full_pool && k == 3) {
    return {{I::RI, I::RM, I::LI}, {I::RI, I::RM, I::LM}, {I::RI, I::LI, I::LM},
            {I::RM, I::LI, I::LM}};
  }

  // canonical lexicographic subsets
  std::vector<std::vector<FingerInstance>> result;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  const int n = static_cast<int>(sorted.size());
  while (true) {
    std::vector<FingerInstance> combo;
    for (int i : idx) combo.push_back(sorted[i]);
    result.push_back(std::move(combo));
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return result;
}

std::string combination_label(const std::vector<FingerInstance>& instances) {
  std::string label;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (i) label += "+";
    label += to_code(instances[i]);
  }
  return label;
}

std::string emit_table(const std::vector<std::string>& far_labels,
                       const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
  std::string out = "FAR%";
  if (columns.empty()) return out + "\n";

  for (const auto& [label, gars] : columns) {
    if (gars.size() != far_labels.size()) throw InconsistentOperatingPoints();
    out += "," + label;
  }
  out += "\n";

  char buf[32];
  for (std::size_t row = 0; row < far_labels.size(); ++row) {
    out += far_labels[row];
    for (const auto& [label, gars] : columns) {
      std::snprintf(buf, sizeof(buf), ",%.2f", gars[row] * 100.0);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string emit_roc(const RocCurve& curve) {
  std::string out = "threshold,far,gar\n";
  char buf[96];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", p.threshold, p.far, p.gar);
    out += buf;
  }
  return out;
}

std::string emit_metadata(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

}  // namespace fkp

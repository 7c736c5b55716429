// fkp: multi-instance finger-knuckle-print verification pipeline.
// Subcommands: synth (seeded dataset), roi (region extraction), features
// (log-Gabor encoding), eval (fusion + FAR/GAR/ROC reporting).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fkp/config.hpp"
#include "fkp/dataset.hpp"
#include "fkp/errors.hpp"
#include "fkp/eval.hpp"
#include "fkp/features.hpp"
#include "fkp/fusion.hpp"
#include "fkp/image.hpp"
#include "fkp/matcher.hpp"
#include "fkp/preprocess.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitPartial = 3;
constexpr int kExitInfeasible = 4;

void echo_config(const fkp::RunConfig& cfg, const std::vector<std::string>& sections) {
  for (const auto& [key, value] : fkp::config_entries(cfg)) {
    for (const auto& section : sections) {
      if (key.rfind(section + ".", 0) == 0) {
        std::cout << "cfg " << key << "=" << value << "\n";
        break;
      }
    }
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fkp::IoFailure(path.string());
  out << text;
  if (!out) throw fkp::IoFailure(path.string());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string current;
  for (const char c : text) {
    if (c == ',') {
      items.push_back(current);
      current.clear();
    } else if (c != ' ') {
      current += c;
    }
  }
  items.push_back(current);
  return items;
}

std::vector<fkp::FingerInstance> parse_instance_list(const std::string& text) {
  std::vector<fkp::FingerInstance> instances;
  for (const auto& token : split_list(text)) {
    const auto inst = fkp::parse_instance(token);
    if (!inst)
      throw fkp::InvalidConfig("eval.instances",
                               "'" + token + "' is not one of RI, RM, LI, LM");
    if (std::find(instances.begin(), instances.end(), *inst) != instances.end())
      throw fkp::InvalidConfig("eval.instances", "instance '" + token + "' repeated");
    instances.push_back(*inst);
  }
  if (instances.empty() || instances.size() > 4)
    throw fkp::InvalidConfig("eval.instances", "need 1 to 4 distinct instances");
  return instances;
}

struct OperatingPoints {
  std::vector<std::string> labels;     // percent strings, echoed into tables
  std::vector<double> fractions;       // parsed FAR fractions
};

OperatingPoints parse_far_points(const std::string& text) {
  OperatingPoints points;
  for (const auto& token : split_list(text)) {
    if (token.empty()) throw fkp::InvalidConfig("eval.far_points", "empty entry");
    double percent = 0.0;
    try {
      std::size_t used = 0;
      percent = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw fkp::InvalidConfig("eval.far_points", "'" + token + "' is not a number");
    }
    if (percent < 0.0 || percent > 100.0)
      throw fkp::InvalidConfig("eval.far_points", "'" + token + "' outside [0, 100]");
    points.labels.push_back(token);
    points.fractions.push_back(percent / 100.0);
  }
  return points;
}

int cmd_synth(const fkp::RunConfig& cfg, const fs::path& out) {
  echo_config(cfg, {"dataset"});
  const fkp::DatasetManifest manifest = fkp::generate_synthetic(cfg.dataset, out);
  std::cout << "images " << manifest.records.size() << "\n";
  std::cout << "manifest " << (out / "manifest.csv").string() << "\n";
  return kExitOk;
}

int cmd_roi(const fkp::RunConfig& cfg, const fs::path& in, const fs::path& out) {
  echo_config(cfg, {"roi"});
  const fkp::DatasetManifest manifest = fkp::load_manifest(in);

  std::error_code ec;
  fs::create_directories(out / "images", ec);
  if (ec) throw fkp::IoFailure((out / "images").string());

  fkp::DatasetManifest result;
  result.root = out;
  std::size_t failures = 0;
  for (const auto& rec : manifest.records) {
    try {
      const fkp::GrayImage img = fkp::read_png_gray(manifest.resolve(rec));
      const fkp::GrayImage roi = fkp::extract_roi(img, cfg.roi);
      fs::create_directories((out / rec.image_ref).parent_path(), ec);
      fkp::write_png_gray(out / rec.image_ref, roi);
      result.records.push_back(rec);
    } catch (const std::exception& e) {
      ++failures;
      std::cerr << "failed " << rec.image_ref << ": " << e.what() << "\n";
    }
  }
  fkp::save_manifest(result);
  std::cout << "roi images written: " << result.records.size() << " of "
            << manifest.records.size() << "\n";
  std::cout << "manifest " << (out / "manifest.csv").string() << "\n";
  return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_features(const fkp::RunConfig& cfg, const fs::path& in, const fs::path& out) {
  echo_config(cfg, {"features"});
  const fkp::DatasetManifest manifest = fkp::load_manifest(in);
  const fkp::LogGaborBank bank(cfg.features, fkp::kRoiWidth, fkp::kRoiHeight);

  fkp::FeatureStore store;
  store.header.dim = static_cast<std::uint32_t>(bank.feature_dim());
  store.header.orientations = static_cast<std::uint32_t>(cfg.features.orientations);
  store.header.scales = static_cast<std::uint32_t>(cfg.features.scales);
  store.header.grid_x = static_cast<std::uint32_t>(cfg.features.grid_x);
  store.header.grid_y = static_cast<std::uint32_t>(cfg.features.grid_y);

  for (const auto& rec : manifest.records) {
    const fkp::GrayImage roi = fkp::read_png_gray(manifest.resolve(rec));
    if (roi.width != fkp::kRoiWidth || roi.height != fkp::kRoiHeight)
      throw fkp::Error(rec.image_ref + " is " + std::to_string(roi.width) + "x" +
                       std::to_string(roi.height) + ", expected " +
                       std::to_string(fkp::kRoiWidth) + "x" + std::to_string(fkp::kRoiHeight));
    fkp::FeatureVector feature;
    feature.values = fkp::encode_roi(roi, bank);
    feature.instance = rec.instance;
    feature.key = {rec.subject, rec.session, rec.sample};
    store.records.push_back(std::move(feature));
  }
  store.header.count = static_cast<std::uint32_t>(store.records.size());
  fkp::save_features(out, store);
  std::cout << "features written: " << out.string() << " (records=" << store.records.size()
            << ", dim=" << store.header.dim << ")\n";
  return kExitOk;
}

fs::path roc_path_for(const fs::path& base, const std::string& label, bool unique) {
  if (unique) return base;
  fs::path labeled = base;
  labeled.replace_filename(base.stem().string() + "_" + label + base.extension().string());
  return labeled;
}

int cmd_eval(const fkp::RunConfig& cfg, const fs::path& features_path, const fs::path& table_path,
             const fs::path& roc_path, const fs::path& meta_path, const fs::path& stats_dir) {
  echo_config(cfg, {"fusion", "eval"});

  const auto scheme = fkp::parse_scheme(cfg.fusion.scheme);
  if (!scheme)
    throw fkp::InvalidConfig("fusion.scheme", "'" + cfg.fusion.scheme +
                                                  "' is not a normalization scheme; valid "
                                                  "schemes: minmax, zscore, mad, tanh");
  const auto matcher = fkp::parse_matcher(cfg.eval.matcher);
  if (!matcher)
    throw fkp::InvalidConfig("eval.matcher",
                             "'" + cfg.eval.matcher + "' is not one of: centered, cosine, euclidean");
  const auto pool = parse_instance_list(cfg.eval.instances);
  const OperatingPoints points = parse_far_points(cfg.eval.far_points);
  if (cfg.eval.pairs < 0 || cfg.eval.pairs > static_cast<int>(pool.size()))
    throw fkp::InvalidConfig("eval.pairs", "subset size must be in [0, pool size]");

  const fkp::FeatureStore store = fkp::load_features(features_path);

  std::vector<std::vector<fkp::FingerInstance>> combos;
  if (cfg.eval.pairs == 0) {
    auto sorted = pool;
    std::sort(sorted.begin(), sorted.end());
    combos.push_back(sorted);
  } else {
    combos = fkp::instance_combinations(pool, cfg.eval.pairs);
  }

  if (!stats_dir.empty()) {
    std::error_code ec;
    fs::create_directories(stats_dir, ec);
    if (ec) throw fkp::IoFailure(stats_dir.string());
    for (const fkp::FingerInstance inst : pool) {
      std::vector<fkp::FeatureVector> training;
      for (const auto& r : store.records)
        if (r.instance == inst && r.key.session == 1) training.push_back(r);
      fkp::save_stats(stats_dir / (std::string("stats_") + fkp::to_code(inst) + ".fkn"),
                      fkp::fit_stats(training, *scheme));
    }
  }

  std::vector<std::pair<std::string, std::vector<double>>> columns;
  std::vector<std::pair<std::string, std::string>> meta = fkp::config_entries(cfg);
  meta.emplace_back("features_file", features_path.string());
  meta.emplace_back("feature_dim", std::to_string(store.header.dim));
  meta.emplace_back("feature_records", std::to_string(store.records.size()));
  meta.emplace_back("protocol",
                    "session1-enroll/session2-probe, cross-session genuine, "
                    "first-sample impostor, accept-if>=threshold");

  for (const auto& combo : combos) {
    const std::string label = fkp::combination_label(combo);
    const fkp::ScoreSet scores = fkp::run_verification(store, combo, *scheme, *matcher);
    const fkp::RocCurve curve = fkp::roc(scores);

    std::cout << "combination " << label << "\n";
    std::vector<double> gars;
    for (std::size_t i = 0; i < points.fractions.size(); ++i) {
      const double gar = fkp::gar_at_far(curve, points.fractions[i]);
      gars.push_back(gar);
      char line[96];
      std::snprintf(line, sizeof(line), "GAR@FAR=%s%%: %.2f", points.labels[i].c_str(),
                    gar * 100.0);
      std::cout << line << "\n";
    }
    const double eer_value = fkp::eer(curve);
    {
      char line[64];
      std::snprintf(line, sizeof(line), "EER%%: %.2f", eer_value * 100.0);
      std::cout << line << "\n";
    }
    columns.emplace_back(label, gars);

    const fs::path out_roc = roc_path_for(roc_path, label, combos.size() == 1);
    write_text(out_roc, fkp::emit_roc(curve));
    std::cout << "roc " << out_roc.string() << "\n";

    meta.emplace_back("genuine_pairs." + label, std::to_string(scores.genuine.size()));
    meta.emplace_back("impostor_pairs." + label, std::to_string(scores.impostor.size()));
    char eer_text[32];
    std::snprintf(eer_text, sizeof(eer_text), "%.6f", eer_value);
    meta.emplace_back("eer." + label, eer_text);
  }

  write_text(table_path, fkp::emit_table(points.labels, columns));
  std::cout << "table " << table_path.string() << "\n";
  if (!meta_path.empty()) {
    write_text(meta_path, fkp::emit_metadata(meta));
    std::cout << "meta " << meta_path.string() << "\n";
  }
  return kExitOk;
}

int map_exception(const std::exception& e) {
  if (dynamic_cast<const fkp::MissingInstance*>(&e) ||
      dynamic_cast<const fkp::EmptyScoreSet*>(&e) ||
      dynamic_cast<const fkp::EmptyTrainingSet*>(&e))
    return kExitInfeasible;
  if (dynamic_cast<const fkp::InvalidConfig*>(&e) ||
      dynamic_cast<const fkp::NyquistViolation*>(&e) ||
      dynamic_cast<const fkp::InvalidThresholds*>(&e) ||
      dynamic_cast<const fkp::GridTooFine*>(&e) ||
      dynamic_cast<const fkp::DimensionMismatch*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e))
    return kExitValidation;
  return kExitIo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-instance finger-knuckle-print verification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "flat section.key=value configuration file");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
  std::string synth_out;
  int subjects = 0, samples = 0, width = 0, height = 0, ridges = 0;
  double jt = 0, jr = 0, noise = 0;
  std::int64_t seed = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  auto* o_subjects = synth->add_option("--subjects", subjects, "number of subjects");
  auto* o_samples = synth->add_option("--samples", samples, "samples per (subject, finger) class");
  auto* o_width = synth->add_option("--width", width, "image width in px");
  auto* o_height = synth->add_option("--height", height, "image height in px");
  auto* o_ridges = synth->add_option("--ridges", ridges, "gratings per class texture");
  auto* o_jt = synth->add_option("--jitter-translation", jt, "per-sample translation bound, px");
  auto* o_jr = synth->add_option("--jitter-rotation", jr, "per-sample rotation bound, degrees");
  auto* o_noise = synth->add_option("--noise", noise, "additive Gaussian noise sigma");
  auto* o_seed = synth->add_option("--seed", seed, "dataset seed");

  // roi
  auto* roi = app.add_subcommand("roi", "extract aligned 220x110 knuckle regions");
  std::string roi_in, roi_out;
  int factor = 0, window = 0, ycols = 0;
  double sigma = 0, low = 0, high = 0, eps = 0;
  bool bypass = false;
  roi->add_option("--in", roi_in, "input dataset directory")->required();
  roi->add_option("--out", roi_out, "output dataset directory")->required();
  auto* o_factor = roi->add_option("--factor", factor, "down-sampling factor");
  auto* o_sigma = roi->add_option("--sigma", sigma, "Canny smoothing sigma");
  auto* o_low = roi->add_option("--low", low, "Canny low threshold (fraction of max gradient)");
  auto* o_high = roi->add_option("--high", high, "Canny high threshold (fraction of max gradient)");
  auto* o_window = roi->add_option("--window", window, "convexity fit window (odd)");
  auto* o_eps = roi->add_option("--eps", eps, "curvature dead zone");
  auto* o_ycols = roi->add_option("--ycols", ycols, "Y-axis balance half-window, columns");
  auto* o_bypass = roi->add_flag("--bypass", bypass, "accept pre-cropped 220x110 inputs");

  // features
  auto* features = app.add_subcommand("features", "encode ROIs with a log-Gabor bank");
  std::string feat_in, feat_out, grid_text;
  int orientations = 0, scales = 0, taper = 0;
  double f0 = 0, mult = 0, sigma_ratio = 0, angular_sigma = 0;
  features->add_option("--in", feat_in, "ROI dataset directory")->required();
  features->add_option("--out", feat_out, "output feature file (FKPF1)")->required();
  auto* o_orient = features->add_option("--orientations", orientations, "bank orientations");
  auto* o_scales = features->add_option("--scales", scales, "bank scales");
  auto* o_f0 = features->add_option("--f0", f0, "base center frequency, cycles/px");
  auto* o_mult = features->add_option("--mult", mult, "scale multiplier");
  auto* o_sr = features->add_option("--sigma-ratio", sigma_ratio, "radial sigma ratio");
  auto* o_as = features->add_option("--angular-sigma", angular_sigma, "angular sigma, radians");
  auto* o_grid = features->add_option("--grid", grid_text, "sampling grid, e.g. 16x32");
  auto* o_taper = features->add_option("--taper", taper, "border taper width, px");

  // eval
  auto* eval = app.add_subcommand("eval", "run verification and emit FAR/GAR tables");
  std::string eval_features, instances_text, norm_text, far_text, matcher_text;
  std::string table_out = "table.csv", roc_out = "roc.csv", meta_out, stats_out;
  int pairs = -1;
  eval->add_option("--features", eval_features, "FKPF1 feature file")->required();
  auto* o_instances = eval->add_option("--instances", instances_text, "finger list, e.g. RI,RM");
  auto* o_pairs = eval->add_option("--pairs", pairs, "evaluate all subsets of this size");
  auto* o_norm = eval->add_option("--norm", norm_text, "minmax | zscore | mad | tanh");
  auto* o_far = eval->add_option("--far-points", far_text, "FAR operating points in percent");
  auto* o_matcher = eval->add_option("--matcher", matcher_text, "cosine | euclidean");
  eval->add_option("--table", table_out, "output table CSV path");
  eval->add_option("--roc", roc_out, "output ROC CSV path");
  eval->add_option("--meta", meta_out, "output run metadata path");
  eval->add_option("--stats-out", stats_out, "directory for per-instance FKN1 stats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitValidation;
  }

  try {
    fkp::RunConfig cfg;
    if (!config_path.empty()) fkp::apply_config_file(config_path, cfg);

    if (synth->parsed()) {
      if (o_subjects->count()) cfg.dataset.num_subjects = subjects;
      if (o_samples->count()) cfg.dataset.samples_per_class = samples;
      if (o_width->count()) cfg.dataset.image_width = width;
      if (o_height->count()) cfg.dataset.image_height = height;
      if (o_ridges->count()) cfg.dataset.ridge_count = ridges;
      if (o_jt->count()) cfg.dataset.jitter_translation_px = jt;
      if (o_jr->count()) cfg.dataset.jitter_rotation_deg = jr;
      if (o_noise->count()) cfg.dataset.noise_sigma = noise;
      if (o_seed->count()) cfg.dataset.seed = static_cast<std::uint64_t>(seed);
      return cmd_synth(cfg, synth_out);
    }
    if (roi->parsed()) {
      if (o_factor->count()) cfg.roi.factor = factor;
      if (o_sigma->count()) cfg.roi.sigma = sigma;
      if (o_low->count()) cfg.roi.low = low;
      if (o_high->count()) cfg.roi.high = high;
      if (o_window->count()) cfg.roi.window = window;
      if (o_eps->count()) cfg.roi.eps = eps;
      if (o_ycols->count()) cfg.roi.ycols = ycols;
      if (o_bypass->count()) cfg.roi.bypass = bypass;
      return cmd_roi(cfg, roi_in, roi_out);
    }
    if (features->parsed()) {
      if (o_orient->count()) cfg.features.orientations = orientations;
      if (o_scales->count()) cfg.features.scales = scales;
      if (o_f0->count()) cfg.features.f0 = f0;
      if (o_mult->count()) cfg.features.mult = mult;
      if (o_sr->count()) cfg.features.sigma_ratio = sigma_ratio;
      if (o_as->count()) cfg.features.angular_sigma = angular_sigma;
      if (o_grid->count()) {
        if (!fkp::parse_grid(grid_text, cfg.features.grid_x, cfg.features.grid_y))
          throw fkp::InvalidConfig("features.grid", "expected WxH like 16x32");
      }
      if (o_taper->count()) cfg.features.taper_px = taper;
      return cmd_features(cfg, feat_in, feat_out);
    }
    if (eval->parsed()) {
      if (o_instances->count()) cfg.eval.instances = instances_text;
      if (o_pairs->count()) cfg.eval.pairs = pairs;
      if (o_norm->count()) cfg.fusion.scheme = norm_text;
      if (o_far->count()) cfg.eval.far_points = far_text;
      if (o_matcher->count()) cfg.eval.matcher = matcher_text;
      return cmd_eval(cfg, eval_features, table_out, roc_out, meta_out, stats_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return map_exception(e);
  }
  return kExitValidation;
}

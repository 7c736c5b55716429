#ifndef FKP_CONFIG_HPP_
#define FKP_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "fkp/dataset.hpp"
#include "fkp/features.hpp"
#include "fkp/preprocess.hpp"

namespace fkp {

struct FusionConfig {
  std::string scheme = "zscore";
};

struct EvalConfig {
  std::string instances = "RI,RM,LI,LM";
  int pairs = 0;  // 0: evaluate the instance list as one combination
  std::string far_points = "0.01,0.1,1.00";  // percent labels, echoed into tables
  std::string matcher = "centered";
};

// Flat `section.key=value` run configuration; every field is optional and
// falls back to the documented default. Unknown keys are rejected.
struct RunConfig {
  SyntheticConfig dataset;
  RoiParams roi;
  LogGaborParams features;
  FusionConfig fusion;
  EvalConfig eval;
};

// Parses the config file into `config`, overwriting only the keys present.
// Throws InvalidConfig for unknown keys or unparsable values, IoFailure if
// the file cannot be read.
void apply_config_file(const std::filesystem::path& path, RunConfig& config);

// Single `section.key=value` line (exposed for tests).
void apply_config_entry(const std::string& key, const std::string& value, RunConfig& config);

// "GxH" (e.g. "16x32") -> grid_x, grid_y
bool parse_grid(const std::string& text, int& grid_x, int& grid_y);

// The effective configuration as ordered key=value lines.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

}  // namespace fkp

#endif  // FKP_CONFIG_HPP_

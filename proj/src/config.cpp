#include "fkp/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "fkp/errors.hpp"

namespace fkp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InvalidConfig(key, "expected a number, got '" + value + "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw InvalidConfig(key, "expected an integer, got '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidConfig(key, "expected true/false, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

bool parse_grid(const std::string& text, int& grid_x, int& grid_y) {
  const auto x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size()) return false;
  try {
    std::size_t used = 0;
    const int gx = std::stoi(text.substr(0, x), &used);
    if (used != x) return false;
    const int gy = std::stoi(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) return false;
    if (gx < 1 || gy < 1) return false;
    grid_x = gx;
    grid_y = gy;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void apply_config_entry(const std::string& key, const std::string& value, RunConfig& config) {
  if (key == "dataset.subjects") config.dataset.num_subjects = static_cast<int>(to_int(key, value));
  else if (key == "dataset.samples") config.dataset.samples_per_class = static_cast<int>(to_int(key, value));
  else if (key == "dataset.width") config.dataset.image_width = static_cast<int>(to_int(key, value));
  else if (key == "dataset.height") config.dataset.image_height = static_cast<int>(to_int(key, value));
  else if (key == "dataset.ridges") config.dataset.ridge_count = static_cast<int>(to_int(key, value));
  else if (key == "dataset.jitter_translation") config.dataset.jitter_translation_px = to_double(key, value);
  else if (key == "dataset.jitter_rotation") config.dataset.jitter_rotation_deg = to_double(key, value);
  else if (key == "dataset.noise") config.dataset.noise_sigma = to_double(key, value);
  else if (key == "dataset.seed") config.dataset.seed = static_cast<std::uint64_t>(to_int(key, value));
  else if (key == "roi.factor") config.roi.factor = static_cast<int>(to_int(key, value));
  else if (key == "roi.sigma") config.roi.sigma = to_double(key, value);
  else if (key == "roi.low") config.roi.low = to_double(key, value);
  else if (key == "roi.high") config.roi.high = to_double(key, value);
  else if (key == "roi.window") config.roi.window = static_cast<int>(to_int(key, value));
  else if (key == "roi.eps") config.roi.eps = to_double(key, value);
  else if (key == "roi.ycols") config.roi.ycols = static_cast<int>(to_int(key, value));
  else if (key == "roi.bypass") config.roi.bypass = to_bool(key, value);
  else if (key == "features.orientations") config.features.orientations = static_cast<int>(to_int(key, value));
  else if (key == "features.scales") config.features.scales = static_cast<int>(to_int(key, value));
  else if (key == "features.f0") config.features.f0 = to_double(key, value);
  else if (key == "features.mult") config.features.mult = to_double(key, value);
  else if (key == "features.sigma_ratio") config.features.sigma_ratio = to_double(key, value);
  else if (key == "features.angular_sigma") config.features.angular_sigma = to_double(key, value);
  else if (key == "features.grid") {
    if (!parse_grid(value, config.features.grid_x, config.features.grid_y))
      throw InvalidConfig(key, "expected WxH like 16x32, got '" + value + "'");
  } else if (key == "features.taper") config.features.taper_px = static_cast<int>(to_int(key, value));
  else if (key == "fusion.scheme") config.fusion.scheme = value;
  else if (key == "eval.instances") config.eval.instances = value;
  else if (key == "eval.pairs") config.eval.pairs = static_cast<int>(to_int(key, value));
  else if (key == "eval.far_points") config.eval.far_points = value;
  else if (key == "eval.matcher") config.eval.matcher = value;
  else throw InvalidConfig(key, "unknown configuration key");
}

void apply_config_file(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoFailure(path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("line " + std::to_string(line_no), "expected section.key=value");
    apply_config_entry(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)), config);
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  char grid[32];
  std::snprintf(grid, sizeof(grid), "%dx%d", c.features.grid_x, c.features.grid_y);
  return {
      {"dataset.subjects", std::to_string(c.dataset.num_subjects)},
      {"dataset.samples", std::to_string(c.dataset.samples_per_class)},
      {"dataset.width", std::to_string(c.dataset.image_width)},
      {"dataset.height", std::to_string(c.dataset.image_height)},
      {"dataset.ridges", std::to_string(c.dataset.ridge_count)},
      {"dataset.jitter_translation", format_double(c.dataset.jitter_translation_px)},
      {"dataset.jitter_rotation", format_double(c.dataset.jitter_rotation_deg)},
      {"dataset.noise", format_double(c.dataset.noise_sigma)},
      {"dataset.seed", std::to_string(c.dataset.seed)},
      {"roi.factor", std::to_string(c.roi.factor)},
      {"roi.sigma", format_double(c.roi.sigma)},
      {"roi.low", format_double(c.roi.low)},
      {"roi.high", format_double(c.roi.high)},
      {"roi.window", std::to_string(c.roi.window)},
      {"roi.eps", format_double(c.roi.eps)},
      {"roi.ycols", std::to_string(c.roi.ycols)},
      {"roi.bypass", c.roi.bypass ? "true" : "false"},
      {"features.orientations", std::to_string(c.features.orientations)},
      {"features.scales", std::to_string(c.features.scales)},
      {"features.f0", format_double(c.features.f0)},
      {"features.mult", format_double(c.features.mult)},
      {"features.sigma_ratio", format_double(c.features.sigma_ratio)},
      {"features.angular_sigma", format_double(c.features.angular_sigma)},
      {"features.grid", grid},
      {"features.taper", std::to_string(c.features.taper_px)},
      {"fusion.scheme", c.fusion.scheme},
      {"eval.instances", c.eval.instances},
      {"eval.pairs", std::to_string(c.eval.pairs)},
      {"eval.far_points", c.eval.far_points},
      {"eval.matcher", c.eval.matcher},
  };
}

}  // namespace fkp

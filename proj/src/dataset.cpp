#include "fkp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fkp/errors.hpp"
#include "fkp/image.hpp"
#include "fkp/rng.hpp"

namespace fkp {

const char* to_code(FingerInstance inst) {
  switch (inst) {
    case FingerInstance::RI: return "RI";
    case FingerInstance::RM: return "RM";
    case FingerInstance::LI: return "LI";
    case FingerInstance::LM: return "LM";
  }
  return "??";
}

std::optional<FingerInstance> parse_instance(std::string_view code) {
  if (code == "RI") return FingerInstance::RI;
  if (code == "RM") return FingerInstance::RM;
  if (code == "LI") return FingerInstance::LI;
  if (code == "LM") return FingerInstance::LM;
  return std::nullopt;
}

namespace {

constexpr const char* kManifestHeader = "subject,instance,session,sample,path";

std::tuple<std::uint32_t, std::uint8_t, std::uint8_t, std::uint16_t> sort_key(
    const SampleRecord& r) {
  return {r.subject, static_cast<std::uint8_t>(r.instance), r.session, r.sample};
}

void sort_canonical(std::vector<SampleRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return sort_key(a) < sort_key(b); });
}

bool parse_uint(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string key_string(const SampleRecord& r) {
  std::ostringstream os;
  os << "(" << r.subject << ", " << to_code(r.instance) << ", " << int(r.session) << ", "
     << r.sample << ")";
  return os.str();
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& root) {
  const auto manifest_path = root / "manifest.csv";
  std::ifstream in(manifest_path);
  if (!in) throw MissingManifest(manifest_path.string());

  DatasetManifest manifest;
  manifest.root = root;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kManifestHeader)
        throw MalformedRow(1, "expected header '" + std::string(kManifestHeader) + "'");
      continue;
    }
    if (line.empty()) continue;

    std::array<std::string_view, 5> fields;
    std::string_view rest = line;
    for (int i = 0; i < 5; ++i) {
      const auto comma = rest.find(',');
      if (i < 4) {
        if (comma == std::string_view::npos) throw MalformedRow(line_no, "expected 5 fields");
        fields[i] = rest.substr(0, comma);
        rest = rest.substr(comma + 1);
      } else {
        if (comma != std::string_view::npos) throw MalformedRow(line_no, "expected 5 fields");
        fields[i] = rest;
      }
    }

    SampleRecord rec;
    std::uint64_t v = 0;
    if (!parse_uint(fields[0], v) || v == 0) throw MalformedRow(line_no, "bad subject id");
    rec.subject = static_cast<std::uint32_t>(v);
    const auto inst = parse_instance(fields[1]);
    if (!inst) throw MalformedRow(line_no, "instance must be one of RI, RM, LI, LM");
    rec.instance = *inst;
    if (!parse_uint(fields[2], v) || (v != 1 && v != 2))
      throw MalformedRow(line_no, "session must be 1 or 2");
    rec.session = static_cast<std::uint8_t>(v);
    if (!parse_uint(fields[3], v) || v == 0 || v > 0xffff)
      throw MalformedRow(line_no, "bad sample index");
    rec.sample = static_cast<std::uint16_t>(v);
    if (fields[4].empty()) throw MalformedRow(line_no, "empty image path");
    rec.image_ref = std::string(fields[4]);
    manifest.records.push_back(std::move(rec));
  }
  if (line_no == 0) throw MalformedRow(1, "empty manifest");

  sort_canonical(manifest.records);
  for (std::size_t i = 1; i < manifest.records.size(); ++i) {
    if (sort_key(manifest.records[i - 1]) == sort_key(manifest.records[i]))
      throw DuplicateKey(key_string(manifest.records[i]));
  }
  for (const auto& rec : manifest.records) {
    if (!std::filesystem::exists(manifest.resolve(rec)))
      throw DanglingImageRef(manifest.resolve(rec).string());
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest) {
  auto records = manifest.records;
  sort_canonical(records);
  const auto path = manifest.root / "manifest.csv";
  std::ofstream out(path, std::ios::binary);  // binary: keep LF on all platforms
  if (!out) throw IoFailure(path.string());
  out << kManifestHeader << "\n";
  for (const auto& r : records) {
    out << r.subject << "," << to_code(r.instance) << "," << int(r.session) << "," << r.sample
        << "," << r.image_ref << "\n";
  }
  if (!out) throw IoFailure(path.string());
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

struct Grating {
  double wavelength;  // px
  double phase;
  double amplitude;
};

// Coarse random field, bilinearly interpolated; the "smoothed noise" the class
// gratings sit on.
struct NoiseField {
  int step = 8;
  int cols = 0, rows = 0;
  std::vector<double> values;

  double at(double x, double y) const {
    const double gx = x / step, gy = y / step;
    int x0 = static_cast<int>(std::floor(gx)), y0 = static_cast<int>(std::floor(gy));
    x0 = std::clamp(x0, 0, cols - 2);
    y0 = std::clamp(y0, 0, rows - 2);
    const double fx = std::clamp(gx - x0, 0.0, 1.0), fy = std::clamp(gy - y0, 0.0, 1.0);
    const double a = values[y0 * cols + x0], b = values[y0 * cols + x0 + 1];
    const double c = values[(y0 + 1) * cols + x0], d = values[(y0 + 1) * cols + x0 + 1];
    return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
  }
};

struct ClassParams {
  double boundary_row;  // lower finger boundary (flat in base coordinates)
  double cx, cy;        // knuckle center
  double sigma_v;       // vertical extent of the ridge band
  double skin, background;
  double shade_x, shade_y;  // smooth per-class illumination gradient
  double crest_offset;      // main crease position above the knuckle center
  double dip_depth;         // crease scoop depth
  double dip_halfwidth;
  double dip_spacing;
  double curve_amp;         // gentle large-scale bend of the ridge band
  double curve_period;
  std::vector<double> dip_centers;  // scoops left of the center, mirrored right
  std::vector<Grating> gratings;
  NoiseField noise;
};

// triangular bump: straight sides code no curvature, so scoop votes
// concentrate at the vertex (and, oppositely, at the entry corners)
double triangle_bump(double u, double halfwidth) {
  const double a = std::abs(u);
  if (a >= halfwidth) return 0.0;
  return 1.0 - a / halfwidth;
}

ClassParams make_class_params(const SyntheticConfig& cfg, int subject, FingerInstance instance) {
  Rng rng(mix_seed(cfg.seed, 1, static_cast<std::uint64_t>(subject),
                   static_cast<std::uint64_t>(instance)));
  ClassParams p;
  const double w = cfg.image_width, h = cfg.image_height;
  p.boundary_row = h * (0.72 + rng.uniform(0.0, 0.08));
  p.cx = w / 2.0;
  p.cy = p.boundary_row - 55.0 + rng.uniform(-4.0, 4.0);
  p.sigma_v = 26.0 + rng.uniform(-3.0, 3.0);
  p.skin = 0.52 + rng.uniform(-0.06, 0.06);
  p.background = 0.13 + rng.uniform(-0.05, 0.05);
  p.shade_x = rng.uniform(-0.10, 0.10);
  p.shade_y = rng.uniform(-0.10, 0.10);
  p.crest_offset = -(p.sigma_v + 16.0 + rng.uniform(0.0, 4.0));
  p.dip_depth = 17.0 + rng.uniform(0.0, 2.0);
  p.dip_halfwidth = 13.0;
  p.curve_amp = 5.0 + rng.uniform(0.0, 3.0);
  p.curve_period = 150.0 + rng.uniform(0.0, 40.0);
  // A chain of crease scoops covers each flank so every balance window holds
  // several bar-amplified scoop cores of that flank's sign and the windowed
  // vote cannot wander through zero away from the center. The innermost core
  // anchors the balance transition, the outermost keeps clipped border
  // windows voting; spacing ~27 px keeps the bar walls clear of the convex
  // rims between scoops.
  // the innermost scoops sit so their bar walls land exactly on the edge of
  // the default balance window (ycols * factor = 40 px), giving the balance
  // profile a sharp, plateau-free minimum at the center column
  const double inner = 40.0, outer = p.cx - 14.0;
  const int segments = std::max(1, static_cast<int>(std::ceil((outer - inner) / 24.0)));
  p.dip_spacing = (outer - inner) / segments;
  for (int k = 0; k <= segments; ++k) p.dip_centers.push_back(inner + k * p.dip_spacing);

  p.gratings.reserve(cfg.ridge_count);
  for (int k = 0; k < cfg.ridge_count; ++k) {
    Grating g;
    g.wavelength = 11.0 + 3.5 * k + rng.uniform(-1.0, 1.0);
    g.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    g.amplitude = (0.55 / cfg.ridge_count) * rng.uniform(0.75, 1.25);
    p.gratings.push_back(g);
  }

  p.noise.step = 8;
  p.noise.cols = cfg.image_width / p.noise.step + 2;
  p.noise.rows = cfg.image_height / p.noise.step + 2;
  p.noise.values.resize(static_cast<std::size_t>(p.noise.cols) * p.noise.rows);
  for (auto& v : p.noise.values) v = rng.uniform(-0.05, 0.05);
  return p;
}

// Base texture value at (x, y) in class coordinates. A crease line with
// scoops (down on the left of the knuckle center, up on the right) drives the
// convex-direction coding; a dark bar under each scoop concentrates edge
// pixels there; gently curved gratings fill the band below.
double base_value(const ClassParams& p, double x, double y, double width) {
  // smooth skin-to-background ramp over ~1.5 px at the lower boundary
  const double t = std::clamp((p.boundary_row - y) / 1.5, 0.0, 1.0);
  if (t <= 0.0) return p.background;

  double v = p.skin + p.noise.at(x, y) + p.shade_x * (x - p.cx) / 160.0 +
             p.shade_y * (y - p.cy) / 120.0;
  (void)width;

  // The knuckle crease is the topmost texture edge in the frame. Left of the
  // knuckle center it scoops downward, right of it upward, an odd layout the
  // convex-direction balance pins to the center column. A dark bar hangs
  // under every scoop so those columns carry many edge pixels and dominate
  // the balance vote. Past the last scoop the crease holds its displaced
  // level, leaving the border columns flat.
  const double u = x - p.cx;
  const double au = std::abs(u);
  const double side = u < 0 ? 1.0 : -1.0;
  double scoop = 0.0;
  bool in_bar = false;
  double knee_bar = 0.0;  // one-sided counterweight at the terminal knee
  if (au >= p.dip_centers.back()) {
    scoop = side * p.dip_depth;
    // counterweight for the terminal scoop's uncompensated rising half: a
    // bar whose sharp wall sits at the takeoff knee, where the curvature
    // codes like a scoop core; the outer side ramps off without an edge
    const double past = au - p.dip_centers.back();
    if (past >= 2.0) knee_bar = 1.0;  // uniform to the image edge: no outer wall
  } else {
    for (const double c : p.dip_centers) {
      const double du = au - c;
      if (std::abs(du) < p.dip_halfwidth)
        scoop += side * p.dip_depth * triangle_bump(du, p.dip_halfwidth);
      // the outermost scoop is only half a scoop against the terminal hold;
      // a bar there would sit on its knee and vote the wrong way. The
      // innermost bar is narrower: the tie rule drags the balance point left
      // across the flat minimum the bar walls span, so a slim bar keeps that
      // slack inside the placement tolerance.
      const double bar_halfwidth = c == p.dip_centers.front() ? 2.5 : 3.0;
      if (std::abs(du) <= bar_halfwidth && c != p.dip_centers.back()) in_bar = true;
    }
  }
  // ridge stripes live only between the innermost scoops, clear of their
  // shoulders; elsewhere stripe edges would out-vote the scoop columns in
  // the convexity balance
  const double quiet = std::clamp((16.0 - au) / 3.0, 0.0, 1.0);

  const double crest_line = p.cy + p.crest_offset + scoop;
  const double crease_d = y - crest_line;
  v -= 0.30 * std::exp(-(crease_d * crease_d) / (5.5 * 5.5));

  // solid dark bar under each scoop, reaching the finger boundary: its long
  // vertical walls give the scoop-core columns a large edge count, so they
  // dominate the balance vote; touching the boundary keeps the faint walls
  // connected to a strong edge through hysteresis. All bars start at the
  // same row so both flanks carry equal wall counts.
  const double bar_top = p.cy + p.crest_offset + p.dip_depth + 14.0;
  if ((in_bar || knee_bar > 0.0) && y > bar_top)
    return p.background + (v - 0.34 * (in_bar ? 1.0 : knee_bar) - p.background) * t;

  // gently curved ridge gratings below the crease
  const double vs =
      (y - p.cy) + p.curve_amp * std::cos(2.0 * std::numbers::pi * u / p.curve_period);
  const double gate = std::clamp((crease_d - 8.0) / 6.0, 0.0, 1.0) * quiet;
  if (gate > 0.0) {
    const double vignette = std::exp(-(vs * vs) / (p.sigma_v * p.sigma_v));
    if (vignette * gate > 1e-4) {
      double ridges = 0.0;
      for (const auto& g : p.gratings)
        ridges += g.amplitude * std::cos(2.0 * std::numbers::pi * vs / g.wavelength + g.phase);
      v += ridges * vignette * gate;
    }
  }
  return p.background + (v - p.background) * t;
}

void validate(const SyntheticConfig& cfg) {
  if (cfg.num_subjects < 1) throw InvalidConfig("num_subjects", "must be >= 1");
  if (cfg.samples_per_class < 1) throw InvalidConfig("samples_per_class", "must be >= 1");
  if (cfg.image_width < 1) throw InvalidConfig("image_width", "must be >= 1");
  if (cfg.image_height < 1) throw InvalidConfig("image_height", "must be >= 1");
  if (cfg.ridge_count < 1) throw InvalidConfig("ridge_count", "must be >= 1");
  if (cfg.jitter_translation_px < 0) throw InvalidConfig("jitter_translation_px", "must be >= 0");
  if (cfg.jitter_rotation_deg < 0) throw InvalidConfig("jitter_rotation_deg", "must be >= 0");
  if (!(cfg.noise_sigma >= 0)) throw InvalidConfig("noise_sigma", "must be >= 0");
}

}  // namespace

double synthetic_class_center_x(const SyntheticConfig& config, int subject,
                                FingerInstance instance) {
  return make_class_params(config, subject, instance).cx;
}

DatasetManifest generate_synthetic(const SyntheticConfig& config,
                                   const std::filesystem::path& out) {
  validate(config);

  std::error_code ec;
  std::filesystem::create_directories(out / "images", ec);
  if (ec) throw IoFailure((out / "images").string());

  DatasetManifest manifest;
  manifest.root = out;

  const int session1_count = (config.samples_per_class + 1) / 2;
  const double deg2rad = std::numbers::pi / 180.0;
  const double cx_img = config.image_width / 2.0, cy_img = config.image_height / 2.0;

  for (int subject = 1; subject <= config.num_subjects; ++subject) {
    for (const FingerInstance inst : kAllInstances) {
      const ClassParams params = make_class_params(config, subject, inst);

      int emitted = 0;
      for (int session = 1; session <= 2; ++session) {
        const int count =
            session == 1 ? session1_count : config.samples_per_class - session1_count;
        for (int sample = 1; sample <= count; ++sample, ++emitted) {
          Rng rng(mix_seed(config.seed, 2, static_cast<std::uint64_t>(subject),
                           static_cast<std::uint64_t>(inst),
                           (static_cast<std::uint64_t>(session) << 32) | sample));
          const double dx = rng.uniform(-config.jitter_translation_px, config.jitter_translation_px);
          const double dy = rng.uniform(-config.jitter_translation_px, config.jitter_translation_px);
          const double angle =
              rng.uniform(-config.jitter_rotation_deg, config.jitter_rotation_deg) * deg2rad;
          // photometric jitter scales with the noise knob so that a zero-noise,
          // zero-jitter config reproduces every sample of a class exactly
          const double contrast = 1.0 + rng.uniform(-1.2, 1.2) * config.noise_sigma;
          const double brightness = rng.uniform(-0.8, 0.8) * config.noise_sigma;
          const double ca = std::cos(angle), sa = std::sin(angle);

          GrayImage img(config.image_width, config.image_height);
          for (int y = 0; y < config.image_height; ++y) {
            for (int x = 0; x < config.image_width; ++x) {
              // inverse rigid transform back into class coordinates
              const double px = x - cx_img - dx, py = y - cy_img - dy;
              const double bx = ca * px + sa * py + cx_img;
              const double by = -sa * px + ca * py + cy_img;
              double v = base_value(params, bx, by, config.image_width);
              v = contrast * (v - 0.5) + 0.5 + brightness;
              if (config.noise_sigma > 0) v += config.noise_sigma * rng.gaussian();
              img.at(x, y) = std::clamp(v, 0.0, 1.0);
            }
          }

          char name[64];
          std::snprintf(name, sizeof(name), "images/s%03d_%s_%d_%02d.png", subject, to_code(inst),
                        session, sample);
          write_png_gray(out / name, img);

          SampleRecord rec;
          rec.subject = static_cast<std::uint32_t>(subject);
          rec.instance = inst;
          rec.session = static_cast<std::uint8_t>(session);
          rec.sample = static_cast<std::uint16_t>(sample);
          rec.image_ref = name;
          manifest.records.push_back(std::move(rec));
        }
      }
      (void)emitted;
    }
  }

  save_manifest(manifest);
  return manifest;
}

}  // namespace fkp

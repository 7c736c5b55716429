#ifndef FKP_DATASET_HPP_
#define FKP_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fkp {

// The four finger types used for multi-instance capture.
enum class FingerInstance : std::uint8_t { RI = 0, RM = 1, LI = 2, LM = 3 };

inline constexpr std::array<FingerInstance, 4> kAllInstances = {
    FingerInstance::RI, FingerInstance::RM, FingerInstance::LI, FingerInstance::LM};

const char* to_code(FingerInstance inst);
std::optional<FingerInstance> parse_instance(std::string_view code);

struct SampleRecord {
  std::uint32_t subject = 0;  // positive
  FingerInstance instance = FingerInstance::RI;
  std::uint8_t session = 1;  // 1 or 2
  std::uint16_t sample = 1;  // positive, per session
  std::string image_ref;     // path relative to the manifest directory

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<SampleRecord> records;  // canonical (subject, instance, session, sample) order

  std::filesystem::path resolve(const SampleRecord& rec) const { return root / rec.image_ref; }
};

// Loads `root/manifest.csv`, validates keys and image references, and returns
// records in canonical sort order.
DatasetManifest load_manifest(const std::filesystem::path& root);

// Writes `manifest.csv` under manifest.root (UTF-8, LF line endings).
void save_manifest(const DatasetManifest& manifest);

struct SyntheticConfig {
  int num_subjects = 20;
  int samples_per_class = 6;  // split into 2 sessions, odd remainder to session 1
  int image_width = 300;
  int image_height = 240;
  int ridge_count = 5;
  double jitter_translation_px = 0.0;
  double jitter_rotation_deg = 0.0;
  double noise_sigma = 0.06;
  std::uint64_t seed = 42;
};

// Renders num_subjects x 4 x samples_per_class knuckle-like images plus a
// manifest into `out`. Each (subject, instance) class has its own base texture;
// samples differ by small rigid, photometric, and noise jitter. Identical
// (config, seed) reproduces byte-identical files.
DatasetManifest generate_synthetic(const SyntheticConfig& config,
                                   const std::filesystem::path& out);

// Ground-truth knuckle center column of a class texture before per-sample
// jitter; exposed so alignment tests can check ROI placement.
double synthetic_class_center_x(const SyntheticConfig& config, int subject,
                                FingerInstance instance);

}  // namespace fkp

#endif  // FKP_DATASET_HPP_

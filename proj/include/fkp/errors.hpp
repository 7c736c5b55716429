#ifndef FKP_ERRORS_HPP_
#define FKP_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fkp {

// Base class for all library errors. Subclasses carry the failing detail in
// the message and, where useful, as public fields.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// --- dataset ---------------------------------------------------------------

struct MissingManifest : Error {
  explicit MissingManifest(const std::string& path)
      : Error("missing manifest: " + path) {}
};

struct MalformedRow : Error {
  int line_no;
  MalformedRow(int line, const std::string& why)
      : Error("malformed manifest row at line " + std::to_string(line) + ": " + why),
        line_no(line) {}
};

struct DuplicateKey : Error {
  explicit DuplicateKey(const std::string& key)
      : Error("duplicate manifest key: " + key) {}
};

struct DanglingImageRef : Error {
  explicit DanglingImageRef(const std::string& path)
      : Error("manifest references missing image: " + path) {}
};

struct IoFailure : Error {
  explicit IoFailure(const std::string& path)
      : Error("i/o failure: " + path) {}
};

struct InvalidConfig : Error {
  std::string field;
  explicit InvalidConfig(const std::string& f, const std::string& why = "")
      : Error("invalid config field '" + f + "'" + (why.empty() ? "" : ": " + why)),
        field(f) {}
};

// --- preprocess ------------------------------------------------------------

struct DegenerateOutput : Error {
  explicit DegenerateOutput(const std::string& why) : Error("degenerate output: " + why) {}
};

struct InvalidThresholds : Error {
  explicit InvalidThresholds(const std::string& why) : Error("invalid thresholds: " + why) {}
};

struct InsufficientBoundary : Error {
  explicit InsufficientBoundary(const std::string& why)
      : Error("insufficient boundary support: " + why) {}
};

struct EmptyCodeMap : Error {
  EmptyCodeMap() : Error("convexity code map has no nonzero codes") {}
};

struct RoiOutOfBounds : Error {
  explicit RoiOutOfBounds(const std::string& why) : Error("roi out of bounds: " + why) {}
};

// --- features --------------------------------------------------------------

struct NyquistViolation : Error {
  explicit NyquistViolation(double f)
      : Error("center frequency " + std::to_string(f) + " cycles/px is >= 0.5") {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& why) : Error("dimension mismatch: " + why) {}
};

struct GridTooFine : Error {
  explicit GridTooFine(const std::string& why) : Error("sampling grid too fine: " + why) {}
};

// --- fusion ----------------------------------------------------------------

struct EmptyTrainingSet : Error {
  explicit EmptyTrainingSet(std::size_t n)
      : Error("training set needs >= 2 vectors, got " + std::to_string(n)) {}
};

struct MixedSchemes : Error {
  MixedSchemes() : Error("fusion components normalized under different schemes") {}
};

struct DuplicateInstance : Error {
  explicit DuplicateInstance(const std::string& code)
      : Error("duplicate instance in fusion set: " + code) {}
};

struct KeyMismatch : Error {
  explicit KeyMismatch(const std::string& why) : Error("sample key mismatch: " + why) {}
};

// --- matcher ---------------------------------------------------------------

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& why) : Error("template shape mismatch: " + why) {}
};

struct ZeroVector : Error {
  ZeroVector() : Error("cosine similarity undefined for all-zero vector") {}
};

// --- eval ------------------------------------------------------------------

struct MissingInstance : Error {
  std::uint32_t subject;
  MissingInstance(std::uint32_t subj, const std::string& code)
      : Error("subject " + std::to_string(subj) + " lacks instance " + code),
        subject(subj) {}
};

struct EmptyScoreSet : Error {
  explicit EmptyScoreSet(const std::string& which)
      : Error("empty score set: " + which) {}
};

struct InconsistentOperatingPoints : Error {
  InconsistentOperatingPoints()
      : Error("table columns evaluated at different operating points") {}
};

}  // namespace fkp

#endif  // FKP_ERRORS_HPP_

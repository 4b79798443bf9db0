#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace osp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A mode with damping ratio >= 1; the closed-form response needs an
// oscillatory (underdamped) homogeneous part.
class UnsupportedDamping : public Error {
 public:
  UnsupportedDamping(int mode, double zeta)
      : Error("mode " + std::to_string(mode + 1) + " has damping ratio " +
              std::to_string(zeta) + " >= 1 (only underdamped modes are supported)"),
        mode_(mode),
        zeta_(zeta) {}

  int mode() const noexcept { return mode_; }
  double zeta() const noexcept { return zeta_; }

 private:
  int mode_;
  double zeta_;
};

// Information matrix is not positive definite. `sample()` is -1 when the
// failure is not attached to a Monte-Carlo sample.
class SingularInformation : public Error {
 public:
  explicit SingularInformation(const std::string& what, long sample = -1)
      : Error(what), sample_(sample) {}

  long sample() const noexcept { return sample_; }

 private:
  long sample_;
};

class EnumerationCapExceeded : public Error {
 public:
  EnumerationCapExceeded(std::uint64_t count, std::uint64_t cap, const std::string& what)
      : Error(what), count_(count), cap_(cap) {}

  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

// Raised by config validation; carries every violation found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid config:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }

  std::vector<std::string> violations_;
};

// Wraps a failure from one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace osp

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "osp/errors.hpp"
#include "osp/structural_model.hpp"

namespace osp {

inline constexpr double kGravity = 9.81;  // m/s^2

// lognormal: mean/std of the variable itself (physical space).
// lognormal_log_std: mean of the variable, std is the standard deviation of
// its logarithm.
enum class Distribution { lognormal, lognormal_log_std, normal };

inline std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::lognormal: return "lognormal";
    case Distribution::lognormal_log_std: return "lognormal_log_std";
    case Distribution::normal: return "normal";
  }
  return "normal";
}

inline bool is_lognormal(Distribution d) { return d != Distribution::normal; }

struct Marginal {
  Distribution dist = Distribution::lognormal;
  double mean = 1.0;
  double std = 0.1;

  bool operator==(const Marginal&) const = default;
};

struct PriorSpec {
  Marginal omega0;
  Marginal alpha;
  Marginal beta;
  Marginal omega;
  Marginal a0;

  const Marginal& operator[](Param p) const {
    switch (p) {
      case Param::omega0: return omega0;
      case Param::alpha: return alpha;
      case Param::beta: return beta;
      case Param::omega: return omega;
      case Param::a0: return a0;
    }
    return a0;
  }
  Marginal& operator[](Param p) { return const_cast<Marginal&>(std::as_const(*this)[p]); }

  bool operator==(const PriorSpec&) const = default;
};

struct SampleSet {
  std::vector<SystemParameters> samples;
  std::uint64_t seed = 0;

  std::size_t size() const { return samples.size(); }
  const SystemParameters& operator[](std::size_t k) const { return samples[k]; }
};

// Frequencies and damping coefficients are lognormal with the given mean
// and log-space spread; a0 is zero-mean normal with a std of 40% of g.
inline PriorSpec default_prior() {
  PriorSpec p;
  p.omega0 = {Distribution::lognormal_log_std, 2.0 * M_PI, 0.25};
  p.alpha = {Distribution::lognormal_log_std, 0.1, 0.01};
  p.beta = {Distribution::lognormal_log_std, 1e-4, 1e-5};
  p.omega = {Distribution::lognormal_log_std, 2.0 * M_PI, 0.25};
  p.a0 = {Distribution::normal, 0.0, 0.4 * kGravity};
  return p;
}

// Moment matching: parameters of the normal underlying a lognormal with the
// given physical mean and standard deviation.
inline std::pair<double, double> lognormal_underlying(double mean, double std) {
  if (!(mean > 0.0) || !(std > 0.0))
    throw InvalidArgument("lognormal mean and std must be positive");
  const double var_ln = std::log1p((std / mean) * (std / mean));
  return {std::log(mean) - 0.5 * var_ln, std::sqrt(var_ln)};
}

// Underlying-normal parameters for a lognormal with physical mean `mean` and
// log-space standard deviation `log_std`.
inline std::pair<double, double> lognormal_log_std_underlying(double mean, double log_std) {
  if (!(mean > 0.0) || !(log_std > 0.0))
    throw InvalidArgument("lognormal mean and log-space std must be positive");
  return {std::log(mean) - 0.5 * log_std * log_std, log_std};
}

// Underlying-normal (mu, sigma) of a lognormal marginal.
inline std::pair<double, double> underlying(const Marginal& m) {
  return m.dist == Distribution::lognormal_log_std ? lognormal_log_std_underlying(m.mean, m.std)
                                                   : lognormal_underlying(m.mean, m.std);
}

inline void validate(const PriorSpec& spec) {
  std::vector<std::string> bad;
  for (int p = 0; p < kNumParams; ++p) {
    const auto& m = spec[static_cast<Param>(p)];
    const std::string name(kParamNames[p]);
    if (!(m.std > 0.0) || !std::isfinite(m.std)) bad.push_back(name + ": std must be positive");
    if (!std::isfinite(m.mean)) bad.push_back(name + ": mean must be finite");
    if (is_lognormal(m.dist) && !(m.mean > 0.0))
      bad.push_back(name + ": lognormal mean must be positive");
  }
  if (!bad.empty()) throw ConfigError(bad);
}

// Standard normal draws from a 64-bit Mersenne Twister via the Box-Muller
// transform. mt19937_64 output is fully specified by the C++ standard and
// the transform is written out here, so sample sets are identical across
// platforms and standard libraries (std::normal_distribution is not).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 == 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  // 53 random bits in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline constexpr double kMinAbsAmplitude = 1e-6;

// Draws in parameter order (omega0, alpha, beta, omega, a0) per sample.
// Draws that violate a parameter's admissible range (non-positive
// frequencies, negative damping, |a0| < 1e-6) are redrawn.
inline SampleSet sample_prior(const PriorSpec& spec, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("n_samples must be at least 1");
  validate(spec);

  std::array<std::pair<double, double>, kNumParams> ln{};
  for (int p = 0; p < kNumParams; ++p) {
    const auto& m = spec[static_cast<Param>(p)];
    if (is_lognormal(m.dist)) ln[p] = underlying(m);
  }

  auto admissible = [](int p, double v) {
    switch (static_cast<Param>(p)) {
      case Param::omega0:
      case Param::omega: return v > 0.0;
      case Param::alpha:
      case Param::beta: return v >= 0.0;
      case Param::a0: return std::abs(v) >= kMinAbsAmplitude;
    }
    return false;
  };

  NormalStream rng(seed);
  SampleSet set;
  set.seed = seed;
  set.samples.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    std::array<double, kNumParams> v{};
    for (int p = 0; p < kNumParams; ++p) {
      const auto& m = spec[static_cast<Param>(p)];
      for (int attempt = 0;; ++attempt) {
        if (attempt == 1000)
          throw InvalidArgument("prior for " + std::string(kParamNames[p]) +
                                " almost never yields admissible values");
        const double n = rng.next();
        v[p] = is_lognormal(m.dist) ? std::exp(ln[p].first + ln[p].second * n) : m.mean + m.std * n;
        if (admissible(p, v[p])) break;
      }
    }
    set.samples.push_back(SystemParameters::from_array(v));
  }
  return set;
}

}  // namespace osp

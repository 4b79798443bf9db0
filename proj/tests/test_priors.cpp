#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "osp/priors.hpp"

using namespace osp;

namespace {

struct Moments {
  double mean = 0.0, std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(v.size() - 1));
  return m;
}

std::vector<double> column(const SampleSet& s, Param p) {
  std::vector<double> out;
  for (const auto& th : s.samples) out.push_back(th[p]);
  return out;
}

// Physical std of a marginal.
double physical_std(const Marginal& m) {
  if (m.dist != Distribution::lognormal_log_std) return m.std;
  return m.mean * std::sqrt(std::expm1(m.std * m.std));
}

PriorSpec physical_prior() {
  PriorSpec p = default_prior();
  for (Param q : {Param::omega0, Param::alpha, Param::beta, Param::omega}) p[q].dist = Distribution::lognormal;
  return p;
}

}  // namespace

TEST(DefaultPrior, Values) {
  const auto p = default_prior();
  EXPECT_DOUBLE_EQ(p.omega0.mean, 2.0 * M_PI);
  EXPECT_DOUBLE_EQ(p.omega0.std, 0.25);
  EXPECT_DOUBLE_EQ(p.alpha.mean, 0.1);
  EXPECT_DOUBLE_EQ(p.alpha.std, 0.01);
  EXPECT_DOUBLE_EQ(p.beta.mean, 1e-4);
  EXPECT_DOUBLE_EQ(p.beta.std, 1e-5);
  EXPECT_DOUBLE_EQ(p.omega.mean, 2.0 * M_PI);
  EXPECT_DOUBLE_EQ(p.omega.std, 0.25);
  EXPECT_EQ(p.a0.dist, Distribution::normal);
  EXPECT_DOUBLE_EQ(p.a0.mean, 0.0);
  EXPECT_DOUBLE_EQ(p.a0.std, 0.4 * 9.81);
}

TEST(LognormalUnderlying, ClosedForm) {
  const auto [mu, sigma] = lognormal_underlying(2.0 * M_PI, 0.25);
  // 30-digit reference values
  EXPECT_NEAR(sigma, 0.0397730014433765783803994536751, 1e-15);
  EXPECT_NEAR(mu, 1.83708612058743806586706787183, 1e-15);
  const double s = std::sqrt(std::log(1.0 + std::pow(0.25 / (2.0 * M_PI), 2)));
  EXPECT_NEAR(sigma, s, 1e-15);
  EXPECT_NEAR(mu, std::log(2.0 * M_PI) - 0.5 * s * s, 1e-15);
}

TEST(LognormalUnderlying, PointMassLimit) {
  const auto [mu, sigma] = lognormal_underlying(1.0, 1e-9);
  EXPECT_NEAR(mu, 0.0, 1e-15);
  EXPECT_NEAR(sigma, 1e-9, 1e-15);
}

TEST(LognormalUnderlying, RejectsNonPositive) {
  EXPECT_THROW(lognormal_underlying(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(lognormal_underlying(1.0, -1.0), InvalidArgument);
  EXPECT_THROW(lognormal_log_std_underlying(-1.0, 0.1), InvalidArgument);
}

TEST(LognormalUnderlying, LogStdReading) {
  const auto [mu, sigma] = lognormal_log_std_underlying(2.0 * M_PI, 0.25);
  EXPECT_DOUBLE_EQ(sigma, 0.25);
  EXPECT_NEAR(std::exp(mu + 0.5 * sigma * sigma), 2.0 * M_PI, 1e-12);
}

TEST(LognormalUnderlying, RoundTripMillionDraws) {
  PriorSpec p = physical_prior();
  const auto s = sample_prior(p, 1'000'000, 42);
  for (Param q : {Param::omega0, Param::alpha, Param::beta, Param::omega}) {
    const auto m = moments(column(s, q));
    EXPECT_NEAR(m.mean, p[q].mean, 0.01 * p[q].mean);
    EXPECT_NEAR(m.std, p[q].std, 0.01 * p[q].std);
  }
}

TEST(SamplePrior, Deterministic) {
  const auto a = sample_prior(default_prior(), 500, 17);
  const auto b = sample_prior(default_prior(), 500, 17);
  EXPECT_EQ(a.samples, b.samples);
  const auto c = sample_prior(default_prior(), 500, 18);
  EXPECT_NE(a.samples, c.samples);
}

TEST(SamplePrior, FixedDrawsAcrossPlatforms) {
  // mt19937_64 output is pinned by the standard; the first draw of seed 1
  // follows from it through the documented Box-Muller transform.
  NormalStream rng(1);
  std::mt19937_64 eng(1);
  const double u1 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  EXPECT_EQ(rng.next(), std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2));
  EXPECT_EQ(rng.next(), std::sqrt(-2.0 * std::log(u1)) * std::sin(2.0 * M_PI * u2));
}

TEST(SamplePrior, SingleSample) { EXPECT_EQ(sample_prior(default_prior(), 1, 0).size(), 1u); }

TEST(SamplePrior, ZeroSamplesRejected) { EXPECT_THROW(sample_prior(default_prior(), 0, 0), InvalidArgument); }

TEST(SamplePrior, MeanWithinThreeStandardErrors) {
  for (const PriorSpec& p : {default_prior(), physical_prior()}) {
    const auto s = sample_prior(p, 1000, 2024);
    const auto m = moments(column(s, Param::omega0));
    EXPECT_LT(std::abs(m.mean - 2.0 * M_PI), 3.0 * physical_std(p.omega0) / std::sqrt(1000.0));
  }
}

TEST(SamplePrior, MomentRecovery) {
  const std::size_t n = 100'000;
  for (const PriorSpec& p : {default_prior(), physical_prior()}) {
    const auto s = sample_prior(p, n, 7);
    for (int k = 0; k < kNumParams; ++k) {
      const auto q = static_cast<Param>(k);
      const auto m = moments(column(s, q));
      const double sd = physical_std(p[q]);
      EXPECT_LT(std::abs(m.mean - p[q].mean), 4.0 * sd / std::sqrt(double(n))) << kParamNames[k];
      // Standard error of the sample std, including lognormal kurtosis.
      double kurt = 3.0;
      if (is_lognormal(p[q].dist)) {
        const double s2 = underlying(p[q]).second * underlying(p[q]).second;
        kurt = std::exp(4 * s2) + 2 * std::exp(3 * s2) + 3 * std::exp(2 * s2) - 3;
      }
      const double se_std = sd * std::sqrt((kurt - 1.0) / (4.0 * double(n)));
      EXPECT_LT(std::abs(m.std - sd), 4.0 * se_std) << kParamNames[k];
    }
  }
}

TEST(SamplePrior, Independence) {
  const auto s = sample_prior(default_prior(), 100'000, 9);
  std::vector<std::vector<double>> cols;
  for (int k = 0; k < kNumParams; ++k) cols.push_back(column(s, static_cast<Param>(k)));
  for (int a = 0; a < kNumParams; ++a)
    for (int b = a + 1; b < kNumParams; ++b) {
      const auto ma = moments(cols[a]), mb = moments(cols[b]);
      double c = 0.0;
      for (std::size_t i = 0; i < cols[a].size(); ++i) c += (cols[a][i] - ma.mean) * (cols[b][i] - mb.mean);
      c /= static_cast<double>(cols[a].size() - 1) * ma.std * mb.std;
      EXPECT_LT(std::abs(c), 0.02) << kParamNames[a] << " vs " << kParamNames[b];
    }
}

TEST(SamplePrior, AdmissibleDraws) {
  PriorSpec p = default_prior();
  p.alpha = {Distribution::normal, 0.0, 0.1};  // half the draws negative
  const auto s = sample_prior(p, 2000, 1);
  for (const auto& th : s.samples) {
    EXPECT_GE(th.alpha, 0.0);
    EXPECT_GT(th.omega0, 0.0);
    EXPECT_GE(std::abs(th.a0), kMinAbsAmplitude);
  }
}

TEST(PriorValidation, CollectsAllViolations) {
  PriorSpec p = default_prior();
  p.omega0.std = 0.0;
  p.beta.mean = -1.0;
  try {
    validate(p);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 2u);
  }
}

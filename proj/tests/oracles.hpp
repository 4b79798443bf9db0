#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's own numerics beyond building inputs.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "osp/osp.hpp"

namespace oracle {

// Modal constants recomputed from scratch.
struct Mode {
  double wj2, decay, forcing, omega;
};

inline Mode mode_constants(const osp::ShearBuildingModel& m, const osp::SystemParameters& th, int j) {
  const double c2 = m.eigenvalues()(j);
  const double wj2 = c2 * th.omega0 * th.omega0;
  return {wj2, 0.5 * (th.alpha + th.beta * wj2), -th.a0 * m.participation()(j) / m.modal_masses()(j), th.omega};
}

// q(t_end) for q'' + 2 decay q' + wj2 q = forcing sin(omega t), q(0) = q'(0) = 0,
// by adaptive Dormand-Prince 5(4).
inline double rk_mode(const Mode& md, double t_end, double tol = 1e-13) {
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  State x{0.0, 0.0};
  auto rhs = [&](const State& s, State& ds, double t) {
    ds[0] = s[1];
    ds[1] = md.forcing * std::sin(md.omega * t) - 2.0 * md.decay * s[1] - md.wj2 * s[0];
  };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(tol, tol), rhs, x, 0.0, t_end,
                          1e-4);
  return x[0];
}

// Physical response of location i at a single time, via the closed form.
inline double x_at(const osp::ShearBuildingModel& m, const osp::SystemParameters& th, std::size_t i, double t) {
  const osp::TimeGrid g(1, t);
  return osp::physical_response(m, osp::modal_response(m, th, g))(0, static_cast<Eigen::Index>(i));
}

// Central difference of x_i(t) in parameter p, relative step `rel` of the
// parameter's magnitude (or of `scale` when the parameter is zero).
// Central difference with one Richardson step (fourth order). rel 1e-4 keeps
// round-off small even for tiny parameters like beta.
inline double fd_sensitivity(const osp::ShearBuildingModel& m, const osp::SystemParameters& th, std::size_t i,
                             double t, int p, double rel = 1e-4, double scale = 1.0) {
  const auto v = th.as_array();
  const auto central = [&](double h) {
    auto plus = v, minus = v;
    plus[p] += h;
    minus[p] -= h;
    const double fp = x_at(m, osp::SystemParameters::from_array(plus), i, t);
    const double fm = x_at(m, osp::SystemParameters::from_array(minus), i, t);
    return (fp - fm) / (2.0 * h);
  };
  const double h = rel * (v[p] != 0.0 ? std::abs(v[p]) : scale);
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

// Round-off scale of fd_sensitivity: below ~1e5 times this the difference
// quotient carries no digits worth comparing at 1e-5.
inline double fd_noise(const osp::ShearBuildingModel& m, const osp::SystemParameters& th, std::size_t i, double t,
                       int p, double rel = 1e-4, double scale = 1.0) {
  const auto v = th.as_array();
  const double h = rel * (v[p] != 0.0 ? std::abs(v[p]) : scale);
  return 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x_at(m, th, i, t)) / h;
}

// Q^(i) by explicit triple loop over (n, p, q).
inline Eigen::Matrix<double, 5, 5> naive_q(const osp::SensitivityField& s, std::size_t i) {
  Eigen::Matrix<double, 5, 5> q;
  for (int p = 0; p < 5; ++p)
    for (int r = 0; r < 5; ++r) {
      double acc = 0.0;
      for (std::size_t n = 0; n < s.n_steps(); ++n) acc += s(n, i, p) * s(n, i, r);
      q(p, r) = acc;
    }
  return q;
}

// E[log det Q(z)] with determinants from a full-pivot LU, sequential sum.
inline double naive_value(const Eigen::VectorXd& z, const osp::ElementaryFimSet& set) {
  double sum = 0.0;
  for (std::size_t k = 0; k < set.n_samples(); ++k) {
    Eigen::Matrix<double, 5, 5> q = Eigen::Matrix<double, 5, 5>::Zero();
    for (std::size_t i = 0; i < set.n_dof(); ++i) q += z(static_cast<Eigen::Index>(i)) * set.at(k, i);
    const double det = q.fullPivLu().determinant();
    if (!(det > 0.0)) return -std::numeric_limits<double>::infinity();
    sum += std::log(det);
  }
  return sum / static_cast<double>(set.n_samples());
}

struct BruteForce {
  std::vector<std::size_t> stories;  // 1-based
  double value = -std::numeric_limits<double>::infinity();
};

// Every N_o-subset by bitmask scan.
inline BruteForce brute_force(const osp::ElementaryFimSet& set, std::size_t budget) {
  const std::size_t nd = set.n_dof();
  BruteForce best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nd); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != budget) continue;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nd));
    for (std::size_t i = 0; i < nd; ++i)
      if (mask >> i & 1) z(static_cast<Eigen::Index>(i)) = 1.0;
    const double v = naive_value(z, set);
    if (v > best.value) {
      best.value = v;
      best.stories.clear();
      for (std::size_t i = 0; i < nd; ++i)
        if (mask >> i & 1) best.stories.push_back(i + 1);
    }
  }
  return best;
}

// Random strictly interior z with sum N_o: Dirichlet-like weights pushed
// through a bisection on a shift so every entry stays in (lo, hi).
inline Eigen::VectorXd random_feasible(std::size_t nd, std::size_t budget, std::mt19937_64& rng, double lo = 0.02,
                                       double hi = 0.98) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(nd));
  for (auto& v : w) v = u(rng);
  auto clipped = [&](double s) {
    Eigen::VectorXd z = (w.array() + s).cwiseMax(lo).cwiseMin(hi).matrix();
    return z;
  };
  double a = -2.0, b = 2.0;
  const double target = static_cast<double>(budget);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    (clipped(mid).sum() < target ? a : b) = mid;
  }
  Eigen::VectorXd z = clipped(0.5 * (a + b));
  // Spread the residual over entries with room.
  double r = target - z.sum();
  for (Eigen::Index i = 0; i < z.size() && std::abs(r) > 0.0; ++i) {
    const double room = r > 0 ? hi - z(i) : z(i) - lo;
    const double d = std::copysign(std::min(std::abs(r), room), r);
    z(i) += d;
    r -= d;
  }
  return z;
}

inline osp::ElementaryFimSet make_set(std::size_t nd, std::size_t n_steps, double dt, std::size_t n_samples,
                                      std::uint64_t seed, const osp::PriorSpec& prior = osp::default_prior()) {
  const auto model = osp::build_uniform_shear_model(nd);
  const auto samples = osp::sample_prior(prior, n_samples, seed);
  return osp::build_elementary_set(model, samples, osp::TimeGrid(n_steps, dt));
}

}  // namespace oracle

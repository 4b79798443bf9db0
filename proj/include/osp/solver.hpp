#pragma once

// Primal-dual interior-point method for
//   minimize h(z)  s.t.  0 <= z_i <= 1,  1^T z = N_o
// followed by rounding and brute-force repair of ambiguous locations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "osp/errors.hpp"
#include "osp/fim.hpp"

namespace osp {

struct SolverOptions {
  double tolerance = 1e-6;
  int max_outer_iterations = 100;  // cap on Newton iterations (gradient/Hessian evaluations)
  double initial_t = 1.0;
  double barrier_multiplier = 10.0;
  double ambiguity_threshold = 0.05;
  std::uint64_t enumeration_cap = 1'000'000;

  void validate() const {
    std::vector<std::string> bad;
    if (!(tolerance > 0.0)) bad.emplace_back("solver.tolerance must be positive");
    if (max_outer_iterations < 1) bad.emplace_back("solver.max_outer_iterations must be >= 1");
    if (!(initial_t > 0.0)) bad.emplace_back("solver.initial_t must be positive");
    if (!(barrier_multiplier > 1.0)) bad.emplace_back("solver.barrier_multiplier must exceed 1");
    if (!(ambiguity_threshold > 0.0 && ambiguity_threshold < 0.5))
      bad.emplace_back("solver.ambiguity_threshold must lie in (0, 0.5)");
    if (enumeration_cap < 1) bad.emplace_back("solver.enumeration_cap must be >= 1");
    if (!bad.empty()) throw ConfigError(bad);
  }
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;  // E[log det Q(z)] at the iterate
  double step_norm = 0.0;
  double step_length = 0.0;
  double barrier_t = 0.0;
  double newton_decrement = 0.0;
};

struct RelaxedSolution {
  Eigen::VectorXd z;
  std::size_t budget = 0;
  double objective_relaxed = 0.0;  // E[log det Q(z*)], larger is better
  int iterations = 0;              // Newton iterations
  int objective_evaluations = 0;   // distinct points where h was evaluated
  bool converged = false;
  double kkt_residual = 0.0;
  double complementarity = 0.0;
  std::vector<IterationRecord> trace;
};

struct BinaryPlacement {
  Eigen::VectorXd delta;
  double objective_binary = 0.0;  // E[log det Q(delta)]
  bool certified_optimal = false;
  double gap = 0.0;                  // objective_relaxed - objective_binary
  std::vector<std::size_t> ambiguous;  // 0-based indices enumerated during repair
  int objective_evaluations = 0;

  // 1-based instrumented stories.
  std::vector<std::size_t> stories() const {
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < delta.size(); ++i)
      if (delta(i) > 0.5) out.push_back(static_cast<std::size_t>(i) + 1);
    return out;
  }
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<IterationRecord> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<IterationRecord>& trace() const noexcept { return trace_; }

 private:
  std::vector<IterationRecord> trace_;
};

inline void check_budget(std::size_t n_dof, std::size_t budget) {
  if (budget < 1 || budget > n_dof)
    throw InvalidArgument("sensor budget " + std::to_string(budget) + " is infeasible for " +
                          std::to_string(n_dof) + " locations (need 1 <= N_o <= N_d)");
}

namespace detail {

// Largest s in (0, 1] keeping 0 < z + s dz < 1 after a fraction-to-boundary cut.
inline double max_box_step(const Eigen::VectorXd& z, const Eigen::VectorXd& dz) {
  double s = 1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (dz(i) < 0.0) s = std::min(s, -z(i) / dz(i));
    if (dz(i) > 0.0) s = std::min(s, (1.0 - z(i)) / dz(i));
  }
  return s;
}

inline double max_positive_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double s = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) s = std::min(s, -v(i) / dv(i));
  return s;
}

// Primal-dual iterate for the box + budget constrained problem.
struct PdState {
  Eigen::VectorXd z, lam_lo, lam_hi;
  double nu = 0.0;
  double h = 0.0;
  Eigen::VectorXd grad;
};

struct PdResidual {
  Eigen::VectorXd dual;  // grad h - lam_lo + lam_hi + nu 1
  Eigen::VectorXd cent_lo, cent_hi;
  double primal = 0.0;  // 1^T z - N_o

  double norm() const {
    return std::sqrt(dual.squaredNorm() + cent_lo.squaredNorm() + cent_hi.squaredNorm() +
                     primal * primal);
  }
};

inline PdResidual pd_residual(const PdState& s, double t, double budget) {
  PdResidual r;
  r.dual = s.grad - s.lam_lo + s.lam_hi + Eigen::VectorXd::Constant(s.z.size(), s.nu);
  r.cent_lo = (s.lam_lo.array() * s.z.array() - 1.0 / t).matrix();
  r.cent_hi = (s.lam_hi.array() * (1.0 - s.z.array()) - 1.0 / t).matrix();
  r.primal = s.z.sum() - budget;
  return r;
}

inline double surrogate_gap(const PdState& s) {
  return s.lam_lo.dot(s.z) + s.lam_hi.dot(Eigen::VectorXd::Ones(s.z.size()) - s.z);
}

}  // namespace detail

// Solves the relaxed problem with a primal-dual interior-point method on the
// log-barrier central path, starting from `start` (default: the uniform
// point N_o/N_d). The start must be strictly interior and meet the budget.
// 
// Each iteration takes one Hessian evaluation; every trial point of the line
// search costs one objective+gradient evaluation. Termination requires the
// KKT certificate ||grad h + nu 1 - lam_lo + lam_hi||_inf < tolerance,
// complementarity max(lam_lo z, lam_hi (1 - z)) < tolerance and a surrogate
// duality gap below tolerance.
inline RelaxedSolution solve_relaxed(const ElementaryFimSet& set, std::size_t budget,
                                     const SolverOptions& opts = {},
                                     std::optional<Eigen::VectorXd> start = std::nullopt) {
  opts.validate();
  const std::size_t nd = set.n_dof();
  check_budget(nd, budget);
  const auto n = static_cast<Eigen::Index>(nd);
  const double n_o = static_cast<double>(budget);

  RelaxedSolution sol;
  sol.budget = budget;
  if (budget == nd) {
    sol.z = Eigen::VectorXd::Ones(n);
    sol.objective_relaxed = -mc_objective(sol.z, set);
    sol.objective_evaluations = 1;
    sol.converged = true;
    return sol;
  }

  preflight_check(set);

  detail::PdState st;
  st.z = start ? *start : Eigen::VectorXd::Constant(n, n_o / static_cast<double>(nd));
  if (st.z.size() != n) throw InvalidArgument("start point has wrong length");
  if ((st.z.array() <= 0.0).any() || (st.z.array() >= 1.0).any())
    throw InvalidArgument("start point must lie strictly inside the unit box");
  if (std::abs(st.z.sum() - n_o) > 1e-9) throw InvalidArgument("start point does not meet the sensor budget");

  constexpr double kResidualDecrease = 0.01;
  constexpr double kBacktrack = 0.5;
  constexpr double kBoundaryFraction = 0.99;
  const double m = 2.0 * static_cast<double>(nd);  // inequality count

  // Barrier-consistent duals for t = initial_t, so the initial gap is m / t.
  st.lam_lo = (1.0 / (opts.initial_t * st.z.array())).matrix();
  st.lam_hi = (1.0 / (opts.initial_t * (1.0 - st.z.array()))).matrix();
  {
    const McEstimate e = mc_evaluate(st.z, set, kObjective | kGradient);
    st.h = e.objective;
    st.grad = e.gradient;
    sol.objective_evaluations = 1;
  }
  st.nu = -(st.grad - st.lam_lo + st.lam_hi).mean();

  auto fail = [&](const std::string& why) -> NonConvergence {
    return NonConvergence("relaxed solve did not converge: " + why, sol.trace);
  };

  for (;;) {
    const double gap = detail::surrogate_gap(st);
    const double t = opts.barrier_multiplier * m / gap;
    const detail::PdResidual r = detail::pd_residual(st, t, n_o);

    const double stationarity = r.dual.lpNorm<Eigen::Infinity>();
    const double complementarity =
        (st.lam_lo.array() * st.z.array()).max(st.lam_hi.array() * (1.0 - st.z.array())).maxCoeff();

    IterationRecord rec;
    rec.iteration = sol.iterations;
    rec.objective = -st.h;
    rec.barrier_t = t;
    if (stationarity < opts.tolerance && complementarity < opts.tolerance && gap < opts.tolerance &&
        std::abs(r.primal) < 1e-9) {
      sol.kkt_residual = stationarity;
      sol.complementarity = complementarity;
      sol.trace.push_back(rec);
      break;
    }
    if (sol.iterations >= opts.max_outer_iterations)
      throw fail("iteration limit " + std::to_string(opts.max_outer_iterations) + " reached");

    const Eigen::MatrixXd hess_h = mc_evaluate(st.z, set, kHessian).hessian;
    ++sol.iterations;
    rec.iteration = sol.iterations;

    // Eliminate the dual steps: (H + D) dz + dnu 1 = -g_red, 1^T dz = -r_pri.
    const Eigen::ArrayXd slack_hi = 1.0 - st.z.array();
    Eigen::MatrixXd h_red = hess_h;
    h_red.diagonal() += (st.lam_lo.array() / st.z.array() + st.lam_hi.array() / slack_hi).matrix();
    const Eigen::VectorXd g_red =
        r.dual + (r.cent_lo.array() / st.z.array() - r.cent_hi.array() / slack_hi).matrix();

    Eigen::LLT<Eigen::MatrixXd> llt(h_red);
    if (llt.info() != Eigen::Success) throw fail("reduced KKT matrix is not positive definite");
    const Eigen::VectorXd hinv_g = llt.solve(g_red);
    const Eigen::VectorXd hinv_1 = llt.solve(Eigen::VectorXd::Ones(n));
    const double dnu = (r.primal - hinv_g.sum()) / hinv_1.sum();
    const Eigen::VectorXd dz = -(hinv_g + dnu * hinv_1);
    const Eigen::VectorXd dlo =
        ((-r.cent_lo.array() - st.lam_lo.array() * dz.array()) / st.z.array()).matrix();
    const Eigen::VectorXd dhi =
        ((-r.cent_hi.array() + st.lam_hi.array() * dz.array()) / slack_hi).matrix();

    double s = std::min({detail::max_positive_step(st.lam_lo, dlo), detail::max_positive_step(st.lam_hi, dhi),
                         detail::max_box_step(st.z, dz)});
    s = std::min(1.0, kBoundaryFraction * s);
    const double r_norm = r.norm();

    detail::PdState trial;
    for (int ls = 0;; ++ls) {
      if (ls == 60) throw fail("line search failed");
      trial.z = st.z + s * dz;
      trial.lam_lo = st.lam_lo + s * dlo;
      trial.lam_hi = st.lam_hi + s * dhi;
      trial.nu = st.nu + s * dnu;
      bool accepted = false;
      try {
        const McEstimate e = mc_evaluate(trial.z, set, kObjective | kGradient);
        trial.h = e.objective;
        trial.grad = e.gradient;
        accepted = detail::pd_residual(trial, t, n_o).norm() <= (1.0 - kResidualDecrease * s) * r_norm;
      } catch (const SingularInformation&) {
      }
      ++sol.objective_evaluations;
      if (accepted) break;
      s *= kBacktrack;
    }
    rec.step_length = s;
    rec.step_norm = s * dz.norm();
    rec.newton_decrement = std::sqrt(std::max(0.0, dz.dot(h_red * dz)));
    sol.trace.push_back(rec);
    st = std::move(trial);
  }

  sol.z = st.z;
  sol.objective_relaxed = -st.h;
  sol.converged = true;
  return sol;
}

// Binary vector selecting the `budget` largest entries (lower index wins ties).
inline Eigen::VectorXd top_k(const Eigen::VectorXd& z, std::size_t budget) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(z.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return z(a) > z(b); });
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(z.size());
  for (std::size_t r = 0; r < budget && r < order.size(); ++r) delta(order[r]) = 1.0;
  return delta;
}

inline bool is_binary(const Eigen::VectorXd& z, double tol = 0.0) {
  return ((z.array().abs() <= tol) || ((z.array() - 1.0).abs() <= tol)).all();
}

inline BinaryPlacement round_solution(const RelaxedSolution& relaxed, const ElementaryFimSet& set) {
  BinaryPlacement out;
  out.delta = top_k(relaxed.z, relaxed.budget);
  out.objective_binary = -mc_objective(out.delta, set);
  out.objective_evaluations = 1;
  out.gap = relaxed.objective_relaxed - out.objective_binary;
  out.certified_optimal = is_binary(relaxed.z) ||
                          out.gap <= 1e-8 * std::abs(relaxed.objective_relaxed);
  return out;
}

// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

// Visits all k-subsets of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  for (;;) {
    fn(static_cast<const std::vector<std::size_t>&>(idx));
    if (k == 0) return;
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Rounds z*, then enumerates every completion of the budget over the
// ambiguous locations {i : eta < z_i < 1 - eta}, holding the rest fixed.
inline BinaryPlacement certify_or_repair(const RelaxedSolution& relaxed, const ElementaryFimSet& set,
                                         const SolverOptions& opts = {}) {
  BinaryPlacement rounded = round_solution(relaxed, set);
  const double eta = opts.ambiguity_threshold;
  const Eigen::VectorXd& z = relaxed.z;

  std::vector<std::size_t> ambiguous;
  std::size_t fixed_on = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) >= 1.0 - eta)
      ++fixed_on;
    else if (z(i) > eta)
      ambiguous.push_back(static_cast<std::size_t>(i));
  }
  if (ambiguous.empty()) {
    // nothing to enumerate: the rounded layout is the only completion
    if (fixed_on == relaxed.budget) rounded.certified_optimal = true;
    return rounded;
  }

  rounded.ambiguous = ambiguous;
  if (fixed_on > relaxed.budget) return rounded;
  const std::size_t remaining = relaxed.budget - fixed_on;
  if (remaining > ambiguous.size()) return rounded;
  if (binomial(ambiguous.size(), remaining) > opts.enumeration_cap) {
    rounded.certified_optimal = false;
    return rounded;
  }

  Eigen::VectorXd base = Eigen::VectorXd::Zero(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z(i) >= 1.0 - eta) base(i) = 1.0;

  BinaryPlacement best = rounded;
  best.objective_binary = -std::numeric_limits<double>::infinity();
  int evaluations = rounded.objective_evaluations;
  for_each_combination(ambiguous.size(), remaining, [&](const std::vector<std::size_t>& pick) {
    Eigen::VectorXd delta = base;
    for (std::size_t a : pick) delta(static_cast<Eigen::Index>(ambiguous[a])) = 1.0;
    double v = -std::numeric_limits<double>::infinity();
    try {
      v = -mc_objective(delta, set);
    } catch (const SingularInformation&) {
    }
    ++evaluations;
    if (v > best.objective_binary) {
      best.delta = delta;
      best.objective_binary = v;
    }
  });
  if (!std::isfinite(best.objective_binary)) return rounded;

  best.objective_evaluations = evaluations;
  best.gap = relaxed.objective_relaxed - best.objective_binary;
  best.certified_optimal = true;
  return best;
}

}  // namespace osp

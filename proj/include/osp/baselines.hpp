#pragma once

// Comparison configurations: greedy forward placement, exhaustive search and
// fixed layouts, plus the information-gain report.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "osp/errors.hpp"
#include "osp/fim.hpp"
#include "osp/solver.hpp"

namespace osp {

struct LabeledConfig {
  std::string label;
  Eigen::VectorXd delta;
};

struct GreedyResult {
  Eigen::VectorXd delta;
  std::vector<std::size_t> order;  // 0-based, in selection order
  int objective_evaluations = 0;
  bool regularized = false;  // some round fell back to log det(Q + eps I)
};

struct ExhaustiveResult {
  Eigen::VectorXd delta;
  double objective = 0.0;  // E[log det Q]
  std::uint64_t configurations = 0;
};

namespace detail {

// E[log det(Q(delta) + eps_k I)] with eps_k = 1e-12 * mean trace of the
// sample's elementary matrices.
inline double regularized_value(const Eigen::VectorXd& delta, const ElementaryFimSet& set) {
  double sum = 0.0;
  for (std::size_t k = 0; k < set.n_samples(); ++k) {
    double trace = 0.0;
    for (std::size_t i = 0; i < set.n_dof(); ++i) trace += set.at(k, i).trace();
    const double eps = 1e-12 * trace / static_cast<double>(set.n_dof());
    InfoMatrix q = assemble_q(delta, set, k);
    q.diagonal().array() += eps;
    sum += logdet_pd(q);
  }
  return sum / static_cast<double>(set.n_samples());
}

inline double value_or_ninf(const Eigen::VectorXd& delta, const ElementaryFimSet& set) {
  try {
    return -mc_objective(delta, set);
  } catch (const SingularInformation&) {
    return -std::numeric_limits<double>::infinity();
  }
}

inline std::string approx_count(std::uint64_t n) {
  const char* names[] = {"thousand", "million", "billion", "trillion", "quadrillion", "quintillion"};
  double v = static_cast<double>(n);
  int unit = -1;
  while (v >= 1000.0 && unit < 5) {
    v /= 1000.0;
    ++unit;
  }
  std::ostringstream s;
  if (unit < 0)
    s << n;
  else
    s << "about " << std::llround(v) << ' ' << names[unit];
  return s.str();
}

}  // namespace detail

// Forward sequential placement: each round adds the location that maximizes
// E[log det Q] given the sensors already placed.
inline GreedyResult greedy_forward(const ElementaryFimSet& set, std::size_t budget) {
  const std::size_t nd = set.n_dof();
  check_budget(nd, budget);
  GreedyResult out;
  out.delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nd));

  for (std::size_t round = 0; round < budget; ++round) {
    std::vector<std::size_t> candidates;
    std::vector<double> values;
    for (std::size_t i = 0; i < nd; ++i) {
      if (out.delta(static_cast<Eigen::Index>(i)) > 0.5) continue;
      Eigen::VectorXd trial = out.delta;
      trial(static_cast<Eigen::Index>(i)) = 1.0;
      candidates.push_back(i);
      values.push_back(detail::value_or_ninf(trial, set));
      ++out.objective_evaluations;
    }
    bool all_singular = true;
    for (double v : values) all_singular = all_singular && !std::isfinite(v);
    if (all_singular) {
      out.regularized = true;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        Eigen::VectorXd trial = out.delta;
        trial(static_cast<Eigen::Index>(candidates[c])) = 1.0;
        values[c] = detail::regularized_value(trial, set);
      }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
      if (values[c] > values[best]) best = c;
    out.delta(static_cast<Eigen::Index>(candidates[best])) = 1.0;
    out.order.push_back(candidates[best]);
  }
  return out;
}

// Exact optimum over all binary configurations; refuses when C(N_d, N_o)
// exceeds `cap`. Ties go to the lexicographically smallest configuration.
inline ExhaustiveResult exhaustive(const ElementaryFimSet& set, std::size_t budget,
                                   std::uint64_t cap = 1'000'000) {
  const std::size_t nd = set.n_dof();
  check_budget(nd, budget);
  const std::uint64_t count = binomial(nd, budget);
  if (count > cap)
    throw EnumerationCapExceeded(count, cap,
                                 "exhaustive search refused: " + std::to_string(count) + " (" +
                                     detail::approx_count(count) + ") configurations exceed the cap of " +
                                     std::to_string(cap));
  ExhaustiveResult out;
  out.configurations = count;
  out.objective = -std::numeric_limits<double>::infinity();
  for_each_combination(nd, budget, [&](const std::vector<std::size_t>& pick) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nd));
    for (std::size_t i : pick) delta(static_cast<Eigen::Index>(i)) = 1.0;
    const double v = detail::value_or_ninf(delta, set);
    if (v > out.objective) {
      out.objective = v;
      out.delta = delta;
    }
  });
  if (!std::isfinite(out.objective))
    throw SingularInformation("every configuration has a singular information matrix");
  return out;
}

// Low (stories 1..N_o), high (top N_o stories) and evenly spaced
// (story ceil(k N_d / N_o), k = 1..N_o) layouts.
inline std::vector<LabeledConfig> fixed_configs(std::size_t n_dof = 50, std::size_t budget = 20) {
  check_budget(n_dof, budget);
  const auto n = static_cast<Eigen::Index>(n_dof);
  LabeledConfig low{"low", Eigen::VectorXd::Zero(n)};
  LabeledConfig high{"high", Eigen::VectorXd::Zero(n)};
  LabeledConfig common{"common", Eigen::VectorXd::Zero(n)};
  for (std::size_t k = 1; k <= budget; ++k) {
    low.delta(static_cast<Eigen::Index>(k - 1)) = 1.0;
    high.delta(static_cast<Eigen::Index>(n_dof - budget + k - 1)) = 1.0;
    const std::size_t story = (k * n_dof + budget - 1) / budget;
    common.delta(static_cast<Eigen::Index>(story - 1)) = 1.0;
  }
  return {low, high, common};
}

struct ComparisonRow {
  std::string label;
  Eigen::VectorXd delta;
  double value = 0.0;      // E[log det Q(delta)]
  double bits_gain = 0.0;  // (V_ref - V) / ln 2
};

struct ComparisonReport {
  std::string reference;
  std::vector<ComparisonRow> rows;
};

// Evaluates each configuration and its information gain in bits relative to
// `reference` (default: the first row).
inline ComparisonReport compare(const std::vector<LabeledConfig>& configs, const ElementaryFimSet& set,
                                const std::string& reference = {}) {
  if (configs.empty()) throw InvalidArgument("nothing to compare");
  ComparisonReport report;
  report.reference = reference.empty() ? configs.front().label : reference;
  const ComparisonRow* ref = nullptr;
  for (const auto& c : configs) {
    ComparisonRow row{c.label, c.delta, 0.0, 0.0};
    try {
      row.value = -mc_objective(c.delta, set);
    } catch (const SingularInformation& e) {
      throw SingularInformation("configuration '" + c.label + "': " + e.what(), e.sample());
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& r : report.rows)
    if (r.label == report.reference) ref = &r;
  if (!ref) throw InvalidArgument("reference configuration '" + report.reference + "' not in list");
  const double v_ref = ref->value;
  for (auto& r : report.rows) r.bits_gain = (v_ref - r.value) / std::log(2.0);
  return report;
}

}  // namespace osp

#pragma once

// Run configuration, the end-to-end placement pipeline and its report files.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "osp/baselines.hpp"
#include "osp/errors.hpp"
#include "osp/fim.hpp"
#include "osp/priors.hpp"
#include "osp/solver.hpp"
#include "osp/structural_model.hpp"

namespace osp {

inline constexpr const char* kVersion = "0.3.0";

inline const std::vector<std::string>& known_baselines() {
  static const std::vector<std::string> names = {"greedy", "exhaustive", "low", "high", "common"};
  return names;
}

struct RunConfig {
  std::size_t n_dof = 0;
  std::size_t budget = 0;
  std::size_t n_steps = 0;
  double dt = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  PriorSpec prior = default_prior();
  SolverOptions solver;
  std::vector<std::string> baselines;
  std::uint64_t exhaustive_cap = 1'000'000;
  std::string output_dir = "out";
  bool dump_elementary = false;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed,
                       std::vector<std::string>& bad) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) bad.push_back(where + "unknown key '" + key + "'");
}

template <class T>
bool read_count(const json& obj, const std::string& key, const std::string& where, T& out,
                std::vector<std::string>& bad, bool required) {
  if (!obj.contains(key)) {
    if (required) bad.push_back(where + "missing required key '" + key + "'");
    return false;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    bad.push_back(where + "'" + key + "' must be a non-negative integer");
    return false;
  }
  out = v.get<T>();
  return true;
}

inline bool read_real(const json& obj, const std::string& key, const std::string& where, double& out,
                      std::vector<std::string>& bad, bool required) {
  if (!obj.contains(key)) {
    if (required) bad.push_back(where + "missing required key '" + key + "'");
    return false;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    bad.push_back(where + "'" + key + "' must be a number");
    return false;
  }
  out = v.get<double>();
  return true;
}

inline std::optional<Distribution> parse_distribution(const std::string& s) {
  if (s == "lognormal") return Distribution::lognormal;
  if (s == "lognormal_log_std") return Distribution::lognormal_log_std;
  if (s == "normal") return Distribution::normal;
  return std::nullopt;
}

inline void read_prior(const json& raw, PriorSpec& prior, std::vector<std::string>& bad) {
  if (!raw.is_object()) {
    bad.push_back("'prior' must be an object keyed by parameter name");
    return;
  }
  std::set<std::string> names(kParamNames.begin(), kParamNames.end());
  check_keys(raw, "prior: ", names, bad);
  for (int p = 0; p < kNumParams; ++p) {
    const std::string name(kParamNames[p]);
    if (!raw.contains(name)) continue;
    const json& m = raw.at(name);
    const std::string where = "prior." + name + ": ";
    if (!m.is_object()) {
      bad.push_back(where + "must be an object {dist, mean, std}");
      continue;
    }
    check_keys(m, where, {"dist", "mean", "std"}, bad);
    Marginal& out = prior[static_cast<Param>(p)];
    if (!m.contains("dist") || !m.at("dist").is_string()) {
      bad.push_back(where + "'dist' must be one of lognormal, lognormal_log_std, normal");
    } else if (auto d = parse_distribution(m.at("dist").get<std::string>())) {
      out.dist = *d;
    } else {
      bad.push_back(where + "unknown distribution '" + m.at("dist").get<std::string>() + "'");
    }
    read_real(m, "mean", where, out.mean, bad, true);
    read_real(m, "std", where, out.std, bad, true);
  }
  try {
    validate(prior);
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) bad.push_back("prior." + v);
  }
}

inline void read_solver(const json& raw, SolverOptions& opts, std::vector<std::string>& bad) {
  if (!raw.is_object()) {
    bad.push_back("'solver' must be an object");
    return;
  }
  const std::string where = "solver: ";
  check_keys(raw,
             where,
             {"tolerance", "max_outer_iterations", "initial_t", "barrier_multiplier", "ambiguity_threshold",
              "enumeration_cap"},
             bad);
  read_real(raw, "tolerance", where, opts.tolerance, bad, false);
  read_count(raw, "max_outer_iterations", where, opts.max_outer_iterations, bad, false);
  read_real(raw, "initial_t", where, opts.initial_t, bad, false);
  read_real(raw, "barrier_multiplier", where, opts.barrier_multiplier, bad, false);
  read_real(raw, "ambiguity_threshold", where, opts.ambiguity_threshold, bad, false);
  read_count(raw, "enumeration_cap", where, opts.enumeration_cap, bad, false);
  try {
    opts.validate();
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) bad.push_back(v);
  }
}

}  // namespace detail

// Strict schema check. Every violation is collected before throwing
// ConfigError; unknown keys are rejected.
inline RunConfig validate_config(const nlohmann::json& raw) {
  using detail::json;
  std::vector<std::string> bad;
  RunConfig cfg;
  if (!raw.is_object()) throw ConfigError({"config must be a JSON object"});

  detail::check_keys(raw, "",
                     {"n_dof", "budget", "n_steps", "dt", "n_samples", "seed", "prior", "solver", "baselines",
                      "exhaustive_cap", "output_dir", "dump_elementary"},
                     bad);
  const bool have_nd = detail::read_count(raw, "n_dof", "", cfg.n_dof, bad, true);
  const bool have_no = detail::read_count(raw, "budget", "", cfg.budget, bad, true);
  if (detail::read_count(raw, "n_steps", "", cfg.n_steps, bad, true) && cfg.n_steps < 1)
    bad.emplace_back("'n_steps' must be at least 1");
  if (detail::read_real(raw, "dt", "", cfg.dt, bad, true) && !(cfg.dt > 0.0 && std::isfinite(cfg.dt)))
    bad.emplace_back("'dt' must be positive");
  if (detail::read_count(raw, "n_samples", "", cfg.n_samples, bad, true) && cfg.n_samples < 1)
    bad.emplace_back("'n_samples' must be at least 1");
  detail::read_count(raw, "seed", "", cfg.seed, bad, true);

  if (have_nd && cfg.n_dof < 1) bad.emplace_back("'n_dof' must be at least 1");
  if (have_nd && have_no && (cfg.budget < 1 || cfg.budget > cfg.n_dof))
    bad.push_back("budget-infeasible: 'budget' = " + std::to_string(cfg.budget) + " must lie in [1, n_dof = " +
                  std::to_string(cfg.n_dof) + "]");

  if (raw.contains("prior")) detail::read_prior(raw.at("prior"), cfg.prior, bad);
  if (raw.contains("solver")) detail::read_solver(raw.at("solver"), cfg.solver, bad);

  if (raw.contains("baselines")) {
    const json& b = raw.at("baselines");
    if (!b.is_array()) {
      bad.emplace_back("'baselines' must be a list of names");
    } else {
      for (const auto& item : b) {
        if (!item.is_string()) {
          bad.emplace_back("'baselines' entries must be strings");
          continue;
        }
        const auto name = item.get<std::string>();
        const auto& known = known_baselines();
        if (std::find(known.begin(), known.end(), name) == known.end())
          bad.push_back("unknown baseline '" + name + "'");
        else if (std::find(cfg.baselines.begin(), cfg.baselines.end(), name) == cfg.baselines.end())
          cfg.baselines.push_back(name);
      }
    }
  }
  detail::read_count(raw, "exhaustive_cap", "", cfg.exhaustive_cap, bad, false);
  if (raw.contains("output_dir")) {
    if (raw.at("output_dir").is_string())
      cfg.output_dir = raw.at("output_dir").get<std::string>();
    else
      bad.emplace_back("'output_dir' must be a string");
  }
  if (raw.contains("dump_elementary")) {
    if (raw.at("dump_elementary").is_boolean())
      cfg.dump_elementary = raw.at("dump_elementary").get<bool>();
    else
      bad.emplace_back("'dump_elementary' must be true or false");
  }
  if (!bad.empty()) throw ConfigError(bad);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({"'" + path + "' is not valid JSON: " + e.what()});
  }
  return validate_config(raw);
}

// Effective config, defaults filled in; feeding it back to validate_config
// reproduces the run. The output directory is left out since it does not
// affect results.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json prior;
  for (int p = 0; p < kNumParams; ++p) {
    const auto& m = c.prior[static_cast<Param>(p)];
    prior[std::string(kParamNames[p])] = {{"dist", to_string(m.dist)}, {"mean", m.mean}, {"std", m.std}};
  }
  return {{"n_dof", c.n_dof},
          {"budget", c.budget},
          {"n_steps", c.n_steps},
          {"dt", c.dt},
          {"n_samples", c.n_samples},
          {"seed", c.seed},
          {"prior", prior},
          {"solver",
           {{"tolerance", c.solver.tolerance},
            {"max_outer_iterations", c.solver.max_outer_iterations},
            {"initial_t", c.solver.initial_t},
            {"barrier_multiplier", c.solver.barrier_multiplier},
            {"ambiguity_threshold", c.solver.ambiguity_threshold},
            {"enumeration_cap", c.solver.enumeration_cap}}},
          {"baselines", c.baselines},
          {"exhaustive_cap", c.exhaustive_cap},
          {"dump_elementary", c.dump_elementary}};
}

// Wall-clock seconds per stage, in execution order.
using Timings = std::vector<std::pair<std::string, double>>;

struct MethodRun {
  std::string label;
  Eigen::VectorXd delta;
  int objective_evaluations = 0;
  std::string note;
};

struct PlacementReport {
  RunConfig config;
  RelaxedSolution relaxed;
  BinaryPlacement placement;
  std::vector<MethodRun> methods;  // configurations compared, reference first
  ComparisonReport comparison;
  std::vector<std::string> notes;
  Timings timings;
};

// Model, samples and elementary matrices for one config.
struct Prepared {
  ShearBuildingModel model;
  TimeGrid grid;
  SampleSet samples;
  ElementaryFimSet set;
};

using Logger = std::function<void(const std::string&)>;

namespace detail {

class StageRunner {
 public:
  StageRunner(Timings& timings, Logger log) : timings_(timings), log_(std::move(log)) {}

  template <class Fn>
  auto operator()(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    if (log_) log_(stage + " ...");
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto out = fn();
        record(stage, start);
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timings_.emplace_back(stage, s);
  }

  Timings& timings_;
  Logger log_;
};

inline Eigen::VectorXd delta_from_stories(std::size_t n_dof, const std::vector<std::size_t>& idx0) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_dof));
  for (std::size_t i : idx0) d(static_cast<Eigen::Index>(i)) = 1.0;
  return d;
}

inline std::vector<std::size_t> stories_of(const Eigen::VectorXd& delta) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < delta.size(); ++i)
    if (delta(i) > 0.5) out.push_back(static_cast<std::size_t>(i) + 1);
  return out;
}

inline const LabeledConfig& fixed_named(const std::vector<LabeledConfig>& fixed, const std::string& label) {
  for (const auto& f : fixed)
    if (f.label == label) return f;
  throw InvalidArgument("no fixed configuration named '" + label + "'");
}

}  // namespace detail

inline Prepared prepare(const RunConfig& cfg, detail::StageRunner& stage) {
  auto [model, grid] = stage("model", [&] {
    return std::pair{build_uniform_shear_model(cfg.n_dof), TimeGrid(cfg.n_steps, cfg.dt)};
  });
  auto samples = stage("prior", [&] { return sample_prior(cfg.prior, cfg.n_samples, cfg.seed); });
  auto set = stage("sensitivities", [&] { return build_elementary_set(model, samples, grid); });
  stage("preflight", [&] { preflight_check(set); });
  if (cfg.dump_elementary)
    stage("dump", [&] {
      std::filesystem::create_directories(cfg.output_dir);
      write_elementary_csv(set, (std::filesystem::path(cfg.output_dir) / "elementary.csv").string());
    });
  return Prepared{std::move(model), grid, std::move(samples), std::move(set)};
}

// Evaluates one named configuration ("optimal", "greedy", "exhaustive",
// "low", "high", "common"). "optimal" needs `placement`.
inline MethodRun run_method(const std::string& label, const RunConfig& cfg, const ElementaryFimSet& set,
                            const BinaryPlacement* placement) {
  MethodRun run;
  run.label = label;
  if (label == "optimal") {
    if (!placement) throw InvalidArgument("optimal configuration requested before the solve");
    run.delta = placement->delta;
    run.objective_evaluations = placement->objective_evaluations;
  } else if (label == "greedy") {
    const GreedyResult g = greedy_forward(set, cfg.budget);
    run.delta = g.delta;
    run.objective_evaluations = g.objective_evaluations;
    if (g.regularized) run.note = "regularized log det used in a singular round";
  } else if (label == "exhaustive") {
    const ExhaustiveResult e = exhaustive(set, cfg.budget, cfg.exhaustive_cap);
    run.delta = e.delta;
    run.objective_evaluations = static_cast<int>(e.configurations);
  } else if (label == "low" || label == "high" || label == "common") {
    run.delta = detail::fixed_named(fixed_configs(cfg.n_dof, cfg.budget), label).delta;
  } else {
    throw InvalidArgument("unknown configuration label '" + label + "'");
  }
  return run;
}

inline ComparisonReport compare_runs(const std::vector<MethodRun>& runs, const ElementaryFimSet& set,
                                     const std::string& reference) {
  std::vector<LabeledConfig> configs;
  for (const auto& r : runs) configs.push_back({r.label, r.delta});
  return compare(configs, set, reference);
}

// Eigendecomposition, prior sampling, sensitivities, elementary matrices,
// relaxed solve, rounding/repair, baselines and comparison. Errors surface
// as StageError naming the failing stage.
inline PlacementReport run_pipeline(const RunConfig& cfg, const Logger& log = {}) {
  PlacementReport rep;
  rep.config = cfg;
  detail::StageRunner stage(rep.timings, log);
  const Prepared prep = prepare(cfg, stage);

  rep.relaxed = stage("solver", [&] { return solve_relaxed(prep.set, cfg.budget, cfg.solver); });
  rep.placement = stage("repair", [&] { return certify_or_repair(rep.relaxed, prep.set, cfg.solver); });
  if (!rep.placement.certified_optimal)
    rep.notes.push_back("binary placement is not certified: the ambiguous set was too large to enumerate");

  rep.methods.push_back(run_method("optimal", cfg, prep.set, &rep.placement));
  stage("baselines", [&] {
    for (const auto& name : cfg.baselines) {
      try {
        rep.methods.push_back(run_method(name, cfg, prep.set, nullptr));
      } catch (const EnumerationCapExceeded& e) {
        rep.notes.push_back(e.what());
      }
    }
  });
  rep.comparison = stage("compare", [&] { return compare_runs(rep.methods, prep.set, "optimal"); });
  return rep;
}

struct CompareResult {
  std::vector<MethodRun> methods;
  ComparisonReport comparison;
  Timings timings;
};

// Evaluates the listed configurations on the config's sample set. The
// reference for bits of gain is "optimal" when listed, otherwise the first.
inline CompareResult run_compare(const RunConfig& cfg, const std::vector<std::string>& labels,
                                 const Logger& log = {}) {
  CompareResult out;
  detail::StageRunner stage(out.timings, log);
  stage("config", [&] {
    if (labels.empty()) throw InvalidArgument("no configurations to compare");
    for (const auto& l : labels)
      if (l != "optimal" && std::find(known_baselines().begin(), known_baselines().end(), l) == known_baselines().end())
        throw InvalidArgument("unknown configuration label '" + l + "'");
  });
  const Prepared prep = prepare(cfg, stage);
  const bool want_opt = std::find(labels.begin(), labels.end(), "optimal") != labels.end();
  std::optional<BinaryPlacement> placement;
  if (want_opt) {
    const auto relaxed = stage("solver", [&] { return solve_relaxed(prep.set, cfg.budget, cfg.solver); });
    placement = stage("repair", [&] { return certify_or_repair(relaxed, prep.set, cfg.solver); });
  }
  stage("baselines", [&] {
    for (const auto& l : labels) out.methods.push_back(run_method(l, cfg, prep.set, placement ? &*placement : nullptr));
  });
  out.comparison = stage("compare", [&] {
    return compare_runs(out.methods, prep.set, want_opt ? "optimal" : labels.front());
  });
  return out;
}

struct OracleResult {
  RelaxedSolution relaxed;
  BinaryPlacement placement;
  ExhaustiveResult exhaustive;
  bool agrees = false;  // repaired objective within 1e-9 of the exhaustive optimum
  Timings timings;
};

// Solver output checked against brute force. Refuses (EnumerationCapExceeded
// inside a StageError) when C(N_d, N_o) exceeds `cap`.
inline OracleResult run_oracle(const RunConfig& cfg, std::uint64_t cap, const Logger& log = {}) {
  OracleResult out;
  detail::StageRunner stage(out.timings, log);
  stage("exhaustive", [&] {
    const std::uint64_t count = binomial(cfg.n_dof, cfg.budget);
    if (count > cap)
      throw EnumerationCapExceeded(count, cap,
                                   std::to_string(count) + " (" + detail::approx_count(count) +
                                       ") configurations exceed the cap of " + std::to_string(cap));
  });
  const Prepared prep = prepare(cfg, stage);
  out.relaxed = stage("solver", [&] { return solve_relaxed(prep.set, cfg.budget, cfg.solver); });
  out.placement = stage("repair", [&] { return certify_or_repair(out.relaxed, prep.set, cfg.solver); });
  out.exhaustive = stage("exhaustive", [&] { return exhaustive(prep.set, cfg.budget, cap); });
  out.agrees = out.placement.objective_binary >= out.exhaustive.objective - 1e-9;
  return out;
}

// --- serialization -------------------------------------------------------

inline nlohmann::json stories_json(const Eigen::VectorXd& delta) { return detail::stories_of(delta); }

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Report payload; wall-clock timings are kept out so the file is
// byte-identical between runs.
inline nlohmann::json to_json(const PlacementReport& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.relaxed.trace)
    trace.push_back({{"iteration", t.iteration},
                     {"objective", t.objective},
                     {"step_norm", t.step_norm},
                     {"step_length", t.step_length},
                     {"barrier_t", t.barrier_t},
                     {"newton_decrement", t.newton_decrement}});

  nlohmann::json ambiguous = nlohmann::json::array();
  for (auto i : r.placement.ambiguous) ambiguous.push_back(i + 1);

  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < r.comparison.rows.size(); ++k) {
    const auto& row = r.comparison.rows[k];
    const auto& m = r.methods[k];
    nlohmann::json j = {{"label", row.label},
                        {"stories", stories_json(row.delta)},
                        {"objective", row.value},
                        {"bits_gain", row.bits_gain},
                        {"objective_evaluations", m.objective_evaluations}};
    if (!m.note.empty()) j["note"] = m.note;
    rows.push_back(j);
  }

  return {{"software", {{"name", "osp"}, {"version", kVersion}}},
          {"config", to_json(r.config)},
          {"relaxed",
           {{"z", vector_json(r.relaxed.z)},
            {"objective", r.relaxed.objective_relaxed},
            {"iterations", r.relaxed.iterations},
            {"objective_evaluations", r.relaxed.objective_evaluations},
            {"converged", r.relaxed.converged},
            {"kkt_residual", r.relaxed.kkt_residual},
            {"complementarity", r.relaxed.complementarity},
            {"trace", trace}}},
          {"placement",
           {{"stories", stories_json(r.placement.delta)},
            {"objective", r.placement.objective_binary},
            {"gap", r.placement.gap},
            {"certified_optimal", r.placement.certified_optimal},
            {"ambiguous", ambiguous},
            {"objective_evaluations", r.placement.objective_evaluations}}},
          {"comparison", {{"reference", r.comparison.reference}, {"rows", rows}}},
          {"notes", r.notes}};
}

inline nlohmann::json timings_json(const Timings& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [stage, s] : t) out.push_back({{"stage", stage}, {"seconds", s}});
  return out;
}

inline std::string describe(const std::string& label) {
  static const std::map<std::string, std::string> text = {
      {"optimal", "convex relaxation, rounded and repaired"},
      {"greedy", "forward sequential placement"},
      {"exhaustive", "brute force over all configurations"},
      {"low", "lowest stories instrumented"},
      {"high", "highest stories instrumented"},
      {"common", "evenly spaced, rounded up"}};
  auto it = text.find(label);
  return it == text.end() ? label : it->second;
}

inline std::string join_stories(const Eigen::VectorXd& delta) {
  std::ostringstream s;
  bool first = true;
  for (auto i : detail::stories_of(delta)) {
    s << (first ? "" : " ") << i;
    first = false;
  }
  return s.str();
}

inline std::string comparison_table(const ComparisonReport& c, const std::vector<MethodRun>& methods) {
  std::ostringstream s;
  s << std::left << std::setw(12) << "config" << std::setw(42) << "description" << std::right << std::setw(14)
    << "E[log det Q]" << std::setw(11) << "bits gain" << std::setw(8) << "evals" << '\n';
  for (std::size_t k = 0; k < c.rows.size(); ++k) {
    const auto& row = c.rows[k];
    s << std::left << std::setw(12) << row.label << std::setw(42) << describe(row.label) << std::right
      << std::fixed << std::setprecision(4) << std::setw(14) << row.value << std::setprecision(2)
      << std::setw(11) << row.bits_gain << std::setw(8);
    if (k < methods.size() && methods[k].objective_evaluations > 0)
      s << methods[k].objective_evaluations;
    else
      s << "-";
    s << '\n';
  }
  s << "\nstories per configuration\n";
  for (const auto& row : c.rows) s << "  " << std::left << std::setw(12) << row.label << join_stories(row.delta) << '\n';
  return s.str();
}

inline std::string text_report(const PlacementReport& r) {
  const auto& c = r.config;
  std::ostringstream s;
  s << "sensor placement report (osp " << kVersion << ")\n\n";
  s << "N_d = " << c.n_dof << "  N_o = " << c.budget << "  N = " << c.n_steps << "  dt = " << c.dt
    << " s  N_k = " << c.n_samples << "  seed = " << c.seed << "\n\n";
  s << std::fixed << std::setprecision(6);
  s << "relaxed optimum    E[log det Q] = " << r.relaxed.objective_relaxed << "  (" << r.relaxed.iterations
    << " Newton iterations, " << r.relaxed.objective_evaluations << " objective evaluations)\n";
  s << "binary placement   E[log det Q] = " << r.placement.objective_binary << "  gap = " << r.placement.gap
    << "  certified = " << (r.placement.certified_optimal ? "yes" : "no") << '\n';
  s << "sensor stories     " << join_stories(r.placement.delta) << '\n';
  if (!r.placement.ambiguous.empty()) {
    s << "ambiguous stories ";
    for (auto i : r.placement.ambiguous) s << ' ' << i + 1;
    s << "  (" << r.placement.objective_evaluations << " evaluations during repair)\n";
  }
  s << '\n' << comparison_table(r.comparison, r.methods);
  for (const auto& n : r.notes) s << "\nnote: " << n << '\n';
  return s.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << body;
  if (!out) throw Error("failed writing " + path.string());
}

inline std::string placement_csv(const PlacementReport& r) {
  std::ostringstream s;
  s << "story,z_star,delta\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < r.relaxed.z.size(); ++i)
    s << i + 1 << ',' << r.relaxed.z(i) << ',' << static_cast<int>(r.placement.delta(i)) << '\n';
  return s.str();
}

// Writes report.json, report.txt, placement.csv and timings.json into `dir`.
inline void write_report(const PlacementReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", to_json(r).dump(2) + "\n");
  write_text(dir / "report.txt", text_report(r));
  write_text(dir / "placement.csv", placement_csv(r));
  write_text(dir / "timings.json", timings_json(r.timings).dump(2) + "\n");
}

}  // namespace osp

// osp: optimal sensor placement for shear buildings.
//
//   osp place   --config FILE [--seed S] [--out DIR] [--quiet]
//   osp compare --config FILE --configs optimal,greedy,low,...
//   osp oracle  --config FILE --exhaustive-cap M
//
// Worker threads: OSP_THREADS (default: hardware concurrency).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osp/osp.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration (JSON)")->required();
  cmd->add_option("--seed", c.seed, "override the config's seed");
  cmd->add_option("--out", c.out, "override the output directory");
  cmd->add_flag("--quiet", c.quiet, "no progress messages");
}

osp::RunConfig load(const Common& c) {
  osp::RunConfig cfg;
  try {
    cfg = osp::load_config(c.config);
  } catch (const osp::Error& e) {
    throw osp::StageError("config", e.what());
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.output_dir = *c.out;
  return cfg;
}

osp::Logger logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& msg) { std::cerr << "osp: " << msg << '\n'; };
}

int place(const Common& c) {
  const auto cfg = load(c);
  const auto report = osp::run_pipeline(cfg, logger(c));
  try {
    osp::write_report(report, cfg.output_dir);
  } catch (const std::exception& e) {
    throw osp::StageError("report", e.what());
  }
  if (!c.quiet) std::cout << osp::text_report(report) << "\nwrote " << cfg.output_dir << "/report.json\n";
  return 0;
}

int compare(const Common& c, const std::vector<std::string>& labels) {
  const auto cfg = load(c);
  const auto res = osp::run_compare(cfg, labels, logger(c));
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < res.comparison.rows.size(); ++k) {
    const auto& r = res.comparison.rows[k];
    rows.push_back({{"label", r.label},
                    {"stories", osp::stories_json(r.delta)},
                    {"objective", r.value},
                    {"bits_gain", r.bits_gain},
                    {"objective_evaluations", res.methods[k].objective_evaluations}});
  }
  const nlohmann::json doc = {{"config", osp::to_json(cfg)},
                              {"reference", res.comparison.reference},
                              {"rows", rows}};
  try {
    std::filesystem::create_directories(cfg.output_dir);
    osp::write_text(std::filesystem::path(cfg.output_dir) / "comparison.json", doc.dump(2) + "\n");
  } catch (const std::exception& e) {
    throw osp::StageError("report", e.what());
  }
  std::cout << osp::comparison_table(res.comparison, res.methods);
  return 0;
}

int oracle(const Common& c, std::uint64_t cap) {
  const auto cfg = load(c);
  const auto res = osp::run_oracle(cfg, cap, logger(c));
  std::printf("solver     stories %s  E[log det Q] = %.10f  certified = %s\n",
              osp::join_stories(res.placement.delta).c_str(), res.placement.objective_binary,
              res.placement.certified_optimal ? "yes" : "no");
  std::printf("exhaustive stories %s  E[log det Q] = %.10f  (%llu configurations)\n",
              osp::join_stories(res.exhaustive.delta).c_str(), res.exhaustive.objective,
              static_cast<unsigned long long>(res.exhaustive.configurations));
  if (!res.agrees) {
    std::fprintf(stderr, "osp: [oracle] solver placement is %.3g below the exhaustive optimum\n",
                 res.exhaustive.objective - res.placement.objective_binary);
    return 3;
  }
  std::printf("agree\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal sensor placement for shear buildings"};
  app.require_subcommand(1);

  Common place_opts, compare_opts, oracle_opts;
  std::vector<std::string> labels;
  std::uint64_t cap = 1'000'000;

  auto* place_cmd = app.add_subcommand("place", "solve for the optimal configuration and write a report");
  add_common(place_cmd, place_opts);

  auto* compare_cmd = app.add_subcommand("compare", "evaluate named configurations");
  add_common(compare_cmd, compare_opts);
  compare_cmd->add_option("--configs", labels, "optimal, greedy, exhaustive, low, high, common")
      ->required()
      ->delimiter(',');

  auto* oracle_cmd = app.add_subcommand("oracle", "check the solver against exhaustive search");
  add_common(oracle_cmd, oracle_opts);
  oracle_cmd->add_option("--exhaustive-cap", cap, "largest number of configurations to enumerate")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*place_cmd) return place(place_opts);
    if (*compare_cmd) return compare(compare_opts, labels);
    if (*oracle_cmd) return oracle(oracle_opts, cap);
  } catch (const osp::StageError& e) {
    std::cerr << "osp: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "osp: [internal] " << e.what() << '\n';
    return 2;
  }
  return 1;
}

// Command-line front end: run one scenario or a case directory, aggregate
// summaries, and regenerate the reconstructed scenario files.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "htmpc/htmpc.hpp"

namespace fs = std::filesystem;
using namespace htmpc;

namespace {

struct Overrides {
  std::string controller;
  std::string setup;
  std::vector<std::uint64_t> seeds;
  std::string apf_tuning;
  bool wall_clock{false};
};

ControllerKind parse_controller(const std::string& s) {
  if (s == "htmpc") return ControllerKind::kHtmpc;
  if (s == "hlrrt") return ControllerKind::kHlrrt;
  if (s == "apf") return ControllerKind::kApf;
  throw ConfigError("unknown controller: " + s);
}

Setup parse_setup(const std::string& s) {
  if (s == "budgeted") return Setup::kBudgeted;
  if (s == "run-to-completion") return Setup::kRunToCompletion;
  throw ConfigError("unknown setup: " + s);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Expands one scenario into runs over the requested controllers, setups and seeds.
std::vector<ScenarioConfig> expand(const ScenarioConfig& base, const std::vector<std::string>& controllers,
                                   const std::vector<std::string>& setups, const Overrides& o) {
  std::vector<ScenarioConfig> out;
  std::vector<std::uint64_t> seeds = o.seeds.empty() ? std::vector<std::uint64_t>{base.seed()} : o.seeds;
  for (const auto& c : controllers) {
    for (const auto& s : setups) {
      for (auto seed : seeds) {
        ScenarioConfig cfg = base;
        cfg.controller = parse_controller(c);
        cfg.setup = parse_setup(s);
        cfg.world.rng_seed = seed;
        cfg.wall_clock = o.wall_clock || cfg.wall_clock;
        if (!o.apf_tuning.empty()) {
          cfg.apf.tuning = o.apf_tuning;
          cfg.apf.params = apf_tuning(o.apf_tuning);
        }
        out.push_back(std::move(cfg));
      }
    }
  }
  return out;
}

void print_summary(const std::vector<RunResult>& results) {
  std::vector<RunMetrics> metrics;
  for (const auto& r : results) metrics.push_back(r.metrics);
  std::cout << summary_table(aggregate(metrics));
}

std::vector<RunMetrics> read_summary(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file);
  std::string line;
  std::getline(in, line);
  std::vector<RunMetrics> out;
  while (std::getline(in, line)) {
    const auto f = split(line);
    if (f.size() < 8) continue;
    RunMetrics m;
    m.scenario = f[0];
    m.controller = f[1];
    m.setup = f[2];
    m.seed = std::stoull(f[3]);
    m.success = f[4] == "1";
    for (auto cause : {FailureCause::kNone, FailureCause::kCollision, FailureCause::kLivelock,
                       FailureCause::kInfeasible, FailureCause::kTimeout}) {
      if (f[5] == to_string(cause)) m.failure = cause;
    }
    m.path_length = std::stod(f[6]);
    m.mission_time = std::stod(f[7]);
    out.push_back(m);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heuristic planner + tube-based MPC navigation experiments"};
  app.require_subcommand(1);

  Overrides o;
  std::string out_dir = "results";
  bool traces = false;
  unsigned threads = 0;
  std::string controllers = "htmpc";
  std::string setups;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--controllers,--controller", controllers, "comma-separated: htmpc,hlrrt,apf");
    cmd->add_option("--setups,--setup", setups, "comma-separated: budgeted,run-to-completion (default: file)");
    cmd->add_option("--seeds,--seed", o.seeds, "seed override(s)")->delimiter(',');
    cmd->add_option("--apf-tuning", o.apf_tuning, "paper-failure or retuned");
    cmd->add_flag("--wall-clock", o.wall_clock, "enforce decision budgets on the wall clock");
    cmd->add_flag("--trace", traces, "write per-run trace files");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
  };

  std::string scenario_file;
  auto* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("scenario", scenario_file, "scenario YAML")->required();
  add_common(run);

  std::string case_dir;
  auto* run_case = app.add_subcommand("run-case", "run every scenario in a directory");
  run_case->add_option("directory", case_dir, "directory of scenario YAML files")->required();
  add_common(run_case);

  std::vector<std::string> summaries;
  auto* agg = app.add_subcommand("aggregate", "aggregate summary.csv files");
  agg->add_option("summaries", summaries, "summary CSV files")->required();

  std::string gen_dir = "scenarios";
  auto* gen = app.add_subcommand("generate", "write the reconstructed scenario files");
  gen->add_option("--out", gen_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      for (int case_id : {1, 2}) {
        const fs::path dir = fs::path(gen_dir) / ("case" + std::to_string(case_id));
        fs::create_directories(dir);
        for (int i = 0; i < 10; ++i) {
          const ScenarioConfig cfg = generate_scenario({case_id, i, 1});
          save_scenario(cfg, (dir / (cfg.id + ".yaml")).string());
        }
      }
      std::cout << "wrote scenarios to " << gen_dir << "\n";
      return 0;
    }
    if (*agg) {
      std::vector<RunMetrics> all;
      for (const auto& f : summaries) {
        auto part = read_summary(f);
        all.insert(all.end(), part.begin(), part.end());
      }
      std::cout << summary_table(aggregate(all));
      return 0;
    }

    std::vector<ScenarioConfig> bases;
    if (*run) {
      bases.push_back(load_scenario(scenario_file));
    } else {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(case_dir)) {
        if (e.path().extension() == ".yaml") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) bases.push_back(load_scenario(f.string()));
    }
    std::vector<ScenarioConfig> runs;
    for (const auto& b : bases) {
      const auto setup_list = setups.empty() ? std::vector<std::string>{to_string(b.setup)} : split(setups);
      auto more = expand(b, split(controllers), setup_list, o);
      runs.insert(runs.end(), more.begin(), more.end());
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = run_batch(runs, threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_results(results, out_dir, traces);
    for (const auto& r : results) std::cout << summary_row(r.metrics) << "\n";
    print_summary(results);
    std::cout << "wall time " << wall << " s, results in " << out_dir << "\n";
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// Acceptance report: one PASS/FAIL line per criterion.
//
//   acceptance [--scenarios DIR] [--strict] [--skip-runs]
//
// Without --strict the exit status only reflects errors, so the report can
// run under ctest while still showing failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htmpc/htmpc.hpp"
#include "oracles.hpp"

#ifndef HTMPC_SCENARIO_DIR
#define HTMPC_SCENARIO_DIR "scenarios"
#endif

using namespace htmpc;

namespace {

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%-5s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<ScenarioConfig> load_case(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".yaml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ScenarioConfig> out;
  for (const auto& f : files) out.push_back(load_scenario(f.string()));
  return out;
}

std::vector<ScenarioConfig> variants(const std::vector<ScenarioConfig>& base, ControllerKind kind, Setup setup) {
  std::vector<ScenarioConfig> out;
  for (const auto& b : base) {
    for (std::uint64_t seed : {1, 2, 3}) {
      ScenarioConfig c = b;
      c.controller = kind;
      c.setup = setup;
      c.world.rng_seed = seed;
      out.push_back(c);
    }
  }
  return out;
}

struct Group {
  std::vector<RunMetrics> runs;
  int successes() const {
    return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const RunMetrics& m) { return m.success; }));
  }
  double rate() const { return runs.empty() ? 0.0 : static_cast<double>(successes()) / runs.size(); }
  double mean_path() const {
    double s = 0.0;
    int n = 0;
    for (const auto& m : runs) {
      if (m.success) {
        s += m.path_length;
        ++n;
      }
    }
    return n ? s / n : std::nan("");
  }
  std::map<std::string, int> causes() const {
    std::map<std::string, int> out;
    for (const auto& m : runs) {
      if (!m.success) ++out[to_string(m.failure)];
    }
    return out;
  }
};

Group run_group(const std::vector<ScenarioConfig>& configs) {
  Group g;
  for (auto& r : run_batch(configs)) g.runs.push_back(std::move(r.metrics));
  return g;
}

std::string causes_text(const Group& g) {
  std::string s;
  for (const auto& [k, n] : g.causes()) s += (s.empty() ? "" : ",") + k + ":" + std::to_string(n);
  return s.empty() ? "none" : s;
}

// Mean path lengths of two groups over the (scenario, seed) pairs both solved.
std::pair<double, double> paired_means(const Group& a, const Group& b, int* pairs) {
  std::map<std::pair<std::string, std::uint64_t>, double> other;
  for (const auto& m : b.runs) {
    if (m.success) other[{m.scenario, m.seed}] = m.path_length;
  }
  double sa = 0.0, sb = 0.0;
  int n = 0;
  for (const auto& m : a.runs) {
    auto it = other.find({m.scenario, m.seed});
    if (m.success && it != other.end()) {
      sa += m.path_length;
      sb += it->second;
      ++n;
    }
  }
  *pairs = n;
  return {n ? sa / n : std::nan(""), n ? sb / n : std::nan("")};
}

// ---------------------------------------------------------------------------

void ac5() {
  double worst = 0.0;
  int points = 0;
  for (double bound : {0.01, 0.05}) {
    for (double damping : {0.0, 0.2, 0.5, 0.8, 1.0}) {
      for (std::int64_t k : {1, 5}) {
        worst = std::max(worst, std::abs(tube_width(k, 0, bound, damping) - oracle::geometric_tube(bound, damping, k)));
        ++points;
      }
    }
  }
  bool monotone = true;
  for (double damping : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    for (std::int64_t k = 2; k <= 50; ++k) monotone = monotone && tube_width(k, 0, 0.05, damping) >= tube_width(k - 1, 0, 0.05, damping);
  }
  report("AC5", worst <= 1e-12 && monotone, fmt("%d grid points, max abs error %.2e, monotone %s", points, worst, monotone ? "yes" : "no"));
}

void ac6() {
  Rng rng(2024);
  double worst_a = 0.0, worst_b = 0.0, worst_rho = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Pose p{rng.uniform(0, 14), rng.uniform(0, 14), rng.uniform(-kPi, kPi)};
    const Input u{rng.uniform(-0.2, 1.0), rng.uniform(-1.5, 1.5)};
    const auto [a_fd, b_fd] = oracle::fd_jacobians(p, u, 0.1);
    worst_a = std::max(worst_a, (state_jacobian(p, u, 0.1) - a_fd).norm() / std::max(1.0, a_fd.norm()));
    worst_b = std::max(worst_b, (input_jacobian(p, u, 0.1) - b_fd).norm() / std::max(1.0, b_fd.norm()));
    const FeedbackGain g = synthesize_gain(p, u, 0.1);
    worst_rho = std::max(worst_rho, spectral_radius(g.a + g.b * g.gain));
  }
  report("AC6", worst_a <= 1e-6 && worst_b <= 1e-6 && worst_rho < 1.0,
         fmt("100 points, rel. error A %.2e B %.2e, max spectral radius %.4f", worst_a, worst_b, worst_rho));
}

void ac7() {
  const DynamicObstacleState o{{3.0, 1.0}, {0.1, -0.2}, {1.0, 2.0}, 0.3, 0.2};
  std::vector<double> err;
  for (double c : {0.1, 0.05, 0.025, 0.0125}) {
    DynamicObstacleState s = o;
    for (int i = 0, n = static_cast<int>(std::lround(10.0 / c)); i < n; ++i) s = step_dynamic_obstacle(s, c);
    err.push_back(std::hypot(s.position.x - oracle::oscillator(3.0, 0.1, 1.0, 0.3, 10.0),
                             s.position.y - oracle::oscillator(1.0, -0.2, 2.0, 0.2, 10.0)));
  }
  bool ok = true;
  std::string orders;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double q = std::log2(err[i - 1] / err[i]);
    ok = ok && q >= 3.7 && q <= 4.3;
    orders += fmt("%s%.3f", i > 1 ? ", " : "", q);
  }
  report("AC7", ok, "observed orders " + orders);
}

void ac8() {
  Rng rng(88);
  double worst = 0.0;
  int scenes = 0;
  while (scenes < 50) {
    const Vec2 start{0.2, rng.uniform(0.2, 5.8)};
    const Vec2 goal{5.8, rng.uniform(0.2, 5.8)};
    std::vector<Disc> discs;
    const int n = 2 + static_cast<int>(rng.index(5));
    for (int tries = 0; static_cast<int>(discs.size()) < n && tries < 1000; ++tries) {
      const Disc d{{rng.uniform(1.0, 5.0), rng.uniform(0.5, 5.5)}, rng.uniform(0.3, 0.9)};
      if (distance(d.center, start) < d.radius + 0.3 || distance(d.center, goal) < d.radius + 0.3) continue;
      discs.push_back(d);
    }
    Rng coin(scenes);
    StaticPlan plan;
    try {
      plan = plan_static(start, goal, discs, coin);
    } catch (const InfeasiblePlanError&) {
      continue;
    }
    const double grid = oracle::grid_astar(start, goal, discs, {-2.0, -2.0}, {8.0, 8.0}, 0.02);
    worst = std::max(worst, std::abs(plan.path.length() - grid) / grid);
    ++scenes;
  }
  Rng coin(1);
  const double single = plan_static({-2, 0}, {2, 0}, {Disc{{0, 0}, 1.0}}, coin).path.length();
  const double analytic = 2.0 * std::sqrt(3.0) + kPi / 3.0;
  report("AC8", worst <= 0.05 && std::abs(single - analytic) <= 1e-6,
         fmt("50 scenes, max relative gap to 0.02 m A* %.4f; single obstacle error %.2e", worst,
             std::abs(single - analytic)));
}

void ac9() {
  Rng rng(909);
  const AxisVelocityBounds axis{-1, 1, -1, 1};
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    DynamicObstacleState o;
    o.attraction = {rng.uniform(2, 12), rng.uniform(2, 12)};
    const Vec2 off{(rng.coin() ? 1 : -1) * rng.uniform(1.5, 2.2), (rng.coin() ? 1 : -1) * rng.uniform(1.5, 2.2)};
    o.position = o.attraction + off;
    o.velocity = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    std::tie(o.alpha, o.beta) = compute_multipliers(o, axis, rng.uniform(0.0, 1.0));
    const auto predicted = predict_obstacle_positions({{o.position, o.velocity}}, 5, 0.1, 0.0, TubeParams{})[0];
    const double ax = std::hypot(off.x, o.velocity.x / std::sqrt(o.alpha));
    const double ay = std::hypot(off.y, o.velocity.y / std::sqrt(o.beta));
    DynamicObstacleState truth = o;
    for (int k = 1; k <= 5; ++k) {
      truth = step_dynamic_obstacle(truth, 0.1);
      worst = std::max({worst, std::abs(predicted[k - 1].center.x - truth.position.x) / ax,
                        std::abs(predicted[k - 1].center.y - truth.position.y) / ay});
    }
  }
  report("AC9", worst <= 0.0357, fmt("1000 obstacles, worst relative error %.3f%%", 100.0 * worst));
}

void ac10() {
  bool ok = true;
  for (int np : {2, 3, 5, 8}) {
    TmpcConfig cfg;
    cfg.horizon = cfg.control_horizon = np;
    TmpcProblem p;
    p.current.pose = {5, 5, 0};
    p.reference = extract_reference(GeometricPath::straight({5, 5}, {9, 5}), np, 0.5, 0.1, cfg.bounds);
    p.plan_radius = 2.0;
    p.snapshot.visible_dynamic.push_back({{7, 5}, {-0.2, 0}});
    std::set<int> prev, next, cur;
    for (const auto& g : build_constraints(p, cfg).items) {
      if (g.kind == ConstraintKind::kDynamicPrev) prev.insert(g.k);
      if (g.kind == ConstraintKind::kDynamicNext) next.insert(g.k);
      if (g.kind == ConstraintKind::kDynamicCurrent) cur.insert(g.k);
    }
    ok = ok && !prev.count(1) && static_cast<int>(prev.size()) == np - 1 && !next.count(np) &&
         static_cast<int>(next.size()) == np - 1 && static_cast<int>(cur.size()) == np;
  }
  report("AC10", ok, "previous-step constraints skip k = 1, next-step constraints skip k = N^p, N^p in {2,3,5,8}");
}

void ac11(const std::vector<ScenarioConfig>& case1, const std::vector<ScenarioConfig>& case2) {
  bool ok = true;
  int runs = 0;
  for (const auto* set : {&case1, &case2}) {
    for (ControllerKind kind : {ControllerKind::kHtmpc, ControllerKind::kHlrrt, ControllerKind::kApf}) {
      ScenarioConfig c = set->front();
      c.controller = kind;
      c.setup = Setup::kBudgeted;
      const RunResult a = run_scenario(c);
      const RunResult b = run_scenario(c);
      ok = ok && summary_row(a.metrics) == summary_row(b.metrics) && trace_csv(a.trace) == trace_csv(b.trace);
      ++runs;
    }
  }
  report("AC11", ok, fmt("%d scenario/controller pairs re-run, metrics and traces %s", runs, ok ? "identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance report"};
  std::string dir = HTMPC_SCENARIO_DIR;
  bool strict = false;
  bool skip_runs = false;
  app.add_option("--scenarios", dir, "directory holding case1/ and case2/");
  app.add_flag("--strict", strict, "exit nonzero when a criterion fails");
  app.add_flag("--skip-runs", skip_runs, "skip the closed-loop criteria AC1-AC4 and AC11");
  CLI11_PARSE(app, argc, argv);

  if (!skip_runs) {
    const auto case1 = load_case(std::filesystem::path(dir) / "case1");
    const auto case2 = load_case(std::filesystem::path(dir) / "case2");

    // AC1: HTMPC in iteration-budget mode on all 20 scenarios, 3 seeds each.
    auto all = variants(case1, ControllerKind::kHtmpc, Setup::kBudgeted);
    const auto more = variants(case2, ControllerKind::kHtmpc, Setup::kBudgeted);
    all.insert(all.end(), more.begin(), more.end());
    const auto t0 = std::chrono::steady_clock::now();
    const Group htmpc_all = run_group(all);
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
    bool safe = true;
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& m : htmpc_all.runs) {
      if (!m.success) continue;
      closest = std::min(closest, m.min_obstacle_distance);
      for (const auto& [t, d] : m.min_distance_trace) safe = safe && d > case1.front().world.collision_distance();
    }
    report("AC1", safe && minutes <= 10.0,
           fmt("%zu runs, %d successful, closest approach %.3f m (limit %.3f), %.1f min", htmpc_all.runs.size(),
               htmpc_all.successes(), closest, case1.front().world.collision_distance(), minutes));

    // AC2: case 1, budgeted.
    Group htmpc_b1;
    htmpc_b1.runs.assign(htmpc_all.runs.begin(), htmpc_all.runs.begin() + static_cast<std::ptrdiff_t>(3 * case1.size()));
    const Group rrt_b1 = run_group(variants(case1, ControllerKind::kHlrrt, Setup::kBudgeted));
    auto apf_cfgs = variants(case1, ControllerKind::kApf, Setup::kBudgeted);
    for (auto& c : apf_cfgs) c.apf.params = apf_tuning(c.apf.tuning = "paper-failure");
    const Group apf_1 = run_group(apf_cfgs);
    const auto apf_causes = apf_1.causes();
    const bool livelock_dominant =
        !apf_causes.empty() && std::all_of(apf_causes.begin(), apf_causes.end(), [&](const auto& kv) {
          return kv.second <= (apf_causes.count("livelock") ? apf_causes.at("livelock") : 0);
        });
    report("AC2", htmpc_b1.rate() >= 0.9 && rrt_b1.successes() < htmpc_b1.successes() && apf_1.rate() <= 0.2 &&
                      livelock_dominant,
           fmt("case 1 budgeted: HTMPC %d/%zu, HL-RRT* %d/%zu, APF %d/%zu (%s)", htmpc_b1.successes(),
               htmpc_b1.runs.size(), rrt_b1.successes(), rrt_b1.runs.size(), apf_1.successes(), apf_1.runs.size(),
               causes_text(apf_1).c_str()));

    // AC3: case 2, run to completion.
    const Group htmpc_c2 = run_group(variants(case2, ControllerKind::kHtmpc, Setup::kRunToCompletion));
    const Group rrt_c2 = run_group(variants(case2, ControllerKind::kHlrrt, Setup::kRunToCompletion));
    const Group apf_c2 = run_group(variants(case2, ControllerKind::kApf, Setup::kRunToCompletion));
    report("AC3", htmpc_c2.rate() >= 0.5 && rrt_c2.rate() <= 0.1 && apf_c2.rate() <= 0.1,
           fmt("case 2 run-to-completion: HTMPC %d/%zu, HL-RRT* %d/%zu, APF %d/%zu", htmpc_c2.successes(),
               htmpc_c2.runs.size(), rrt_c2.successes(), rrt_c2.runs.size(), apf_c2.successes(), apf_c2.runs.size()));

    // AC4: case 1 path lengths.
    const Group htmpc_r1 = run_group(variants(case1, ControllerKind::kHtmpc, Setup::kRunToCompletion));
    const Group rrt_r1 = run_group(variants(case1, ControllerKind::kHlrrt, Setup::kRunToCompletion));
    int n1 = 0, n2 = 0;
    const auto [h1, r1] = paired_means(htmpc_b1, rrt_b1, &n1);
    const auto [h2, r2] = paired_means(htmpc_r1, rrt_r1, &n2);
    const double excess = htmpc_b1.mean_path() / htmpc_r1.mean_path() - 1.0;
    report("AC4", n1 > 0 && n2 > 0 && h1 <= r1 && h2 <= r2 && excess >= 0.05 && excess <= 0.20,
           fmt("budgeted %d pairs HTMPC %.3f vs HL-RRT* %.3f; run-to-completion %d pairs %.3f vs %.3f; "
               "HTMPC budgeted/complete path excess %.1f%%",
               n1, h1, r1, n2, h2, r2, 100.0 * excess));

    ac5();
    ac6();
    ac7();
    ac8();
    ac9();
    ac10();
    ac11(case1, case2);
  } else {
    ac5();
    ac6();
    ac7();
    ac8();
    ac9();
    ac10();
  }
  std::printf("%d criteria failed\n", failures);
  return strict && failures > 0 ? 1 : 0;
}

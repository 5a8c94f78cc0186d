// Command-line front end: thin shell over the library calls.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cate/harness.hpp"
#include "cate/io.hpp"
#include "cate/svg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> controller;
  std::optional<double> dt;
  std::optional<double> timeout;
  std::optional<std::string> schedule;
  bool unicycle = false;
};

void apply_overrides(cate::ScenarioSpec& spec, const Overrides& ov) {
  if (ov.seed) spec.seed = *ov.seed;
  if (ov.controller) spec.controller = cate::io_detail::controller_from_string(*ov.controller);
  if (ov.dt) spec.params.dt = *ov.dt;
  if (ov.timeout) spec.params.timeout = *ov.timeout;
  if (ov.schedule) spec.params.schedule = cate::io_detail::schedule_from_string(*ov.schedule);
  if (ov.unicycle) spec.params.unicycle = true;
}

cate::ScenarioSpec load_scenario(const std::string& path) {
  return cate::scenario_from_json(cate::read_file(path));
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const Overrides& ov) {
  cate::ScenarioSpec spec = load_scenario(scenario_path);
  apply_overrides(spec, ov);
  for (const auto& w : cate::cate_params_warnings(spec.params))
    std::cerr << "warning: " << w << "\n";

  auto report = cate::validate_scenario(spec);
  if (!report.ok()) {
    for (const auto& v : report.violations)
      std::cerr << "violation " << v.assumption << ": " << v.detail << "\n";
    return kExitUsage;
  }

  cate::SimulationRecord rec = cate::run_simulation(spec);
  cate::MetricsOptions mo;
  mo.rho = spec.params.convergence_radius;
  mo.safe_radius = spec.params.safe_radius;
  cate::MetricsReport metrics = cate::compute_metrics(rec, mo);

  std::filesystem::create_directories(out_dir);
  cate::write_file(out_dir + "/record.csv", cate::record_to_csv(rec));
  cate::write_file(out_dir + "/metrics.json", cate::metrics_to_json(metrics));
  cate::write_file(out_dir + "/scenario.json", cate::scenario_to_json(spec));

  std::cout << "termination=" << cate::to_string(rec.termination)
            << " steps=" << rec.step_count() << " crossings=" << metrics.crossings
            << " length=" << cate::fmt6(metrics.trajectory_length);
  if (metrics.convergence_time)
    std::cout << " t_r=" << cate::fmt6(*metrics.convergence_time);
  std::cout << "\n";
  return rec.termination == cate::Termination::Converged ? kExitOk : kExitRunFailure;
}

int cmd_batch(const std::string& spec_path, const std::string& out_dir) {
  cate::BatchSpec spec = cate::batch_spec_from_json(cate::read_file(spec_path));
  spec.out_dir = out_dir;
  cate::BatchResult result = cate::run_batch(spec);
  std::cout << cate::summary_to_csv(result.summary);
  return kExitOk;
}

cate::SimulationRecord load_record(const std::string& record_path,
                                   const std::string& scenario_path) {
  std::optional<cate::ScenarioSpec> spec;
  if (!scenario_path.empty()) {
    spec = load_scenario(scenario_path);
  } else {
    auto sidecar = std::filesystem::path(record_path).parent_path() / "scenario.json";
    if (std::filesystem::exists(sidecar)) spec = load_scenario(sidecar.string());
  }
  return cate::record_from_csv(cate::read_file(record_path),
                               spec ? &*spec : nullptr);
}

int cmd_metrics(const std::string& record_path, const std::string& scenario_path,
                bool truncate) {
  cate::SimulationRecord rec = load_record(record_path, scenario_path);
  cate::MetricsOptions mo;
  mo.truncate_crossings_at_tr = truncate;
  if (!scenario_path.empty()) {
    cate::ScenarioSpec spec = load_scenario(scenario_path);
    mo.rho = spec.params.convergence_radius;
    mo.safe_radius = spec.params.safe_radius;
  }
  if (rec.desired_points.empty()) {
    std::cerr << "note: no scenario found; convergence metrics unavailable\n";
    cate::MetricsReport r;
    r.crossings = cate::count_path_crossings(rec);
    r.trajectory_length = cate::trajectory_length(rec);
    auto m = cate::safety_margins(rec, mo.safe_radius);
    r.min_robot_robot = m.min_robot_robot;
    r.min_obstacle_clearance = m.min_obstacle_clearance;
    r.success = rec.termination == cate::Termination::Converged;
    std::cout << cate::metrics_to_json(r);
    return kExitOk;
  }
  std::cout << cate::metrics_to_json(cate::compute_metrics(rec, mo));
  return kExitOk;
}

int cmd_plot(const std::string& record_path, const std::string& scenario_path,
             const std::string& out_path) {
  cate::SimulationRecord rec = load_record(record_path, scenario_path);
  cate::write_file(out_path, cate::render_svg(rec));
  return kExitOk;
}

int cmd_validate(const std::string& scenario_path) {
  cate::ScenarioSpec spec = load_scenario(scenario_path);
  auto report = cate::validate_scenario(spec);
  if (report.ok()) {
    std::cout << "ok\n";
    return kExitOk;
  }
  for (const auto& v : report.violations)
    std::cerr << "violation " << v.assumption << ": " << v.detail << "\n";
  return kExitUsage;
}

int cmd_gen(const std::string& name, bool random, int robots, int obstacles,
            const std::string& formation, const std::string& out_path,
            const Overrides& ov) {
  cate::ScenarioSpec spec;
  if (random) {
    cate::Params params;
    params.gamma_gain = 5.0;
    spec = cate::generate_random_scenario(robots, obstacles, ov.seed.value_or(1),
                                          params, formation);
  } else if (!name.empty()) {
    spec = cate::named_scenario(name);
  } else {
    std::cerr << "gen: pass --name or --random\n";
    return kExitUsage;
  }
  apply_overrides(spec, ov);
  std::string text = cate::scenario_to_json(spec);
  if (out_path.empty()) std::cout << text;
  else cate::write_file(out_path, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CATE multi-robot navigation simulator"};
  app.require_subcommand(1);

  Overrides ov;
  std::string scenario_path, spec_path, out_dir, record_path, out_path;
  std::string name, formation = "arrow";
  bool random = false, truncate = false;
  int robots = 5, obstacles = 4;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", ov.seed, "override the scenario seed");
    cmd->add_option("--controller", ov.controller,
                    "CATE | FOTE | CAPT_ASSIGN | GREEDY");
    cmd->add_option("--dt", ov.dt, "integration step (s)");
    cmd->add_option("--timeout", ov.timeout, "simulated-time limit (s)");
    cmd->add_option("--schedule", ov.schedule, "gauss-seidel | parallel");
    cmd->add_flag("--unicycle", ov.unicycle, "execute with unicycle dynamics");
  };

  CLI::App* run = app.add_subcommand("run", "run one simulation");
  run->add_option("--scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  add_overrides(run);

  CLI::App* batch = app.add_subcommand("batch", "run a seeded experiment grid");
  batch->add_option("--spec", spec_path, "batch spec JSON")->required();
  batch->add_option("--out", out_dir, "output directory")->required();

  CLI::App* metrics = app.add_subcommand("metrics", "recompute metrics from a record");
  metrics->add_option("--record", record_path, "record.csv")->required();
  metrics->add_option("--scenario", scenario_path, "scenario JSON (defaults to sidecar)");
  metrics->add_flag("--truncate-at-tr", truncate, "count crossings up to T_r only");

  CLI::App* plot = app.add_subcommand("plot", "render a record as SVG");
  plot->add_option("--record", record_path, "record.csv")->required();
  plot->add_option("--scenario", scenario_path, "scenario JSON (defaults to sidecar)");
  plot->add_option("--out", out_path, "output SVG path")->required();

  CLI::App* validate = app.add_subcommand("validate", "check scenario assumptions");
  validate->add_option("--scenario", scenario_path, "scenario JSON")->required();

  CLI::App* gen = app.add_subcommand("gen", "emit a scenario JSON");
  gen->add_option("--name", name, "named scenario");
  gen->add_flag("--random", random, "generate a random scenario");
  gen->add_option("--robots", robots, "robot count (random)");
  gen->add_option("--obstacles", obstacles, "obstacle count (random)");
  gen->add_option("--formation", formation, "arrow | column | platoon");
  gen->add_option("--out", out_path, "output path (stdout when omitted)");
  add_overrides(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_path, out_dir, ov);
    if (batch->parsed()) return cmd_batch(spec_path, out_dir);
    if (metrics->parsed()) return cmd_metrics(record_path, scenario_path, truncate);
    if (plot->parsed()) return cmd_plot(record_path, scenario_path, out_path);
    if (validate->parsed()) return cmd_validate(scenario_path);
    if (gen->parsed())
      return cmd_gen(name, random, robots, obstacles, formation, out_path, ov);
  } catch (const cate::StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitUsage;
}

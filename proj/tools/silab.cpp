// silab: command-line front end of the simulation lab.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "silab/diffusion.hpp"
#include "silab/lab/config.hpp"
#include "silab/lab/io.hpp"
#include "silab/lab/runner.hpp"
#include "silab/landscape.hpp"
#include "silab/pdmp.hpp"
#include "silab/rng.hpp"

namespace {

using nlohmann::json;
using namespace silab;
using namespace silab::lab;

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kConfigError = 2;

const char* critical_kind(CriticalKind k) { return k == CriticalKind::LocalMax ? "max" : "min"; }

json points_json(const std::vector<CriticalPoint>& pts) {
  json out = json::array();
  for (const auto& p : pts)
    out.push_back({{"x", p.x}, {"kind", critical_kind(p.kind)}, {"value", p.value}, {"order", p.order}});
  return out;
}

json analyze(const PeriodicPotential& f, std::optional<double> eta) {
  json report;
  report["potential"] = potential_to_json(f);
  report["describe"] = f.describe();
  const AssumptionReport a = validate_assumptions(f);
  report["assumptions"] = {{"non_constant", a.non_constant},
                           {"changes_sign", a.changes_sign},
                           {"nonzero_critical_values", a.nonzero_critical_values},
                           {"bracket_rank", a.bracket_rank},
                           {"pdmp_bracket_rank", a.pdmp_bracket_rank},
                           {"failures", a.failures}};
  report["sup_abs_slope"] = f.sup_abs_slope();
  const CriticalLandscape l = analyze_landscape(f);
  report["critical_points"] = points_json(l.points);
  report["M_plus"] = points_json(l.M_plus);
  report["M_minus"] = points_json(l.M_minus);
  report["m_plus"] = points_json(l.m_plus);
  report["m_minus"] = points_json(l.m_minus);
  report["traps"] = points_json(l.traps);
  report["ergodic"] = l.ergodic();
  try {
    const double delta = compute_delta(f, l);
    const double level = eta.value_or(delta);
    const LevelGeometry g = compute_level_geometry(f, l, std::max(delta, level), level);
    json minima = json::array();
    for (const auto& m : g.minima)
      minima.push_back({{"x", m.x},
                        {"value", m.value},
                        {"interval", {m.left, m.right}},
                        {"B", {m.b_left, m.b_right}},
                        {"escape_interval", {m.escape_interval.lo, m.escape_interval.hi()}}});
    report["delta"] = delta;
    report["eta"] = level;
    report["kappa"] = g.kappa;
    report["minima"] = minima;
  } catch (const LandscapeError& e) {
    report["level_geometry_error"] = e.what();
  }
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"silab: simulation lab for strongly self-interacting processes on the circle"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (default: SILAB_WORKERS or the core count)");

  auto* cmd_analyze = app.add_subcommand("analyze", "landscape report of a potential file as JSON");
  std::string potential_file;
  std::optional<double> eta;
  cmd_analyze->add_option("potential", potential_file, "potential file (JSON or key-value)")->required();
  cmd_analyze->add_option("--eta", eta, "level for the B points (default delta)");

  auto* cmd_sim = app.add_subcommand("simulate", "one trajectory of the diffusion or the PDMP");
  std::string sim_potential, sim_process = "diffusion", sim_out = ".";
  double sim_lambda = 1.0, sim_dt = 1e-3, sim_horizon = 10.0, sim_x0 = 0.0, sim_u0 = 0.0;
  int sim_y0 = 1, sim_record = 100;
  std::uint64_t sim_seed = 0;
  cmd_sim->add_option("--potential", sim_potential, "potential file (default cos x)");
  cmd_sim->add_option("--process", sim_process, "diffusion | pdmp")->check(CLI::IsMember({"diffusion", "pdmp"}));
  cmd_sim->add_option("--lambda", sim_lambda, "PDMP constant jump rate");
  cmd_sim->add_option("--dt", sim_dt, "Euler step");
  cmd_sim->add_option("--horizon", sim_horizon, "simulated time");
  cmd_sim->add_option("--seed", sim_seed, "seed");
  cmd_sim->add_option("--x0", sim_x0, "initial position");
  cmd_sim->add_option("--u0", sim_u0, "initial u");
  cmd_sim->add_option("--y0", sim_y0, "initial velocity")->check(CLI::IsMember({-1, 1}));
  cmd_sim->add_option("--record-every", sim_record, "diffusion recording stride");
  cmd_sim->add_option("--out", sim_out, "output directory");

  auto* cmd_run = app.add_subcommand("run", "run a scenario file");
  std::string scenario_file, run_out;
  cmd_run->add_option("scenario", scenario_file, "scenario file (key-value or JSON)")->required();
  cmd_run->add_option("--out", run_out, "output directory (overrides the scenario)");

  auto* cmd_replay = app.add_subcommand("replay", "re-run a manifest and compare file hashes");
  std::string manifest_file, replay_out;
  cmd_replay->add_option("manifest", manifest_file, "manifest.json of a previous run")->required();
  cmd_replay->add_option("--out", replay_out, "output directory (default: <run dir>/replay)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << config_schema_summary();
    return kConfigError;
  }

  try {
    if (*cmd_analyze) {
      std::cout << analyze(load_potential(potential_file), eta).dump(2) << "\n";
    } else if (*cmd_sim) {
      const PeriodicPotential f = sim_potential.empty() ? PeriodicPotential::cosine() : load_potential(sim_potential);
      if (!(sim_horizon > 0.0)) throw ConfigError("horizon", "must be > 0");
      if (sim_process == "diffusion" && !(sim_dt > 0.0)) throw ConfigError("dt", "must be > 0");
      if (sim_process == "pdmp" && !(sim_lambda > 0.0)) throw ConfigError("lambda", "must be > 0");
      if (sim_record < 1) throw ConfigError("record_every", "must be >= 1");
      std::filesystem::create_directories(sim_out);
      CsvWriter w(sim_process == "diffusion" ? "t,x,u" : "t,x,u,y,cause");
      std::string file;
      json summary = {{"process", sim_process}, {"seed", sim_seed}, {"horizon", sim_horizon}};
      if (sim_process == "diffusion") {
        const Trajectory tr = simulate_diffusion(f, {wrap_angle(sim_x0), sim_u0}, sim_horizon, {sim_dt, sim_record}, sim_seed);
        for (std::size_t i = 0; i < tr.size(); ++i) {
          w.cell(tr.t[i]).cell(tr.states[i].x).cell(tr.states[i].u);
          w.end_row();
        }
        file = "trajectory_0.csv";
        summary["final"] = {tr.states.back().x, tr.states.back().u};
        summary["dt"] = sim_dt;
      } else {
        const EventLog log = simulate_pdmp(f, sim_lambda, {wrap_angle(sim_x0), sim_u0, sim_y0}, sim_horizon, sim_seed);
        w.cell(0.0).cell(log.initial.x).cell(log.initial.u).cell(std::int64_t{log.initial.y}).cell(std::string_view("start"));
        w.end_row();
        for (const auto& e : log.events) {
          w.cell(e.t).cell(e.state.x).cell(e.state.u).cell(std::int64_t{e.state.y}).cell(std::string_view(cause_name(e.cause)));
          w.end_row();
        }
        file = "events_0.csv";
        summary["final"] = {log.events.back().state.x, log.events.back().state.u, log.events.back().state.y};
        summary["events"] = log.events.size();
        summary["lambda"] = sim_lambda;
      }
      const std::string path = (std::filesystem::path(sim_out) / file).string();
      const std::string text = w.take();
      write_file(path, text);
      summary["file"] = path;
      summary["sha256"] = sha256_hex(text);
      std::cout << summary.dump(2) << "\n";
    } else if (*cmd_run) {
      const ScenarioConfig config = load_config(scenario_file);
      const json manifest = run_scenario(config, {run_out, workers});
      std::cout << "wrote " << manifest["files"].size() << " files, status " << manifest["status"].get<std::string>()
                << ", config hash " << manifest["config_hash"].get<std::string>() << "\n";
    } else if (*cmd_replay) {
      std::string out = replay_out;
      if (out.empty()) out = (std::filesystem::path(manifest_file).parent_path() / "replay").string();
      const ReplayReport report = replay(manifest_file, out, workers);
      if (!report.identical()) {
        std::cerr << "replay differs in " << report.mismatches.size() << " files:\n";
        for (const auto& m : report.mismatches) std::cerr << "  " << m << "\n";
        return kRuntimeFailure;
      }
      std::cout << "replay identical: " << report.manifest["files"].size() << " files\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n\n" << config_schema_summary();
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

#include <algorithm>
#include <map>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "silab/lab/io.hpp"
#include "silab/lab/runner.hpp"
#include "silab/landscape.hpp"
#include "silab/parallel.hpp"
#include "silab/stats.hpp"

namespace silab::lab {

using nlohmann::json;

namespace {

constexpr std::uint64_t kDiffusionStream = 0;
constexpr std::uint64_t kPdmpStream = 1;

std::vector<Process> processes(const ScenarioConfig& c) {
  std::vector<Process> out;
  if (c.runs_diffusion()) out.push_back(Process::Diffusion);
  if (c.runs_pdmp()) out.push_back(Process::Pdmp);
  return out;
}

ProcessSpec spec_of(const ScenarioConfig& c, Process p) { return {p, c.lambda, c.dt}; }

std::uint64_t path_seed(std::uint64_t replica_seed, Process p) {
  return derive_replica_seed(replica_seed, p == Process::Diffusion ? kDiffusionStream : kPdmpStream);
}

/// Initial state of a replica; shared by both processes of the replica.
PdmpState initial_state(const ScenarioConfig& c, std::uint64_t replica_seed) {
  Rng rng = make_stream(replica_seed, 2);
  std::uniform_real_distribution<double> ux(0.0, kTwoPi);
  const double x = c.x0 ? wrap_angle(*c.x0) : ux(rng);
  const int y = c.y0 != 0 ? c.y0 : (std::bernoulli_distribution(0.5)(rng) ? 1 : -1);
  return {x, c.u0, y};
}

std::string trajectory_csv(const Trajectory& tr) {
  CsvWriter w("t,x,u");
  for (std::size_t i = 0; i < tr.size(); ++i) {
    w.cell(tr.t[i]).cell(tr.states[i].x).cell(tr.states[i].u);
    w.end_row();
  }
  return w.take();
}

std::string events_csv(const EventLog& log) {
  CsvWriter w("t,x,u,y,cause");
  w.cell(0.0).cell(log.initial.x).cell(log.initial.u).cell(std::int64_t{log.initial.y}).cell(std::string_view("start"));
  w.end_row();
  for (const auto& e : log.events) {
    w.cell(e.t).cell(e.state.x).cell(e.state.u).cell(std::int64_t{e.state.y}).cell(std::string_view(cause_name(e.cause)));
    w.end_row();
  }
  return w.take();
}

std::string path_file(Process p, std::uint64_t i) {
  return (p == Process::Diffusion ? "trajectory_" : "events_") + std::to_string(i) + ".csv";
}

/// One simulated replica path of either process.
struct ReplicaPath {
  Process process = Process::Diffusion;
  Trajectory trajectory;  // diffusion path, or the sampled PDMP path when requested
  std::optional<EventLog> log;

  EmpiricalHistogram occupation(const PeriodicPotential& f, const HistogramGrid& g, double a, double b) const {
    return log ? occupation_histogram(f, *log, g, a, b) : occupation_histogram(trajectory, g, a, b);
  }
  std::string csv() const { return log ? events_csv(*log) : trajectory_csv(trajectory); }
};

ReplicaPath simulate_replica(const ScenarioConfig& c, const PeriodicPotential& f, Process p, std::uint64_t replica_seed,
                             double horizon, double lambda, bool sample_pdmp) {
  const PdmpState z0 = initial_state(c, replica_seed);
  const std::uint64_t seed = path_seed(replica_seed, p);
  ReplicaPath out;
  out.process = p;
  if (p == Process::Diffusion) {
    out.trajectory = simulate_diffusion(f, {z0.x, z0.u}, horizon, {c.dt, c.record_every}, seed);
  } else {
    out.log = simulate_pdmp(f, lambda, z0, horizon, seed);
    if (sample_pdmp) out.trajectory = sample_event_log(f, *out.log, c.dt * c.record_every);
  }
  return out;
}

/// Per-replica work with failures captured instead of aborting the ensemble.
template <class R, class Fn>
std::vector<std::optional<R>> run_replicas(std::uint64_t n, int workers, ScenarioOutput& out, const std::string& label,
                                           Fn&& fn) {
  struct Slot {
    std::optional<R> value;
    std::string error;
  };
  auto slots = parallel_map<Slot>(n, workers, [&](std::uint64_t i) {
    Slot s;
    try {
      s.value = fn(i);
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    return s;
  });
  out.tasks += n;
  std::vector<std::optional<R>> values(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (slots[i].value) values[i] = std::move(slots[i].value);
    else out.failures.push_back(label + " replica " + std::to_string(i) + ": " + slots[i].error);
  }
  return values;
}

void record_replica_seeds(const ScenarioConfig& c, ScenarioOutput& out) {
  out.seeds.resize(c.replicas);
  for (std::uint64_t i = 0; i < c.replicas; ++i) out.seeds[i] = derive_replica_seed(c.seed, i);
}

json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

json escape_json(const EscapeEstimate& e) {
  return {{"estimate", e.estimate},   {"interval", interval_json(e.interval)}, {"n", e.trials},
          {"successes", e.successes}, {"censored", e.censored},               {"bound", e.bound},
          {"warnings", e.warnings}};
}

std::string histogram_csv(const EmpiricalHistogram& h) {
  const auto& g = h.grid();
  const auto masses = h.masses();
  CsvWriter w("x_lo,x_hi,u_lo,u_hi,y,mass");
  for (int y = 0; y < (g.with_y ? 2 : 1); ++y)
    for (int xb = 0; xb < g.n_x; ++xb)
      for (int us = 0; us < g.u_slots(); ++us) {
        const double ulo = us == 0 ? -INFINITY : g.u_edge(us - 1);
        const double uhi = us == g.n_u + 1 ? INFINITY : g.u_edge(us);
        w.cell(g.x_edge(xb)).cell(g.x_edge(xb + 1)).cell(ulo).cell(uhi);
        w.cell(std::int64_t{g.with_y ? (y == 0 ? -1 : 1) : 0}).cell(masses[g.index(xb, us, y == 0 ? -1 : 1)]);
        w.end_row();
      }
  return w.take();
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// ---- ergodic ----------------------------------------------------------------

constexpr int kPrefixLevels = 6;

struct ErgodicReplica {
  std::vector<EmpiricalHistogram> prefixes;  // [b, b + L / 2^k], k = 0 .. kPrefixLevels
  EmpiricalHistogram first, second;
  std::string csv;
};

void run_ergodic(const ScenarioConfig& c, int workers, ScenarioOutput& out) {
  const HistogramGrid grid;
  const double b = c.burn_in, L = c.horizon - c.burn_in, mid = b + 0.5 * L;
  record_replica_seeds(c, out);
  CsvWriter series("process,t,tv_t_2t");
  CsvWriter halves("process,replica,tv_halves");
  for (Process p : processes(c)) {
    const std::string name = process_name(p);
    auto reps = run_replicas<ErgodicReplica>(c.replicas, workers, out, name, [&](std::uint64_t i) {
      const auto path = simulate_replica(c, c.potential, p, out.seeds[i], c.horizon, c.lambda, false);
      ErgodicReplica r;
      for (int k = 0; k <= kPrefixLevels; ++k) r.prefixes.push_back(path.occupation(c.potential, grid, b, b + L / std::ldexp(1.0, k)));
      r.first = path.occupation(c.potential, grid, b, mid);
      r.second = path.occupation(c.potential, grid, mid, c.horizon);
      if (i < c.paths_written) r.csv = path.csv();
      return r;
    });

    std::vector<EmpiricalHistogram> pooled(kPrefixLevels + 1, EmpiricalHistogram(grid));
    std::vector<const ErgodicReplica*> ok;
    json halves_tv = json::array();
    double halves_max = 0.0, halves_sum = 0.0;
    for (std::uint64_t i = 0; i < reps.size(); ++i) {
      if (!reps[i]) continue;
      const auto& r = *reps[i];
      ok.push_back(&r);
      for (int k = 0; k <= kPrefixLevels; ++k) pooled[k].merge(r.prefixes[k]);
      const double tv = tv_distance(r.first, r.second);
      halves.cell(std::string_view(name)).cell(static_cast<std::int64_t>(i)).cell(tv);
      halves.end_row();
      halves_tv.push_back(tv);
      halves_max = std::max(halves_max, tv);
      halves_sum += tv;
      if (!r.csv.empty()) out.files[path_file(p, i)] = r.csv;
    }
    if (ok.empty()) continue;

    json tv_series = json::array();
    bool decreasing = true;
    double previous = INFINITY;
    for (int k = kPrefixLevels; k >= 1; --k) {
      const double t = L / std::ldexp(1.0, k);
      const double tv = tv_distance(pooled[k], pooled[k - 1]);
      series.cell(std::string_view(name)).cell(t).cell(tv);
      series.end_row();
      tv_series.push_back({{"t", t}, {"tv", tv}});
      if (tv > previous) decreasing = false;
      previous = tv;
    }

    json pairs = json::array();
    double pair_max = 0.0;
    for (std::size_t j = 0; j + 1 < ok.size(); j += 2) {
      EmpiricalHistogram a(grid), bb(grid);
      a.merge(ok[j]->prefixes[0]);
      bb.merge(ok[j + 1]->prefixes[0]);
      const double tv = tv_distance(a, bb);
      pairs.push_back(tv);
      pair_max = std::max(pair_max, tv);
    }

    out.files["plotdata_histogram_" + name + ".csv"] = histogram_csv(pooled[0]);
    out.estimates[name] = {
        {"tv_series", tv_series},
        {"tv_series_decreasing", decreasing},
        {"tv_halves", {{"per_replica", halves_tv}, {"max", halves_max}, {"mean", halves_sum / ok.size()}, {"n", ok.size()}}},
        {"tv_replica_pairs", {{"per_pair", pairs}, {"max", pair_max}, {"n", pairs.size()}}},
    };
  }
  out.files["plotdata_tv.csv"] = series.take();
  out.files["plotdata_tv_halves.csv"] = halves.take();
}

// ---- localization -----------------------------------------------------------

constexpr int kCurvePoints = 50;
constexpr int kOverlaySteps = 20;

/// Signed extent {left, right} of the component of {|F - F(x*)| <= eta} around x*.
std::pair<double, double> trap_extent(const PeriodicPotential& f, const CriticalPoint& trap, double eta) {
  try {
    if (trap.kind == CriticalKind::LocalMin) return level_crossings(f, trap.x, trap.value + eta);
    return level_crossings(f.negated(), trap.x, -trap.value + eta);
  } catch (const LandscapeError&) {
    return {kTwoPi, kTwoPi};
  }
}

bool inside_extent(double x, double center, std::pair<double, double> extent) {
  if (extent.first + extent.second >= kTwoPi) return true;
  const double d = std::remainder(x - center, kTwoPi);
  return d >= -extent.first && d <= extent.second;
}

struct LocalizationReplica {
  PdmpState final;
  std::optional<double> limit;
  std::vector<double> near_trap;                 // distance to the nearest trap at each curve point
  std::vector<std::pair<double, double>> series; // (t, d(X_t, limit)) for converged paths
  std::vector<bool> stays_inside;                // overlay per j
  std::string csv;
};

void run_localization(const ScenarioConfig& c, int workers, ScenarioOutput& out) {
  const auto& f = c.potential;
  const CriticalLandscape land = analyze_landscape(f);
  if (land.traps.empty()) out.estimates["warnings"].push_back("trap set is empty: no localization expected");
  double delta = 0.0;
  try {
    delta = compute_delta(f, land);
  } catch (const LandscapeError& e) {
    out.estimates["warnings"].push_back(std::string("delta unavailable: ") + e.what());
  }
  const double window = c.window > 0.0 ? c.window : c.horizon / 10.0;
  std::vector<double> curve_t(kCurvePoints);
  for (int k = 0; k < kCurvePoints; ++k) curve_t[k] = c.horizon * (k + 1) / kCurvePoints;
  // extents per trap and overlay step
  std::vector<std::vector<std::pair<double, double>>> extents(land.traps.size());
  for (std::size_t m = 0; m < land.traps.size(); ++m)
    for (int j = 1; j <= kOverlaySteps; ++j)
      extents[m].push_back(delta > 0.0 ? trap_extent(f, land.traps[m], eta_schedule(j, delta))
                                       : std::pair<double, double>{kTwoPi, kTwoPi});

  record_replica_seeds(c, out);
  CsvWriter curve("process,t,fraction_near_trap");
  CsvWriter finals("process,replica,x_T,u_T,limit");
  CsvWriter rate("process,t,mean_distance");
  CsvWriter overlay("process,j,t,eta,fraction_inside");
  json traps = json::array();
  for (const auto& t : land.traps) traps.push_back(t.x);
  out.estimates["traps"] = traps;
  out.estimates["delta"] = delta;
  out.estimates["window"] = window;

  for (Process p : processes(c)) {
    const std::string name = process_name(p);
    auto reps = run_replicas<LocalizationReplica>(c.replicas, workers, out, name, [&](std::uint64_t i) {
      const auto path = simulate_replica(c, f, p, out.seeds[i], c.horizon, c.lambda, true);
      const Trajectory& tr = path.trajectory;
      LocalizationReplica r;
      if (path.log) r.final = path.log->events.back().state;
      else r.final = {tr.states.back().x, tr.states.back().u, 1};
      if (!land.traps.empty()) r.limit = detect_convergence(tr, f, land, window, c.eps);
      std::size_t idx = 0;
      for (double t : curve_t) {
        while (idx + 1 < tr.size() && tr.t[idx + 1] <= t) ++idx;
        double d = INFINITY;
        for (const auto& trap : land.traps) d = std::min(d, circle_distance(tr.states[idx].x, trap.x));
        r.near_trap.push_back(d);
      }
      if (r.limit) {
        std::size_t m = 0;
        while (m < land.traps.size() && land.traps[m].x != *r.limit) ++m;
        for (int j = 1; j <= kOverlaySteps; ++j) {
          const double from = c.horizon * j / (kOverlaySteps + 1);
          bool inside = true;
          for (std::size_t s = 0; s < tr.size() && inside; ++s)
            if (tr.t[s] >= from) inside = inside_extent(tr.states[s].x, *r.limit, extents[m][j - 1]);
          r.stays_inside.push_back(inside);
        }
        for (double t : curve_t) {
          auto it = std::upper_bound(tr.t.begin(), tr.t.end(), t);
          const std::size_t s = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - tr.t.begin()) - 1));
          r.series.emplace_back(t, circle_distance(tr.states[s].x, *r.limit));
        }
      }
      if (i < c.paths_written) r.csv = path.csv();
      return r;
    });

    std::uint64_t n_ok = 0, n_final_near = 0;
    std::vector<std::uint64_t> per_trap(land.traps.size(), 0);
    std::vector<std::uint64_t> near_at(kCurvePoints, 0);
    std::vector<std::uint64_t> inside_at(kOverlaySteps, 0);
    std::vector<double> dist_sum(kCurvePoints, 0.0);
    std::uint64_t n_converged = 0;
    std::vector<double> u_final;
    for (std::uint64_t i = 0; i < reps.size(); ++i) {
      if (!reps[i]) continue;
      const auto& r = *reps[i];
      ++n_ok;
      u_final.push_back(r.final.u);
      for (int k = 0; k < kCurvePoints; ++k) near_at[k] += r.near_trap[k] < c.eps;
      double dfinal = INFINITY;
      const CriticalPoint* nearest = nullptr;
      for (const auto& trap : land.traps) {
        const double d = circle_distance(r.final.x, trap.x);
        if (d < dfinal) {
          dfinal = d;
          nearest = &trap;
        }
      }
      if (nearest && dfinal < c.eps && sign_of(r.final.u) == sign_of(nearest->value)) ++n_final_near;
      if (r.limit) {
        ++n_converged;
        for (std::size_t m = 0; m < land.traps.size(); ++m)
          if (land.traps[m].x == *r.limit) ++per_trap[m];
        for (int j = 0; j < kOverlaySteps; ++j) inside_at[j] += r.stays_inside[j];
        for (int k = 0; k < kCurvePoints; ++k) dist_sum[k] += r.series[k].second;
      }
      finals.cell(std::string_view(name)).cell(static_cast<std::int64_t>(i)).cell(r.final.x).cell(r.final.u);
      if (r.limit) finals.cell(*r.limit);
      else finals.cell(std::string_view(""));
      finals.end_row();
      if (!r.csv.empty()) out.files[path_file(p, i)] = r.csv;
    }
    if (n_ok == 0) continue;

    json curve_json = json::array();
    for (int k = 0; k < kCurvePoints; ++k) {
      const double frac = static_cast<double>(near_at[k]) / n_ok;
      curve.cell(std::string_view(name)).cell(curve_t[k]).cell(frac);
      curve.end_row();
      curve_json.push_back({{"t", curve_t[k]}, {"fraction", frac}});
    }
    json overlay_json = json::array();
    for (int j = 0; j < kOverlaySteps && n_converged > 0 && delta > 0.0; ++j) {
      const double frac = static_cast<double>(inside_at[j]) / n_converged;
      const double t = c.horizon * (j + 1) / (kOverlaySteps + 1);
      overlay.cell(std::string_view(name)).cell(std::int64_t{j + 1}).cell(t).cell(eta_schedule(j + 1, delta)).cell(frac);
      overlay.end_row();
      overlay_json.push_back({{"j", j + 1}, {"t", t}, {"eta", eta_schedule(j + 1, delta)}, {"fraction_inside", frac}});
    }
    json fit = nullptr;
    if (n_converged > 0) {
      std::vector<std::pair<double, double>> series;
      for (int k = 0; k < kCurvePoints; ++k) {
        const double mean = dist_sum[k] / n_converged;
        if (curve_t[k] >= c.burn_in) series.emplace_back(curve_t[k], mean);
        rate.cell(std::string_view(name)).cell(curve_t[k]).cell(mean);
        rate.end_row();
      }
      try {
        const RateFit rf = fit_rate(series, {1, 2, 3, 4, 5, 6});
        fit = {{"n", rf.n}, {"residuals", rf.residuals}, {"n_grid", {1, 2, 3, 4, 5, 6}}};
      } catch (const std::exception& e) {
        fit = {{"error", e.what()}};
      }
    }
    json by_trap = json::array();
    for (std::size_t m = 0; m < land.traps.size(); ++m)
      by_trap.push_back({{"x", land.traps[m].x}, {"converged", per_trap[m]},
                         {"fraction", static_cast<double>(per_trap[m]) / n_ok}});
    std::sort(u_final.begin(), u_final.end());
    out.estimates[name] = {
        {"n", n_ok},
        {"converged_fraction", static_cast<double>(n_converged) / n_ok},
        {"converged_interval", interval_json(wilson_interval(n_converged, n_ok))},
        {"by_trap", by_trap},
        {"final_near_trap_fraction", static_cast<double>(n_final_near) / n_ok},
        {"u_final_median", u_final[u_final.size() / 2]},
        {"fraction_curve", curve_json},
        {"eta_overlay", overlay_json},
        {"rate_fit", fit},
    };
  }
  out.files["plotdata_localization.csv"] = curve.take();
  out.files["plotdata_final_states.csv"] = finals.take();
  out.files["plotdata_rate.csv"] = rate.take();
  out.files["plotdata_eta_overlay.csv"] = overlay.take();
}

// ---- metastability ----------------------------------------------------------

struct Levels {
  CriticalLandscape landscape;
  double delta = 0.0;
  double eta = 0.0;
  LevelGeometry geometry;
};

/// Geometry at level eta (δ when unset). A requested eta above δ still gets
/// its B and I^η points; δ is raised to eta for the construction.
Levels levels_for(const ScenarioConfig& c, double eta_override, json& warnings) {
  Levels lv;
  lv.landscape = analyze_landscape(c.potential);
  lv.delta = compute_delta(c.potential, lv.landscape);
  lv.eta = eta_override > 0.0 ? eta_override : lv.delta;
  if (lv.eta > lv.delta)
    warnings.push_back("eta=" + format_double(lv.eta) + " exceeds delta=" + format_double(lv.delta));
  lv.geometry = compute_level_geometry(c.potential, lv.landscape, std::max(lv.delta, lv.eta), lv.eta);
  return lv;
}

void run_metastability(const ScenarioConfig& c, int workers, ScenarioOutput& out) {
  json warnings = json::array();
  const Levels lv = levels_for(c, c.eta, warnings);
  out.estimates["delta"] = lv.delta;
  out.estimates["eta"] = lv.eta;
  CsvWriter table("process,M,q_hat,q_lo,q_hi,log_q_hat,bound,oracle");
  std::uint64_t k = 0;
  for (Process p : processes(c)) {
    const std::string name = process_name(p);
    json rows = json::array();
    bool monotone = true;
    std::optional<EscapeEstimate> previous;
    for (double M : c.M_grid) {
      const std::uint64_t seed = derive_replica_seed(c.seed, k++);
      out.seeds.push_back(seed);
      EscapeSetup setup{spec_of(c, p), M, c.replicas, seed, c.escape_cap, workers};
      EscapeEstimate e;
      out.tasks += c.replicas;
      try {
        e = estimate_escape(c.potential, lv.geometry, setup);
      } catch (const std::exception& ex) {
        for (std::uint64_t i = 0; i < c.replicas; ++i) out.failures.push_back(name + " M=" + format_double(M) + ": " + ex.what());
        continue;
      }
      std::optional<double> oracle;
      if (p == Process::Diffusion) {
        const EscapeStart s = escape_start(lv.geometry, 0);
        try {
          oracle = analytic_escape_probability(c.potential, M, s.inner, s.x, s.outer);
        } catch (const std::exception&) {
        }
      }
      if (previous && e.interval.lo > previous->interval.hi) monotone = false;
      previous = e;
      json row = escape_json(e);
      row["M"] = M;
      row["oracle"] = oracle ? json(*oracle) : json(nullptr);
      rows.push_back(row);
      table.cell(std::string_view(name)).cell(M).cell(e.estimate).cell(e.interval.lo).cell(e.interval.hi);
      table.cell(e.estimate > 0.0 ? std::log(e.estimate) : -INFINITY).cell(e.bound);
      if (oracle) table.cell(*oracle);
      else table.cell(std::string_view(""));
      table.end_row();
    }
    out.estimates[name] = {{"rows", rows}, {"nonincreasing_up_to_overlap", monotone}};
  }
  out.estimates["warnings"] = warnings;
  out.files["plotdata_escape.csv"] = table.take();
}

// ---- PDMP against diffusion -------------------------------------------------

void run_pdmp_vs_diffusion(const ScenarioConfig& c, int workers, ScenarioOutput& out) {
  const HistogramGrid grid;
  record_replica_seeds(c, out);
  const auto& f = c.potential;
  struct Marginal {
    EmpiricalHistogram h;
    std::string csv;
  };
  auto diff = run_replicas<Marginal>(c.replicas, workers, out, "diffusion", [&](std::uint64_t i) {
    const auto path = simulate_replica(c, f, Process::Diffusion, out.seeds[i], c.horizon, c.lambda, false);
    return Marginal{path.occupation(f, grid, c.burn_in, c.horizon).x_marginal(), i < c.paths_written ? path.csv() : ""};
  });
  EmpiricalHistogram reference = EmpiricalHistogram(grid).x_marginal();
  for (std::uint64_t i = 0; i < diff.size(); ++i) {
    if (!diff[i]) continue;
    reference.merge(diff[i]->h);
    if (!diff[i]->csv.empty()) out.files[path_file(Process::Diffusion, i)] = diff[i]->csv;
  }

  CsvWriter table("lambda,horizon,tv_x_marginal");
  json rows = json::array();
  bool decreasing = true;
  double previous = INFINITY;
  for (double lambda : c.lambda_grid) {
    const std::string label = "pdmp lambda=" + format_double(lambda);
    auto hs = run_replicas<EmpiricalHistogram>(c.replicas, workers, out, label, [&](std::uint64_t i) {
      const auto path = simulate_replica(c, f, Process::Pdmp, out.seeds[i], lambda * c.horizon, lambda, false);
      return path.occupation(f, grid, lambda * c.burn_in, lambda * c.horizon).x_marginal();
    });
    EmpiricalHistogram pooled = EmpiricalHistogram(grid).x_marginal();
    for (const auto& h : hs)
      if (h) pooled.merge(*h);
    const double tv = tv_distance(pooled, reference);
    if (tv > previous) decreasing = false;
    previous = tv;
    table.cell(lambda).cell(lambda * c.horizon).cell(tv);
    table.end_row();
    rows.push_back({{"lambda", lambda}, {"horizon", lambda * c.horizon}, {"tv", tv}});
  }
  out.estimates["rows"] = rows;
  out.estimates["tv_decreasing_in_lambda"] = decreasing;
  out.files["plotdata_tv_lambda.csv"] = table.take();
}

// ---- drift ------------------------------------------------------------------

void run_drift(const ScenarioConfig& c, int workers, ScenarioOutput& out) {
  CsvWriter table("process,t,u0,estimate,std_error,ratio,ratio_se,tail_flag");
  std::uint64_t k = 0;
  for (Process p : processes(c)) {
    const std::string name = process_name(p);
    DriftSetup setup;
    setup.spec = spec_of(c, p);
    setup.kappa = c.kappa;
    setup.t_grid = c.t_grid;
    setup.u0_grid = c.u0_grid;
    setup.reps = c.replicas;
    setup.seed = derive_replica_seed(c.seed, k++);
    setup.workers = workers;
    out.seeds.push_back(setup.seed);
    out.tasks += c.replicas * c.u0_grid.size();
    DriftReport r;
    try {
      r = lyapunov_drift_check(c.potential, setup);
    } catch (const std::exception& ex) {
      for (std::uint64_t i = 0; i < c.replicas * c.u0_grid.size(); ++i) out.failures.push_back(name + ": " + ex.what());
      continue;
    }
    json rows = json::array();
    for (const auto& row : r.rows) {
      table.cell(std::string_view(name)).cell(row.t).cell(row.u0).cell(row.estimate).cell(row.std_error);
      table.cell(row.ratio).cell(row.ratio_se).cell(std::int64_t{row.tail_flag});
      table.end_row();
      rows.push_back({{"t", row.t}, {"u0", row.u0}, {"estimate", row.estimate}, {"std_error", row.std_error},
                      {"ratio", row.ratio}, {"ratio_se", row.ratio_se}, {"tail_flag", row.tail_flag}, {"n", c.replicas}});
    }
    out.estimates[name] = {{"kappa", r.kappa},
                           {"t_used", r.t_used ? json(*r.t_used) : json(nullptr)},
                           {"c_t", r.c_t},
                           {"contraction", r.contraction},
                           {"monotone", r.monotone},
                           {"rows", rows},
                           {"warnings", r.warnings}};
  }
  out.files["plotdata_drift.csv"] = table.take();
}

// ---- Doeblin ----------------------------------------------------------------

void run_doeblin(const ScenarioConfig& c, int workers, ScenarioOutput& out) {
  std::vector<PdmpState> starts;
  for (int ix = 0; ix < c.starts_x; ++ix)
    for (int iu = 0; iu < c.starts_u; ++iu) {
      const double u = c.starts_u == 1 ? c.start_u_lo
                                       : c.start_u_lo + (c.start_u_hi - c.start_u_lo) * iu / (c.starts_u - 1);
      starts.push_back({kTwoPi * ix / c.starts_x, u, (ix + iu) % 2 == 0 ? 1 : -1});
    }
  const StateBox box{{wrap_angle(c.box_x_lo), c.box_x_length}, c.box_u_lo, c.box_u_hi};
  CsvWriter table("process,x0,u0,y0,p_hat,p_lo,p_hi");
  std::uint64_t k = 0;
  for (Process p : processes(c)) {
    const std::string name = process_name(p);
    const std::uint64_t seed = derive_replica_seed(c.seed, k++);
    out.seeds.push_back(seed);
    out.tasks += c.replicas * starts.size();
    DoeblinReport r;
    try {
      r = doeblin_probe(c.potential, spec_of(c, p), starts, box, c.horizon, c.replicas, seed, workers);
    } catch (const std::exception& ex) {
      for (std::uint64_t i = 0; i < c.replicas * starts.size(); ++i) out.failures.push_back(name + ": " + ex.what());
      continue;
    }
    json rows = json::array();
    for (std::size_t s = 0; s < starts.size(); ++s) {
      const auto& e = r.per_start[s];
      table.cell(std::string_view(name)).cell(starts[s].x).cell(starts[s].u).cell(std::int64_t{starts[s].y});
      table.cell(e.estimate).cell(e.interval.lo).cell(e.interval.hi);
      table.end_row();
      json row = escape_json(e);
      row.erase("bound");
      row["start"] = {starts[s].x, starts[s].u, starts[s].y};
      rows.push_back(row);
    }
    out.estimates[name] = {{"per_start", rows},
                           {"argmin", r.argmin},
                           {"min_estimate", r.min_estimate},
                           {"min_interval", interval_json(r.min_interval)},
                           {"t", c.horizon}};
  }
  out.files["plotdata_doeblin.csv"] = table.take();
}

// ---- hitting ----------------------------------------------------------------

constexpr std::uint64_t kPilotReps = 100;

HittingResult hitting_trial(const ScenarioConfig& c, Process p, const LevelGeometry& g, std::uint64_t i, double cap,
                            std::uint64_t seed) {
  const auto& m = g.minima[i % g.minima.size()];
  const ArcSet target = g.b_points();
  int y0 = c.y0;
  if (y0 == 0) {
    Rng rng = make_stream(seed, 2);
    y0 = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
  }
  if (p == Process::Diffusion) return hitting_time_diffusion(c.potential, {m.x, c.u0}, target, cap, c.dt, seed);
  return hitting_time_pdmp(c.potential, c.lambda, {m.x, c.u0, y0}, target, cap, seed);
}

void run_hitting(const ScenarioConfig& c, int workers, ScenarioOutput& out) {
  json warnings = json::array();
  const CriticalLandscape land = analyze_landscape(c.potential);
  const double delta = compute_delta(c.potential, land);
  const double base = c.eta > 0.0 ? c.eta : delta;
  out.estimates["delta"] = delta;
  record_replica_seeds(c, out);
  CsvWriter summary("process,eta,kappa_sqrt_eta,min_time,median_time,violations,censored,cap");
  CsvWriter moments("process,eta,theta,estimate,std_error,tail_flag");
  json by_eta = json::array();
  for (double eta : {base / 4.0, base / 2.0, base}) {
    const LevelGeometry g = compute_level_geometry(c.potential, land, std::max(delta, eta), eta);
    const double floor = g.kappa * std::sqrt(eta);
    json entry = {{"eta", eta}, {"kappa", g.kappa}, {"kappa_sqrt_eta", floor}};
    std::map<Process, HittingSample> samples;
    for (Process p : processes(c)) {
      const std::string name = process_name(p);
      const std::uint64_t n_pilot = std::min<std::uint64_t>(kPilotReps, c.replicas);
      auto pilot = parallel_map<HittingResult>(n_pilot, workers, [&](std::uint64_t i) {
        return hitting_trial(c, p, g, i, c.escape_cap, derive_replica_seed(out.seeds[i], 100 + static_cast<int>(p)));
      });
      HittingSample pilot_sample;
      for (const auto& r : pilot) pilot_sample.add(r.time, r.censored);
      double cap = censoring_cap(pilot_sample);
      if (!(cap > 0.0)) cap = c.escape_cap;
      auto main = run_replicas<HittingResult>(c.replicas, workers, out, name, [&](std::uint64_t i) {
        return hitting_trial(c, p, g, i, cap, path_seed(out.seeds[i], p));
      });
      HittingSample sample;
      for (const auto& r : main)
        if (r) sample.add(r->time, r->censored);
      std::uint64_t violations = 0, censored = 0;
      double min_time = INFINITY;
      for (std::size_t s = 0; s < sample.size(); ++s) {
        if (sample.values[s] < floor) ++violations;
        if (sample.censored[s]) ++censored;
        min_time = std::min(min_time, sample.values[s]);
      }
      const MomentScan scan = exponential_moment_scan(sample, c.theta_grid);
      json scan_rows = json::array();
      for (const auto& row : scan.rows) {
        moments.cell(std::string_view(name)).cell(eta).cell(row.theta).cell(row.estimate).cell(row.std_error);
        moments.cell(std::int64_t{row.tail_flag});
        moments.end_row();
        scan_rows.push_back({{"theta", row.theta}, {"estimate", row.estimate}, {"std_error", row.std_error},
                             {"tail_flag", row.tail_flag}, {"n", sample.size()}});
      }
      summary.cell(std::string_view(name)).cell(eta).cell(floor).cell(min_time).cell(sample.median());
      summary.cell(static_cast<std::int64_t>(violations)).cell(static_cast<std::int64_t>(censored)).cell(cap);
      summary.end_row();
      entry[name] = {{"n", sample.size()},
                     {"cap", cap},
                     {"min_time", min_time},
                     {"median_time", sample.median()},
                     {"violations", violations},
                     {"censored", censored},
                     {"moments", scan_rows},
                     {"censoring_flag", scan.censoring_flag}};
      samples[p] = std::move(sample);
    }
    if (samples.size() == 2) {
      const auto& a = samples[Process::Pdmp].values;
      const auto& b = samples[Process::Diffusion].values;
      const Dominance d = ecdf_dominance(a, b, dkw_tolerance(a.size(), b.size()));
      const char* verdict[] = {"pdmp_below_diffusion", "diffusion_below_pdmp", "both", "crossing"};
      entry["dominance"] = verdict[static_cast<int>(d.verdict())];
    }
    by_eta.push_back(entry);
  }
  out.estimates["levels"] = by_eta;
  out.estimates["warnings"] = warnings;
  out.files["plotdata_hitting.csv"] = summary.take();
  out.files["plotdata_hitting_moments.csv"] = moments.take();
}

}  // namespace

ScenarioOutput execute_scenario(const ScenarioConfig& config, int workers) {
  ScenarioOutput out;
  out.estimates["kind"] = kind_name(config.kind);
  out.estimates["warnings"] = json::array();
  switch (config.kind) {
    case ScenarioKind::Ergodic: run_ergodic(config, workers, out); break;
    case ScenarioKind::Localization: run_localization(config, workers, out); break;
    case ScenarioKind::Metastability: run_metastability(config, workers, out); break;
    case ScenarioKind::PdmpVsDiffusion: run_pdmp_vs_diffusion(config, workers, out); break;
    case ScenarioKind::Drift: run_drift(config, workers, out); break;
    case ScenarioKind::Doeblin: run_doeblin(config, workers, out); break;
    case ScenarioKind::Hitting: run_hitting(config, workers, out); break;
  }
  return out;
}

}  // namespace silab::lab

#include "malsim/execute.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>
#include <variant>

#include "malsim/analysis.hpp"
#include "malsim/csv.hpp"
#include "malsim/errors.hpp"
#include "malsim/ode_model.hpp"
#include "malsim/solver.hpp"
#include "malsim/svg.hpp"
#include "malsim/version.hpp"

namespace malsim {

namespace {

std::string config_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// Serialized file emission with manifest bookkeeping.
struct Emitter {
  std::filesystem::path dir;
  std::vector<std::string> files;

  void write(const std::string& rel, const std::string& content) {
    const std::filesystem::path path = dir / rel;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open output file: " + path.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
      throw std::runtime_error("short write to: " + path.string());
    files.push_back(rel);
  }
};

void run_parallel(std::vector<std::function<void()>>& tasks, int threads) {
  const int n =
      std::min<int>(std::max(1, threads), static_cast<int>(tasks.size()));
  if (n <= 1) {
    for (auto& task : tasks) task();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (int w = 0; w < n; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= tasks.size()) return;
        tasks[k]();
      }
    });
  for (auto& th : pool) th.join();
}

bool all_constant(const ModelParams& p) {
  return std::holds_alternative<ConstantFn>(p.mu_h) &&
         std::holds_alternative<ConstantFn>(p.delta) &&
         std::holds_alternative<ConstantFn>(p.r1) &&
         std::holds_alternative<ConstantFn>(p.r2) &&
         std::holds_alternative<ConstantFn>(p.beta_h) &&
         std::holds_alternative<ConstantFn>(p.beta_v);
}

bool r2_is_zero(const ModelParams& p, double a_max) {
  return sup_on(p.r2, 0.0, a_max, 4096) == 0.0 &&
         inf_on(p.r2, 0.0, a_max, 4096) == 0.0;
}

std::vector<std::string> base_provenance(const RunConfig& c,
                                         const std::string& hash) {
  return {
      std::string("tool_version: ") + kToolVersion,
      "config_hash: " + hash,
      "mode: " + mode_name(c.mode),
      "grid: da=" + format_double(c.grid.da) + " dt=" +
          format_double(c.grid.dt) + " a_max=" + format_double(c.grid.a_max) +
          " t_end=" + format_double(c.grid.t_end),
  };
}

SystemState initial_state(const RunConfig& c, const ModelParams& p,
                          const Grid& g, double i_v0) {
  const double s_v0 = c.init.s_v0 >= 0.0 ? c.init.s_v0 : p.lambda_v / p.mu_v;
  if (c.init.s_profile || c.init.i_profile || c.init.r_profile) {
    SystemState st;
    st.s.assign(g.n_a, 0.0);
    st.i.assign(g.n_a, 0.0);
    st.r.assign(g.n_a, 0.0);
    for (int j = 0; j < g.n_a; ++j) {
      const double a = g.cell_center(j);
      if (c.init.s_profile) st.s[j] = eval(*c.init.s_profile, a);
      if (c.init.i_profile) st.i[j] = eval(*c.init.i_profile, a);
      if (c.init.r_profile) st.r[j] = eval(*c.init.r_profile, a);
    }
    st.s_v = s_v0;
    st.i_v = i_v0;
    st.t = 0.0;
    return st;
  }
  if (c.init.pfe_profile) return pfe_profile_state(p, g, s_v0, i_v0);
  SystemState st;
  st.s.assign(g.n_a, 0.0);
  st.i.assign(g.n_a, 0.0);
  st.r.assign(g.n_a, 0.0);
  st.s_v = s_v0;
  st.i_v = i_v0;
  st.t = 0.0;
  return st;
}

struct SimOutcome {
  Trajectory traj;
  bool ok = false;
  std::string error;
};

const char* kTimeseriesColumns[] = {
    "t_years", "s_l1_humans", "i_l1_humans",        "r_l1_humans",
    "s_v",     "i_v",         "lambda_v_per_year",  "lyapunov_l0"};

CsvTable timeseries_table(const Trajectory& traj,
                          const std::vector<std::string>& prov) {
  CsvTable tab;
  tab.provenance = prov;
  tab.provenance.push_back("human_values: l1_aggregates");
  tab.provenance.push_back("tail_bound: " + format_double(traj.tail_bound));
  tab.columns.assign(std::begin(kTimeseriesColumns),
                     std::end(kTimeseriesColumns));
  for (const TrajectorySample& s : traj.samples)
    tab.rows.push_back({s.t, s.s_l1, s.i_l1, s.r_l1, s.s_v, s.i_v, s.lambda_v,
                        s.lyapunov});
  return tab;
}

void emit_snapshot_csvs(Emitter& em, const std::string& run_name,
                        const Trajectory& traj, const Grid& g,
                        const std::vector<std::string>& prov) {
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const SystemState& st = traj.snapshots[k];
    CsvTable tab;
    tab.provenance = prov;
    tab.provenance.push_back("snapshot_t: " + format_double(st.t));
    tab.provenance.push_back("s_v: " + format_double(st.s_v));
    tab.provenance.push_back("i_v: " + format_double(st.i_v));
    tab.provenance.push_back(
        "columns: human age densities (individuals per year of age)");
    tab.columns = {"age_years", "s", "i", "r"};
    for (int j = 0; j < g.n_a; ++j)
      tab.rows.push_back({g.cell_center(j), st.s[j], st.i[j], st.r[j]});
    em.write(run_name + "_snapshot" + std::to_string(k) + ".csv",
             tab.to_string());
  }
}

void do_simulate(const RunConfig& c, const ExecOptions& opt, Emitter& em,
                 KeyValueReport& kv, ReportBundle& bundle) {
  const ModelParams& p = c.params;
  const Grid grid =
      Grid::make(c.grid.da, c.grid.dt, c.grid.a_max, c.grid.t_end);
  const LyapunovL0 lyap = make_lyapunov(p, grid);

  RunOptions ropt;
  ropt.sample_every = c.output.sample_stride;
  ropt.snapshot_times = c.output.snapshot_times;
  ropt.sample_functional = [&lyap](const SystemState& st) { return lyap(st); };

  std::vector<SimOutcome> outcomes(c.init.i_v0.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t k = 0; k < c.init.i_v0.size(); ++k)
    tasks.push_back([&, k] {
      try {
        const SystemState init = initial_state(c, p, grid, c.init.i_v0[k]);
        outcomes[k].traj = run(p, grid, init, ropt);
        outcomes[k].ok = true;
      } catch (const std::exception& e) {
        outcomes[k].error = e.what();
      }
    });
  run_parallel(tasks, opt.threads);

  const auto prov = base_provenance(c, kv.entries[1].second);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const std::string name = "run" + std::to_string(k);
    bundle.runs.push_back({name, outcomes[k].ok, outcomes[k].error});
    kv.add(name + "_i_v0", c.init.i_v0[k]);
    kv.add(name + "_status", outcomes[k].ok ? "ok" : "failed");
    if (!outcomes[k].ok) {
      kv.add(name + "_error", outcomes[k].error);
      bundle.all_ok = false;
      continue;
    }
    const Trajectory& traj = outcomes[k].traj;
    auto rprov = prov;
    rprov.push_back("run: " + name +
                    " (i_v0=" + format_double(c.init.i_v0[k]) + ")");
    em.write(name + "_timeseries.csv", timeseries_table(traj, rprov).to_string());
    emit_snapshot_csvs(em, name, traj, grid, rprov);
    const TrajectorySample& last = traj.samples.back();
    kv.add(name + "_final_t", last.t);
    kv.add(name + "_final_s_l1", last.s_l1);
    kv.add(name + "_final_i_l1", last.i_l1);
    kv.add(name + "_final_r_l1", last.r_l1);
    kv.add(name + "_final_s_v", last.s_v);
    kv.add(name + "_final_i_v", last.i_v);
    kv.add(name + "_final_lambda_v", last.lambda_v);
    kv.add(name + "_final_lyapunov_l0", last.lyapunov);
    kv.add(name + "_tail_bound", traj.tail_bound);
  }

  if (c.output.svg) {
    auto make_series = [&](auto pick) {
      std::vector<SvgSeries> series;
      for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (!outcomes[k].ok) continue;
        SvgSeries s;
        s.label = "I_v(0) = " + format_double(c.init.i_v0[k]);
        for (const TrajectorySample& smp : outcomes[k].traj.samples) {
          s.x.push_back(smp.t);
          s.y.push_back(pick(smp));
        }
        series.push_back(std::move(s));
      }
      return series;
    };
    const auto humans =
        make_series([](const TrajectorySample& s) { return s.i_l1; });
    if (!humans.empty()) {
      SvgStyle style;
      style.title = "Infected humans";
      style.y_label = "||i||_L1";
      style.log_y = c.output.log_scale;
      em.write("infected_humans.svg", line_chart_svg(humans, style));
    }
    const auto vectors =
        make_series([](const TrajectorySample& s) { return s.i_v; });
    if (!vectors.empty()) {
      SvgStyle style;
      style.title = "Infected mosquitoes";
      style.y_label = "I_v";
      style.log_y = c.output.log_scale;
      em.write("infected_mosquitoes.svg", line_chart_svg(vectors, style));
    }
  }
}

void do_r0(const RunConfig& c, Emitter&, KeyValueReport& kv,
           ReportBundle& bundle) {
  try {
    const R0Report rep = r0(c.params, c.grid.a_max);
    kv.add("r0", rep.r0);
    kv.add("r0_squared", rep.r0_squared);
    kv.add("quadrature_error_estimate", rep.quadrature_error_estimate);
    kv.add("accuracy_warning", rep.accuracy_warning ? "true" : "false");
    kv.add("a_max", rep.a_max);
    kv.add("tail_bound", rep.tail_bound);
    bundle.runs.push_back({"r0", true, ""});
  } catch (const std::exception& e) {
    kv.add("r0_status", "failed");
    kv.add("r0_error", e.what());
    bundle.runs.push_back({"r0", false, e.what()});
    bundle.all_ok = false;
  }
}

void emit_profile_csv(Emitter& em, const std::string& file,
                      const EquilibriumReport& eq,
                      const std::vector<std::string>& prov) {
  CsvTable tab;
  tab.provenance = prov;
  tab.provenance.push_back("s_v: " + format_double(eq.s_v));
  tab.provenance.push_back("i_v: " + format_double(eq.i_v));
  tab.columns = {"age_years", "s", "i", "r"};
  for (std::size_t k = 0; k < eq.ages.size(); ++k)
    tab.rows.push_back({eq.ages[k], eq.s[k], eq.i[k], eq.r[k]});
  em.write(file, tab.to_string());
}

void do_equilibria(const RunConfig& c, Emitter& em, KeyValueReport& kv,
                   ReportBundle& bundle) {
  const auto prov = base_provenance(c, kv.entries[1].second);
  try {
    const EquilibriumReport eq0 = pfe(c.params, c.grid.a_max);
    emit_profile_csv(em, "pfe_profile.csv", eq0, prov);
    kv.add("pfe_s_v", eq0.s_v);
    kv.add("pfe_residual", eq0.residual);
    bundle.runs.push_back({"pfe", true, ""});
  } catch (const std::exception& e) {
    bundle.runs.push_back({"pfe", false, e.what()});
    kv.add("pfe_status", "failed");
    kv.add("pfe_error", e.what());
    bundle.all_ok = false;
  }

  try {
    if (all_constant(c.params)) {
      const auto [eq, st] = endemic_ode(to_const(c.params));
      kv.add("endemic_kind", "ode");
      kv.add("endemic_exists", eq.exists ? "true" : "false");
      kv.add("endemic_r0", eq.r0_value);
      if (eq.exists) {
        kv.add("endemic_s_h", eq.s_h);
        kv.add("endemic_i_h", eq.i_h);
        kv.add("endemic_r_h", eq.r_h);
        kv.add("endemic_s_v", eq.s_v);
        kv.add("endemic_i_v", eq.i_v);
        kv.add("endemic_residual", eq.residual);
      }
      bundle.runs.push_back({"endemic", true, ""});
    } else if (r2_is_zero(c.params, c.grid.a_max)) {
      const EquilibriumReport eq = endemic_pde_r2zero(c.params, c.grid.a_max);
      kv.add("endemic_kind", "pde_r2zero");
      kv.add("endemic_exists", eq.exists ? "true" : "false");
      kv.add("endemic_r0", eq.r0_value);
      if (eq.exists) {
        emit_profile_csv(em, "endemic_profile.csv", eq, prov);
        kv.add("endemic_root_x", eq.root_x);
        kv.add("endemic_bracket_lo", eq.bracket_lo);
        kv.add("endemic_bracket_hi", eq.bracket_hi);
        kv.add("endemic_residual", eq.residual);
        kv.add("endemic_s_v", eq.s_v);
        kv.add("endemic_i_v", eq.i_v);
      }
      bundle.runs.push_back({"endemic", true, ""});
    } else {
      kv.add("endemic_kind", "none");
      kv.add("endemic_note",
             "waning immunity is age-dependent and nonzero: no closed "
             "endemic solver; use simulate for long-run states");
      bundle.runs.push_back({"endemic", true, ""});
    }
  } catch (const std::exception& e) {
    bundle.runs.push_back({"endemic", false, e.what()});
    kv.add("endemic_status", "failed");
    kv.add("endemic_error", e.what());
    bundle.all_ok = false;
  }
}

void do_stability(const RunConfig& c, Emitter&, KeyValueReport& kv,
                  ReportBundle& bundle) {
  try {
    if (!all_constant(c.params))
      throw std::invalid_argument(
          "stability mode requires constant parameters (the certificate is "
          "defined for the 5-compartment reduction)");
    const auto [eq, st] = endemic_ode(to_const(c.params));
    kv.add("r0", eq.r0_value);
    kv.add("endemic_exists", eq.exists ? "true" : "false");
    if (eq.exists) {
      kv.add("endemic_s_h", eq.s_h);
      kv.add("endemic_i_h", eq.i_h);
      kv.add("endemic_r_h", eq.r_h);
      kv.add("endemic_s_v", eq.s_v);
      kv.add("endemic_i_v", eq.i_v);
      kv.add("endemic_residual", eq.residual);
      kv.add("routh_available", st.routh_available ? "true" : "false");
      if (st.routh_available) {
        kv.add("a3", st.a3);
        kv.add("a2", st.a2);
        kv.add("a1", st.a1);
        kv.add("a0", st.a0);
        kv.add("b1", st.b1);
        kv.add("c0", st.c0);
      }
      const char* verdict =
          st.verdict == StabilityReport::Verdict::las
              ? "las"
              : (st.verdict == StabilityReport::Verdict::unstable
                     ? "unstable"
                     : "inconclusive");
      kv.add("verdict", verdict);
      kv.add("spectrum_max_real", st.spectrum_max_real);
      for (std::size_t k = 0; k < st.eigenvalues.size(); ++k) {
        kv.add("eigenvalue" + std::to_string(k) + "_re",
               st.eigenvalues[k].real());
        kv.add("eigenvalue" + std::to_string(k) + "_im",
               st.eigenvalues[k].imag());
      }
      kv.add("certificates_disagree",
             st.certificates_disagree ? "true" : "false");
      if (!st.note.empty()) kv.add("note", st.note);
    } else {
      kv.add("note", st.note.empty() ? "no endemic state: R0 <= 1" : st.note);
    }
    bundle.runs.push_back({"stability", true, ""});
  } catch (const std::exception& e) {
    kv.add("stability_status", "failed");
    kv.add("stability_error", e.what());
    bundle.runs.push_back({"stability", false, e.what()});
    bundle.all_ok = false;
  }
}

void do_sweep(const RunConfig& c, const ExecOptions& opt, Emitter& em,
              KeyValueReport& kv, ReportBundle& bundle) {
  const Grid grid =
      Grid::make(c.grid.da, c.grid.dt, c.grid.a_max, c.grid.t_end);
  const double i_v0 = c.init.i_v0.empty() ? 1e3 : c.init.i_v0.front();
  const double t_ref = std::min(10.0, c.grid.t_end / 2.0);

  struct SweepRow {
    bool ok = false;
    std::string error;
    double r0 = 0.0, r0sq = 0.0;
    double i_ref = 0.0, i_final = 0.0, iv_final = 0.0, sv_final = 0.0;
  };
  std::vector<SweepRow> rows(c.sweep_lambda_v.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t k = 0; k < c.sweep_lambda_v.size(); ++k)
    tasks.push_back([&, k] {
      try {
        ModelParams p = c.params;
        p.lambda_v = c.sweep_lambda_v[k];
        const R0Report rep = r0(p, c.grid.a_max);
        rows[k].r0 = rep.r0;
        rows[k].r0sq = rep.r0_squared;
        RunOptions ropt;
        ropt.sample_every = c.output.sample_stride;
        const SystemState init = initial_state(c, p, grid, i_v0);
        const Trajectory traj = run(p, grid, init, ropt);
        double best_dt = std::numeric_limits<double>::infinity();
        for (const TrajectorySample& s : traj.samples)
          if (std::abs(s.t - t_ref) < best_dt) {
            best_dt = std::abs(s.t - t_ref);
            rows[k].i_ref = s.i_l1;
          }
        rows[k].i_final = traj.samples.back().i_l1;
        rows[k].iv_final = traj.samples.back().i_v;
        rows[k].sv_final = traj.samples.back().s_v;
        rows[k].ok = true;
      } catch (const std::exception& e) {
        rows[k].error = e.what();
      }
    });
  run_parallel(tasks, opt.threads);

  CsvTable tab;
  tab.provenance = base_provenance(c, kv.entries[1].second);
  tab.provenance.push_back("i_v0: " + format_double(i_v0));
  tab.provenance.push_back("t_ref: " + format_double(t_ref));
  tab.columns = {"lambda_v_per_year", "r0",        "r0_squared",
                 "i_l1_at_t_ref",     "i_l1_final", "i_v_final",
                 "s_v_final",         "grew"};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::string name = "sweep" + std::to_string(k);
    bundle.runs.push_back({name, rows[k].ok, rows[k].error});
    kv.add(name + "_lambda_v", c.sweep_lambda_v[k]);
    kv.add(name + "_status", rows[k].ok ? "ok" : "failed");
    if (!rows[k].ok) {
      kv.add(name + "_error", rows[k].error);
      bundle.all_ok = false;
      continue;
    }
    kv.add(name + "_r0", rows[k].r0);
    tab.rows.push_back({c.sweep_lambda_v[k], rows[k].r0, rows[k].r0sq,
                        rows[k].i_ref, rows[k].i_final, rows[k].iv_final,
                        rows[k].sv_final,
                        rows[k].i_final > rows[k].i_ref ? 1.0 : 0.0});
  }
  em.write("sweep.csv", tab.to_string());

  if (c.output.svg && !tab.rows.empty()) {
    SvgSeries s;
    s.label = "r0";
    for (const auto& row : tab.rows) {
      s.x.push_back(row[0]);
      s.y.push_back(row[1]);
    }
    SvgStyle style;
    style.title = "Reproduction number across vector recruitment";
    style.x_label = "lambda_v (mosquitoes/year)";
    style.y_label = "r0";
    em.write("sweep_r0.svg", line_chart_svg({s}, style));
  }
}

void do_compare_ode(const RunConfig& c, Emitter& em, KeyValueReport& kv,
                    ReportBundle& bundle) {
  try {
    if (!all_constant(c.params))
      throw std::invalid_argument(
          "compare-ode mode requires constant parameters");
    const ConstParams cp = to_const(c.params);
    const Grid grid =
        Grid::make(c.grid.da, c.grid.dt, c.grid.a_max, c.grid.t_end);
    const double i_v0 = c.init.i_v0.empty() ? 1e3 : c.init.i_v0.front();

    RunOptions ropt;
    ropt.sample_every = c.output.sample_stride;
    const SystemState init = initial_state(c, c.params, grid, i_v0);
    const Trajectory pde = run(c.params, grid, init, ropt);

    OdeState ode0;
    ode0.s_h = l1(init.s, grid.da);
    ode0.i_h = l1(init.i, grid.da);
    ode0.r_h = l1(init.r, grid.da);
    ode0.s_v = init.s_v;
    ode0.i_v = init.i_v;
    const OdeTrajectory matched =
        ode_run(cp, ode0, grid.dt, grid.t_end, OdeMethod::matched_semi_implicit,
                c.output.sample_stride);
    const OdeTrajectory rk4 = ode_run(cp, ode0, grid.dt, grid.t_end,
                                      OdeMethod::rk4_reference,
                                      c.output.sample_stride);

    CsvTable tab;
    tab.provenance = base_provenance(c, kv.entries[1].second);
    tab.provenance.push_back(
        "human_values: pde columns are L1 aggregates, ode/rk4 columns are "
        "compartment scalars");
    tab.columns = {"t_years",  "pde_s_h",  "pde_i_h",  "pde_r_h",  "pde_s_v",
                   "pde_i_v",  "ode_s_h",  "ode_i_h",  "ode_r_h",  "ode_s_v",
                   "ode_i_v",  "rk4_s_h",  "rk4_i_h",  "rk4_r_h",  "rk4_s_v",
                   "rk4_i_v"};
    const std::size_t n = std::min(
        {pde.samples.size(), matched.samples.size(), rk4.samples.size()});
    double gap_matched = 0.0, gap_rk4 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const TrajectorySample& a = pde.samples[k];
      const OdeSample& b = matched.samples[k];
      const OdeSample& d = rk4.samples[k];
      tab.rows.push_back({a.t, a.s_l1, a.i_l1, a.r_l1, a.s_v, a.i_v, b.s_h,
                          b.i_h, b.r_h, b.s_v, b.i_v, d.s_h, d.i_h, d.r_h,
                          d.s_v, d.i_v});
      const double scale =
          std::max({1.0, a.s_l1, a.s_v, std::abs(a.i_v), std::abs(a.i_l1)});
      gap_matched = std::max(
          gap_matched,
          std::max({std::abs(a.s_l1 - b.s_h), std::abs(a.i_l1 - b.i_h),
                    std::abs(a.r_l1 - b.r_h), std::abs(a.s_v - b.s_v),
                    std::abs(a.i_v - b.i_v)}) /
              scale);
      gap_rk4 = std::max(
          gap_rk4, std::max({std::abs(a.s_l1 - d.s_h), std::abs(a.i_l1 - d.i_h),
                             std::abs(a.r_l1 - d.r_h), std::abs(a.s_v - d.s_v),
                             std::abs(a.i_v - d.i_v)}) /
                       scale);
    }
    em.write("compare_ode.csv", tab.to_string());
    kv.add("sup_rel_gap_matched", gap_matched);
    kv.add("sup_rel_gap_rk4", gap_rk4);
    kv.add("tail_bound", pde.tail_bound);
    bundle.runs.push_back({"compare-ode", true, ""});
  } catch (const std::exception& e) {
    kv.add("compare_ode_status", "failed");
    kv.add("compare_ode_error", e.what());
    bundle.runs.push_back({"compare-ode", false, e.what()});
    bundle.all_ok = false;
  }
}

} // namespace

ReportBundle execute(const RunConfig& config, const ExecOptions& opt) {
  ReportBundle bundle;
  bundle.out_dir =
      opt.out_dir.empty() ? config.output.directory : opt.out_dir;

  std::filesystem::create_directories(bundle.out_dir);
  Emitter em;
  em.dir = bundle.out_dir;

  const std::string serialized = serialize_config(config);
  const std::string hash = config_hash(serialized);

  KeyValueReport kv;
  kv.add("tool_version", std::string(kToolVersion));
  kv.add("config_hash", hash);
  kv.add("mode", mode_name(config.mode));

  em.write("config_used.cfg", serialized);

  switch (config.mode) {
    case RunMode::simulate:
      do_simulate(config, opt, em, kv, bundle);
      break;
    case RunMode::r0:
      do_r0(config, em, kv, bundle);
      break;
    case RunMode::equilibria:
      do_equilibria(config, em, kv, bundle);
      break;
    case RunMode::stability:
      do_stability(config, em, kv, bundle);
      break;
    case RunMode::sweep:
      do_sweep(config, opt, em, kv, bundle);
      break;
    case RunMode::compare_ode:
      do_compare_ode(config, em, kv, bundle);
      break;
  }

  kv.add("bundle_status", bundle.all_ok ? "ok" : "partial_failure");
  em.write("results.kv", kv.to_string());

  std::string manifest;
  for (const std::string& f : em.files) manifest += f + "\n";
  manifest += "manifest.txt\n";
  em.write("manifest.txt", manifest);
  bundle.files = em.files;
  return bundle;
}

} // namespace malsim

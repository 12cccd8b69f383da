#include "bonusproj/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bonusproj/config.hpp"
#include "bonusproj/reserves.hpp"
#include "bonusproj/valuation.hpp"
#include "bonusproj/zpath.hpp"

namespace bonusproj {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// for the text summary; full precision stays in the json and csv outputs
std::string fmt_h(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  if (dir != "." && !dir.empty()) fs::create_directories(dir);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file: " + path);
  return out;
}

nlohmann::ordered_json mode_record(const McResult& mc) {
  nlohmann::ordered_json j;
  j["vb"] = mc.vb.mean;
  j["vb_se"] = mc.vb.se;
  j["vb_rm2"] = mc.vb_rm2.mean;
  j["vb_rm2_se"] = mc.vb_rm2.se;
  j["balance"] = mc.balance.mean;
  j["balance_se"] = mc.balance.se;
  j["max_agg_err"] = mc.max_agg_err;
  j["min_pq"] = mc.min_pq;
  return j;
}

void export_scenario(const Precomputed& pre, const Scenario& sc, const std::string& dir) {
  auto out = open_out(dir, "scenario0.csv");
  out << "t,r,S1,D\n";
  for (int m = 0; m <= pre.fine.steps; ++m)
    out << fmt(pre.fine.node(m)) << ',' << fmt(sc.r[m]) << ',' << fmt(sc.S1[m]) << ','
        << fmt(sc.D[m]) << '\n';
}

void export_mode_paths(const Precomputed& pre, const ProjectionResult& res,
                       const std::string& tag, const std::string& dir, bool stateindep) {
  const int dim = pre.model.states(), M = pre.fine.steps;
  {
    auto out = open_out(dir, tag + "_pq.csv");
    out << "t";
    for (int k = 0; k < dim; ++k) out << ",pq_" << k;
    out << '\n';
    for (int m = 0; m <= M; ++m) {
      out << fmt(pre.fine.node(m));
      for (int k = 0; k < dim; ++k) {
        const double v = stateindep ? res.q_path[m] * pre.occ.at(k, m) : res.pq_path[k][m];
        out << ',' << fmt(v);
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir, tag + "_bonus_flow.csv");
    out << "t";
    for (int k = 0; k < dim; ++k) out << ",flow_" << k;
    out << '\n';
    for (int m = 0; m <= M; ++m) {
      out << fmt(pre.fine.node(m));
      for (int k = 0; k < dim; ++k) {
        const double pq = stateindep ? res.q_path[m] * pre.occ.at(k, m) : res.pq_path[k][m];
        out << ',' << fmt(pq * pre.g_dagger[k][m]);
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir, tag + "_account.csv");
    out << "t,U,r_delta,Q\n";
    for (int m = 0; m <= M; ++m)
      out << fmt(pre.fine.node(m)) << ',' << fmt(res.U_path[m]) << ',' << fmt(res.rdelta_path[m])
          << ',' << fmt(res.q_path[m]) << '\n';
  }
}

void export_densities(const Precomputed& pre, const std::string& dir) {
  {
    auto out = open_out(dir, "predetermined_density.csv");
    out << "s,rate\n";
    for (int m = 0; m <= pre.fine.steps; ++m)
      out << fmt(pre.fine.node(m)) << ',' << fmt(pre.a_predet[m]) << '\n';
  }
  {
    const int dim = pre.model.states();
    auto out = open_out(dir, "unit_bonus_density.csv");
    out << "s";
    for (int k = 0; k < dim; ++k) out << ",state_" << k;
    out << '\n';
    for (int m = 0; m <= pre.fine.steps; ++m) {
      out << fmt(pre.fine.node(m));
      for (int k = 0; k < dim; ++k) out << ',' << fmt(pre.bonus->density(0, k, m));
      out << '\n';
    }
  }
}

void export_oracle(const Precomputed& pre, const Scenario& sc, const ProjectionResult& ode,
                   const OracleResult& mc, const std::string& dir, std::ostream& out) {
  {
    auto f = open_out(dir, "oracle_pq.csv");
    f << "year,state,mc_mean,mc_se,ode\n";
    const int dim = pre.model.states();
    for (size_t y = 0; y < mc.years.size(); ++y) {
      const int node = pre.fine.index_of(mc.years[y]);
      for (int k = 0; k < dim; ++k)
        f << fmt(mc.years[y]) << ',' << k << ',' << fmt(mc.pq[k][y].mean) << ','
          << fmt(mc.pq[k][y].se) << ',' << fmt(ode.pq_path[k][node]) << '\n';
    }
  }
  {
    auto f = open_out(dir, "oracle_cashflows.csv");
    f << "year,guaranteed_mean,guaranteed_se,predetermined_mean,predetermined_se,"
         "model_predetermined,model_guaranteed\n";
    const TimeGrid& g = pre.fine;
    for (size_t i = 0; i < mc.guaranteed_buckets.size(); ++i) {
      const int a = g.index_of(double(i));
      const int b = std::min(g.steps, g.index_of(std::min(g.horizon, double(i + 1))));
      double predet = trapezoid(pre.a_predet, g.h, a, b);
      std::vector<double> tot(b - a + 1);
      for (int m = a; m <= b; ++m) tot[m - a] = pre.a_predet[m] + ode.ab_path[m];
      const double guar = trapezoid(tot, g.h);
      f << i << ',' << fmt(mc.guaranteed_buckets[i].mean) << ','
        << fmt(mc.guaranteed_buckets[i].se) << ',' << fmt(mc.predetermined_buckets[i].mean) << ','
        << fmt(mc.predetermined_buckets[i].se) << ',' << fmt(predet) << ',' << fmt(guar) << '\n';
    }
  }
  double d0 = 0.0;
  for (int m = 0; m <= pre.fine.steps; ++m) {
    const double w = (m == 0 || m == pre.fine.steps) ? 0.5 : 1.0;
    d0 += w * sc.D[m] * pre.a_predet[m];
  }
  d0 *= pre.fine.h;
  out << "oracle scenario 0: bonus value " << fmt_h(mc.vb.mean) << " (se " << fmt_h(mc.vb.se)
      << ") vs projection " << fmt_h(ode.vb_main) << "\n";
  out << "oracle scenario 0: predetermined value " << fmt_h(mc.predetermined.mean) << " (se "
      << fmt_h(mc.predetermined.se) << ") vs projection " << fmt_h(d0) << "\n";
}

}  // namespace

RunOutcome compute_run(const RunConfig& cfg) {
  RunOutcome res;
  ModelInputs in = build_inputs(cfg);
  res.premium_equivalence = in.premium_equivalence;
  res.premium = in.premium_value;
  if (in.premium_equivalence)
    res.premium = calibrate_premium(
        in.model, in.technical, [&](double x) { return build_payments(cfg, x); }, in.fine,
        in.projection.reserve_refine);
  PaymentSpec pay = build_payments(cfg, res.premium);

  res.pre = std::make_shared<const Precomputed>(precompute(
      in.model, in.technical, in.market, std::move(pay), in.esg, in.fine, in.projection));
  res.v_predetermined = value_predetermined(*res.pre);

  res.ran_general = cfg.mode != "state-independent";
  res.ran_stateindep = cfg.mode != "general";
  McOptions mco;
  mco.scenarios = cfg.scenarios;
  mco.seed = cfg.seed;
  mco.workers = cfg.workers;
  if (res.ran_general)
    res.general = value_bonus_general(*res.pre, ReserveSecondOrderGeneral(cfg.kappa), mco);
  if (res.ran_stateindep)
    res.stateindep =
        value_bonus_stateindep(*res.pre, PortfolioSecondOrderStateIndep(cfg.kappa), mco);
  return res;
}

int run_cli(const std::string& config_path, const RunFlags& flags, std::ostream& out,
            std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunConfig cfg = parse_config_file(config_path);
    if (flags.mode) cfg.mode = *flags.mode;
    if (flags.scenarios) cfg.scenarios = *flags.scenarios;
    if (flags.step) cfg.step = *flags.step;
    if (flags.seed) cfg.seed = *flags.seed;

    const std::vector<std::string> problems = validate_config(cfg);
    if (!problems.empty()) {
      err << "config invalid:\n";
      for (const auto& p : problems) err << "  " << p << '\n';
      return 1;
    }
    if (flags.validate_only) {
      out << "config valid: " << config_path << '\n';
      return 0;
    }

    const RunOutcome rc = compute_run(cfg);
    const Precomputed& pre = *rc.pre;
    const double v0 = rc.v_predetermined;
    const double premium = rc.premium;
    const bool run_gen = rc.ran_general;
    const bool run_si = rc.ran_stateindep;
    const McResult& gen = rc.general;
    const McResult& si = rc.stateindep;
    const ReserveSecondOrderGeneral gstrat(cfg.kappa);
    const PortfolioSecondOrderStateIndep sstrat(cfg.kappa);

    if (flags.export_paths || flags.run_oracle) {
      const Scenario sc0 = simulate_scenario(pre.esg, pre.fine, cfg.seed, 0);
      if (flags.export_paths) {
        export_scenario(pre, sc0, cfg.output_dir);
        export_densities(pre, cfg.output_dir);
        ProjectionOptions popt;
        popt.keep_paths = true;
        if (run_gen)
          export_mode_paths(pre, project_general(pre, sc0, gstrat, popt), "general",
                            cfg.output_dir, false);
        if (run_si)
          export_mode_paths(pre, project_stateindep(pre, sc0, sstrat, popt), "stateindep",
                            cfg.output_dir, true);
      }
      if (flags.run_oracle) {
        ProjectionOptions popt;
        popt.keep_paths = true;
        popt.keep_controls = true;
        const LiftedStateIndep lifted(sstrat);
        const GeneralStrategy& strat =
            run_gen ? static_cast<const GeneralStrategy&>(gstrat) : lifted;
        const ProjectionResult ode = project_general(pre, sc0, strat, popt);
        OracleOptions oopt;
        oopt.workers = cfg.workers;
        const OracleResult mc = z_path_oracle(pre, sc0, controls_from_projection(ode), oopt);
        export_oracle(pre, sc0, ode, mc, cfg.output_dir, out);
      }
    }

    nlohmann::ordered_json j;
    j["mode"] = cfg.mode;
    j["scenarios"] = cfg.scenarios;
    j["step"] = cfg.step;
    j["seed"] = cfg.seed;
    j["premium"] = premium;
    j["v_predetermined"] = v0;
    if (run_gen) j["general"] = mode_record(gen);
    if (run_si) j["state_independent"] = mode_record(si);
    if (run_gen && run_si && gen.vb.mean != 0.0)
      j["relative_difference"] = (gen.vb.mean - si.vb.mean) / gen.vb.mean;
    nlohmann::ordered_json diag;
    diag["occupation_clip_events"] = pre.occ.clip_events;
    diag["bonus_grid_clip_events"] = pre.bonus->clip_events;
    diag["curve_clamp_events"] = pre.tables->clamp_events();
    diag["bonus_grid_bytes"] = pre.bonus->bytes();
    j["diagnostics"] = diag;
    {
      auto f = open_out(cfg.output_dir, "summary.json");
      f << j.dump(2) << '\n';
    }

    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string text;
    text += "mode " + cfg.mode + ", " + std::to_string(cfg.scenarios) + " scenarios, step " +
            fmt_h(cfg.step) + ", seed " + std::to_string(cfg.seed) + "\n";
    text += "premium rate " + fmt_h(premium) + (rc.premium_equivalence ? " (equivalence)" : "") +
            "\n";
    text += "V_predetermined(0) = " + fmt_h(v0) + "\n";
    auto mode_text = [&](const std::string& name, const McResult& mc) {
      text += name + ": V_bonus(0) = " + fmt_h(mc.vb.mean) + " (se " + fmt_h(mc.vb.se) + ")\n";
      text += "  allocation-weighted check: " + fmt_h(mc.vb_rm2.mean) + " (se " +
              fmt_h(mc.vb_rm2.se) + ")\n";
      text += "  terminal balance D(n)U(n): " + fmt_h(mc.balance.mean) + " (se " +
              fmt_h(mc.balance.se) + ")\n";
    };
    if (run_gen) mode_text("general", gen);
    if (run_si) mode_text("state-independent", si);
    if (run_gen && run_si && gen.vb.mean != 0.0)
      text += "relative difference = " + fmt_h((gen.vb.mean - si.vb.mean) / gen.vb.mean) + "\n";
    char rt[32];
    std::snprintf(rt, sizeof rt, "%.2f", runtime);
    text += "runtime " + std::string(rt) + " s\n";

    {
      auto f = open_out(cfg.output_dir, "summary.txt");
      f << text;
    }
    out << text;
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace bonusproj

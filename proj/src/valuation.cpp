#include "bonusproj/valuation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace bonusproj {

double value_predetermined(const Precomputed& pre) {
  const TimeGrid& g = pre.fine;
  double acc = 0.0;
  for (int m = 0; m <= g.steps; ++m) {
    const double w = (m == 0 || m == g.steps) ? 0.5 : 1.0;
    acc += w * bond_price(pre.esg, g.node(m), pre.esg.r0) * pre.a_predet[m];
  }
  return acc * g.h;
}

MonteCarloStats mc_stats(const std::vector<double>& samples) {
  MonteCarloStats s;
  s.n = int(samples.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / s.n;
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : samples) {
    const double d = x - s.mean;
    ss += d * d;
  }
  s.se = std::sqrt(ss / (s.n - 1)) / std::sqrt(double(s.n));
  return s;
}

namespace {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

// Runs fn(index) for every scenario index on a worker pool. Results must go
// into per-index slots so the reduction order never depends on scheduling.
template <typename Fn>
void parallel_for_scenarios(int n, int workers, Fn&& fn) {
  workers = std::min(resolve_workers(workers), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

template <typename Project>
McResult run_scenarios(const Precomputed& pre, const McOptions& opt, Project&& project) {
  if (opt.scenarios <= 0) throw ConfigError("scenario count must be positive");
  McResult out;
  out.per_scenario.assign(opt.scenarios, ScenarioEstimate{});
  parallel_for_scenarios(opt.scenarios, opt.workers, [&](int i) {
    const Scenario sc = simulate_scenario(pre.esg, pre.fine, opt.seed, i);
    const ProjectionResult r = project(sc);
    ScenarioEstimate& e = out.per_scenario[i];
    e.vb_main = r.vb_main;
    e.vb_rm2 = r.vb_rm2;
    e.final_DU = r.final_DU;
    e.max_agg_err = r.max_agg_err;
    e.min_pq = r.min_pq;
  });

  std::vector<double> vb(opt.scenarios), rm2(opt.scenarios), du(opt.scenarios);
  for (int i = 0; i < opt.scenarios; ++i) {
    const ScenarioEstimate& e = out.per_scenario[i];
    vb[i] = e.vb_main;
    rm2[i] = e.vb_rm2;
    du[i] = e.final_DU;
    out.max_agg_err = std::max(out.max_agg_err, e.max_agg_err);
    out.min_pq = std::min(out.min_pq, e.min_pq);
  }
  out.vb = mc_stats(vb);
  out.vb_rm2 = mc_stats(rm2);
  out.balance = mc_stats(du);
  return out;
}

}  // namespace

McResult value_bonus_general(const Precomputed& pre, const GeneralStrategy& strategy,
                             const McOptions& opt) {
  return run_scenarios(pre, opt,
                       [&](const Scenario& sc) { return project_general(pre, sc, strategy); });
}

McResult value_bonus_stateindep(const Precomputed& pre, const StateIndepStrategy& strategy,
                                const McOptions& opt) {
  return run_scenarios(pre, opt,
                       [&](const Scenario& sc) { return project_stateindep(pre, sc, strategy); });
}

std::vector<DiscountCheckRow> discount_factor_check(const VasicekParams& esg, const TimeGrid& fine,
                                                    const std::vector<double>& horizons,
                                                    const McOptions& opt) {
  if (opt.scenarios <= 0) throw ConfigError("scenario count must be positive");
  std::vector<int> nodes;
  nodes.reserve(horizons.size());
  for (double T : horizons) nodes.push_back(fine.index_of(T));

  std::vector<std::vector<double>> samples(horizons.size(),
                                           std::vector<double>(opt.scenarios, 0.0));
  parallel_for_scenarios(opt.scenarios, opt.workers, [&](int i) {
    const Scenario sc = simulate_scenario(esg, fine, opt.seed, i);
    for (size_t k = 0; k < nodes.size(); ++k) samples[k][i] = sc.D[nodes[k]];
  });

  std::vector<DiscountCheckRow> rows(horizons.size());
  for (size_t k = 0; k < horizons.size(); ++k) {
    const MonteCarloStats s = mc_stats(samples[k]);
    rows[k].horizon = horizons[k];
    rows[k].mean = s.mean;
    rows[k].se = s.se;
    rows[k].analytic = bond_price(esg, horizons[k], esg.r0);
  }
  return rows;
}

}  // namespace bonusproj

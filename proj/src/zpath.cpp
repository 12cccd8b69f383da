#include "bonusproj/zpath.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace bonusproj {

ControlSet controls_from_projection(const ProjectionResult& res) {
  if (res.ctrl_cp.empty()) throw ConfigError("projection was run without keeping controls");
  return ControlSet{res.ctrl_cp, res.ctrl_cr, res.ctrl_f};
}

namespace {

double phi1(double x) { return std::fabs(x) < 1e-12 ? 1.0 : std::expm1(x) / x; }

// Everything a path touches per step, evaluated once up front.
struct OracleTables {
  int dim = 0, steps = 0, years = 0, buckets = 0;
  std::vector<int> year_node;                     // fine node of each recording time
  std::vector<std::vector<double>> predet_soj;    // [state][step] at midpoints
  std::vector<std::vector<double>> bonus_soj;     // [state][step]
  std::vector<std::vector<double>> predet_jump;   // [from*dim+to][step], value at step end
  std::vector<std::vector<double>> bonus_jump;    // [from*dim+to][step]
  std::vector<char> jump_wscaled;                 // conversion-factor scaling per move
  std::vector<double> d_mid;                      // scenario discount at midpoints
};

OracleTables build_tables(const Precomputed& pre, const Scenario& sc) {
  const StateModel& sm = pre.model;
  const TimeGrid& g = pre.fine;
  OracleTables tb;
  tb.dim = sm.states();
  tb.steps = g.steps;
  tb.years = int(std::floor(g.horizon + 1e-9));
  tb.buckets = int(std::ceil(g.horizon - 1e-9));
  for (int y = 0; y <= tb.years; ++y) tb.year_node.push_back(g.index_of(double(y)));

  std::vector<TimeFn> pos_sojourn(sm.J);
  for (int j = 0; j < sm.J; ++j) pos_sojourn[j] = pre.pay.sojourn_at(j).positive_part();

  tb.predet_soj.assign(tb.dim, std::vector<double>(tb.steps, 0.0));
  tb.bonus_soj.assign(tb.dim, std::vector<double>(tb.steps, 0.0));
  tb.d_mid.assign(tb.steps, 0.0);
  for (int m = 0; m < tb.steps; ++m) {
    const double tm = g.node(m) + 0.5 * g.h;
    tb.d_mid[m] = 0.5 * (sc.D[m] + sc.D[m + 1]);
    for (int k = 0; k < tb.dim; ++k) {
      if (k == sm.surrender() || k == sm.fp_surrender()) continue;
      const int j = sm.premium_state(k) ? k : sm.base(k);
      tb.predet_soj[k][m] =
          sm.premium_state(k) ? pre.pay.sojourn_at(j)(tm) : pos_sojourn[j](tm);
      tb.bonus_soj[k][m] = pre.pay.bonus_sojourn_at(j)(tm);
    }
  }

  tb.predet_jump.assign(tb.dim * tb.dim, {});
  tb.bonus_jump.assign(tb.dim * tb.dim, {});
  tb.jump_wscaled.assign(tb.dim * tb.dim, 0);
  auto fill = [&](std::vector<std::vector<double>>& table, int from, int to, const TimeFn& fn,
                  bool add) {
    auto& col = table[from * tb.dim + to];
    if (col.empty()) col.assign(tb.steps, 0.0);
    for (int m = 0; m < tb.steps; ++m) {
      const double v = fn(g.node(m + 1));
      col[m] = add ? col[m] + v : v;
    }
  };
  for (const auto& [key, fn] : pre.pay.lump) {
    fill(tb.predet_jump, key.first, key.second, fn, true);
    fill(tb.predet_jump, sm.fp(key.first), sm.fp(key.second), fn.positive_part(), true);
    tb.jump_wscaled[sm.fp(key.first) * tb.dim + sm.fp(key.second)] = 1;
  }
  fill(tb.predet_jump, 0, sm.surrender(), pre.pay.surrender_lump, true);
  {
    const ReserveGrid& benefit = pre.reserves.benefit;
    auto& col = tb.predet_jump[sm.fp_start() * tb.dim + sm.fp_surrender()];
    if (col.empty()) col.assign(tb.steps, 0.0);
    for (int m = 0; m < tb.steps; ++m) col[m] += benefit.at(0, g.node(m + 1));
    tb.jump_wscaled[sm.fp_start() * tb.dim + sm.fp_surrender()] = 1;
  }
  for (const auto& [key, fn] : pre.pay.bonus_lump) {
    fill(tb.bonus_jump, key.first, key.second, fn, true);
    fill(tb.bonus_jump, sm.fp(key.first), sm.fp(key.second), fn, true);
  }
  fill(tb.bonus_jump, 0, sm.surrender(), pre.pay.bonus_surrender_lump, true);
  fill(tb.bonus_jump, sm.fp_start(), sm.fp_surrender(), pre.pay.bonus_surrender_lump, true);
  return tb;
}

struct BlockSums {
  std::vector<double> sum, sumsq;
  void init(size_t cells) {
    sum.assign(cells, 0.0);
    sumsq.assign(cells, 0.0);
  }
  void add(size_t cell, double x) {
    sum[cell] += x;
    sumsq[cell] += x * x;
  }
};

OracleEstimate finish(double sum, double sumsq, int n) {
  OracleEstimate e;
  e.mean = sum / n;
  if (n > 1) {
    const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
    e.se = std::sqrt(var / n);
  }
  return e;
}

}  // namespace

OracleResult z_path_oracle(const Precomputed& pre, const Scenario& sc, const ControlSet& ctrl,
                           const OracleOptions& opt) {
  const StateModel& sm = pre.model;
  const TimeGrid& g = pre.fine;
  if (sc.grid.steps != g.steps) throw ConfigError("scenario grid does not match the projection grid");
  if (opt.paths < 1) throw ConfigError("oracle path count must be positive");
  if (int(ctrl.cp.size()) != sm.states() || ctrl.cp.empty() ||
      int(ctrl.cp[0].size()) != g.steps)
    throw ConfigError("control set does not match the model and grid");

  const OracleTables tb = build_tables(pre, sc);
  const int dim = tb.dim, M = tb.steps, Y = tb.years, B = tb.buckets;
  const double h = g.h;

  // exact one-step growth of dQ = f Q + src under the frozen controls
  std::vector<std::vector<double>> q_grow(dim, std::vector<double>(M)),
      q_src_h(dim, std::vector<double>(M));
  for (int z = 0; z < dim; ++z)
    for (int m = 0; m < M; ++m) {
      const double fh = ctrl.f[z][m] * h;
      q_grow[z][m] = std::exp(fh);
      q_src_h[z][m] = h * phi1(fh);
    }

  // cell layout: pq [state][year], then per-year guaranteed and predetermined
  // buckets, then the two discounted scalars
  const size_t pq0 = 0;
  const size_t ag0 = pq0 + size_t(dim) * (Y + 1);
  const size_t pd0 = ag0 + B;
  const size_t vb_cell = pd0 + B;
  const size_t pred_cell = vb_cell + 1;
  const size_t cells = pred_cell + 1;

  const int block = std::max(1, opt.block);
  const int n_blocks = (opt.paths + block - 1) / block;
  std::vector<BlockSums> partials(n_blocks);

  auto run_block = [&](int b) {
    BlockSums& bs = partials[b];
    bs.init(cells);
    std::vector<double> ag_local(B), pd_local(B);
    const int lo = b * block, hi = std::min(opt.paths, (b + 1) * block);
    for (int path = lo; path < hi; ++path) {
      std::mt19937_64 rng(scenario_seed(opt.seed, path));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      int z = pre.cfg.z0;
      double w = 1.0, Q = pre.cfg.q0, vb = 0.0, pred = 0.0;
      std::fill(ag_local.begin(), ag_local.end(), 0.0);
      std::fill(pd_local.begin(), pd_local.end(), 0.0);
      int next_year = 0;
      for (int m = 0; m < M; ++m) {
        if (next_year <= Y && tb.year_node[next_year] == m) {
          bs.add(pq0 + size_t(z) * (Y + 1) + next_year, Q);
          ++next_year;
        }
        const int bucket = std::min(B - 1, int(g.node(m) + 0.5 * h));
        const double soj = (sm.premium_state(z) ? 1.0 : w) * tb.predet_soj[z][m] * h;
        const double bon = Q * tb.bonus_soj[z][m] * h;
        pd_local[bucket] += soj;
        ag_local[bucket] += soj + bon;
        pred += tb.d_mid[m] * soj;
        vb += tb.d_mid[m] * bon;

        const double src = ctrl.cp[z][m] + ctrl.cr[z][m] * w;
        Q = Q * q_grow[z][m] + src * q_src_h[z][m];

        const double* gen = pre.market_gens.mid[m].data() + size_t(z) * dim;
        double lam = 0.0;
        for (int l = 0; l < dim; ++l)
          if (l != z && gen[l] > 0.0) lam += gen[l];
        const double u = unif(rng);
        int to = -1;
        if (lam > 0.0) {
          // exact stay probability for the stage generator; destinations split
          // in proportion within the jump mass
          const double p_jump = -std::expm1(-lam * h);
          double acc = 0.0;
          for (int l = 0; l < dim && u < p_jump; ++l) {
            if (l == z || gen[l] <= 0.0) continue;
            acc += gen[l] / lam * p_jump;
            if (u < acc) {
              to = l;
              break;
            }
          }
        }
        if (to >= 0) {
          const double t_end = g.node(m + 1);
          const int jb = std::min(B - 1, std::max(0, int(t_end - 1e-12)));
          const auto& pj = tb.predet_jump[z * dim + to];
          if (!pj.empty()) {
            const double v = (tb.jump_wscaled[z * dim + to] ? w : 1.0) * pj[m];
            pd_local[jb] += v;
            ag_local[jb] += v;
            pred += sc.D[m + 1] * v;
          }
          const auto& bj = tb.bonus_jump[z * dim + to];
          if (!bj.empty()) {
            const double v = Q * bj[m];
            ag_local[jb] += v;
            vb += sc.D[m + 1] * v;
          }
          if (z == 0 && to == sm.fp_start()) w = pre.reserves.rho_at(t_end);
          z = to;
        }
      }
      if (next_year <= Y && tb.year_node[next_year] == M)
        bs.add(pq0 + size_t(z) * (Y + 1) + next_year, Q);
      for (int i = 0; i < B; ++i) {
        bs.add(ag0 + i, ag_local[i]);
        bs.add(pd0 + i, pd_local[i]);
      }
      bs.add(vb_cell, vb);
      bs.add(pred_cell, pred);
    }
  };

  int workers = opt.workers > 0 ? opt.workers : int(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n_blocks));
  if (workers <= 1) {
    for (int b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&]() {
      for (;;) {
        const int b = next.fetch_add(1);
        if (b >= n_blocks) return;
        try {
          run_block(b);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<double> sum(cells, 0.0), sumsq(cells, 0.0);
  for (int b = 0; b < n_blocks; ++b)
    for (size_t c = 0; c < cells; ++c) {
      sum[c] += partials[b].sum[c];
      sumsq[c] += partials[b].sumsq[c];
    }

  OracleResult out;
  for (int y = 0; y <= Y; ++y) out.years.push_back(double(y));
  out.pq.assign(dim, std::vector<OracleEstimate>(Y + 1));
  for (int k = 0; k < dim; ++k)
    for (int y = 0; y <= Y; ++y) {
      const size_t c = pq0 + size_t(k) * (Y + 1) + y;
      out.pq[k][y] = finish(sum[c], sumsq[c], opt.paths);
    }
  out.guaranteed_buckets.resize(B);
  out.predetermined_buckets.resize(B);
  for (int i = 0; i < B; ++i) {
    out.guaranteed_buckets[i] = finish(sum[ag0 + i], sumsq[ag0 + i], opt.paths);
    out.predetermined_buckets[i] = finish(sum[pd0 + i], sumsq[pd0 + i], opt.paths);
  }
  out.vb = finish(sum[vb_cell], sumsq[vb_cell], opt.paths);
  out.predetermined = finish(sum[pred_cell], sumsq[pred_cell], opt.paths);
  return out;
}

}  // namespace bonusproj

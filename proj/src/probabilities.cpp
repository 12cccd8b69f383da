#include "bonusproj/probabilities.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bonusproj/rk4.hpp"

namespace bonusproj {

namespace {

struct ClipStats {
  long events = 0;
  double worst = 0.0;
};

void clip_unit(std::vector<double>& x, ClipStats& st) {
  for (double& v : x) {
    if (v < 0.0) {
      st.worst = std::max(st.worst, -v);
      if (v < -1e-15) ++st.events;
      v = 0.0;
    } else if (v > 1.0) {
      st.worst = std::max(st.worst, v - 1.0);
      if (v > 1.0 + 1e-15) ++st.events;
      v = 1.0;
    }
  }
  if (st.worst > 1e-6)
    throw NumericError("occupation probability left [0,1] by " + std::to_string(st.worst) +
                       "; reduce the step size");
}

}  // namespace

OccupationGrid occupation_probabilities(const StateModel& sm, const TransitionRateSet& market,
                                        int z0, const std::function<double(double)>& rho,
                                        const TimeGrid& fine) {
  const int dim = sm.states();
  if (z0 < 0 || z0 >= dim) throw ConfigError("initial state out of range");
  OccupationGrid occ;
  occ.half = fine.refined(2);
  occ.z0 = z0;
  occ.p.assign(dim, std::vector<double>(occ.half.steps + 1, 0.0));
  occ.p_rho.assign(dim, std::vector<double>(occ.half.steps + 1, 0.0));

  const bool z0_free = z0 > sm.surrender();
  const int conv_to = sm.fp_start();
  const auto moves = market.support();

  std::vector<double> x(2 * dim, 0.0);
  x[z0] = 1.0;
  x[dim + z0] = 1.0;
  Rk4 rk(2 * dim);
  ClipStats st;

  std::vector<double> mu(dim * dim);
  auto deriv = [&](double t, double ref, const std::vector<double>& y, std::vector<double>& dy) {
    std::fill(mu.begin(), mu.end(), 0.0);
    for (const auto& [from, to] : moves) mu[from * dim + to] = market.rate(from, to, t, ref);
    for (int k = 0; k < dim; ++k) {
      double acc = 0.0;
      for (int l = 0; l < dim; ++l) {
        if (l == k) continue;
        acc += y[l] * mu[l * dim + k] - y[k] * mu[k * dim + l];
      }
      dy[k] = acc;
    }
    if (z0_free) {
      for (int k = 0; k < dim; ++k) dy[dim + k] = dy[k];
      return;
    }
    for (int k = 0; k <= sm.surrender(); ++k) dy[dim + k] = dy[k];
    for (int k = sm.fp_start(); k < dim; ++k) {
      double acc = k == conv_to ? y[0] * mu[0 * dim + conv_to] * rho(t) : 0.0;
      for (int l = sm.fp_start(); l < dim; ++l) {
        if (l == k) continue;
        acc += y[dim + l] * mu[l * dim + k];
      }
      for (int l = 0; l < dim; ++l)
        if (l != k) acc -= y[dim + k] * mu[k * dim + l];
      dy[dim + k] = acc;
    }
  };

  auto store = [&](int node) {
    for (int k = 0; k < dim; ++k) {
      occ.p[k][node] = x[k];
      occ.p_rho[k][node] = z0_free ? x[k] : x[dim + k];
    }
  };
  store(0);
  const double hh = occ.half.h;
  for (int m = 0; m < occ.half.steps; ++m) {
    const double a = occ.half.node(m);
    const double ref = a + 0.5 * hh;
    rk.step([&](double t, const std::vector<double>& y, std::vector<double>& dy) { deriv(t, ref, y, dy); },
            a, hh, x);
    clip_unit(x, st);
    store(m + 1);
  }
  occ.clip_events = st.events;
  occ.worst_undershoot = st.worst;
  return occ;
}

ForwardMatrix::ForwardMatrix(int dim, int anchor_node)
    : dim_(dim),
      node_(anchor_node),
      p_(dim * dim, 0.0),
      k1_(dim * dim),
      k2_(dim * dim),
      k3_(dim * dim),
      k4_(dim * dim),
      tmp_(dim * dim) {
  for (int i = 0; i < dim; ++i) p_[i * dim + i] = 1.0;
}

void ForwardMatrix::deriv(const std::vector<double>& p, const std::vector<double>& gen,
                          std::vector<double>& out) const {
  for (int i = 0; i < dim_; ++i) {
    const double* row = p.data() + i * dim_;
    double* orow = out.data() + i * dim_;
    for (int k = 0; k < dim_; ++k) {
      double acc = 0.0;
      for (int l = 0; l < dim_; ++l) acc += row[l] * gen[l * dim_ + k];
      orow[k] = acc;
    }
  }
}

void ForwardMatrix::step(const GeneratorTable& tab) {
  const double h = tab.h;
  const auto& gl = tab.left[node_];
  const auto& gm = tab.mid[node_];
  const auto& gr = tab.right[node_];
  deriv(p_, gl, k1_);
  for (size_t i = 0; i < p_.size(); ++i) tmp_[i] = p_[i] + 0.5 * h * k1_[i];
  deriv(tmp_, gm, k2_);
  for (size_t i = 0; i < p_.size(); ++i) tmp_[i] = p_[i] + 0.5 * h * k2_[i];
  deriv(tmp_, gm, k3_);
  for (size_t i = 0; i < p_.size(); ++i) tmp_[i] = p_[i] + h * k3_[i];
  deriv(tmp_, gr, k4_);
  for (size_t i = 0; i < p_.size(); ++i)
    p_[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  for (double& v : p_) {
    if (v < 0.0) {
      worst_undershoot = std::max(worst_undershoot, -v);
      if (v < -1e-15) ++clip_events;
      v = 0.0;
    } else if (v > 1.0) {
      worst_undershoot = std::max(worst_undershoot, v - 1.0);
      if (v > 1.0 + 1e-15) ++clip_events;
      v = 1.0;
    }
  }
  if (worst_undershoot > 1e-6)
    throw NumericError("transition probability left [0,1] by " + std::to_string(worst_undershoot) +
                       "; reduce the step size");
  ++node_;
}

}  // namespace bonusproj

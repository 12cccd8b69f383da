#include "bonusproj/grids.hpp"

#include <algorithm>
#include <cmath>

namespace bonusproj {

namespace {
constexpr double kTimeTol = 1e-9;
}

// ===== TimeGrid =====

TimeGrid TimeGrid::make(double horizon, double h) {
  if (horizon <= 0 || h <= 0) throw ConfigError("grid: horizon and step must be positive");
  double ratio = horizon / h;
  int steps = static_cast<int>(std::lround(ratio));
  if (steps < 1 || std::fabs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("grid: step does not divide the horizon");
  return TimeGrid{horizon, h, steps};
}

int TimeGrid::index_of(double t) const {
  int m = static_cast<int>(std::lround(t / h));
  if (m < 0 || m > steps || std::fabs(t - m * h) > kTimeTol)
    throw ConfigError("grid: time is not a grid node");
  return m;
}

// ===== TimeFn =====

TimeFn TimeFn::constant(double v) {
  TimeFn f;
  if (v != 0.0) f.append(-1e300, 1e300, [v](double) { return v; });
  return f;
}

TimeFn TimeFn::analytic(Fn f, double lo, double hi) {
  TimeFn out;
  out.append(lo, hi, std::move(f));
  return out;
}

void TimeFn::append(double lo, double hi, Fn f) {
  if (hi <= lo) return;
  if (!pieces_.empty() && lo < pieces_.back().hi - kTimeTol)
    throw ConfigError("time function: pieces overlap");
  pieces_.push_back(Piece{lo, hi, std::move(f)});
}

const TimeFn::Piece* TimeFn::containing(double t) const {
  for (const auto& p : pieces_)
    if (t >= p.lo && t < p.hi) return &p;
  return nullptr;
}

double TimeFn::operator()(double t) const {
  if (pieces_.empty()) return 0.0;
  double span_lo = pieces_.front().lo;
  double span_hi = pieces_.back().hi;
  const Piece* left = nullptr;   // piece ending at t
  const Piece* right = nullptr;  // piece starting at t
  bool on_break = false;
  for (const auto& p : pieces_) {
    if (std::fabs(t - p.lo) <= kTimeTol) {
      right = &p;
      on_break = true;
    }
    if (std::fabs(t - p.hi) <= kTimeTol) {
      left = &p;
      on_break = true;
    }
  }
  if (!on_break) {
    const Piece* p = containing(t);
    return p ? p->f(t) : 0.0;
  }
  double lv = left ? left->f(t) : 0.0;
  double rv = right ? right->f(t) : 0.0;
  if (t <= span_lo + kTimeTol) return rv;  // support starts here, no left limit
  if (t >= span_hi - kTimeTol) return lv;  // support ends here, no right limit
  return 0.5 * (lv + rv);
}

double TimeFn::operator()(double t, double ref) const {
  const Piece* p = containing(ref);
  return p ? p->f(t) : 0.0;
}

TimeFn TimeFn::plus(const TimeFn& other) const {
  if (pieces_.empty()) return other;
  if (other.pieces_.empty()) return *this;
  std::vector<double> cuts;
  for (const auto& p : pieces_) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  for (const auto& p : other.pieces_) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::fabs(a - b) <= kTimeTol; }),
             cuts.end());
  TimeFn out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    double mid = 0.5 * (lo + hi);
    const Piece* a = containing(mid);
    const Piece* b = other.containing(mid);
    if (!a && !b) continue;
    Fn fa = a ? a->f : Fn();
    Fn fb = b ? b->f : Fn();
    out.append(lo, hi, [fa, fb](double t) {
      double v = 0.0;
      if (fa) v += fa(t);
      if (fb) v += fb(t);
      return v;
    });
  }
  return out;
}

TimeFn TimeFn::scaled(double k) const {
  TimeFn out;
  if (k == 0.0) return out;
  for (const auto& p : pieces_) {
    Fn f = p.f;
    out.append(p.lo, p.hi, [f, k](double t) { return k * f(t); });
  }
  return out;
}

TimeFn TimeFn::positive_part() const {
  TimeFn out;
  for (const auto& p : pieces_) {
    Fn f = p.f;
    out.append(p.lo, p.hi, [f](double t) { return std::max(0.0, f(t)); });
  }
  return out;
}

std::vector<double> TimeFn::breakpoints() const {
  std::vector<double> out;
  if (pieces_.empty()) return out;
  double span_lo = pieces_.front().lo;
  double span_hi = pieces_.back().hi;
  for (const auto& p : pieces_) {
    for (double c : {p.lo, p.hi})
      if (c > span_lo + kTimeTol && c < span_hi - kTimeTol && c > -1e290 && c < 1e290)
        out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::fabs(a - b) <= kTimeTol; }),
            out.end());
  return out;
}

// ===== grid helpers =====

std::vector<double> sample_nodes(const TimeFn& f, const TimeGrid& g) {
  std::vector<double> out(g.nodes());
  for (int m = 0; m < g.nodes(); ++m) out[m] = f(g.node(m));
  return out;
}

double trapezoid(const std::vector<double>& vals, double h, int a, int b) {
  if (b <= a) return 0.0;
  double s = 0.5 * (vals[a] + vals[b]);
  for (int m = a + 1; m < b; ++m) s += vals[m];
  return s * h;
}

double trapezoid(const std::vector<double>& vals, double h) {
  return trapezoid(vals, h, 0, static_cast<int>(vals.size()) - 1);
}

double lerp_nodes(const std::vector<double>& vals, const TimeGrid& g, double t) {
  if (t <= 0.0) return vals.front();
  if (t >= g.horizon) return vals.back();
  double x = t / g.h;
  int m = static_cast<int>(x);
  if (m >= g.steps) return vals.back();
  double w = x - m;
  return vals[m] * (1.0 - w) + vals[m + 1] * w;
}

}  // namespace bonusproj

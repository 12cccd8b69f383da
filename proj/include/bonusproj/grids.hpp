#ifndef BONUSPROJ_GRIDS_HPP
#define BONUSPROJ_GRIDS_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bonusproj {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Uniform grid on [0, horizon], node m at m*h.
struct TimeGrid {
  double horizon = 0.0;
  double h = 0.0;
  int steps = 0;  // nodes() = steps + 1

  static TimeGrid make(double horizon, double h);
  TimeGrid refined(int factor) const { return TimeGrid{horizon, h / factor, steps * factor}; }
  int nodes() const { return steps + 1; }
  double node(int m) const { return m * h; }
  int index_of(double t) const;  // nearest node, throws if t is off-grid
};

// Scalar function of time assembled from analytic pieces on half-open
// intervals [lo, hi).  eval(t) averages the one-sided limits when t lands
// exactly on an interior breakpoint, which keeps trapezoid sums second order
// across payment jumps.  eval(t, ref) selects the piece containing ref and
// evaluates its formula at t; the ODE steppers pass the midpoint of the
// current step so a stage on a breakpoint sees the branch of the step it
// belongs to.
class TimeFn {
 public:
  using Fn = std::function<double(double)>;

  TimeFn() = default;

  static TimeFn constant(double v);
  static TimeFn analytic(Fn f, double lo, double hi);

  void append(double lo, double hi, Fn f);  // pieces must arrive left to right
  bool empty() const { return pieces_.empty(); }

  double operator()(double t) const;
  double operator()(double t, double ref) const;

  TimeFn plus(const TimeFn& other) const;
  TimeFn scaled(double k) const;
  TimeFn positive_part() const;

  std::vector<double> breakpoints() const;  // interior jump locations

 private:
  struct Piece {
    double lo, hi;
    Fn f;
  };
  std::vector<Piece> pieces_;

  const Piece* containing(double t) const;
};

// Node samples of f on a grid (averaged limits at breakpoints).
std::vector<double> sample_nodes(const TimeFn& f, const TimeGrid& g);

// Trapezoid of node values over [node a, node b].
double trapezoid(const std::vector<double>& vals, double h, int a, int b);
double trapezoid(const std::vector<double>& vals, double h);

// Piecewise-linear interpolation of node values at t.
double lerp_nodes(const std::vector<double>& vals, const TimeGrid& g, double t);

}  // namespace bonusproj

#endif

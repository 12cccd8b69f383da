#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bonusproj/runner.hpp"

namespace py = pybind11;

namespace {

py::dict stats_dict(const bonusproj::MonteCarloStats& s) {
  py::dict d;
  d["mean"] = s.mean;
  d["se"] = s.se;
  d["n"] = s.n;
  return d;
}

py::dict mode_dict(const bonusproj::McResult& mc) {
  py::dict d;
  d["vb"] = stats_dict(mc.vb);
  d["vb_rm2"] = stats_dict(mc.vb_rm2);
  d["balance"] = stats_dict(mc.balance);
  d["max_agg_err"] = mc.max_agg_err;
  d["min_pq"] = mc.min_pq;
  return d;
}

}  // namespace

PYBIND11_MODULE(bonusproj, m) {
  m.doc() = "Market valuation of with-profit bonus payments";

  m.def(
      "validate_config",
      [](const std::string& path) {
        return bonusproj::validate_config(bonusproj::parse_config_file(path));
      },
      py::arg("config"), "Problems found in a config file; an empty list means valid.");

  m.def(
      "run",
      [](const std::string& path, const std::string& mode, int scenarios, double step,
         py::object seed) {
        bonusproj::RunConfig cfg = bonusproj::parse_config_file(path);
        if (!mode.empty()) cfg.mode = mode;
        if (scenarios > 0) cfg.scenarios = scenarios;
        if (step > 0.0) cfg.step = step;
        if (!seed.is_none()) cfg.seed = seed.cast<std::uint64_t>();
        const auto problems = bonusproj::validate_config(cfg);
        if (!problems.empty()) {
          std::string msg = "invalid config:";
          for (const auto& p : problems) msg += "\n  " + p;
          throw std::invalid_argument(msg);
        }
        const bonusproj::RunOutcome rc = bonusproj::compute_run(cfg);
        py::dict d;
        d["mode"] = cfg.mode;
        d["scenarios"] = cfg.scenarios;
        d["step"] = cfg.step;
        d["seed"] = cfg.seed;
        d["premium"] = rc.premium;
        d["v_predetermined"] = rc.v_predetermined;
        if (rc.ran_general) d["general"] = mode_dict(rc.general);
        if (rc.ran_stateindep) d["state_independent"] = mode_dict(rc.stateindep);
        if (rc.ran_general && rc.ran_stateindep && rc.general.vb.mean != 0.0)
          d["relative_difference"] =
              (rc.general.vb.mean - rc.stateindep.vb.mean) / rc.general.vb.mean;
        return d;
      },
      py::arg("config"), py::arg("mode") = "", py::arg("scenarios") = 0, py::arg("step") = 0.0,
      py::arg("seed") = py::none(),
      "Runs the valuation described by a config file and returns the summary as a dict.");
}

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mecoff/baselines.hpp"
#include "mecoff/harness.hpp"
#include "mecoff/oracle.hpp"
#include "mecoff/sdr_decision.hpp"

namespace py = pybind11;
using namespace mecoff;

namespace {

ScenarioConfig make_config(py::kwargs kw) {
  std::ostringstream text;
  for (auto item : kw) {
    const auto value = py::isinstance<py::bool_>(item.second)
                           ? std::string(item.second.cast<bool>() ? "true" : "false")
                           : py::str(item.second).cast<std::string>();
    text << py::str(item.first).cast<std::string>() << '=' << value << '\n';
  }
  std::istringstream in(text.str());
  auto c = parse_config(in);
  c.validate();
  return c;
}

py::dict result_dict(const SchemeResult& r) {
  py::dict d;
  d["scheme"] = scheme_id(r.scheme);
  d["decision"] = r.decision.c;
  d["energy_j"] = r.cost.total_energy;
  d["weighted_cost"] = r.cost.weighted_cost;
  d["max_delay_s"] = r.cost.max_delay;
  d["feasible"] = r.feasible;
  d["rates"] = r.rates;
  d["iterations"] = r.iterations;
  return d;
}

py::list rows_list(const std::vector<ResultRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["sweep_param"] = r.sweep_param;
    d["sweep_value"] = r.sweep_value;
    d["scheme"] = r.scheme;
    d["trial"] = r.trial;
    d["seed"] = r.seed;
    d["energy_j"] = r.energy_j;
    d["weighted_cost"] = r.weighted_cost;
    d["offloaders"] = r.offloaders;
    d["feasible"] = r.feasible;
    d["error"] = r.error;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Offloading decision and MU-MIMO beamforming simulator";

  m.def("default_config", [] { return format_config(ScenarioConfig{}); },
        "Default configuration as key=value text.");

  m.def("run_scheme", [](const std::string& scheme, py::kwargs kw) {
    const auto s = parse_scheme(scheme);
    if (!s) throw py::value_error("unknown scheme '" + scheme + "'");
    return result_dict(run_scheme(*s, generate_scenario(make_config(kw))));
  }, py::arg("scheme"), "Run one scheme on the scenario described by config keywords.");

  m.def("oracle", [](py::kwargs kw) {
    const auto r = brute_force_optimal(generate_scenario(make_config(kw)));
    py::dict d;
    d["decision"] = r.decision.c;
    d["weighted_cost"] = r.cost.weighted_cost;
    d["feasible"] = r.feasible;
    return d;
  });

  m.def("sweep", [](const std::string& param, const std::vector<double>& values, int trials,
                    const std::vector<std::string>& schemes, std::uint64_t seed, int workers) {
    SweepSpec spec;
    spec.param = parse_sweep_param(param);
    spec.values = values;
    spec.trials = trials;
    spec.schemes.clear();
    for (const auto& id : schemes) {
      const auto s = parse_scheme(id);
      if (!s) throw py::value_error("unknown scheme '" + id + "'");
      spec.schemes.push_back(*s);
    }
    spec.master_seed = seed;
    spec.workers = workers;
    py::gil_scoped_release release;
    auto rows = run_sweep(spec);
    py::gil_scoped_acquire acquire;
    return rows_list(rows);
  }, py::arg("param"), py::arg("values"), py::arg("trials") = 1,
     py::arg("schemes") = std::vector<std::string>{"local-only"}, py::arg("seed") = 1, py::arg("workers") = 1);

  m.def("sweep_csv", [](const std::string& param, const std::vector<double>& values, int trials,
                        const std::vector<std::string>& schemes, std::uint64_t seed) {
    SweepSpec spec;
    spec.param = parse_sweep_param(param);
    spec.values = values;
    spec.trials = trials;
    spec.schemes.clear();
    for (const auto& id : schemes) {
      const auto s = parse_scheme(id);
      if (!s) throw py::value_error("unknown scheme '" + id + "'");
      spec.schemes.push_back(*s);
    }
    spec.master_seed = seed;
    std::ostringstream out;
    write_csv(run_sweep(spec), out);
    return out.str();
  }, py::arg("param"), py::arg("values"), py::arg("trials") = 1,
     py::arg("schemes") = std::vector<std::string>{"local-only"}, py::arg("seed") = 1);

  // Scaled lifted relaxation, for cross-checking against external SDP solvers.
  m.def("lifted_sdp", [](py::kwargs kw) {
    const auto s = generate_scenario(make_config(kw));
    std::vector<double> caps;
    for (int k = 0; k < s.num_devices(); ++k) caps.push_back(rate_upper_bound(s, k));
    const auto q = build_qcqp(s, caps);
    const auto p = SdpScaling::for_qcqp(q).apply(lift_to_sdp(q).problem());
    auto rows = [](const std::vector<TraceConstraint>& cs) {
      py::list out;
      for (const auto& c : cs) out.append(py::make_tuple(c.matrix, c.rhs));
      return out;
    };
    py::dict d;
    d["objective"] = p.objective;
    d["equalities"] = rows(p.equalities);
    d["inequalities"] = rows(p.inequalities);
    return d;
  });

  m.def("solve_lifted_sdp", [](py::kwargs kw) {
    const auto out = dm_mmco_decide(generate_scenario(make_config(kw)));
    py::dict d;
    d["objective"] = out.sdp.objective_value;
    d["status"] = to_string(out.sdp.status);
    d["decision"] = out.decision.c;
    d["scores"] = out.decision.scores;
    return d;
  });
}

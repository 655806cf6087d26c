#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tiada/checks.hpp"
#include "tiada/harness.hpp"

namespace py = pybind11;
using namespace tiada;

// pybind11 holders cannot be pointer-to-const.
using PyProblem = std::shared_ptr<MinimaxProblem>;

namespace {

py::dict diag_dict(const StepDiagnostics& d) {
    py::dict o;
    o["iter"] = d.t;
    o["grad_calls"] = d.grad_calls;
    o["grad_x_norm"] = d.grad_x_norm;
    o["grad_y_norm"] = d.grad_y_norm;
    o["det_grad_x_norm"] = d.det_grad_x_norm;
    o["det_grad_y_norm"] = d.det_grad_y_norm;
    o["eff_step_x"] = d.eff_step_x;
    o["eff_step_y"] = d.eff_step_y;
    o["ratio"] = d.ratio;
    o["damping"] = d.damping;
    o["v_x"] = d.v_x;
    o["v_y"] = d.v_y;
    o["f_value"] = d.f_value;
    o["phi_value"] = d.phi_value ? py::cast(*d.phi_value) : py::none();
    o["stage"] = d.stage ? py::cast(to_string(*d.stage)) : py::none();
    return o;
}

py::dict summary_dict(const Summary& s) {
    py::dict o;
    o["steps"] = s.steps;
    o["grad_calls"] = s.grad_calls;
    o["t_star"] = s.t_star ? py::cast(*s.t_star) : py::none();
    o["stays_in_stage_ii"] = s.stays_in_stage_ii;
    o["initial_det_grad_norm"] = s.initial_det_grad_norm;
    o["min_det_grad_norm"] = s.min_det_grad_norm;
    o["final_det_grad_x_norm"] = s.final_det_grad_x_norm;
    o["final_det_grad_y_norm"] = s.final_det_grad_y_norm;
    o["avg_sq_grad_x"] = s.avg_sq_grad_x;
    o["avg_sq_grad_y"] = s.avg_sq_grad_y;
    return o;
}

py::dict constants_dict(const ProblemConstants& k) {
    py::dict o;
    o["l"] = k.l;
    o["mu"] = k.mu;
    o["kappa"] = k.kappa;
    o["hessian_spectral_norm"] = k.hessian_spectral_norm;
    return o;
}

nlohmann::json parse(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(e.what());
    }
}

// The Python layer owns its oracle; the optimizer borrows it per step.
class PyOracle {
public:
    PyOracle(PyProblem problem, double noise_stddev, std::uint64_t seed)
        : source_(noise_stddev > 0.0 ? make_stochastic(problem, noise_stddev, seed)
                                     : std::make_unique<DeterministicOracle>(problem)) {}
    GradientSource& source() { return *source_; }

private:
    std::unique_ptr<GradientSource> source_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Time-scale adaptive minimax optimizers";

    py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", PyExc_NotImplementedError);
    py::register_exception<NonFiniteGradient>(m, "NonFiniteGradient", PyExc_FloatingPointError);

    py::class_<MinimaxProblem, PyProblem>(m, "Problem")
        .def_property_readonly("id", [](const MinimaxProblem& p) { return std::string(p.id()); })
        .def_property_readonly("dim_x", &MinimaxProblem::dim_x)
        .def_property_readonly("dim_y", &MinimaxProblem::dim_y)
        .def_property_readonly("constants", [](const MinimaxProblem& p) { return constants_dict(p.constants()); })
        .def("value", [](const MinimaxProblem& p, Vector x, Vector y) { return evaluate(p, {x, y}); })
        .def("gradient",
             [](const MinimaxProblem& p, Vector x, Vector y) {
                 GradientPair g = gradient(p, {x, y});
                 return py::make_tuple(g.gx, g.gy);
             })
        .def("inner_solution", [](const MinimaxProblem& p, Vector x) { return inner_solution(p, x); })
        .def("primal_value", [](const MinimaxProblem& p, Vector x) { return p.primal_value(x); });

    m.def("make_problem",
          [](const std::string& id, const ParamMap& params) {
              return std::const_pointer_cast<MinimaxProblem>(make_problem(id, params));
          },
          py::arg("id"), py::arg("params") = ParamMap{});
    m.def("finite_difference_gradient",
          [](const MinimaxProblem& p, Vector x, Vector y, double h) {
              GradientPair g = finite_difference_gradient(p, {x, y}, h);
              return py::make_tuple(g.gx, g.gy);
          },
          py::arg("problem"), py::arg("x"), py::arg("y"), py::arg("h") = 1e-6);
    m.def("project",
          [](const std::string& domain_json, Vector y) { return project(domain_from_json(parse(domain_json)), y); },
          py::arg("domain_json"), py::arg("y"));

    py::class_<PyOracle>(m, "Oracle")
        .def(py::init<PyProblem, double, std::uint64_t>(), py::arg("problem"), py::arg("noise_stddev") = 0.0,
             py::arg("seed") = 0)
        .def("query",
             [](PyOracle& o, Vector x, Vector y) {
                 GradientPair g = o.source().query({x, y});
                 return py::make_tuple(g.gx, g.gy);
             })
        .def_property_readonly("calls", [](PyOracle& o) { return o.source().calls(); });

    py::class_<Optimizer>(m, "Optimizer")
        .def_property_readonly("id", [](const Optimizer& o) { return std::string(o.id()); })
        .def_property_readonly("x", [](const Optimizer& o) { return o.iterate().x; })
        .def_property_readonly("y", [](const Optimizer& o) { return o.iterate().y; })
        .def("step",
             [](Optimizer& o, PyOracle& oracle, const std::string& domain_json) {
                 const DomainSpec domain = domain_json.empty() ? DomainSpec{} : domain_from_json(parse(domain_json));
                 const Iterate before = o.iterate();
                 StepDiagnostics d = o.step(oracle.source(), domain);
                 annotate(d, oracle.source().problem(), before);
                 return diag_dict(d);
             },
             py::arg("oracle"), py::arg("domain_json") = "");

    m.def("optimizer_ids", &optimizer_ids);
    m.def("make_optimizer",
          [](const std::string& id, const ParamMap& params, Vector x, Vector y, bool stochastic) {
              return make_optimizer(id, params, {x, y}, stochastic);
          },
          py::arg("id"), py::arg("params"), py::arg("x"), py::arg("y"), py::arg("stochastic") = false);

    py::class_<TrajectoryRecord>(m, "Trajectory")
        .def_readonly("seed", &TrajectoryRecord::seed)
        .def_readonly("kappa", &TrajectoryRecord::kappa)
        .def_property_readonly("termination", [](const TrajectoryRecord& t) { return to_string(t.termination); })
        .def_property_readonly("steps",
                               [](const TrajectoryRecord& t) {
                                   py::list rows;
                                   for (const auto& d : t.steps) rows.append(diag_dict(d));
                                   return rows;
                               })
        .def_property_readonly("summary", [](const TrajectoryRecord& t) { return summary_dict(t.summary); })
        .def_property_readonly("final_x", [](const TrajectoryRecord& t) { return t.final_iterate.x; })
        .def_property_readonly("final_y", [](const TrajectoryRecord& t) { return t.final_iterate.y; })
        .def("csv", [](const TrajectoryRecord& t) {
            std::ostringstream os;
            write_trajectory_csv(os, t);
            return os.str();
        });

    m.def("run_experiment_json",
          [](const std::string& config_json) {
              RunResult r;
              {
                  py::gil_scoped_release release;
                  r = run_experiment(config_from_json(parse(config_json)));
              }
              return py::make_tuple(r.trajectories, summary_json(r).dump());
          },
          py::arg("config_json"));
    m.def("normalize_config_json",
          [](const std::string& config_json) { return to_json(config_from_json(parse(config_json))).dump(); });
    m.def("sweep_table_csv",
          [](const std::string& spec_json) {
              SweepSpec spec = sweep_from_json(parse(spec_json));
              SweepResult r;
              {
                  py::gil_scoped_release release;
                  r = run_sweep(spec);
              }
              std::ostringstream os;
              write_sweep_table(os, r);
              return os.str();
          },
          py::arg("spec_json"));
    m.def("ablation_t_stars",
          [](const std::string& spec_json) {
              AblationResult r;
              {
                  py::gil_scoped_release release;
                  r = run_ablation(ablation_from_json(parse(spec_json)));
              }
              py::list rows;
              for (const auto& row : r.rows)
                  rows.append(py::make_tuple(row.alpha, row.beta, row.t_star ? py::cast(*row.t_star) : py::none(),
                                             row.stays_in_stage_ii));
              return rows;
          },
          py::arg("spec_json"));

    m.def("rate_check", &rate_check, py::arg("trajectory"), py::arg("T1"), py::arg("T2"));
    m.def("detect_stage_transition",
          [](const TrajectoryRecord& t, double kappa) {
              StageTransition s = detect_stage_transition(t, kappa);
              return py::make_tuple(s.t_star ? py::cast(*s.t_star) : py::none(), s.stays_below);
          });
    m.def("run_checks", [] {
        py::list out;
        for (const auto& r : run_checks()) out.append(py::make_tuple(r.name, r.passed, r.detail));
        return out;
    });
}

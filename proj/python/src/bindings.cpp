#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hope/harness.hpp"

namespace py = pybind11;
using namespace hope;

namespace {

ObjectiveScale parse_scale(const std::string& s) {
    if (s == "unit") return ObjectiveScale::Unit;
    if (s == "inverse-n") return ObjectiveScale::InverseN;
    throw ConfigError("objective_scale must be 'unit' or 'inverse-n'");
}

PweConfig make_pwe_config(double lambda_constant, const std::string& initial_estimator,
                          const std::string& support_rule, Eigen::Index sis_keep) {
    PweConfig cfg;
    cfg.lambda_constant = lambda_constant;
    cfg.initial_estimator = parse_initial_estimator(initial_estimator);
    cfg.support_rule = parse_support_rule(support_rule);
    cfg.sis_keep = sis_keep;
    return cfg;
}

py::dict summary_of(const ExperimentOutcome& out) {
    py::dict result;
    py::list series;
    for (const auto& s : out.aggregate.series) {
        py::dict d;
        d["scenario"] = s.scenario;
        d["policy"] = s.policy;
        d["repetitions"] = s.repetitions;
        d["mean"] = s.mean;
        d["std"] = s.std;
        d["final_mean"] = s.final_mean();
        d["final_std"] = s.final_std();
        d["wall_seconds"] = s.wall_seconds;
        series.append(d);
    }
    py::list skipped;
    for (const auto& s : out.skipped) skipped.append(py::make_tuple(s.scenario, s.policy, s.reason));
    result["series"] = series;
    result["skipped"] = skipped;
    result["failures"] = out.failures;
    result["wall_seconds"] = out.wall_seconds;
    return result;
}

}  // namespace

PYBIND11_MODULE(_hope, m) {
    m.doc() = "Pointwise-estimator contextual bandits with sparse and spectrally sparse arms";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<DegenerateQuery>(m, "DegenerateQuery", PyExc_ArithmeticError);

    m.def(
        "fit_lasso",
        [](const Matrix& X, const Vector& y, double lam, const std::string& objective_scale, double tol,
           int max_iters) {
            LassoConfig cfg;
            cfg.lambda = lam;
            cfg.objective_scale = parse_scale(objective_scale);
            cfg.tol = tol;
            cfg.max_iters = max_iters;
            const LassoFit fit = fit_lasso(X, y, cfg);
            return py::make_tuple(fit.coefficients, fit.converged);
        },
        py::arg("X"), py::arg("y"), py::arg("lam"), py::arg("objective_scale") = "inverse-n",
        py::arg("tol") = 1e-10, py::arg("max_iters") = 100000,
        "Lasso by coordinate descent. Returns (coefficients, converged).");

    m.def("fit_rdl", [](const Matrix& X, const Vector& y) { return fit_rdl(X, y); }, py::arg("X"), py::arg("y"),
          "Minimum-norm least squares.");

    m.def(
        "sis_screen",
        [](const Matrix& X, const Vector& y, Eigen::Index keep) { return sis_screen(X, y, keep).indices(); },
        py::arg("X"), py::arg("y"), py::arg("keep"));

    m.def(
        "project_split",
        [](const Matrix& X, const Vector& x, const Vector& theta) {
            const ProjectSplit s = project_split(X, x, theta);
            return py::make_tuple(s.alpha, s.z, s.zeta);
        },
        py::arg("X"), py::arg("x"), py::arg("theta"), "Returns (alpha, z, zeta).");

    m.def(
        "pwe_estimate",
        [](const Matrix& X, const Vector& y, const Vector& x, double sigma, double lambda_constant,
           const std::string& initial_estimator, const std::string& support_rule, Eigen::Index sis_keep) {
            if (X.rows() % 2 != 0) throw StructuralError("pwe_estimate: need an even number of samples");
            const ArmDataset ds(0, X, y, X.rows() / 2);
            return pwe_estimate(ds, x, make_pwe_config(lambda_constant, initial_estimator, support_rule, sis_keep),
                                sigma);
        },
        py::arg("X"), py::arg("y"), py::arg("x"), py::arg("sigma"), py::arg("lambda_constant") = 0.5,
        py::arg("initial_estimator") = "lasso", py::arg("support_rule") = "lasso-support", py::arg("sis_keep") = 0,
        "Pointwise reward estimate at x. The first half of the rows prepares, the second estimates.");

    m.def(
        "choose_n",
        [](const std::string& scenario, int K, long T, std::optional<double> s0) {
            NChoiceInputs in;
            in.hint = parse_scenario_id(scenario);
            in.K = K;
            in.T = T;
            in.s0 = s0;
            return choose_N(in);
        },
        py::arg("scenario"), py::arg("K"), py::arg("T"), py::arg("s0") = py::none());

    m.def(
        "validate_config",
        [](const std::string& text) {
            const ExperimentConfig cfg = parse_config(text);
            py::list bad;
            for (const auto& b : check_feasibility(cfg)) bad.append(py::make_tuple(b.scenario, b.policy, b.reason));
            return bad;
        },
        py::arg("config_json"), "Parses a JSON config and returns its infeasible (scenario, policy, reason) pairs.");

    m.def("default_config", [] { return config_to_json(default_config()); });

    m.def(
        "run_grid",
        [](const std::string& text, std::optional<int> repetitions, std::optional<int> jobs) {
            ExperimentConfig cfg = parse_config(text);
            if (repetitions) cfg.repetitions = *repetitions;
            if (jobs) cfg.jobs = *jobs;
            ExperimentOutcome out;
            {
                py::gil_scoped_release release;
                out = run_grid(cfg);
            }
            return summary_of(out);
        },
        py::arg("config_json"), py::arg("repetitions") = py::none(), py::arg("jobs") = py::none(),
        "Runs the grid in memory and returns per (scenario, policy) mean and std curves.");

    m.def(
        "run_experiment",
        [](const std::string& text, const std::string& output_dir) {
            ExperimentConfig cfg = parse_config(text);
            cfg.output_dir = output_dir;
            ExperimentOutcome out;
            {
                py::gil_scoped_release release;
                out = run_experiment(cfg);
            }
            return summary_of(out);
        },
        py::arg("config_json"), py::arg("output_dir"), "Runs the grid and writes CSV and SVG files.");
}

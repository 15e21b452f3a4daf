// Python bindings: configuration loading, single trajectories, averaged-drift
// estimates and the experiment tables behind the CLI.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "multiscale/averaging.hpp"
#include "multiscale/config.hpp"
#include "multiscale/errors.hpp"
#include "multiscale/experiments.hpp"
#include "multiscale/results.hpp"
#include "multiscale/slowfast.hpp"

namespace py = pybind11;
namespace ms = multiscale;

namespace {

ms::ExperimentConfig with_overrides(ms::ExperimentConfig cfg, std::optional<std::uint64_t> seed,
                                    std::optional<unsigned> workers) {
    if (seed) cfg.master_seed = *seed;
    if (workers) {
        if (*workers < 1) throw ms::invalid_parameter("workers must be positive");
        cfg.worker_count = *workers;
    }
    cfg.averaging.seed = cfg.master_seed;
    cfg.averaging.workers = cfg.worker_count;
    return cfg;
}

py::list rows(const ms::ResultTable& table) {
    py::list out;
    for (const auto& r : table.rows()) {
        py::dict d;
        d["experiment_id"] = r.experiment_id;
        d["epsilon"] = r.epsilon ? py::object(py::float_(*r.epsilon)) : py::object(py::none());
        d["statistic_id"] = r.statistic_id;
        d["value"] = r.value;
        d["std_error"] = r.std_error;
        d["n"] = r.n;
        d["censored_count"] = r.censored_count;
        out.append(d);
    }
    return out;
}

py::dict state_dict(const ms::SlowFastState& s) {
    py::dict d;
    d["t"] = s.t;
    d["u"] = s.u.vector();
    d["v"] = s.v.vector();
    return d;
}

ms::ModalField field(const std::vector<double>& x) { return ms::ModalField(x); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral Monte Carlo simulation of slow-fast stochastic reaction-diffusion systems";
    m.attr("__version__") = ms::version();

    py::register_exception<ms::config_rejected>(m, "ConfigRejected", PyExc_ValueError);
    py::register_exception<ms::invalid_parameter>(m, "InvalidParameter", PyExc_ValueError);
    py::register_exception<ms::state_explosion>(m, "StateExplosion", PyExc_RuntimeError);

    py::class_<ms::ExperimentConfig>(m, "Config")
        .def_static("from_file", [](const std::string& path) { return ms::parse_config(path); }, py::arg("path"))
        .def_static("from_string", &ms::parse_config_string, py::arg("text"))
        .def("to_json", &ms::serialize_config)
        .def("hash", &ms::config_hash)
        .def_property_readonly("n_modes", [](const ms::ExperimentConfig& c) { return c.model.n_modes(); })
        .def_property_readonly("omega", [](const ms::ExperimentConfig& c) { return c.model.omega(); })
        .def_property_readonly("epsilon_grid", [](const ms::ExperimentConfig& c) { return c.epsilon_grid; })
        .def_readwrite("master_seed", &ms::ExperimentConfig::master_seed)
        .def_readwrite("ensemble_size", &ms::ExperimentConfig::ensemble_size)
        .def_readwrite("output_dir", &ms::ExperimentConfig::output_dir);

    m.def(
        "simulate_trajectory",
        [](const ms::ExperimentConfig& cfg, std::uint64_t trajectory_id, std::optional<double> epsilon,
           std::vector<double> sample_times, std::optional<std::uint64_t> seed) {
            const ms::ModelSpec model = epsilon ? ms::with_epsilon(cfg.model, *epsilon) : cfg.model;
            ms::SimulationOptions opts;
            opts.sample_times = std::move(sample_times);
            opts.record_V = true;
            ms::SlowFastRun run;
            {
                py::gil_scoped_release release;
                run = ms::simulate_slowfast(model, seed.value_or(cfg.master_seed), trajectory_id, opts);
            }
            py::dict d;
            py::list samples;
            for (const auto& s : run.samples) samples.append(state_dict(s));
            d["samples"] = samples;
            d["n_steps"] = run.n_steps;
            d["n_sub"] = run.n_sub;
            d["V_integral"] = run.V_integral;
            d["sup_v_norm2"] = run.sup_v_norm2;
            return d;
        },
        py::arg("config"), py::arg("trajectory_id") = 0, py::arg("epsilon") = py::none(),
        py::arg("sample_times") = std::vector<double>{}, py::arg("seed") = py::none(),
        "One coupled trajectory; returns the sampled states and path statistics.");

    m.def(
        "analytic_fbar",
        [](const ms::ExperimentConfig& cfg, const std::vector<double>& x) {
            return ms::analytic_Fbar_linear(cfg.model, 0.0, field(x)).vector();
        },
        py::arg("config"), py::arg("x"), "Closed-form averaged drift (linear benchmark only).");

    m.def(
        "estimate_fbar",
        [](const ms::ExperimentConfig& cfg, const std::vector<double>& x, std::optional<std::uint64_t> seed) {
            ms::AveragedDriftParams p = cfg.averaging;
            p.seed = seed.value_or(cfg.master_seed);
            ms::FbarEstimate est;
            {
                py::gil_scoped_release release;
                est = ms::estimate_Fbar(0.0, field(x), p, cfg.model);
            }
            return py::make_tuple(est.drift.vector(), est.std_error.vector());
        },
        py::arg("config"), py::arg("x"), py::arg("seed") = py::none(),
        "Nested Monte Carlo estimate of the averaged drift: (drift, std_error).");

    m.def("khasminskii_delta", &ms::khasminskii_delta, py::arg("epsilon"), py::arg("lambda_exp") = 1.0,
          py::arg("c_const") = 2.0, "Block length of the Khasminskii auxiliary process.");
    m.def("compute_rho0", &ms::compute_rho0, py::arg("s"), py::arg("t"), py::arg("beta"), py::arg("gamma1_star"));

    auto table_fn = [&m](const char* name, ms::ResultTable (*fn)(const ms::ExperimentConfig&), const char* doc) {
        m.def(
            name,
            [fn](const ms::ExperimentConfig& cfg, std::optional<std::uint64_t> seed, std::optional<unsigned> workers) {
                const auto c = with_overrides(cfg, seed, workers);
                ms::ResultTable t;
                {
                    py::gil_scoped_release release;
                    t = fn(c);
                }
                return rows(t);
            },
            py::arg("config"), py::arg("seed") = py::none(), py::arg("workers") = py::none(), doc);
    };
    table_fn("convergence_study", &ms::run_convergence_study, "Weak errors and drift discrepancies over the epsilon grid.");
    table_fn("khasminskii_study", &ms::run_khasminskii_study, "Auxiliary-process errors over the epsilon grid.");
    table_fn("moment_audit", &ms::run_moment_audit, "Moment statistics and their max/min ratios over the grid.");
    table_fn("holder_stats", &ms::run_holder_stats, "Mean-square slow increments against the Hoelder bound.");

    m.def(
        "theta_stability",
        [](const ms::ExperimentConfig& cfg, std::vector<double> thetas, std::optional<std::uint64_t> seed,
           std::optional<unsigned> workers) {
            const auto c = with_overrides(cfg, seed, workers);
            ms::ResultTable t;
            {
                py::gil_scoped_release release;
                t = ms::run_theta_stability(c, thetas);
            }
            return rows(t);
        },
        py::arg("config"), py::arg("thetas"), py::arg("seed") = py::none(), py::arg("workers") = py::none());
}

#include "evl/analysis/chain.hpp"
#include "evl/analysis/dominance.hpp"
#include "evl/env/acrobot.hpp"
#include "evl/env/replacement.hpp"
#include "evl/experiment/commands.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
namespace ex = evl::experiment;

// JSON crosses the boundary as text; the Python package decodes it.
PYBIND11_MODULE(_evl_lab, m) {
    m.doc() = "Empirical value learning: experiment runner and analysis tools";
    m.attr("__version__") = EVL_LAB_VERSION;

    static py::exception<ex::SpecError> spec_error(m, "SpecError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ex::SpecError& e) {
            spec_error(e.diagnostic().c_str());
        } catch (const evl::ValidationError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const evl::NumericError& e) {
            PyErr_SetString(PyExc_ArithmeticError, e.what());
        }
    });

    m.def("validate_spec", [](const std::string& text) { ex::parse_spec(text); },
          "Raises SpecError when the spec text is invalid.");

    m.def(
        "run_spec",
        [](const std::string& text, const std::string& output_dir, std::size_t jobs, std::uint64_t seed_offset) {
            const auto spec = ex::parse_spec(text);
            ex::RunOptions opts;
            if (!output_dir.empty()) opts.output_dir = output_dir;
            opts.jobs = jobs;
            opts.seed_offset = seed_offset;
            py::gil_scoped_release release;
            const auto s = ex::run_experiment(spec, opts, text, "<python>");
            std::vector<std::uint64_t> failed;
            for (const auto& f : s.failures) failed.push_back(f.seed);
            return nlohmann::json{{"output_dir", s.output_dir.string()},
                                  {"manifest", s.manifest.string()},
                                  {"seeds", s.seeds},
                                  {"failed_seeds", failed}}
                .dump();
        },
        py::arg("text"), py::arg("output_dir") = "", py::arg("jobs") = 1, py::arg("seed_offset") = 0);

    m.def(
        "bounds_json",
        [](const std::string& request) {
            return ex::bounds_report(ex::bounds_request_from_json(nlohmann::json::parse(request))).dump();
        },
        py::arg("request"));

    m.def(
        "chain_json",
        [](double q, std::uint64_t k_star, std::uint64_t steps, std::uint64_t replicas, double delta_prime,
           std::uint64_t seed) {
            ex::ChainRequest r{q, k_star, steps, replicas, delta_prime, seed, std::nullopt};
            py::gil_scoped_release release;
            return ex::chain_report(r).dump();
        },
        py::arg("q"), py::arg("k_star"), py::arg("steps") = 100000, py::arg("replicas") = 0,
        py::arg("delta_prime") = 0.1, py::arg("seed") = 0);

    m.def(
        "chain_steady_state",
        [](double q, std::uint64_t k_star) { return evl::analysis::chain_steady_state({q, k_star}); },
        py::arg("q"), py::arg("k_star"));

    m.def(
        "dominance_violations",
        [](const std::vector<std::vector<double>>& residuals, std::uint64_t k_star) {
            evl::analysis::DominanceOptions opts;
            opts.k_star = k_star;
            const auto rep = evl::analysis::dominance_from_residuals(residuals, opts);
            return std::make_pair(rep.violations, rep.chain.q);
        },
        py::arg("residuals"), py::arg("k_star") = 5, "Returns (violations, estimated q).");

    m.def(
        "verify_run",
        [](const std::filesystem::path& dir) {
            const auto r = ex::verify_run(dir);
            return py::make_tuple(r.checked, r.mismatched, r.missing);
        },
        py::arg("run_dir"), "Returns (checked, mismatched, missing).");

    m.def(
        "replacement_oracle",
        [](double gamma, double lambda_rate, std::size_t grid_n) {
            evl::env::ReplacementParams p;
            p.gamma = gamma;
            p.lambda_rate = lambda_rate;
            const evl::env::ReplacementOracle o(p, grid_n);
            return py::make_tuple(o.nodes(), o.values(), o.threshold());
        },
        py::arg("gamma") = 0.6, py::arg("lambda_rate") = 0.5, py::arg("grid_n") = 2000,
        "Returns (nodes, values, replace threshold).");

    m.def(
        "acrobot_energy",
        [](const std::array<double, 4>& coords) { return evl::env::acrobot_energy({}, coords); },
        py::arg("coords"));
}

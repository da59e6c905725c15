#include "evl/experiment/commands.hpp"

#include "evl/io/csv.hpp"
#include "evl/io/hash.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace evl::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

int cmd_run(const fs::path& spec_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
    std::string text;
    ExperimentSpec spec;
    try {
        text = io::read_file(spec_path);
        spec = parse_spec(text);
    } catch (const SpecError& e) {
        err << spec_path.string() << ": " << e.diagnostic() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << spec_path.string() << ": " << e.what() << "\n";
        return kExitInvalid;
    }
    try {
        const RunSummary s = run_experiment(spec, options, text, spec_path.string());
        json failures = json::array();
        for (const auto& f : s.failures) {
            failures.push_back({{"seed", f.seed}, {"iteration", f.iteration}, {"message", f.message}});
            err << "seed " << f.seed << " failed at iteration " << f.iteration << ": " << f.message << "\n";
        }
        out << json{{"status", s.ok() ? "complete" : "failed"},
                    {"output_dir", s.output_dir.string()},
                    {"manifest", s.manifest.string()},
                    {"seeds", s.seeds.size()},
                    {"failures", failures}}
                   .dump()
            << "\n";
        return s.ok() ? kExitOk : kExitFailure;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << "\n";
        return kExitFailure;
    }
}

namespace {

// Non-finite doubles become null in JSON; keep them visible as strings instead.
json real(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json rpbf_json(const analysis::RpbfComplexity& c) {
    using analysis::ceil_to_u64;
    return {{"variant", to_string(c.variant)},
            {"J", ceil_to_u64(c.j)},
            {"N", ceil_to_u64(c.n)},
            {"M", ceil_to_u64(c.m)},
            {"K_star", c.k_star},
            {"K_min", ceil_to_u64(c.k_min)},
            {"raw", {{"J", real(c.j)}, {"N", real(c.n)}, {"M", real(c.m)}, {"K_min", real(c.k_min)},
                     {"delta_prime", real(c.delta_prime)}, {"v_bar", real(c.v_bar)}, {"mu_star", real(c.mu_star)}}}};
}

json rkhs_json(const analysis::RkhsComplexity& c) {
    using analysis::ceil_to_u64;
    return {{"variant", to_string(c.variant)},
            {"N", ceil_to_u64(c.n)},
            {"M", ceil_to_u64(c.m)},
            {"K_star", c.k_star},
            {"K_min", ceil_to_u64(c.k_min)},
            {"raw", {{"N", real(c.n)}, {"M", real(c.m)}, {"K_min", real(c.k_min)},
                     {"delta_prime", real(c.delta_prime)}, {"mu_star", real(c.mu_star)}}}};
}

json inputs_json(const analysis::ComplexityInputs& in) {
    return {{"epsilon", in.epsilon}, {"delta", in.delta},     {"v_max", in.v_max},
            {"gamma", in.gamma},     {"c_rho_mu", in.c_rho_mu}, {"c_const", in.c_const},
            {"n_actions", in.n_actions}, {"c_k", in.c_k},     {"kappa", in.kappa}};
}

}  // namespace

BoundsRequest bounds_request_from_json(const json& j, BoundsRequest base) {
    if (!j.is_object()) throw ValidationError("bounds input must be a JSON object");
    auto& in = base.inputs;
    for (const auto& [key, value] : j.items()) {
        auto num = [&](double& dst) {
            if (!value.is_number()) throw ValidationError("must be a number", key);
            dst = value.get<double>();
        };
        if (key == "epsilon") num(in.epsilon);
        else if (key == "delta") num(in.delta);
        else if (key == "v_max") num(in.v_max);
        else if (key == "gamma") num(in.gamma);
        else if (key == "c_rho_mu") num(in.c_rho_mu);
        else if (key == "c_const") num(in.c_const);
        else if (key == "c_k") num(in.c_k);
        else if (key == "kappa") num(in.kappa);
        else if (key == "n_actions") {
            if (!value.is_number_unsigned()) throw ValidationError("must be a positive integer", key);
            in.n_actions = value.get<std::uint64_t>();
        } else if (key == "calculator") {
            if (!value.is_string()) throw ValidationError("must be a string", key);
            base.calculator = value.get<std::string>();
        } else {
            throw ValidationError("unknown field", key);
        }
    }
    return base;
}

json bounds_report(const BoundsRequest& request) {
    const auto& in = request.inputs;
    in.validate();
    static const std::set<std::string> known = {"l1", "l2", "rkhs", "all"};
    if (!known.count(request.calculator))
        throw ValidationError("unknown calculator '" + request.calculator + "' (expected l1, l2, rkhs or all)",
                              "calculator");
    json report = {{"inputs", inputs_json(in)},
                   {"note", "outputs are conditional on the supplied c_rho_mu and c_k"}};
    const bool all = request.calculator == "all";
    for (auto norm : {analysis::Norm::l1, analysis::Norm::l2}) {
        const std::string name = "rpbf_" + to_string(norm);
        if (!all && request.calculator != to_string(norm)) continue;
        report[name] = {
            {"norm", to_string(norm)},
            {"display", rpbf_json(analysis::complexity_rpbf(in, norm, analysis::FormulaVariant::display))},
            {"appendix", rpbf_json(analysis::complexity_rpbf(in, norm, analysis::FormulaVariant::appendix))}};
    }
    if (all || request.calculator == "rkhs") {
        report["rkhs"] = {
            {"display", rkhs_json(analysis::complexity_rkhs(in, analysis::FormulaVariant::display))},
            {"appendix", rkhs_json(analysis::complexity_rkhs(in, analysis::FormulaVariant::appendix))}};
    }
    return report;
}

int cmd_bounds(const BoundsRequest& request, std::ostream& out, std::ostream& err) {
    try {
        out << bounds_report(request).dump(2) << "\n";
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "bounds: " << e.what() << "\n";
        return kExitInvalid;
    }
}

json chain_report(const ChainRequest& r, std::string* occupancy_csv) {
    const analysis::DominatingChain chain{r.q, r.k_star};
    chain.validate();
    if (r.steps < 1) throw ValidationError("must be at least 1", "steps");
    const Rng root(r.seed);
    Rng sim_rng = root.substream({0});
    const auto sim = analysis::chain_simulate(chain, r.steps, sim_rng);
    const auto mu = analysis::chain_steady_state(chain);

    const Eigen::MatrixXd p = chain.transition_matrix();
    const Eigen::Map<const Eigen::RowVectorXd> mu_row(mu.data(), static_cast<Eigen::Index>(mu.size()));
    const double stationarity = (mu_row * p - mu_row).cwiseAbs().maxCoeff();

    json report = {{"q", r.q},
                   {"k_star", r.k_star},
                   {"steps", r.steps},
                   {"seed", r.seed},
                   {"steady_state", mu},
                   {"occupancy", sim.occupancy},
                   {"total_variation", analysis::total_variation(sim.occupancy, mu)},
                   {"stationarity_residual", stationarity},
                   {"final_state", sim.final_state},
                   {"first_hit_one", sim.first_hit_one}};
    if (r.q > 0.0 && r.q < 1.0) {
        const std::uint64_t k = analysis::chain_mixing_bound(chain, r.delta_prime);
        json mix = {{"delta_prime", r.delta_prime}, {"bound", k}};
        mix["exact_p_one"] = analysis::chain_marginal(chain, k)[0];
        if (r.replicas > 0) {
            const auto emp = analysis::chain_replicas(chain, k, r.replicas, root.substream({1}));
            const double gap = std::abs(emp[0] - mu[0]);
            mix["replicas"] = r.replicas;
            mix["empirical_p_one"] = emp[0];
            mix["abs_gap"] = gap;
            mix["within_two_delta_prime"] = gap <= 2.0 * r.delta_prime;
        }
        report["mixing"] = mix;
    } else {
        report["mixing"] = nullptr;
    }
    if (occupancy_csv) {
        io::CsvWriter w({"state", "occupancy", "steady_state"});
        for (std::size_t i = 0; i < mu.size(); ++i)
            w.row({std::to_string(i + 1), io::format_double(sim.occupancy[i]), io::format_double(mu[i])});
        *occupancy_csv = w.str();
    }
    return report;
}

int cmd_chain(const ChainRequest& request, std::ostream& out, std::ostream& err) {
    try {
        std::string csv;
        const json report = chain_report(request, &csv);
        if (request.output_dir) {
            io::write_file_atomic(*request.output_dir / "occupancy.csv", csv);
            io::write_file_atomic(*request.output_dir / "chain.json", report.dump(2) + "\n");
        }
        out << report.dump(2) << "\n";
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "chain: " << e.what() << "\n";
        return kExitInvalid;
    }
}

std::vector<std::vector<double>> load_residuals(const fs::path& run_dir, const std::string& residual,
                                                std::string* used) {
    if (residual != "auto" && residual != "bellman_sup" && residual != "fit_sup")
        throw ValidationError("expected auto, bellman_sup or fit_sup", "residual");
    const auto traces = load_traces(run_dir);
    bool have_bellman = !traces.empty();
    for (const auto& t : traces)
        for (const auto& r : t.rows) have_bellman = have_bellman && r.bellman_sup.has_value();
    std::string column = residual == "auto" ? (have_bellman ? "bellman_sup" : "fit_sup") : residual;
    if (column == "bellman_sup" && !have_bellman)
        throw ValidationError("some trace rows lack bellman_sup", "residual");
    std::vector<std::vector<double>> out;
    for (const auto& t : traces) {
        std::vector<double> row;
        for (const auto& r : t.rows) row.push_back(column == "bellman_sup" ? *r.bellman_sup : r.fit_sup);
        out.push_back(std::move(row));
    }
    if (used) *used = column;
    return out;
}

std::string dominance_csv(const analysis::DominanceReport& report) {
    io::CsvWriter w({"k", "theta", "px", "py", "stderr", "flag"});
    for (const auto& r : report.rows)
        w.row({std::to_string(r.k), std::to_string(r.theta), io::format_double(r.px), io::format_double(r.py),
               io::format_double(r.std_error), r.flag ? "1" : "0"});
    return w.str();
}

int cmd_dominance(const DominanceRequest& request, std::ostream& out, std::ostream& err) {
    analysis::DominanceReport report;
    std::string column;
    try {
        const auto residuals = load_residuals(request.run_dir, request.residual, &column);
        report = analysis::dominance_from_residuals(residuals, request.options);
    } catch (const ValidationError& e) {
        err << "dominance: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "dominance: " << e.what() << "\n";
        return kExitFailure;
    }
    const fs::path csv_path = request.output ? *request.output : request.run_dir / "dominance.csv";
    io::write_file_atomic(csv_path, dominance_csv(report));
    out << json{{"runs", report.runs},
                {"residual", column},
                {"epsilon", report.epsilon ? json(*report.epsilon) : json(nullptr)},
                {"q", report.chain.q},
                {"k_star", report.chain.k_star},
                {"estimator", to_string(request.options.estimator)},
                {"rows", report.rows.size()},
                {"violations", report.violations},
                {"max_z", real(report.max_z)},
                {"csv", csv_path.string()}}
               .dump(2)
        << "\n";
    return kExitOk;
}

int cmd_verify(const fs::path& run_dir, std::ostream& out, std::ostream& err) {
    try {
        const VerifyReport rep = verify_run(run_dir);
        for (const auto& m : rep.missing) err << "missing: " << m << "\n";
        for (const auto& m : rep.mismatched) err << "hash mismatch: " << m << "\n";
        out << json{{"checked", rep.checked},
                    {"missing", rep.missing},
                    {"mismatched", rep.mismatched},
                    {"ok", rep.ok()}}
                   .dump()
            << "\n";
        return rep.ok() ? kExitOk : kExitFailure;
    } catch (const std::exception& e) {
        err << "verify: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace evl::experiment

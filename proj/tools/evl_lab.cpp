#include "evl/experiment/commands.hpp"
#include "evl/io/hash.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace ex = evl::experiment;

int main(int argc, char** argv) {
    CLI::App app{"Empirical value learning experiments and analysis tools"};
    app.set_version_flag("--version", std::string(EVL_LAB_VERSION));
    std::string verify_dir;
    app.add_option("--verify", verify_dir, "Re-check the artifact hashes of a run directory");

    // run
    auto* run = app.add_subcommand("run", "Run every seed of an experiment spec");
    std::string spec_path;
    std::string run_out;
    ex::RunOptions run_opts;
    run->add_option("--spec", spec_path, "Experiment spec (JSON, schema 1)")->required();
    run->add_option("--out", run_out, "Output directory (overrides the spec)");
    run->add_option("--jobs", run_opts.jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);
    run->add_option("--seed-offset", run_opts.seed_offset, "Added to every seed");
    bool run_verify = false;
    run->add_flag("--verify", run_verify, "Re-check artifact hashes after the run");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Sample-complexity calculators");
    ex::BoundsRequest breq;
    std::string bounds_input;
    auto& in = breq.inputs;
    bounds->add_option("--input", bounds_input, "JSON file with calculator inputs; flags override it");
    bounds->add_option("--norm", breq.calculator, "l1, l2, rkhs or all")
        ->check(CLI::IsMember({"l1", "l2", "rkhs", "all"}));
    auto* o_eps = bounds->add_option("--epsilon", in.epsilon, "Target accuracy");
    auto* o_delta = bounds->add_option("--delta", in.delta, "Failure probability");
    auto* o_vmax = bounds->add_option("--v-max", in.v_max, "Value bound");
    auto* o_gamma = bounds->add_option("--gamma", in.gamma, "Discount factor");
    auto* o_crm = bounds->add_option("--c-rho-mu", in.c_rho_mu, "Concentrability coefficient");
    auto* o_c = bounds->add_option("--c-const", in.c_const, "RPBF weight bound C");
    auto* o_na = bounds->add_option("--n-actions", in.n_actions, "Number of actions");
    auto* o_ck = bounds->add_option("--c-k", in.c_k, "RKHS constant C_K");
    auto* o_kappa = bounds->add_option("--kappa", in.kappa, "Kernel bound kappa");

    // chain
    auto* chain = app.add_subcommand("chain", "Dominating-chain steady state, simulation and mixing check");
    ex::ChainRequest creq;
    std::string chain_out;
    chain->add_option("--q", creq.q, "Decrement probability");
    chain->add_option("--k-star", creq.k_star, "Number of chain states")->check(CLI::PositiveNumber);
    chain->add_option("--steps", creq.steps, "Simulated steps");
    chain->add_option("--replicas", creq.replicas, "Replicas for the mixing check (0 skips it)");
    chain->add_option("--delta-prime", creq.delta_prime, "delta' for the mixing bound");
    chain->add_option("--seed", creq.seed, "RNG seed");
    chain->add_option("--out", chain_out, "Directory for occupancy.csv and chain.json");

    // dominance
    auto* dom = app.add_subcommand("dominance", "Empirical stochastic-dominance check on a run directory");
    ex::DominanceRequest dreq;
    std::string dom_dir, dom_csv, dom_estimator = "min-k";
    double dom_eps = 0.0, dom_q = 0.0;
    dom->add_option("run_dir", dom_dir, "Output directory of a run")->required();
    auto* o_deps = dom->add_option("--epsilon", dom_eps, "Good-iteration threshold (default: median residual)");
    dom->add_option("--k-star", dreq.options.k_star, "Chain size")->check(CLI::PositiveNumber);
    auto* o_dq = dom->add_option("--q", dom_q, "Override the estimated q");
    dom->add_option("--estimator", dom_estimator, "q estimator: min-k or pooled")
        ->check(CLI::IsMember({"min-k", "pooled"}));
    dom->add_option("--residual", dreq.residual, "auto, bellman_sup or fit_sup")
        ->check(CLI::IsMember({"auto", "bellman_sup", "fit_sup"}));
    dom->add_option("--out", dom_csv, "CSV destination (default: <run_dir>/dominance.csv)");

    // verify
    auto* verify = app.add_subcommand("verify", "Re-check the artifact hashes of a run directory");
    std::string verify_sub_dir;
    verify->add_option("run_dir", verify_sub_dir, "Output directory of a run")->required();

    CLI11_PARSE(app, argc, argv);

    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
    if (!verify_dir.empty() && app.get_subcommands().empty()) return ex::cmd_verify(verify_dir, out, err);

    if (run->parsed()) {
        if (!run_out.empty()) run_opts.output_dir = run_out;
        const int code = ex::cmd_run(spec_path, run_opts, out, err);
        if (code != ex::kExitOk || !run_verify) return code;
        const auto dir = run_opts.output_dir ? *run_opts.output_dir : ex::load_spec(spec_path).output_dir;
        return ex::cmd_verify(dir, out, err);
    }
    if (bounds->parsed()) {
        if (!bounds_input.empty()) {
            try {
                const auto flags = breq;
                breq = ex::bounds_request_from_json(nlohmann::json::parse(evl::io::read_file(bounds_input)), breq);
                // Flags given on the command line win over the file.
                auto keep = [](CLI::Option* o, double& dst, double src) {
                    if (o->count()) dst = src;
                };
                keep(o_eps, breq.inputs.epsilon, flags.inputs.epsilon);
                keep(o_delta, breq.inputs.delta, flags.inputs.delta);
                keep(o_vmax, breq.inputs.v_max, flags.inputs.v_max);
                keep(o_gamma, breq.inputs.gamma, flags.inputs.gamma);
                keep(o_crm, breq.inputs.c_rho_mu, flags.inputs.c_rho_mu);
                keep(o_c, breq.inputs.c_const, flags.inputs.c_const);
                keep(o_ck, breq.inputs.c_k, flags.inputs.c_k);
                keep(o_kappa, breq.inputs.kappa, flags.inputs.kappa);
                if (o_na->count()) breq.inputs.n_actions = flags.inputs.n_actions;
                if (bounds->get_option("--norm")->count()) breq.calculator = flags.calculator;
            } catch (const std::exception& e) {
                err << "bounds: " << bounds_input << ": " << e.what() << "\n";
                return ex::kExitInvalid;
            }
        }
        return ex::cmd_bounds(breq, out, err);
    }
    if (chain->parsed()) {
        if (!chain_out.empty()) creq.output_dir = chain_out;
        return ex::cmd_chain(creq, out, err);
    }
    if (dom->parsed()) {
        dreq.run_dir = dom_dir;
        if (o_deps->count()) dreq.options.epsilon = dom_eps;
        if (o_dq->count()) dreq.options.q = dom_q;
        dreq.options.estimator = evl::analysis::q_estimator_from_string(dom_estimator);
        if (!dom_csv.empty()) dreq.output = dom_csv;
        return ex::cmd_dominance(dreq, out, err);
    }
    if (verify->parsed()) return ex::cmd_verify(verify_sub_dir, out, err);
    std::cout << app.help();
    return ex::kExitInvalid;
}

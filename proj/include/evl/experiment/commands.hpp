#pragma once

#include "evl/analysis/bounds.hpp"
#include "evl/analysis/dominance.hpp"
#include "evl/experiment/runner.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace evl::experiment {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;

/// Loads the spec, runs it and prints a one-line JSON summary. Exit 2 on an invalid spec,
/// 1 when any seed failed (partial outputs are flagged in the manifest).
int cmd_run(const std::filesystem::path& spec_path, const RunOptions& options, std::ostream& out, std::ostream& err);

struct BoundsRequest {
    analysis::ComplexityInputs inputs;
    /// "l1", "l2", "rkhs" or "all".
    std::string calculator = "all";
};

/// Reads ComplexityInputs fields (and an optional "calculator") from a JSON object,
/// starting from `base`. Unknown keys are rejected.
BoundsRequest bounds_request_from_json(const nlohmann::json& j, BoundsRequest base = {});

/// Calculator outputs for both formula variants, as JSON.
nlohmann::json bounds_report(const BoundsRequest& request);
int cmd_bounds(const BoundsRequest& request, std::ostream& out, std::ostream& err);

struct ChainRequest {
    double q = 0.5;
    std::uint64_t k_star = 3;
    std::uint64_t steps = 1'000'000;
    std::uint64_t replicas = 100'000;
    double delta_prime = 0.1;
    std::uint64_t seed = 0;
    /// Directory for occupancy.csv and chain.json; stdout only when empty.
    std::optional<std::filesystem::path> output_dir;
};

nlohmann::json chain_report(const ChainRequest& request, std::string* occupancy_csv = nullptr);
int cmd_chain(const ChainRequest& request, std::ostream& out, std::ostream& err);

struct DominanceRequest {
    std::filesystem::path run_dir;
    analysis::DominanceOptions options;
    /// Trace column used as the per-iteration residual; "auto" picks bellman_sup when every
    /// row has it, else fit_sup.
    std::string residual = "auto";
    /// CSV destination; defaults to <run_dir>/dominance.csv.
    std::optional<std::filesystem::path> output;
};

/// Per-run residual trajectories from a run directory, plus the column actually used.
std::vector<std::vector<double>> load_residuals(const std::filesystem::path& run_dir, const std::string& residual,
                                                std::string* used = nullptr);
std::string dominance_csv(const analysis::DominanceReport& report);
int cmd_dominance(const DominanceRequest& request, std::ostream& out, std::ostream& err);

/// Exit 0 when every listed artifact is present with a matching hash.
int cmd_verify(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

}  // namespace evl::experiment

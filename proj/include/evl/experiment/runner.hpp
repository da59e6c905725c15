#pragma once

#include "evl/experiment/spec.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace evl::experiment {

struct RunOptions {
    /// Overrides the spec's output_dir.
    std::optional<std::filesystem::path> output_dir;
    /// Seeds run concurrently (0 = 1).
    std::size_t jobs = 1;
    /// Added to every seed in the spec.
    std::uint64_t seed_offset = 0;
};

struct SeedFailure {
    std::uint64_t seed = 0;
    std::size_t iteration = 0;
    std::string message;
};

struct RunSummary {
    std::filesystem::path output_dir;
    std::filesystem::path manifest;
    std::vector<std::uint64_t> seeds;
    std::vector<SeedFailure> failures;
    std::vector<RunTrace> traces;

    bool ok() const { return failures.empty(); }
};

/// Runs every seed of the spec and writes traces, checkpoints, final values, curves and
/// a manifest. `spec_text` is hashed into the manifest; `spec_label` is recorded verbatim.
RunSummary run_experiment(const ExperimentSpec& spec, const RunOptions& options, const std::string& spec_text,
                          const std::string& spec_label);

/// Checkpoint document {format, kind, basis, weights, clamp, iteration, seed}.
nlohmann::json checkpoint_json(const ValueFn& v, std::size_t iteration, std::uint64_t seed);
struct Checkpoint {
    ValueFn value;
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
};
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// Trace CSV text with the documented column order.
std::string trace_csv(const RunTrace& trace);

struct TraceRow {
    std::size_t iteration = 0;
    double fit_sup = 0.0;
    std::optional<double> bellman_sup;
    std::optional<double> rel_err_value;
    std::optional<double> rel_err_policy;
};

struct LoadedTrace {
    std::uint64_t seed = 0;
    std::vector<TraceRow> rows;
};

/// Reads the trace CSVs listed in a run directory's manifest.
std::vector<LoadedTrace> load_traces(const std::filesystem::path& run_dir);

struct VerifyReport {
    std::size_t checked = 0;
    std::vector<std::string> mismatched;
    std::vector<std::string> missing;

    bool ok() const { return mismatched.empty() && missing.empty(); }
};

/// Recomputes the content hash of every artifact listed in the manifest.
VerifyReport verify_run(const std::filesystem::path& run_dir);

/// Build and dependency versions recorded in manifests.
nlohmann::json version_info();

}  // namespace evl::experiment

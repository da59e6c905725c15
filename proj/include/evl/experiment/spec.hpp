#pragma once

#include "evl/engine.hpp"
#include "evl/env/acrobot.hpp"
#include "evl/env/cartpole.hpp"
#include "evl/env/replacement.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace evl::experiment {

enum class Algorithm { evl_rpbf, evl_rkhs, fvi_poly };

std::string to_string(Algorithm a);

using EnvironmentParams = std::variant<env::ReplacementParams, env::CartPoleParams, env::AcrobotParams>;

struct OracleSettings {
    std::size_t grid_n = 2000;
    double tol = 1e-10;
};

struct EvaluationSettings {
    /// Held-out grid size for residuals and relative errors (replacement).
    std::size_t grid_n = 201;
    bool bellman_residual = true;
    bool policy_error = true;
    /// Greedy-policy episodes (cart-pole, acrobot).
    std::size_t episodes = 100;
    std::size_t max_steps = 1000;
    std::size_t m_eval = 10;
    /// Half-width of the uniform start box around the origin for episodes.
    double start_halfwidth = 0.05;
};

/// State distribution: uniform on the model's bounds, or on an explicit box.
struct MuSettings {
    std::optional<Bounds> box;
};

/// One experiment family: an environment, an algorithm and a list of seeds.
struct ExperimentSpec {
    std::string name;
    EnvironmentParams environment;
    Algorithm algorithm = Algorithm::evl_rpbf;
    EvlConfig evl;
    MuSettings mu;
    std::optional<OracleSettings> oracle;
    EvaluationSettings evaluation;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_dir;

    std::string environment_id() const;
    MdpModel model() const;
};

/// Spec validation failure with a JSON pointer and, when it can be located, a 1-based
/// line number in the source text.
class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& message, std::string pointer, std::size_t line)
        : std::runtime_error(message), pointer_(std::move(pointer)), line_(line) {}

    const std::string& pointer() const { return pointer_; }
    std::size_t line() const { return line_; }
    std::string diagnostic() const;

private:
    std::string pointer_;
    std::size_t line_;
};

/// Parses and validates spec text (schema version 1); unknown fields are rejected.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);

}  // namespace evl::experiment

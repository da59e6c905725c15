#include "evl/experiment/runner.hpp"

#include "evl/analysis/policy_eval.hpp"
#include "evl/io/csv.hpp"
#include "evl/io/hash.hpp"
#include "evl/parallel.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace evl::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

json version_info() {
    return {{"evl_lab", EVL_LAB_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

json checkpoint_json(const ValueFn& v, std::size_t iteration, std::uint64_t seed) {
    json j = to_json(v);
    j["format"] = 1;
    j["iteration"] = iteration;
    j["seed"] = seed;
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    if (j.value("format", 0) != 1) throw ValidationError("unsupported checkpoint format", "format");
    return {value_fn_from_json(j), j.at("iteration").get<std::size_t>(), j.at("seed").get<std::uint64_t>()};
}

namespace {

const std::vector<std::string> kTraceColumns = {
    "iteration",      "fit_l1",       "fit_l2",         "fit_sup",           "bellman_sup",
    "bellman_l2",     "rel_err_value", "rel_err_policy", "fit_iterations",    "kkt_residual",
    "relative_residual", "condition_estimate", "active_constraints", "ridge_fallback"};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Linear-interpolation quantile of a nonempty sample.
double quantile(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    const double pos = p * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

struct Artifact {
    std::string path;
    std::string sha1;
    std::size_t bytes = 0;
    bool partial = false;
};

class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path root) : root_(std::move(root)) {}

    void write(const std::string& rel, const std::string& content, bool partial = false) {
        io::write_file_atomic(root_ / rel, content);
        std::lock_guard lock(mutex_);
        artifacts_[rel] = {rel, io::git_blob_sha1(content), content.size(), partial};
    }

    json list() const {
        json out = json::array();
        for (const auto& [rel, a] : artifacts_)
            out.push_back({{"path", a.path}, {"git_sha1", a.sha1}, {"bytes", a.bytes}, {"partial", a.partial}});
        return out;
    }

private:
    fs::path root_;
    std::mutex mutex_;
    std::map<std::string, Artifact> artifacts_;
};

std::string seed_tag(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::vector<State> uniform_grid_1d(double lo, double hi, std::size_t n) {
    std::vector<State> grid(n, State(1));
    for (std::size_t i = 0; i < n; ++i)
        grid[i][0] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

json episode_report(const ExperimentSpec& spec, const MdpModel& model, const ValueFn& v, std::uint64_t seed) {
    const EvaluationSettings& ev = spec.evaluation;
    Bounds start_box;
    if (spec.environment.index() == 1) {
        for (int i = 0; i < 4; ++i) start_box.push_back({-ev.start_halfwidth, ev.start_halfwidth});
    }
    StateSampler start;
    if (spec.environment.index() == 2) {
        // Acrobot starts near hanging rest with small angle and velocity perturbations.
        const double hw = ev.start_halfwidth;
        start = [hw](Rng& rng) {
            env::AcrobotCoords c{rng.uniform(-hw, hw), rng.uniform(-hw, hw), rng.uniform(-hw, hw), rng.uniform(-hw, hw)};
            return env::acrobot_observation(c);
        };
    } else {
        start = uniform_box_sampler(start_box);
    }
    const Rng eval_rng(derive_seed(seed, {0x65'76'61'6cULL}));
    const auto greedy = analysis::episode_lengths(model, analysis::greedy_policy(model, v, ev.m_eval), start,
                                                  ev.episodes, ev.max_steps, eval_rng.substream({0}));
    const auto random = analysis::episode_lengths(model, analysis::random_policy(model), start, ev.episodes,
                                                  ev.max_steps, eval_rng.substream({1}));
    double gm = 0.0, rm = 0.0;
    for (double x : greedy) gm += x;
    for (double x : random) rm += x;
    return {{"format", 1},
            {"seed", seed},
            {"environment", spec.environment_id()},
            {"episodes", ev.episodes},
            {"max_steps", ev.max_steps},
            {"m_eval", ev.m_eval},
            {"greedy_median_steps", analysis::median(greedy)},
            {"greedy_mean_steps", gm / static_cast<double>(greedy.size())},
            {"random_median_steps", analysis::median(random)},
            {"random_mean_steps", rm / static_cast<double>(random.size())}};
}

std::string curve_csv(const std::vector<RunTrace>& traces, std::size_t k_iters) {
    io::CsvWriter w({"iteration", "runs", "rel_err_value_median", "rel_err_value_q25", "rel_err_value_q75",
                     "rel_err_policy_median", "fit_sup_median", "bellman_sup_median"});
    for (std::size_t k = 1; k <= k_iters; ++k) {
        std::vector<double> val, pol, fit, bel;
        for (const auto& t : traces) {
            if (t.records.size() < k) continue;
            const auto& r = t.records[k - 1];
            if (r.rel_err_value) val.push_back(*r.rel_err_value);
            if (r.rel_err_policy) pol.push_back(*r.rel_err_policy);
            if (r.bellman_sup) bel.push_back(*r.bellman_sup);
            fit.push_back(r.fit_sup);
        }
        if (fit.empty()) break;
        auto q = [](const std::vector<double>& x, double p) {
            return x.empty() ? std::string() : io::format_double(quantile(x, p));
        };
        w.row({std::to_string(k), std::to_string(fit.size()), q(val, 0.5), q(val, 0.25), q(val, 0.75), q(pol, 0.5),
               q(fit, 0.5), q(bel, 0.5)});
    }
    return w.str();
}

}  // namespace

std::string trace_csv(const RunTrace& trace) {
    io::CsvWriter w(kTraceColumns);
    for (const auto& r : trace.records) {
        w.row({std::to_string(r.k), io::format_double(r.fit_l1), io::format_double(r.fit_l2),
               io::format_double(r.fit_sup), io::format_optional(r.bellman_sup), io::format_optional(r.bellman_l2),
               io::format_optional(r.rel_err_value), io::format_optional(r.rel_err_policy),
               std::to_string(r.diagnostics.iterations), io::format_double(r.diagnostics.kkt_residual),
               io::format_double(r.diagnostics.relative_residual), io::format_double(r.diagnostics.condition_estimate),
               std::to_string(r.diagnostics.active_constraints), r.diagnostics.ridge_fallback ? "1" : "0"});
    }
    return w.str();
}

RunSummary run_experiment(const ExperimentSpec& spec, const RunOptions& options, const std::string& spec_text,
                          const std::string& spec_label) {
    RunSummary summary;
    summary.output_dir = options.output_dir ? *options.output_dir : spec.output_dir;
    for (auto s : spec.seeds) summary.seeds.push_back(s + options.seed_offset);
    fs::create_directories(summary.output_dir);
    ArtifactWriter writer(summary.output_dir);

    const MdpModel model = spec.model();
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, summary.seeds.size()));
    const std::size_t inner_threads = std::max<std::size_t>(1, thread_limit() / jobs);

    // Replacement runs share one grid oracle and held-out grid.
    std::optional<env::ReplacementOracle> oracle;
    TraceOracle trace_oracle;
    if (const auto* rp = std::get_if<env::ReplacementParams>(&spec.environment)) {
        const OracleSettings os = spec.oracle.value_or(OracleSettings{});
        oracle.emplace(*rp, os.grid_n, os.tol);
        trace_oracle.grid = uniform_grid_1d(0.0, rp->s_max, spec.evaluation.grid_n);
        trace_oracle.v_star = evaluate_value_fn(oracle->value_fn(), trace_oracle.grid);
        if (!spec.evaluation.bellman_residual)
            trace_oracle.bellman = [](const ValueFn&) { return std::vector<double>{}; };
        if (spec.evaluation.policy_error) {
            const env::ReplacementOracle* o = &*oracle;
            const auto grid = trace_oracle.grid;
            trace_oracle.policy_values = [o, grid](const ValueFn& v) { return o->greedy_policy_values(v, grid); };
        }
    }

    std::vector<RunTrace> traces(summary.seeds.size());
    std::vector<std::optional<SeedFailure>> failures(summary.seeds.size());
    parallel_for(summary.seeds.size(), [&](std::size_t idx) {
        const std::uint64_t seed = summary.seeds[idx];
        EvlConfig cfg = spec.evl;
        cfg.seed = seed;
        cfg.threads = inner_threads;
        const std::string tag = seed_tag(seed);
        const CheckpointFn checkpoint = [&](std::size_t k, const ValueFn& v) {
            writer.write("checkpoints/" + tag + "/iter_" + std::to_string(k) + ".json", dump(checkpoint_json(v, k, seed)));
        };
        try {
            EvlResult res = run_evl(model, cfg, std::nullopt, oracle ? &trace_oracle : nullptr, checkpoint);
            writer.write("traces/" + tag + ".csv", trace_csv(res.trace));
            writer.write("values/" + tag + ".json", dump(checkpoint_json(res.value, cfg.k_iters, seed)));
            if (model.terminal) writer.write("eval/" + tag + ".json", dump(episode_report(spec, model, res.value, seed)));
            traces[idx] = std::move(res.trace);
        } catch (const EvlError& e) {
            writer.write("traces/" + tag + ".csv", trace_csv(e.partial_trace()), true);
            traces[idx] = e.partial_trace();
            failures[idx] = SeedFailure{seed, e.failed_iteration(), e.what()};
        } catch (const std::exception& e) {
            failures[idx] = SeedFailure{seed, 0, e.what()};
        }
    }, jobs);

    summary.traces = traces;
    json failure_list = json::array();
    for (const auto& f : failures) {
        if (!f) continue;
        summary.failures.push_back(*f);
        failure_list.push_back({{"seed", f->seed}, {"iteration", f->iteration}, {"message", f->message}});
    }

    {
        io::CsvWriter w({"seed", "status", "iterations", "rel_err_value_first", "rel_err_value_final",
                         "rel_err_policy_final", "fit_sup_final", "bellman_sup_final"});
        for (std::size_t i = 0; i < summary.seeds.size(); ++i) {
            const auto& rec = traces[i].records;
            const IterationRecord* first = rec.empty() ? nullptr : &rec.front();
            const IterationRecord* last = rec.empty() ? nullptr : &rec.back();
            w.row({std::to_string(summary.seeds[i]), failures[i] ? "failed" : "complete", std::to_string(rec.size()),
                   first ? io::format_optional(first->rel_err_value) : "",
                   last ? io::format_optional(last->rel_err_value) : "",
                   last ? io::format_optional(last->rel_err_policy) : "",
                   last ? io::format_double(last->fit_sup) : "", last ? io::format_optional(last->bellman_sup) : ""});
        }
        writer.write("summary.csv", w.str(), !summary.ok());
    }
    writer.write("curve.csv", curve_csv(traces, spec.evl.k_iters), !summary.ok());
    if (oracle) {
        io::CsvWriter w({"s", "v_star"});
        for (std::size_t i = 0; i < trace_oracle.grid.size(); ++i)
            w.row({io::format_double(trace_oracle.grid[i][0]), io::format_double(trace_oracle.v_star[i])});
        writer.write("oracle.csv", w.str());
    }

    json manifest = {{"format", 1},
                     {"tool", "evl_lab"},
                     {"name", spec.name},
                     {"environment", spec.environment_id()},
                     {"algorithm", to_string(spec.algorithm)},
                     {"spec", {{"path", spec_label}, {"sha256", io::sha256_hex(spec_text)}}},
                     {"seed_offset", options.seed_offset},
                     {"seeds", summary.seeds},
                     {"status", summary.ok() ? "complete" : "failed"},
                     {"failures", failure_list},
                     {"artifacts", writer.list()},
                     {"versions", version_info()}};
    summary.manifest = summary.output_dir / "manifest.json";
    io::write_file_atomic(summary.manifest, dump(manifest));
    return summary;
}

std::vector<LoadedTrace> load_traces(const fs::path& run_dir) {
    const json manifest = json::parse(io::read_file(run_dir / "manifest.json"));
    std::vector<LoadedTrace> out;
    for (const auto& a : manifest.at("artifacts")) {
        const auto path = a.at("path").get<std::string>();
        if (path.rfind("traces/seed_", 0) != 0) continue;
        LoadedTrace t;
        t.seed = std::stoull(path.substr(std::string("traces/seed_").size()));
        const auto rows = io::parse_csv(io::read_file(run_dir / path));
        if (rows.empty()) throw ValidationError("empty trace file " + path);
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < rows[0].size(); ++i) col[rows[0][i]] = i;
        for (const char* name : {"iteration", "fit_sup", "bellman_sup", "rel_err_value", "rel_err_policy"})
            if (!col.count(name)) throw ValidationError(std::string("trace file lacks column ") + name, path);
        auto opt = [](const std::string& s) { return s.empty() ? std::optional<double>() : std::stod(s); };
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& f = rows[r];
            if (f.size() != rows[0].size()) throw ValidationError("ragged row in " + path);
            TraceRow row;
            row.iteration = std::stoul(f[col["iteration"]]);
            row.fit_sup = std::stod(f[col["fit_sup"]]);
            row.bellman_sup = opt(f[col["bellman_sup"]]);
            row.rel_err_value = opt(f[col["rel_err_value"]]);
            row.rel_err_policy = opt(f[col["rel_err_policy"]]);
            t.rows.push_back(row);
        }
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
    return out;
}

VerifyReport verify_run(const fs::path& run_dir) {
    const json manifest = json::parse(io::read_file(run_dir / "manifest.json"));
    VerifyReport rep;
    for (const auto& a : manifest.at("artifacts")) {
        const auto path = a.at("path").get<std::string>();
        ++rep.checked;
        if (!fs::exists(run_dir / path)) {
            rep.missing.push_back(path);
            continue;
        }
        if (io::git_blob_sha1(io::read_file(run_dir / path)) != a.at("git_sha1").get<std::string>())
            rep.mismatched.push_back(path);
    }
    return rep;
}

}  // namespace evl::experiment

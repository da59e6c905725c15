#include "evl/experiment/commands.hpp"
#include "evl/io/csv.hpp"
#include "evl/io/hash.hpp"

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <map>
#include <sstream>

using namespace evl;
using namespace evl::experiment;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("evl_lab_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json small_spec(const fs::path& out, std::uint64_t seeds = 3) {
    json j = json::parse(R"({
      "schema": 1,
      "name": "small",
      "environment": {"id": "replacement", "params": {"gamma": 0.6}},
      "algorithm": "evl-rpbf",
      "evl": {"n_states": 40, "m_next": 3, "j_features": 5, "k_iters": 5, "checkpoint_every": 2},
      "fitter": {"omega_variance": 0.01},
      "oracle": {"grid_n": 300},
      "evaluation": {"grid_n": 41}
    })");
    j["seeds"] = {{"start", 10}, {"count", seeds}};
    j["output_dir"] = out.string();
    return j;
}

SpecError spec_error_of(const std::string& text) {
    try {
        parse_spec(text);
    } catch (const SpecError& e) {
        return e;
    }
    FAIL("expected SpecError");
    return SpecError("", "", 0);
}

std::map<std::string, std::string> artifact_hashes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    const json manifest = json::parse(io::read_file(dir / "manifest.json"));
    for (const auto& a : manifest["artifacts"])
        out[a["path"].get<std::string>()] = a["git_sha1"].get<std::string>();
    return out;
}

}  // namespace

TEST_SUITE("experiment") {
    TEST_CASE("bundled examples parse") {
        for (const char* name : {"replacement_rpbf.json", "replacement_rkhs.json", "replacement_fvi.json",
                                 "cartpole_rpbf.json", "acrobot_rpbf.json"}) {
            CAPTURE(name);
            const auto spec = load_spec(fs::path(EVL_LAB_SOURCE_DIR) / "experiments" / name);
            CHECK_FALSE(spec.seeds.empty());
        }
        const auto rpbf_spec = load_spec(fs::path(EVL_LAB_SOURCE_DIR) / "experiments" / "replacement_rpbf.json");
        CHECK(rpbf_spec.evl.n_states == 100);
        CHECK(rpbf_spec.evl.m_next == 5);
        CHECK(rpbf_spec.evl.j_features == 5u);
        CHECK(rpbf_spec.evl.k_iters == 20);
        CHECK(rpbf_spec.evl.rpbf.omega_variance == 0.01);
        CHECK(rpbf_spec.seeds.size() == 10);
    }

    TEST_CASE("j_features with the rkhs fitter is rejected with a location") {
        json j = small_spec("/tmp/x");
        j["algorithm"] = "evl-rkhs";
        j["fitter"] = json::object();
        const auto e = spec_error_of(j.dump(2));
        CHECK(e.pointer() == "/evl/j_features");
        CHECK(e.line() > 0);
        CHECK(e.diagnostic().find("j_features") != std::string::npos);
    }

    TEST_CASE("unknown fields, bad values and malformed text") {
        json j = small_spec("/tmp/x");
        j["evl"]["bogus"] = 1;
        const std::string text = j.dump(2);
        auto e = spec_error_of(text);
        CHECK(e.pointer() == "/evl/bogus");
        std::istringstream in(text);
        std::string line;
        for (std::size_t i = 0; i < e.line(); ++i) std::getline(in, line);
        CHECK(line.find("bogus") != std::string::npos);

        j = small_spec("/tmp/x");
        j["seeds"] = json::array();
        CHECK(spec_error_of(j.dump()).pointer() == "/seeds");
        j["seeds"] = {1, 2, 1};
        CHECK(spec_error_of(j.dump()).pointer() == "/seeds");
        j = small_spec("/tmp/x");
        j["schema"] = 2;
        CHECK(spec_error_of(j.dump()).pointer() == "/schema");
        j = small_spec("/tmp/x");
        j["environment"] = {{"id", "cartpole"}};
        CHECK(spec_error_of(j.dump()).pointer() == "/oracle");
        j = small_spec("/tmp/x");
        j["environment"]["params"]["gamma"] = 1.5;
        CHECK(spec_error_of(j.dump()).pointer().rfind("/environment", 0) == 0);
        j = small_spec("/tmp/x");
        j["evl"]["n_states"] = "many";
        CHECK(spec_error_of(j.dump()).pointer() == "/evl/n_states");

        e = spec_error_of("{\n  \"schema\": 1,\n  \"name\": \n}");
        CHECK(e.line() == 4);
    }

    TEST_CASE("runs are byte-reproducible and independent of --jobs") {
        const fs::path a = scratch("run_a"), b = scratch("run_b");
        const json j = small_spec(a);
        const std::string text = j.dump(2);
        const auto spec = parse_spec(text);
        const auto s1 = run_experiment(spec, {}, text, "spec.json");
        REQUIRE(s1.ok());
        RunOptions two;
        two.jobs = 2;
        two.output_dir = b;
        run_experiment(spec, two, text, "spec.json");
        const auto ha = artifact_hashes(a), hb = artifact_hashes(b);
        CHECK(ha == hb);
        CHECK(io::read_file(a / "manifest.json") == io::read_file(b / "manifest.json"));
        run_experiment(spec, {}, text, "spec.json");
        CHECK(artifact_hashes(a) == ha);

        CHECK(ha.count("traces/seed_10.csv"));
        CHECK(ha.count("values/seed_12.json"));
        CHECK(ha.count("checkpoints/seed_11/iter_2.json"));
        CHECK(ha.count("checkpoints/seed_11/iter_5.json"));
        CHECK(ha.count("curve.csv"));
        CHECK(ha.count("summary.csv"));
        for (const auto& [path, sha] : ha) CHECK(io::git_blob_sha1(io::read_file(a / path)) == sha);

        const json manifest = json::parse(io::read_file(a / "manifest.json"));
        CHECK(manifest["status"] == "complete");
        CHECK(manifest["spec"]["sha256"] == io::sha256_hex(text));
        CHECK(manifest["seeds"] == json({10, 11, 12}));
    }

    TEST_CASE("trace files, checkpoints and loaders agree") {
        const fs::path dir = scratch("run_c");
        const std::string text = small_spec(dir, 2).dump();
        const auto summary = run_experiment(parse_spec(text), {}, text, "inline");
        const auto rows = io::parse_csv(io::read_file(dir / "traces" / "seed_10.csv"));
        REQUIRE(rows.size() == 6);
        CHECK(rows[0] == std::vector<std::string>{"iteration", "fit_l1", "fit_l2", "fit_sup", "bellman_sup",
                                                  "bellman_l2", "rel_err_value", "rel_err_policy", "fit_iterations",
                                                  "kkt_residual", "relative_residual", "condition_estimate",
                                                  "active_constraints", "ridge_fallback"});
        const auto traces = load_traces(dir);
        REQUIRE(traces.size() == 2);
        CHECK(traces[0].seed == 10);
        REQUIRE(traces[0].rows.size() == 5);
        CHECK(traces[0].rows[4].fit_sup == summary.traces[0].records[4].fit_sup);
        CHECK(traces[0].rows[4].rel_err_value == summary.traces[0].records[4].rel_err_value);

        const auto cp = checkpoint_from_json(json::parse(io::read_file(dir / "values" / "seed_11.json")));
        CHECK(cp.seed == 11);
        CHECK(cp.iteration == 5);
        const auto spec = parse_spec(text);
        EvlConfig cfg = spec.evl;
        cfg.seed = 11;
        const auto direct = run_evl(spec.model(), cfg);
        for (double s : {0.0, 3.3, 9.9}) {
            State x(1);
            x << s;
            CHECK(cp.value(x) == direct.value(x));
        }
    }

    TEST_CASE("verify detects tampering and missing files") {
        const fs::path dir = scratch("run_d");
        const std::string text = small_spec(dir, 1).dump();
        run_experiment(parse_spec(text), {}, text, "inline");
        std::ostringstream out, err;
        CHECK(cmd_verify(dir, out, err) == kExitOk);
        io::write_file_atomic(dir / "curve.csv", "tampered\n");
        fs::remove(dir / "summary.csv");
        const auto rep = verify_run(dir);
        CHECK(rep.mismatched == std::vector<std::string>{"curve.csv"});
        CHECK(rep.missing == std::vector<std::string>{"summary.csv"});
        CHECK(cmd_verify(dir, out, err) == kExitFailure);
    }

    TEST_CASE("cmd_run exit codes") {
        const fs::path dir = scratch("run_e");
        std::ostringstream out, err;
        json bad = small_spec(dir);
        bad["algorithm"] = "evl-rkhs";
        bad["fitter"] = json::object();
        io::write_file_atomic(dir / "bad.json", bad.dump(2));
        CHECK(cmd_run(dir / "bad.json", {}, out, err) == kExitInvalid);
        CHECK(err.str().find("line") != std::string::npos);
        CHECK(err.str().find("/evl/j_features") != std::string::npos);

        // An output path blocked by a regular file is a runtime failure.
        io::write_file_atomic(dir / "blocker", "x");
        const json good = small_spec(dir / "blocker" / "out", 1);
        io::write_file_atomic(dir / "good.json", good.dump(2));
        CHECK(cmd_run(dir / "good.json", {}, out, err) == kExitFailure);
        CHECK(cmd_run(dir / "missing.json", {}, out, err) == kExitInvalid);
    }

    TEST_CASE("cmd_bounds emits integer fields for both variants") {
        BoundsRequest r;
        r.calculator = "l1";
        r.inputs.epsilon = 0.1;
        r.inputs.delta = 0.05;
        r.inputs.v_max = 75.0;
        r.inputs.gamma = 0.6;
        const json a = bounds_report(r);
        for (const char* v : {"display", "appendix"}) {
            const auto& x = a["rpbf_l1"][v];
            CHECK(x["variant"] == v);
            for (const char* f : {"N", "M", "J", "K_star", "K_min"}) CHECK(x[f].is_number_unsigned());
            CHECK(x["K_star"] == 15);
        }
        CHECK_FALSE(a.contains("rkhs"));
        r.inputs.epsilon = 0.05;
        const json b = bounds_report(r);
        for (const char* v : {"display", "appendix"})
            for (const char* f : {"N", "M", "J", "K_min"}) {
                CAPTURE(f);
                CHECK(b["rpbf_l1"][v]["raw"][f].get<double>() > a["rpbf_l1"][v]["raw"][f].get<double>());
                CHECK(b["rpbf_l1"][v][f].get<std::uint64_t>() > a["rpbf_l1"][v][f].get<std::uint64_t>());
            }
        const auto from_json = bounds_request_from_json(json{{"epsilon", 0.2}, {"calculator", "rkhs"}});
        CHECK(from_json.inputs.epsilon == 0.2);
        CHECK(from_json.calculator == "rkhs");
        CHECK_THROWS_AS(bounds_request_from_json(json{{"eps", 0.2}}), ValidationError);
        std::ostringstream out, err;
        BoundsRequest invalid;
        invalid.inputs.delta = 2.0;
        CHECK(cmd_bounds(invalid, out, err) == kExitInvalid);
    }

    TEST_CASE("cmd_chain writes the occupancy CSV and report") {
        const fs::path dir = scratch("chain");
        ChainRequest r;
        r.steps = 200000;
        r.replicas = 20000;
        r.output_dir = dir;
        std::ostringstream out, err;
        REQUIRE(cmd_chain(r, out, err) == kExitOk);
        const auto rows = io::parse_csv(io::read_file(dir / "occupancy.csv"));
        CHECK(rows.size() == 4);
        const json rep = json::parse(io::read_file(dir / "chain.json"));
        CHECK(rep["mixing"]["bound"] == 5);
        CHECK(rep["total_variation"].get<double>() < 0.01);
        CHECK(rep["stationarity_residual"].get<double>() <= 1e-12);
        r.q = 1.0;
        r.output_dir.reset();
        CHECK(chain_report(r)["mixing"].is_null());
        r.q = 2.0;
        CHECK(cmd_chain(r, out, err) == kExitInvalid);
    }

    TEST_CASE("cmd_dominance reads a run directory") {
        const fs::path dir = scratch("dom");
        json j = small_spec(dir / "run", 30);
        j["evl"]["checkpoint_every"] = 0;
        const std::string text = j.dump();
        run_experiment(parse_spec(text), {}, text, "inline");
        DominanceRequest r;
        r.run_dir = dir / "run";
        std::ostringstream out, err;
        REQUIRE(cmd_dominance(r, out, err) == kExitOk);
        const json rep = json::parse(out.str());
        CHECK(rep["runs"] == 30);
        CHECK(rep["residual"] == "bellman_sup");
        const auto rows = io::parse_csv(io::read_file(dir / "run" / "dominance.csv"));
        CHECK(rows[0] == std::vector<std::string>{"k", "theta", "px", "py", "stderr", "flag"});
        CHECK(rows.size() == 1 + 6 * 5);
        std::string used;
        load_residuals(r.run_dir, "fit_sup", &used);
        CHECK(used == "fit_sup");
        r.residual = "nonsense";
        CHECK(cmd_dominance(r, out, err) == kExitInvalid);
    }
}

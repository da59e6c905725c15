#include "evl/experiment/spec.hpp"

#include "evl/io/hash.hpp"

#include <set>

namespace evl::experiment {

using nlohmann::json;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::evl_rpbf: return "evl-rpbf";
        case Algorithm::evl_rkhs: return "evl-rkhs";
        case Algorithm::fvi_poly: return "fvi-poly";
    }
    return "unknown";
}

std::string ExperimentSpec::environment_id() const {
    switch (environment.index()) {
        case 0: return "replacement";
        case 1: return "cartpole";
        default: return "acrobot";
    }
}

MdpModel ExperimentSpec::model() const {
    return std::visit(
        [](const auto& p) -> MdpModel {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, env::ReplacementParams>) return env::replacement_model(p);
            else if constexpr (std::is_same_v<P, env::CartPoleParams>) return env::cartpole_model(p);
            else return env::acrobot_model(p);
        },
        environment);
}

std::string SpecError::diagnostic() const {
    std::string out = "invalid spec";
    if (line_ > 0) out += " (line " + std::to_string(line_) + ")";
    if (!pointer_.empty()) out += " at " + pointer_;
    return out + ": " + what();
}

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// Strict view of one JSON object: every key must be consumed before finish().
class Fields {
public:
    Fields(const json& j, std::string pointer, const std::string& text, std::size_t search_from = 0)
        : j_(j), pointer_(std::move(pointer)), text_(text), from_(search_from) {
        if (!j_.is_object()) fail("expected an object", pointer_);
    }

    [[noreturn]] void fail(const std::string& message, const std::string& pointer) const {
        std::size_t line = 0;
        const auto slash = pointer.find_last_of('/');
        if (slash != std::string::npos && slash + 1 < pointer.size()) {
            const auto pos = text_.find("\"" + pointer.substr(slash + 1) + "\"", from_);
            if (pos != std::string::npos) line = line_of_offset(text_, pos);
        }
        if (line == 0 && from_ > 0) line = line_of_offset(text_, from_);
        throw SpecError(message, pointer, line);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    T get(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) fail("required field is missing", pointer_ + "/" + key);
        return convert<T>(key);
    }

    template <class T>
    T get_or(const std::string& key, T fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        return convert<T>(key);
    }

    template <class T>
    std::optional<T> maybe(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
        return convert<T>(key);
    }

    Fields object(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) fail("required object is missing", pointer_ + "/" + key);
        return Fields(j_.at(key), pointer_ + "/" + key, text_, key_offset(key));
    }

    std::optional<Fields> maybe_object(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) return std::nullopt;
        return Fields(j_.at(key), pointer_ + "/" + key, text_, key_offset(key));
    }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!used_.count(key)) fail("unknown field '" + key + "'", pointer_ + "/" + key);
    }

    const std::string& pointer() const { return pointer_; }

private:
    std::size_t key_offset(const std::string& key) const {
        const auto pos = text_.find("\"" + key + "\"", from_);
        return pos == std::string::npos ? from_ : pos;
    }

    template <class T>
    T convert(const std::string& key) const {
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.is_number_integer() && v.get<long long>() < 0 && !v.is_number_unsigned())
                        throw std::invalid_argument("expected a nonnegative integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            }
            return v.get<T>();
        } catch (const std::exception& e) {
            fail(e.what(), pointer_ + "/" + key);
        }
    }

    const json& j_;
    std::string pointer_;
    const std::string& text_;
    std::size_t from_;
    std::set<std::string> used_;
};

std::vector<double> number_list(Fields& f, const std::string& key) {
    const json& v = f.raw(key);
    if (!v.is_array()) f.fail("expected an array of numbers", f.pointer() + "/" + key);
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) f.fail("expected an array of numbers", f.pointer() + "/" + key);
        out.push_back(x.get<double>());
    }
    return out;
}

env::ReplacementParams parse_replacement(std::optional<Fields> f) {
    env::ReplacementParams p;
    if (!f) return p;
    p.gamma = f->get_or("gamma", p.gamma);
    p.lambda_rate = f->get_or("lambda_rate", p.lambda_rate);
    p.replace_cost = f->get_or("replace_cost", p.replace_cost);
    p.maint_coeff = f->get_or("maint_coeff", p.maint_coeff);
    p.s_max = f->get_or("s_max", p.s_max);
    p.quadrature_panels = f->get_or<std::size_t>("quadrature_panels", p.quadrature_panels);
    f->finish();
    return p;
}

env::CartPoleParams parse_cartpole(std::optional<Fields> f) {
    env::CartPoleParams p;
    if (!f) return p;
    p.m_c = f->get_or("m_c", p.m_c);
    p.m_p = f->get_or("m_p", p.m_p);
    p.l = f->get_or("l", p.l);
    p.g = f->get_or("g", p.g);
    p.tau = f->get_or("tau", p.tau);
    p.force_mag = f->get_or("force_mag", p.force_mag);
    p.noise_frac = f->get_or("noise_frac", p.noise_frac);
    p.fail_x = f->get_or("fail_x", p.fail_x);
    p.fail_theta = f->get_or("fail_theta", p.fail_theta);
    p.gamma = f->get_or("gamma", p.gamma);
    p.max_x_dot = f->get_or("max_x_dot", p.max_x_dot);
    p.max_theta_dot = f->get_or("max_theta_dot", p.max_theta_dot);
    f->finish();
    return p;
}

env::AcrobotParams parse_acrobot(std::optional<Fields> f) {
    env::AcrobotParams p;
    if (!f) return p;
    p.link_length_1 = f->get_or("link_length_1", p.link_length_1);
    p.link_length_2 = f->get_or("link_length_2", p.link_length_2);
    p.link_mass_1 = f->get_or("link_mass_1", p.link_mass_1);
    p.link_mass_2 = f->get_or("link_mass_2", p.link_mass_2);
    p.link_com_1 = f->get_or("link_com_1", p.link_com_1);
    p.link_com_2 = f->get_or("link_com_2", p.link_com_2);
    p.link_moi = f->get_or("link_moi", p.link_moi);
    p.g = f->get_or("g", p.g);
    p.max_vel_1 = f->get_or("max_vel_1", p.max_vel_1);
    p.max_vel_2 = f->get_or("max_vel_2", p.max_vel_2);
    p.dt = f->get_or("dt", p.dt);
    p.substeps = f->get_or<std::size_t>("substeps", p.substeps);
    p.torque_noise = f->get_or("torque_noise", p.torque_noise);
    p.gamma = f->get_or("gamma", p.gamma);
    f->finish();
    return p;
}

// Runs a validator and rethrows ValidationError as a SpecError located under `f`.
template <class Fn>
void located(const Fields& f, Fn&& fn) {
    try {
        fn();
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        if (!e.field().empty()) {
            const auto prefix = e.field() + ": ";
            if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
        }
        f.fail(msg, e.field().empty() ? f.pointer() : f.pointer() + "/" + e.field());
    }
}

}  // namespace

namespace {

ExperimentSpec parse_spec_impl(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("malformed JSON: ") + e.what(), "", line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    Fields top(root, "", text);
    ExperimentSpec spec;

    const auto schema = top.get<int>("schema");
    if (schema != 1) top.fail("unsupported schema version " + std::to_string(schema) + " (expected 1)", "/schema");
    spec.name = top.get_or<std::string>("name", "experiment");

    {
        Fields env = top.object("environment");
        const auto id = env.get<std::string>("id");
        auto params = env.maybe_object("params");
        if (id == "replacement") spec.environment = parse_replacement(std::move(params));
        else if (id == "cartpole") spec.environment = parse_cartpole(std::move(params));
        else if (id == "acrobot") spec.environment = parse_acrobot(std::move(params));
        else env.fail("unknown environment '" + id + "' (expected replacement, cartpole or acrobot)", "/environment/id");
        env.finish();
        located(env, [&] {
            std::visit([](const auto& p) { p.validate(); }, spec.environment);
        });
    }

    const auto algorithm = top.get<std::string>("algorithm");
    if (algorithm == "evl-rpbf") spec.algorithm = Algorithm::evl_rpbf;
    else if (algorithm == "evl-rkhs") spec.algorithm = Algorithm::evl_rkhs;
    else if (algorithm == "fvi-poly") spec.algorithm = Algorithm::fvi_poly;
    else top.fail("unknown algorithm '" + algorithm + "' (expected evl-rpbf, evl-rkhs or fvi-poly)", "/algorithm");

    const MdpModel model = spec.model();
    EvlConfig& cfg = spec.evl;
    cfg.fitter = spec.algorithm == Algorithm::evl_rpbf   ? FitterKind::rpbf
                 : spec.algorithm == Algorithm::evl_rkhs ? FitterKind::rkhs
                                                         : FitterKind::polynomial;
    {
        Fields evl = top.object("evl");
        cfg.n_states = evl.get<std::size_t>("n_states");
        cfg.m_next = evl.get<std::size_t>("m_next");
        cfg.j_features = evl.maybe<std::size_t>("j_features");
        cfg.k_iters = evl.get<std::size_t>("k_iters");
        cfg.checkpoint_every = evl.get_or<std::size_t>("checkpoint_every", 0);
        cfg.clamp = evl.get_or("clamp", true);
        cfg.box.tol = evl.get_or("box_tol", cfg.box.tol);
        cfg.box.max_iterations = evl.get_or<std::size_t>("box_max_iterations", cfg.box.max_iterations);
        if (auto mu = evl.maybe_object("mu")) {
            const auto kind = mu->get<std::string>("kind");
            if (kind == "box") {
                const auto lo = number_list(*mu, "lo");
                const auto hi = number_list(*mu, "hi");
                if (lo.size() != model.state_dim || hi.size() != model.state_dim)
                    mu->fail("lo and hi need one entry per state dimension (" + std::to_string(model.state_dim) + ")",
                             mu->pointer() + "/lo");
                Bounds box;
                for (std::size_t i = 0; i < lo.size(); ++i) {
                    if (!(hi[i] >= lo[i])) mu->fail("hi must not be below lo", mu->pointer() + "/hi");
                    box.push_back({lo[i], hi[i]});
                }
                spec.mu.box = box;
            } else if (kind != "uniform") {
                mu->fail("unknown state distribution '" + kind + "' (expected uniform or box)", mu->pointer() + "/kind");
            }
            mu->finish();
        }
        evl.finish();
        if (spec.mu.box) cfg.mu = uniform_box_sampler(*spec.mu.box);

        Fields fit = top.object("fitter");
        switch (cfg.fitter) {
            case FitterKind::rpbf:
                cfg.rpbf.kind = feature_kind_from_string(fit.get_or<std::string>("feature", "fourier"));
                cfg.rpbf.omega_variance = fit.get_or("omega_variance", cfg.rpbf.omega_variance);
                cfg.rpbf.threshold_range = fit.get_or("threshold_range", cfg.rpbf.threshold_range);
                cfg.rpbf.c_bound = fit.get_or("c_bound", cfg.rpbf.c_bound);
                if (fit.has("input_scale")) {
                    const auto scale = number_list(fit, "input_scale");
                    cfg.rpbf.input_scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
                }
                break;
            case FitterKind::rkhs:
                cfg.rkhs.kernel.kind = kernel_kind_from_string(fit.get_or<std::string>("kernel", "gaussian"));
                cfg.rkhs.kernel.param = fit.get_or("kernel_param", cfg.rkhs.kernel.param);
                cfg.rkhs.lambda = fit.get_or("lambda", cfg.rkhs.lambda);
                break;
            case FitterKind::polynomial: cfg.poly_degree = fit.get_or("degree", cfg.poly_degree); break;
        }
        fit.finish();
        // Field names below are relative to /evl or /fitter depending on origin.
        try {
            cfg.validate(model);
        } catch (const ValidationError& e) {
            const std::string field = e.field();
            const bool in_fitter = field != "n_states" && field != "m_next" && field != "k_iters" && field != "j_features";
            located(in_fitter ? fit : evl, [&] { throw e; });
        }
    }

    if (auto oracle = top.maybe_object("oracle")) {
        OracleSettings o;
        o.grid_n = oracle->get_or<std::size_t>("grid_n", o.grid_n);
        o.tol = oracle->get_or("tol", o.tol);
        oracle->finish();
        if (spec.environment.index() != 0) oracle->fail("a grid oracle exists only for the replacement environment", "/oracle");
        if (o.grid_n < 100) oracle->fail("must be at least 100", "/oracle/grid_n");
        if (!(o.tol > 0.0)) oracle->fail("must be positive", "/oracle/tol");
        spec.oracle = o;
    }

    if (auto ev = top.maybe_object("evaluation")) {
        EvaluationSettings& e = spec.evaluation;
        e.grid_n = ev->get_or<std::size_t>("grid_n", e.grid_n);
        e.bellman_residual = ev->get_or("bellman_residual", e.bellman_residual);
        e.policy_error = ev->get_or("policy_error", e.policy_error);
        e.episodes = ev->get_or<std::size_t>("episodes", e.episodes);
        e.max_steps = ev->get_or<std::size_t>("max_steps", e.max_steps);
        e.m_eval = ev->get_or<std::size_t>("m_eval", e.m_eval);
        e.start_halfwidth = ev->get_or("start_halfwidth", e.start_halfwidth);
        ev->finish();
        if (e.grid_n < 2) ev->fail("must be at least 2", "/evaluation/grid_n");
        if (e.m_eval < 1) ev->fail("must be at least 1", "/evaluation/m_eval");
    }

    {
        const json& seeds = top.raw("seeds");
        if (seeds.is_array()) {
            for (const auto& s : seeds) {
                if (!s.is_number_unsigned()) top.fail("seeds must be nonnegative integers", "/seeds");
                spec.seeds.push_back(s.get<std::uint64_t>());
            }
        } else if (seeds.is_object()) {
            Fields range(seeds, "/seeds", text);
            const auto start = range.get<std::uint64_t>("start");
            const auto count = range.get<std::uint64_t>("count");
            range.finish();
            for (std::uint64_t i = 0; i < count; ++i) spec.seeds.push_back(start + i);
        } else {
            top.fail("expected a list of seeds or {start, count}", "/seeds");
        }
        if (spec.seeds.empty()) top.fail("seed list must be nonempty", "/seeds");
        std::set<std::uint64_t> unique(spec.seeds.begin(), spec.seeds.end());
        if (unique.size() != spec.seeds.size()) top.fail("seed list contains duplicates", "/seeds");
    }

    spec.output_dir = top.get<std::string>("output_dir");
    top.finish();
    return spec;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
    try {
        return parse_spec_impl(text);
    } catch (const ValidationError& e) {
        throw SpecError(e.what(), e.field(), 0);
    }
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const std::exception& e) {
        throw SpecError(e.what(), "", 0);
    }
    return parse_spec(text);
}

}  // namespace evl::experiment

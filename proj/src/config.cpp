#include "multiscale/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "multiscale/errors.hpp"

namespace multiscale {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& detail) { throw config_rejected(hypothesis::schema, detail); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) schema_error(where + " must be an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) schema_error("unknown key '" + item.key() + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

ModalField field_from(const json& j, std::size_t n, const std::string& where) {
    if (!j.is_array()) schema_error(where + " must be an array");
    auto values = j.get<std::vector<double>>();
    if (values.size() > n) schema_error(where + " has more entries than n_modes");
    values.resize(n, 0.0);
    return ModalField(std::move(values));
}

// ---- operators ----------------------------------------------------------

SpectralOperator operator_from(const json& j, const GridSpec& grid, const std::string& where) {
    check_keys(j, {"nu", "lambda0", "decay", "gamma", "alphas", "lambdas", "alpha_exponent", "lambda_exponent"},
               where);
    const double gamma = get_or(j, "gamma", 0.5);
    if (j.contains("alphas")) {
        if (j.contains("nu") || j.contains("lambda0") || j.contains("decay"))
            schema_error(where + ": give either nu/lambda0/decay or explicit alphas/lambdas");
        SpectralOperator op;
        op.alphas = j.at("alphas").get<std::vector<double>>();
        op.lambdas = j.contains("lambdas") ? j.at("lambdas").get<std::vector<double>>()
                                           : std::vector<double>(op.alphas.size(), 0.0);
        op.gamma_reg = gamma;
        op.alpha_exponent = get_or(j, "alpha_exponent", 2.0);
        op.lambda_exponent = get_or(j, "lambda_exponent", 0.0);
        if (op.alphas.size() != grid.n_modes) schema_error(where + ": alphas must have n_modes entries");
        return op;
    }
    if (j.contains("lambdas") || j.contains("alpha_exponent") || j.contains("lambda_exponent"))
        schema_error(where + ": lambdas and exponents go with explicit alphas");
    return make_dirichlet_operator(grid.n_modes, get_or(j, "nu", 1.0), grid.length, get_or(j, "lambda0", 0.0),
                                   get_or(j, "decay", 0.0), gamma);
}

json operator_to(const SpectralOperator& op) {
    return {{"alphas", op.alphas},
            {"lambdas", op.lambdas},
            {"gamma", op.gamma_reg},
            {"alpha_exponent", op.alpha_exponent},
            {"lambda_exponent", op.lambda_exponent}};
}

// ---- reactions ----------------------------------------------------------

GrowthConstants growth_from(const json& j) {
    check_keys(j, {"m1", "m2", "kappa1", "kappa2", "c1", "c2", "a1", "a2"}, "growth");
    GrowthConstants g;
    g.m1 = get_or(j, "m1", g.m1);
    g.m2 = get_or(j, "m2", g.m2);
    g.kappa1 = get_or(j, "kappa1", g.kappa1);
    g.kappa2 = get_or(j, "kappa2", g.kappa2);
    g.c1 = get_or(j, "c1", g.c1);
    g.c2 = get_or(j, "c2", g.c2);
    g.a1 = get_or(j, "a1", g.a1);
    g.a2 = get_or(j, "a2", g.a2);
    return g;
}

json growth_to(const GrowthConstants& g) {
    return {{"m1", g.m1}, {"m2", g.m2}, {"kappa1", g.kappa1}, {"kappa2", g.kappa2},
            {"c1", g.c1}, {"c2", g.c2}, {"a1", g.a1},         {"a2", g.a2}};
}

ReactionSpec slow_from(const json& j) {
    if (!j.is_object() || !j.contains("kind")) schema_error("reaction_slow needs a kind");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear_benchmark") {
        check_keys(j, {"kind", "b_u", "b_v"}, "reaction_slow");
        return linear_benchmark_slow(get_or(j, "b_u", 0.0), get_or(j, "b_v", 1.0));
    }
    if (kind == "polynomial_slow") {
        if (j.contains("preset")) {
            check_keys(j, {"kind", "preset", "c_u", "c_v"}, "reaction_slow");
            const std::string preset = j.at("preset").get<std::string>();
            if (preset != "cubic_rough") schema_error("unknown reaction preset '" + preset + "'");
            return cubic_rough(get_or(j, "c_u", 0.0), get_or(j, "c_v", 0.0));
        }
        check_keys(j, {"kind", "terms", "growth"}, "reaction_slow");
        if (!j.contains("terms") || !j.contains("growth"))
            schema_error("polynomial_slow without preset needs terms and growth");
        std::vector<PolynomialTerm> terms;
        for (const auto& t : j.at("terms")) {
            check_keys(t, {"coef", "sigma_pow", "lambda_pow", "lambda_signed"}, "polynomial term");
            terms.push_back({get_or(t, "coef", 0.0), get_or(t, "sigma_pow", 0), get_or(t, "lambda_pow", 0),
                             get_or(t, "lambda_signed", false)});
        }
        return polynomial_slow(std::move(terms), growth_from(j.at("growth")));
    }
    schema_error("reaction_slow kind '" + kind + "' is not a slow reaction");
}

json slow_to(const ReactionSpec& r) {
    if (r.kind == ReactionKind::linear_benchmark) return {{"kind", "linear_benchmark"}, {"b_u", r.b_u}, {"b_v", r.b_v}};
    if (r.preset == "cubic_rough")
        return {{"kind", "polynomial_slow"}, {"preset", "cubic_rough"}, {"c_u", r.c_u}, {"c_v", r.c_v}};
    json terms = json::array();
    for (const auto& t : r.terms)
        terms.push_back({{"coef", t.coef},
                         {"sigma_pow", t.sigma_pow},
                         {"lambda_pow", t.lambda_pow},
                         {"lambda_signed", t.lambda_signed}});
    return {{"kind", "polynomial_slow"}, {"terms", terms}, {"growth", growth_to(r.growth)}};
}

ReactionSpec fast_from(const json& j) {
    if (!j.is_object() || !j.contains("kind")) schema_error("reaction_fast needs a kind");
    const std::string kind = j.at("kind").get<std::string>();
    ReactionSpec r;
    if (kind == "linear_benchmark") {
        check_keys(j, {"kind", "a_c", "b_c", "L2"}, "reaction_fast");
        r = linear_benchmark_fast(get_or(j, "a_c", 0.0), get_or(j, "b_c", 0.0));
    } else if (kind == "lipschitz_fast") {
        check_keys(j, {"kind", "a_c", "a_t", "b_c", "s_c", "L2"}, "reaction_fast");
        r = lipschitz_fast(get_or(j, "a_c", 0.0), get_or(j, "a_t", 0.0), get_or(j, "b_c", 0.0),
                           get_or(j, "s_c", 0.0));
    } else {
        schema_error("reaction_fast kind '" + kind + "' is not a fast reaction");
    }
    if (j.contains("L2")) r.L2 = j.at("L2").get<double>();
    return r;
}

json fast_to(const ReactionSpec& r) {
    if (r.kind == ReactionKind::linear_benchmark)
        return {{"kind", "linear_benchmark"}, {"a_c", r.a_c}, {"b_c", r.b_c}, {"L2", r.L2}};
    return {{"kind", "lipschitz_fast"}, {"a_c", r.a_c}, {"a_t", r.a_t}, {"b_c", r.b_c},
            {"s_c", r.s_c},             {"L2", r.L2}};
}

// ---- model --------------------------------------------------------------

ModelSpec model_from(const json& j) {
    check_keys(j,
               {"n_modes", "n_quad", "length", "slow_operator", "fast_operator", "reaction_slow", "reaction_fast",
                "lyapunov", "epsilon", "horizon", "u0", "v0", "theta", "gamma1_star", "gamma2_star", "holder_beta",
                "lambda_exp", "c_const", "h_macro", "substep_ratio", "explosion_bound"},
               "model");
    for (const char* required : {"n_modes", "slow_operator", "fast_operator", "reaction_slow", "reaction_fast"})
        if (!j.contains(required)) schema_error(std::string("model is missing '") + required + "'");
    ModelSpec m;
    m.grid.n_modes = j.at("n_modes").get<std::size_t>();
    m.grid.n_quad = get_or(j, "n_quad", 2 * m.grid.n_modes);
    m.grid.length = get_or(j, "length", 1.0);
    validate_grid(m.grid);
    m.op1 = operator_from(j.at("slow_operator"), m.grid, "slow_operator");
    m.op2 = operator_from(j.at("fast_operator"), m.grid, "fast_operator");
    m.reaction_slow = slow_from(j.at("reaction_slow"));
    m.reaction_fast = fast_from(j.at("reaction_fast"));

    const json lj = get_or(j, "lyapunov", json::object());
    check_keys(lj, {"c_V", "m1", "m2", "kappa1", "kappa2"}, "lyapunov");
    m.lyapunov = make_lyapunov(m.reaction_slow.growth, get_or(lj, "c_V", 1.0));
    m.lyapunov.m1 = get_or(lj, "m1", m.lyapunov.m1);
    m.lyapunov.m2 = get_or(lj, "m2", m.lyapunov.m2);
    m.lyapunov.kappa1 = get_or(lj, "kappa1", m.lyapunov.kappa1);
    m.lyapunov.kappa2 = get_or(lj, "kappa2", m.lyapunov.kappa2);

    m.epsilon = get_or(j, "epsilon", m.epsilon);
    m.horizon = get_or(j, "horizon", m.horizon);
    m.u0 = j.contains("u0") ? field_from(j.at("u0"), m.grid.n_modes, "u0") : ModalField(m.grid.n_modes);
    m.v0 = j.contains("v0") ? field_from(j.at("v0"), m.grid.n_modes, "v0") : ModalField(m.grid.n_modes);
    // rough slow reactions run truncated unless told otherwise
    const double theta_default = m.reaction_slow.kind == ReactionKind::polynomial_slow ? 0.01 : 0.0;
    m.theta = get_or(j, "theta", theta_default);
    m.gamma1_star = get_or(j, "gamma1_star", m.gamma1_star);
    m.gamma2_star = get_or(j, "gamma2_star", m.gamma2_star);
    m.holder_beta = get_or(j, "holder_beta", m.holder_beta);
    m.lambda_exp = get_or(j, "lambda_exp", m.lambda_exp);
    m.c_const = get_or(j, "c_const", m.c_const);
    m.h_macro = get_or(j, "h_macro", m.h_macro);
    m.substep_ratio = get_or(j, "substep_ratio", m.substep_ratio);
    m.explosion_bound = get_or(j, "explosion_bound", m.explosion_bound);
    return m;
}

json model_to(const ModelSpec& m) {
    const LyapunovSpec& l = m.lyapunov;
    return {{"n_modes", m.grid.n_modes},
            {"n_quad", m.grid.n_quad},
            {"length", m.grid.length},
            {"slow_operator", operator_to(m.op1)},
            {"fast_operator", operator_to(m.op2)},
            {"reaction_slow", slow_to(m.reaction_slow)},
            {"reaction_fast", fast_to(m.reaction_fast)},
            {"lyapunov", {{"c_V", l.c_V}, {"m1", l.m1}, {"m2", l.m2}, {"kappa1", l.kappa1}, {"kappa2", l.kappa2}}},
            {"epsilon", m.epsilon},
            {"horizon", m.horizon},
            {"u0", m.u0.vector()},
            {"v0", m.v0.vector()},
            {"theta", m.theta},
            {"gamma1_star", m.gamma1_star},
            {"gamma2_star", m.gamma2_star},
            {"holder_beta", m.holder_beta},
            {"lambda_exp", m.lambda_exp},
            {"c_const", m.c_const},
            {"h_macro", m.h_macro},
            {"substep_ratio", m.substep_ratio},
            {"explosion_bound", m.explosion_bound}};
}

AveragedDriftParams averaging_from(const json& j) {
    check_keys(j, {"h_fast", "t_burn", "t_avg", "n_replicas", "n_batches", "cache_quantum", "theta", "norm_bound",
                   "use_oracle"},
               "averaging");
    AveragedDriftParams p;
    p.h_fast = get_or(j, "h_fast", p.h_fast);
    if (j.contains("t_burn")) p.t_burn = j.at("t_burn").get<double>();
    p.t_avg = get_or(j, "t_avg", p.t_avg);
    p.n_replicas = get_or(j, "n_replicas", p.n_replicas);
    p.n_batches = get_or(j, "n_batches", p.n_batches);
    p.cache_quantum = get_or(j, "cache_quantum", p.cache_quantum);
    p.theta = get_or(j, "theta", p.theta);
    p.norm_bound = get_or(j, "norm_bound", p.norm_bound);
    p.use_oracle = get_or(j, "use_oracle", p.use_oracle);
    return p;
}

json averaging_to(const AveragedDriftParams& p) {
    json j = {{"h_fast", p.h_fast},         {"t_avg", p.t_avg},
              {"n_replicas", p.n_replicas}, {"n_batches", p.n_batches},
              {"cache_quantum", p.cache_quantum}, {"theta", p.theta},
              {"norm_bound", p.norm_bound}, {"use_oracle", p.use_oracle}};
    if (p.t_burn) j["t_burn"] = *p.t_burn;
    return j;
}

ExperimentConfig experiment_from(const json& j) {
    check_keys(j,
               {"model", "epsilon_grid", "ensemble_size", "test_functions", "observables", "averaging", "frozen_x",
                "theta_sequence", "audit_samples", "vbar_trajectories", "vbar_times", "discrepancy", "dump",
                "output_dir", "master_seed", "worker_count"},
               "config");
    if (!j.contains("model")) schema_error("config is missing 'model'");
    ExperimentConfig c;
    c.model = model_from(j.at("model"));
    const std::size_t n = c.model.n_modes();
    c.epsilon_grid = get_or(j, "epsilon_grid", std::vector<double>{});
    c.ensemble_size = get_or(j, "ensemble_size", c.ensemble_size);
    if (j.contains("test_functions")) {
        for (const auto& t : j.at("test_functions")) {
            check_keys(t, {"xi", "time_power"}, "test function");
            if (!t.contains("xi")) schema_error("test function needs xi");
            c.test_functions.push_back({field_from(t.at("xi"), n, "xi"), get_or(t, "time_power", 0)});
        }
    } else {
        c.test_functions.push_back({ModalField::unit(n, 1), 0});
    }
    if (j.contains("observables")) {
        for (const auto& o : j.at("observables")) {
            check_keys(o, {"kind", "mode"}, "observable");
            ObservableSpec s;
            s.kind = get_or(o, "kind", s.kind);
            s.mode = get_or(o, "mode", s.mode);
            if (s.kind != "coordinate" && s.kind != "norm_squared")
                schema_error("unknown observable kind '" + s.kind + "'");
            if (s.kind == "coordinate" && (s.mode < 1 || s.mode > n)) schema_error("observable mode out of range");
            c.observables.push_back(s);
        }
    } else {
        c.observables.push_back({"coordinate", 1});
    }
    if (j.contains("averaging")) c.averaging = averaging_from(j.at("averaging"));
    if (j.contains("frozen_x")) c.frozen_x = field_from(j.at("frozen_x"), n, "frozen_x");
    c.theta_sequence = get_or(j, "theta_sequence", std::vector<double>{});
    c.audit_samples = get_or(j, "audit_samples", c.audit_samples);
    c.vbar_trajectories = get_or(j, "vbar_trajectories", c.vbar_trajectories);
    c.vbar_times = get_or(j, "vbar_times", c.vbar_times);
    c.discrepancy = get_or(j, "discrepancy", c.discrepancy);
    if (j.contains("dump")) {
        const json& d = j.at("dump");
        check_keys(d, {"modes", "trajectories", "stride"}, "dump");
        c.dump.modes = get_or(d, "modes", c.dump.modes);
        c.dump.trajectories = get_or(d, "trajectories", c.dump.trajectories);
        c.dump.stride = get_or(d, "stride", c.dump.stride);
    }
    c.output_dir = get_or(j, "output_dir", c.output_dir);
    c.master_seed = get_or(j, "master_seed", c.master_seed);
    c.worker_count = get_or(j, "worker_count", c.worker_count);
    c.averaging.seed = c.master_seed;
    c.averaging.workers = c.worker_count;
    return c;
}

json experiment_to(const ExperimentConfig& c) {
    json tfs = json::array();
    for (const auto& t : c.test_functions) tfs.push_back({{"xi", t.xi.vector()}, {"time_power", t.time_power}});
    json obs = json::array();
    for (const auto& o : c.observables) obs.push_back({{"kind", o.kind}, {"mode", o.mode}});
    json j = {{"model", model_to(c.model)},
              {"epsilon_grid", c.epsilon_grid},
              {"ensemble_size", c.ensemble_size},
              {"test_functions", tfs},
              {"observables", obs},
              {"averaging", averaging_to(c.averaging)},
              {"theta_sequence", c.theta_sequence},
              {"audit_samples", c.audit_samples},
              {"vbar_trajectories", c.vbar_trajectories},
              {"vbar_times", c.vbar_times},
              {"discrepancy", c.discrepancy},
              {"dump", {{"modes", c.dump.modes}, {"trajectories", c.dump.trajectories}, {"stride", c.dump.stride}}},
              {"output_dir", c.output_dir},
              {"master_seed", c.master_seed},
              {"worker_count", c.worker_count}};
    if (c.frozen_x) j["frozen_x"] = c.frozen_x->vector();
    return j;
}

}  // namespace

std::string ObservableSpec::id() const {
    return kind == "coordinate" ? "coordinate_" + std::to_string(mode) : kind;
}

double ObservableSpec::eval(const ModalField& u) const {
    if (kind == "norm_squared") return u.norm_squared();
    if (mode < 1 || mode > u.size()) throw invalid_parameter("ObservableSpec: mode out of range");
    return u[mode - 1];
}

void validate_experiment(const ExperimentConfig& cfg) {
    validate_model(cfg.model);
    const auto& grid = cfg.epsilon_grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !(grid[i] < 1.0)) throw invalid_parameter("epsilon_grid entries must lie in (0,1)");
        if (i > 0 && !(grid[i] < grid[i - 1])) throw invalid_parameter("epsilon_grid must be strictly decreasing");
    }
    const auto& th = cfg.theta_sequence;
    for (std::size_t i = 0; i < th.size(); ++i) {
        if (!(th[i] > 0.0) || th[i] > 1.0) throw invalid_parameter("theta_sequence entries must lie in (0,1]");
        if (i > 0 && !(th[i] < th[i - 1])) throw invalid_parameter("theta_sequence must be strictly decreasing");
    }
    if (cfg.ensemble_size < 1) throw invalid_parameter("ensemble_size must be >= 1");
    if (cfg.worker_count < 1) throw invalid_parameter("worker_count must be >= 1");
    if (cfg.dump.stride < 1) throw invalid_parameter("dump.stride must be >= 1");
    if (!(cfg.averaging.h_fast > 0.0) || !(cfg.averaging.t_avg > 0.0) || cfg.averaging.n_replicas < 1 ||
        cfg.averaging.n_batches < 2 || cfg.averaging.cache_quantum < 0.0 || cfg.averaging.theta < 0.0)
        throw invalid_parameter("averaging parameters out of range");
    if (cfg.audit_samples < 2) throw invalid_parameter("audit_samples must be >= 2");
}

ExperimentConfig parse_config_string(const std::string& text) {
    ExperimentConfig cfg;
    try {
        cfg = experiment_from(json::parse(text));
        validate_experiment(cfg);
    } catch (const json::exception& e) {
        schema_error(e.what());
    } catch (const invalid_parameter& e) {
        schema_error(e.what());
    }
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_rejected(hypothesis::schema, "cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_string(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) { return experiment_to(cfg).dump(2); }

std::string config_hash(const ExperimentConfig& cfg) {
    json j = experiment_to(cfg);
    j.erase("worker_count");  // scheduling does not change results
    const std::string canon = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace multiscale

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hope/harness.hpp"

namespace hope {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at " + (path.empty() ? std::string("/") : path) + ": " + msg);
}

void reject_unknown_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (allowed.count(key) == 0) fail(path + "/" + key, "unknown key");
    }
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "/" + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path + "/" + key, "expected a finite number");
    return d;
}

long get_integer(const json& obj, const std::string& path, const char* key, long fallback, long min_value) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(path + "/" + key, "expected an integer");
    const long n = v.get<long>();
    if (n < min_value) fail(path + "/" + key, "must be at least " + std::to_string(min_value));
    return n;
}

std::string get_string(const json& obj, const std::string& path, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(path + "/" + key, "expected true or false");
    return v.get<bool>();
}

template <class Fn>
auto rethrow_at(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.rfind("config error at ", 0) == 0) throw;
        fail(path, what);
    }
}

const std::set<std::string> kScenarioKeys = {
    "id", "K", "T", "p", "sigma2", "sparse_ratio", "dense_ratio", "scale_low", "scale_high", "decay_kind",
    "decay_a", "decay_b", "decay_c", "mixed_sparse_arms", "theta_bound", "shared_contexts"};

ScenarioParams read_scenario_params(const json& obj, const std::string& path, const ScenarioParams& base) {
    ScenarioParams p = base;
    p.K = static_cast<int>(get_integer(obj, path, "K", base.K, 1));
    p.T = get_integer(obj, path, "T", base.T, 1);
    p.p = get_integer(obj, path, "p", base.p, 1);
    p.noise_variance = get_number(obj, path, "sigma2", base.noise_variance);
    p.sparse_ratio = get_number(obj, path, "sparse_ratio", base.sparse_ratio);
    p.dense_ratio = get_number(obj, path, "dense_ratio", base.dense_ratio);
    p.scale_low = get_number(obj, path, "scale_low", base.scale_low);
    p.scale_high = get_number(obj, path, "scale_high", base.scale_high);
    if (obj.contains("decay_kind")) {
        const std::string kind = get_string(obj, path, "decay_kind", "");
        p.decay_kind = rethrow_at(path + "/decay_kind", [&] { return parse_covariance_kind(kind); });
    }
    p.decay_a = get_number(obj, path, "decay_a", base.decay_a);
    p.decay_b = get_number(obj, path, "decay_b", base.decay_b);
    p.decay_c = get_number(obj, path, "decay_c", base.decay_c);
    p.mixed_sparse_arms = static_cast<int>(get_integer(obj, path, "mixed_sparse_arms", base.mixed_sparse_arms, 0));
    if (obj.contains("theta_bound")) {
        const json& v = obj.at("theta_bound");
        if (v.is_null()) {
            p.theta_bound = std::numeric_limits<double>::infinity();
        } else {
            p.theta_bound = get_number(obj, path, "theta_bound", base.theta_bound);
        }
    }
    p.shared_contexts = get_bool(obj, path, "shared_contexts", base.shared_contexts);
    rethrow_at(path, [&] { p.validate(); return 0; });
    return p;
}

PweConfig read_pwe(const json& obj, const std::string& path) {
    reject_unknown_keys(obj, path,
                        {"lambda_constant", "lambda_floor", "initial_lambda_constant", "initial_estimator",
                         "support_rule", "sis_keep", "support_zero_tol", "gamma_sigma_tol", "plug_in_sigma",
                         "solver_tol", "solver_max_iters"});
    PweConfig c;
    c.lambda_constant = get_number(obj, path, "lambda_constant", c.lambda_constant);
    c.lambda_floor = get_number(obj, path, "lambda_floor", c.lambda_floor);
    c.initial_lambda_constant = get_number(obj, path, "initial_lambda_constant", c.initial_lambda_constant);
    if (obj.contains("initial_estimator")) {
        const std::string s = get_string(obj, path, "initial_estimator", "");
        c.initial_estimator = rethrow_at(path + "/initial_estimator", [&] { return parse_initial_estimator(s); });
    }
    if (obj.contains("support_rule")) {
        const std::string s = get_string(obj, path, "support_rule", "");
        c.support_rule = rethrow_at(path + "/support_rule", [&] { return parse_support_rule(s); });
    }
    c.sis_keep = get_integer(obj, path, "sis_keep", c.sis_keep, 0);
    c.support_zero_tol = get_number(obj, path, "support_zero_tol", c.support_zero_tol);
    c.gamma_sigma_tol = get_number(obj, path, "gamma_sigma_tol", c.gamma_sigma_tol);
    c.plug_in_sigma = get_bool(obj, path, "plug_in_sigma", c.plug_in_sigma);
    c.solver.tol = get_number(obj, path, "solver_tol", c.solver.tol);
    c.solver.max_iters = static_cast<int>(get_integer(obj, path, "solver_max_iters", c.solver.max_iters, 1));
    rethrow_at(path, [&] { c.validate(); return 0; });
    return c;
}

PolicySpec read_policy(const json& obj, const std::string& path) {
    reject_unknown_keys(obj, path,
                        {"name", "pwe", "oracle_support", "lasso_lambda_constant", "ucb_alpha", "ridge_reg",
                         "forced_q", "refit_base"});
    if (!obj.contains("name")) fail(path + "/name", "missing policy name");
    const std::string name = get_string(obj, path, "name", "");
    PolicySpec spec;
    spec.name = rethrow_at(path + "/name", [&] { return parse_policy_name(name); });
    if (obj.contains("pwe")) {
        if (spec.name != PolicyName::Hope) fail(path + "/pwe", "only the hope policy takes pwe settings");
        spec.pwe = read_pwe(obj.at("pwe"), path + "/pwe");
    }
    spec.oracle_support = get_bool(obj, path, "oracle_support", spec.oracle_support);
    spec.lasso_lambda_constant = get_number(obj, path, "lasso_lambda_constant", spec.lasso_lambda_constant);
    spec.ucb_alpha = get_number(obj, path, "ucb_alpha", spec.ucb_alpha);
    spec.ridge_reg = get_number(obj, path, "ridge_reg", spec.ridge_reg);
    spec.forced_q = static_cast<int>(get_integer(obj, path, "forced_q", spec.forced_q, 1));
    spec.refit_base = static_cast<int>(get_integer(obj, path, "refit_base", spec.refit_base, 1));
    if (!(spec.ucb_alpha >= 0.0)) fail(path + "/ucb_alpha", "must be nonnegative");
    if (!(spec.ridge_reg > 0.0)) fail(path + "/ridge_reg", "must be positive");
    if (!(spec.lasso_lambda_constant >= 0.0)) fail(path + "/lasso_lambda_constant", "must be nonnegative");
    return spec;
}

ExperimentConfig from_json(const json& root) {
    reject_unknown_keys(root, "",
                        {"master_seed", "repetitions", "output_dir", "jobs", "n_rule", "defaults", "scenarios",
                         "policies", "n_override"});
    ExperimentConfig cfg;
    if (root.contains("master_seed")) {
        const json& v = root.at("master_seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            fail("/master_seed", "expected a nonnegative integer");
        }
        cfg.master_seed = v.get<std::uint64_t>();
    }
    cfg.repetitions = static_cast<int>(get_integer(root, "", "repetitions", cfg.repetitions, 1));
    cfg.output_dir = get_string(root, "", "output_dir", cfg.output_dir);
    cfg.jobs = static_cast<int>(get_integer(root, "", "jobs", cfg.jobs, 1));
    const std::string rule = get_string(root, "", "n_rule", "agnostic");
    if (rule == "agnostic") {
        cfg.n_rule = NRule::Agnostic;
    } else if (rule == "informed") {
        cfg.n_rule = NRule::Informed;
    } else {
        fail("/n_rule", "expected 'agnostic' or 'informed'");
    }

    ScenarioParams defaults;
    if (root.contains("defaults")) {
        std::set<std::string> keys = kScenarioKeys;
        keys.erase("id");
        reject_unknown_keys(root.at("defaults"), "/defaults", keys);
        defaults = read_scenario_params(root.at("defaults"), "/defaults", defaults);
    }

    if (!root.contains("scenarios")) fail("/scenarios", "missing scenario list");
    const json& scen = root.at("scenarios");
    if (!scen.is_array() || scen.empty()) fail("/scenarios", "expected a non-empty array");
    std::set<ScenarioId> seen;
    for (std::size_t i = 0; i < scen.size(); ++i) {
        const std::string path = "/scenarios/" + std::to_string(i);
        const json& entry = scen[i];
        reject_unknown_keys(entry, path, kScenarioKeys);
        if (!entry.contains("id")) fail(path + "/id", "missing scenario id");
        const std::string id = get_string(entry, path, "id", "");
        ScenarioEntry se;
        se.id = rethrow_at(path + "/id", [&] { return parse_scenario_id(id); });
        if (!seen.insert(se.id).second) fail(path + "/id", "duplicate scenario id '" + id + "'");
        se.params = read_scenario_params(entry, path, defaults);
        cfg.scenarios.push_back(se);
    }

    if (!root.contains("policies")) fail("/policies", "missing policy list");
    const json& pol = root.at("policies");
    if (!pol.is_array() || pol.empty()) fail("/policies", "expected a non-empty array");
    std::set<PolicyName> seen_policies;
    for (std::size_t i = 0; i < pol.size(); ++i) {
        const std::string path = "/policies/" + std::to_string(i);
        PolicySpec spec = read_policy(pol[i], path);
        if (!seen_policies.insert(spec.name).second) fail(path + "/name", "duplicate policy");
        cfg.policies.push_back(spec);
    }

    if (root.contains("n_override")) {
        const json& ov = root.at("n_override");
        if (!ov.is_object()) fail("/n_override", "expected an object keyed by policy name");
        for (const auto& [key, value] : ov.items()) {
            const std::string path = "/n_override/" + key;
            const PolicyName name = rethrow_at(path, [&] { return parse_policy_name(key); });
            if (!seen_policies.count(name)) fail(path, "policy is not part of the grid");
            if (!value.is_number_integer() || value.get<long>() < 1) fail(path, "expected a positive integer");
            cfg.n_override[key] = value.get<long>();
        }
    }
    return cfg;
}

json pwe_to_json(const PweConfig& c) {
    return json{{"lambda_constant", c.lambda_constant},
                {"lambda_floor", c.lambda_floor},
                {"initial_lambda_constant", c.initial_lambda_constant},
                {"initial_estimator", std::string(to_string(c.initial_estimator))},
                {"support_rule", std::string(to_string(c.support_rule))},
                {"sis_keep", c.sis_keep},
                {"support_zero_tol", c.support_zero_tol},
                {"gamma_sigma_tol", c.gamma_sigma_tol},
                {"plug_in_sigma", c.plug_in_sigma},
                {"solver_tol", c.solver.tol},
                {"solver_max_iters", c.solver.max_iters}};
}

json params_to_json(const ScenarioParams& p) {
    json j{{"K", p.K},
           {"T", p.T},
           {"p", p.p},
           {"sigma2", p.noise_variance},
           {"sparse_ratio", p.sparse_ratio},
           {"dense_ratio", p.dense_ratio},
           {"scale_low", p.scale_low},
           {"scale_high", p.scale_high},
           {"decay_kind", std::string(to_string(p.decay_kind))},
           {"decay_a", p.decay_a},
           {"decay_b", p.decay_b},
           {"decay_c", p.decay_c},
           {"mixed_sparse_arms", p.mixed_sparse_arms},
           {"shared_contexts", p.shared_contexts}};
    j["theta_bound"] = std::isfinite(p.theta_bound) ? json(p.theta_bound) : json(nullptr);
    return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
    return from_json(root);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    for (ScenarioId id : {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4}) {
        cfg.scenarios.push_back(ScenarioEntry{id, ScenarioParams{}});
    }
    PolicySpec hope_spec;
    hope_spec.name = PolicyName::Hope;
    hope_spec.pwe.initial_estimator = InitialEstimator::Rdl;
    hope_spec.pwe.support_rule = SupportRule::Full;
    cfg.policies.push_back(hope_spec);
    for (PolicyName n : {PolicyName::LassoEtc, PolicyName::RdlEtc, PolicyName::LassoBandit, PolicyName::LinUcb}) {
        PolicySpec s;
        s.name = n;
        cfg.policies.push_back(s);
    }
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json root;
    root["master_seed"] = cfg.master_seed;
    root["repetitions"] = cfg.repetitions;
    root["output_dir"] = cfg.output_dir;
    root["jobs"] = cfg.jobs;
    root["n_rule"] = cfg.n_rule == NRule::Agnostic ? "agnostic" : "informed";
    json scen = json::array();
    for (const auto& s : cfg.scenarios) {
        json j = params_to_json(s.params);
        j["id"] = std::string(to_string(s.id));
        scen.push_back(j);
    }
    root["scenarios"] = scen;
    json pol = json::array();
    for (const auto& p : cfg.policies) {
        json j{{"name", std::string(to_string(p.name))}};
        switch (p.name) {
            case PolicyName::Hope:
                j["pwe"] = pwe_to_json(p.pwe);
                j["oracle_support"] = p.oracle_support;
                break;
            case PolicyName::LassoEtc:
                j["lasso_lambda_constant"] = p.lasso_lambda_constant;
                break;
            case PolicyName::LassoBandit:
                j["lasso_lambda_constant"] = p.lasso_lambda_constant;
                j["forced_q"] = p.forced_q;
                j["refit_base"] = p.refit_base;
                break;
            case PolicyName::LinUcb:
                j["ucb_alpha"] = p.ucb_alpha;
                j["ridge_reg"] = p.ridge_reg;
                break;
            default:
                break;
        }
        pol.push_back(j);
    }
    root["policies"] = pol;
    if (!cfg.n_override.empty()) {
        root["n_override"] = cfg.n_override;
    }
    return root.dump(2) + "\n";
}

}  // namespace hope

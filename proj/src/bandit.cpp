#include "hope/bandit.hpp"

#include <algorithm>
#include <cmath>

namespace hope {

std::string_view to_string(PolicyName n) {
    switch (n) {
        case PolicyName::Hope: return "hope";
        case PolicyName::LassoEtc: return "lasso-etc";
        case PolicyName::RdlEtc: return "rdl-etc";
        case PolicyName::LassoBandit: return "lasso-bandit";
        case PolicyName::LinUcb: return "lin-ucb";
        case PolicyName::Oracle: return "oracle";
    }
    return "unknown";
}

PolicyName parse_policy_name(std::string_view s) {
    if (s == "hope") return PolicyName::Hope;
    if (s == "lasso-etc") return PolicyName::LassoEtc;
    if (s == "rdl-etc") return PolicyName::RdlEtc;
    if (s == "lasso-bandit") return PolicyName::LassoBandit;
    if (s == "lin-ucb") return PolicyName::LinUcb;
    if (s == "oracle") return PolicyName::Oracle;
    throw ConfigError("unknown policy '" + std::string(s) + "'");
}

long PolicySpec::exploration_rounds(int K) const {
    switch (name) {
        case PolicyName::Hope: return 2 * exploration_N * K;
        case PolicyName::LassoEtc:
        case PolicyName::RdlEtc: return exploration_N * K;
        default: return 0;
    }
}

void PolicySpec::validate(int K, long T) const {
    const std::string who(to_string(name));
    switch (name) {
        case PolicyName::Hope:
            pwe.validate();
            [[fallthrough]];
        case PolicyName::LassoEtc:
        case PolicyName::RdlEtc:
            if (exploration_N < 1) {
                throw ConfigError(who + ": exploration_N must be at least 1");
            }
            if (exploration_rounds(K) > T) {
                throw ConfigError(who + ": exploration phase of " + std::to_string(exploration_rounds(K)) +
                                  " rounds exceeds horizon " + std::to_string(T));
            }
            break;
        case PolicyName::LinUcb:
            if (!(ucb_alpha >= 0.0)) throw ConfigError(who + ": ucb_alpha must be nonnegative");
            if (!(ridge_reg > 0.0)) throw ConfigError(who + ": ridge_reg must be positive");
            break;
        case PolicyName::LassoBandit:
            if (forced_q < 1) throw ConfigError(who + ": forced_q must be at least 1");
            if (refit_base < 1) throw ConfigError(who + ": refit_base must be at least 1");
            break;
        case PolicyName::Oracle:
            break;
    }
    if (!(lasso_lambda_constant >= 0.0)) throw ConfigError(who + ": lasso_lambda_constant must be nonnegative");
}

RunStreams RunStreams::make(std::uint64_t master_seed, std::uint32_t scenario, std::uint32_t repetition) {
    return RunStreams{
        RngStream(master_seed, StreamId{scenario, repetition, StreamRole::Contexts}),
        RngStream(master_seed, StreamId{scenario, repetition, StreamRole::Noise}),
    };
}

namespace {

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Explore-then-commit

EtcPolicy::EtcPolicy(const ScenarioSpec& scenario, long pulls_per_arm)
    : scenario_(scenario),
      K_(scenario.K()),
      pulls_per_arm_(pulls_per_arm),
      X_(static_cast<std::size_t>(K_), Matrix(pulls_per_arm, scenario.p())),
      y_(static_cast<std::size_t>(K_), Vector(pulls_per_arm)),
      pulls_(static_cast<std::size_t>(K_), 0) {}

int EtcPolicy::choose(long round, const std::vector<Vector>& contexts) {
    if (round < exploration_rounds()) {
        return static_cast<int>(round % K_);
    }
    if (!fitted_) {
        fit(X_, y_);
        fitted_ = true;
    }
    std::vector<double> scores(contexts.size());
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        scores[i] = predict(static_cast<int>(i), contexts[i]);
    }
    return argmax_lowest(scores);
}

void EtcPolicy::observe(long round, int arm, const Vector& context, double reward) {
    if (round >= exploration_rounds()) return;
    auto& n = pulls_[static_cast<std::size_t>(arm)];
    X_[static_cast<std::size_t>(arm)].row(n) = context.transpose();
    y_[static_cast<std::size_t>(arm)](n) = reward;
    ++n;
}

HopePolicy::HopePolicy(const ScenarioSpec& scenario, const PolicySpec& spec)
    : EtcPolicy(scenario, 2 * spec.exploration_N), spec_(spec) {}

void HopePolicy::fit(const std::vector<Matrix>& X, const std::vector<Vector>& y) {
    prep_.clear();
    prep_.reserve(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const ArmDataset ds(static_cast<int>(i), X[i], y[i], spec_.exploration_N);
        std::optional<SupportSet> support;
        if (spec_.oracle_support) {
            std::vector<Eigen::Index> idx;
            const Vector& theta = scenario_.arms[i].theta;
            for (Eigen::Index j = 0; j < theta.size(); ++j) {
                if (theta(j) != 0.0) idx.push_back(j);
            }
            support = SupportSet(std::move(idx), theta.size(), SupportSource::Injected);
        }
        prep_.push_back(prepare_pwe(ds, spec_.pwe, scenario_.sigma(), std::nullopt, support));
    }
}

double HopePolicy::predict(int arm, const Vector& x) {
    PweDiagnostics diag;
    const double mu = pwe_predict(prep_[static_cast<std::size_t>(arm)], x, spec_.pwe, &diag);
    if (diag.degenerate) ++degenerate_;
    return mu;
}

LinearEtcPolicy::LinearEtcPolicy(const ScenarioSpec& scenario, const PolicySpec& spec)
    : EtcPolicy(scenario, spec.exploration_N), spec_(spec) {}

void LinearEtcPolicy::fit(const std::vector<Matrix>& X, const std::vector<Vector>& y) {
    theta_.clear();
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (spec_.name == PolicyName::RdlEtc) {
            theta_.push_back(fit_rdl(X[i], y[i]));
        } else {
            LassoConfig cfg;
            cfg.objective_scale = ObjectiveScale::InverseN;
            cfg.lambda = initial_lasso_lambda(scenario_.sigma(), X[i].cols(), X[i].rows(),
                                              spec_.lasso_lambda_constant);
            theta_.push_back(fit_lasso(X[i], y[i], cfg).coefficients);
        }
    }
}

double LinearEtcPolicy::predict(int arm, const Vector& x) { return x.dot(theta_[static_cast<std::size_t>(arm)]); }

// ---------------------------------------------------------------------------
// LinUCB

LinUcbPolicy::LinUcbPolicy(int K, Eigen::Index p, double ucb_alpha, double ridge_reg)
    : alpha_(ucb_alpha),
      a_inv_(static_cast<std::size_t>(K), Matrix::Identity(p, p) / ridge_reg),
      b_(static_cast<std::size_t>(K), Vector::Zero(p)),
      theta_(static_cast<std::size_t>(K), Vector::Zero(p)),
      trace_a_(static_cast<std::size_t>(K), ridge_reg * static_cast<double>(p)) {}

int LinUcbPolicy::choose(long, const std::vector<Vector>& contexts) {
    std::vector<double> scores(contexts.size());
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        const Vector& x = contexts[i];
        const double width = std::sqrt(std::max(0.0, x.dot(a_inv_[i].selfadjointView<Eigen::Lower>() * x)));
        scores[i] = x.dot(theta_[i]) + alpha_ * width;
    }
    return argmax_lowest(scores);
}

void LinUcbPolicy::observe(long, int arm, const Vector& x, double reward) {
    const auto i = static_cast<std::size_t>(arm);
    Matrix& inv = a_inv_[i];
    const Vector u = inv * x;
    const double denom = 1.0 + x.dot(u);
    inv.noalias() -= (u * u.transpose()) / denom;
    b_[i] += reward * x;
    theta_[i].noalias() = inv * b_[i];
    trace_a_[i] += x.squaredNorm();
}

// ---------------------------------------------------------------------------
// Lasso-Bandit

LassoBanditPolicy::LassoBanditPolicy(const ScenarioSpec& scenario, const PolicySpec& spec)
    : scenario_(scenario),
      spec_(spec),
      K_(scenario.K()),
      X_(static_cast<std::size_t>(K_)),
      y_(static_cast<std::size_t>(K_)),
      theta_(static_cast<std::size_t>(K_), Vector::Zero(scenario.p())),
      next_refit_(static_cast<std::size_t>(K_), spec.refit_base) {}

std::optional<int> LassoBanditPolicy::forced_arm(long round) const {
    const long block = static_cast<long>(K_) * spec_.forced_q;
    for (long n = 0; n < 62; ++n) {
        const long start = ((1L << n) - 1) * block;
        if (round < start) break;
        if (round < start + block) {
            return static_cast<int>((round - start) / spec_.forced_q);
        }
    }
    return std::nullopt;
}

int LassoBanditPolicy::choose(long round, const std::vector<Vector>& contexts) {
    if (auto forced = forced_arm(round)) {
        return *forced;
    }
    std::vector<double> scores(contexts.size());
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        scores[i] = contexts[i].dot(theta_[i]);
    }
    return argmax_lowest(scores);
}

void LassoBanditPolicy::observe(long round, int arm, const Vector& context, double reward) {
    const auto i = static_cast<std::size_t>(arm);
    X_[i].push_back(context);
    y_[i].push_back(reward);
    const auto n = static_cast<long>(X_[i].size());
    if (n < next_refit_[i]) return;

    Matrix X(n, scenario_.p());
    Vector y(n);
    for (long r = 0; r < n; ++r) {
        X.row(r) = X_[i][static_cast<std::size_t>(r)].transpose();
        y(r) = y_[i][static_cast<std::size_t>(r)];
    }
    LassoConfig cfg;
    cfg.objective_scale = ObjectiveScale::InverseN;
    cfg.lambda = initial_lasso_lambda(scenario_.sigma(), scenario_.p(), n, spec_.lasso_lambda_constant);
    theta_[i] = fit_lasso(X, y, cfg).coefficients;
    refits_.push_back(Refit{round, arm, n});
    next_refit_[i] *= 2;
}

int OraclePolicy::choose(long, const std::vector<Vector>& contexts) { return oracle_arm(contexts, scenario_); }

// ---------------------------------------------------------------------------

std::unique_ptr<Policy> make_policy(const ScenarioSpec& scenario, const PolicySpec& spec) {
    spec.validate(scenario.K(), scenario.T());
    switch (spec.name) {
        case PolicyName::Hope: return std::make_unique<HopePolicy>(scenario, spec);
        case PolicyName::LassoEtc:
        case PolicyName::RdlEtc: return std::make_unique<LinearEtcPolicy>(scenario, spec);
        case PolicyName::LinUcb:
            return std::make_unique<LinUcbPolicy>(scenario.K(), scenario.p(), spec.ucb_alpha, spec.ridge_reg);
        case PolicyName::LassoBandit: return std::make_unique<LassoBanditPolicy>(scenario, spec);
        case PolicyName::Oracle: return std::make_unique<OraclePolicy>(scenario);
    }
    throw ConfigError("unknown policy");
}

double oracle_regret_increment(const std::vector<Vector>& contexts, int chosen, const ScenarioSpec& scenario) {
    if (chosen < 0 || chosen >= static_cast<int>(contexts.size())) {
        throw StructuralError("oracle_regret_increment: chosen arm out of range");
    }
    const int best = oracle_arm(contexts, scenario);
    const auto b = static_cast<std::size_t>(best);
    const auto c = static_cast<std::size_t>(chosen);
    return expected_reward(contexts[b], scenario.arms[b]) - expected_reward(contexts[c], scenario.arms[c]);
}

RegretTrace simulate(const ScenarioSpec& scenario, Policy& policy, RunStreams& streams) {
    RegretTrace trace;
    trace.scenario = std::string(to_string(scenario.id));
    trace.seed = streams.contexts.seed();
    const long T = scenario.T();
    trace.cumulative.reserve(static_cast<std::size_t>(T));
    trace.choices.reserve(static_cast<std::size_t>(T));
    const double sigma = scenario.sigma();
    double total = 0.0;
    for (long t = 0; t < T; ++t) {
        const std::vector<Vector> contexts = sample_round(scenario, streams.contexts);
        const int arm = policy.choose(t, contexts);
        if (arm < 0 || arm >= scenario.K()) {
            throw StructuralError("simulate: policy chose an invalid arm");
        }
        total += oracle_regret_increment(contexts, arm, scenario);
        trace.cumulative.push_back(total);
        trace.choices.push_back(arm);
        const auto a = static_cast<std::size_t>(arm);
        const double y = reward(contexts[a], scenario.arms[a], sigma, streams.noise);
        policy.observe(t, arm, contexts[a], y);
    }
    trace.degenerate_predictions = policy.degenerate_predictions();
    return trace;
}

RegretTrace run_policy(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams) {
    auto policy = make_policy(scenario, spec);
    RegretTrace trace = simulate(scenario, *policy, streams);
    trace.policy = std::string(to_string(spec.name));
    return trace;
}

RegretTrace run_hope(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams) {
    if (spec.name != PolicyName::Hope) throw ConfigError("run_hope: policy must be hope");
    return run_policy(scenario, spec, streams);
}

RegretTrace run_etc_baseline(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams) {
    if (spec.name != PolicyName::LassoEtc && spec.name != PolicyName::RdlEtc) {
        throw ConfigError("run_etc_baseline: policy must be lasso-etc or rdl-etc");
    }
    return run_policy(scenario, spec, streams);
}

RegretTrace run_lin_ucb(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams) {
    if (spec.name != PolicyName::LinUcb) throw ConfigError("run_lin_ucb: policy must be lin-ucb");
    return run_policy(scenario, spec, streams);
}

RegretTrace run_lasso_bandit(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams) {
    if (spec.name != PolicyName::LassoBandit) throw ConfigError("run_lasso_bandit: policy must be lasso-bandit");
    return run_policy(scenario, spec, streams);
}

// ---------------------------------------------------------------------------
// Exploration length

double n_formula(const NChoiceInputs& in) {
    if (in.K < 1 || in.T < 1) {
        throw ConfigError("choose_N: K and T must be positive");
    }
    const double K = in.K;
    const double T = static_cast<double>(in.T);
    const double agnostic_sparse = std::pow(K, -2.0 / 3.0) * std::pow(T, 2.0 / 3.0);
    const DecayKnowledge* d = in.decay ? &*in.decay : nullptr;
    const bool know_a = d != nullptr && d->a && d->p > 0;
    const bool know_bc = d != nullptr && d->b && d->c;

    // Example (A) spectral terms.
    auto decay_a_terms = [&](double a, double p) {
        const double ta = std::pow(T, a);
        const double t1 = std::pow(K, -0.5) * std::pow(p, 1.0 / (2.0 * ta)) * std::pow(T, (a + 2.0) / 4.0);
        const double t2 = std::pow(K, -2.0 / 3.0) * std::pow(p, 2.0 / (3.0 * ta)) * std::pow(T, (2.0 - a) / 3.0);
        return std::max(t1, t2);
    };

    switch (in.hint) {
        case ScenarioId::S1:
            if (in.s0) return std::pow(K, -2.0 / 3.0) * std::cbrt(*in.s0) * std::pow(T, 2.0 / 3.0);
            return agnostic_sparse;
        case ScenarioId::S2:
            if (know_a) return decay_a_terms(*d->a, static_cast<double>(d->p));
            if (know_bc) {
                const double b = *d->b;
                const double c = *d->c;
                return std::min(std::pow(K, -0.5) * std::pow(T, 0.5 + c * (2.0 - b) / 4.0),
                                std::pow(K, -0.5) * std::pow(T, 0.5 + 3.0 * c * (1.0 - b) / 4.0));
            }
            return std::max(std::pow(K, -0.5) * std::sqrt(T), std::pow(K, -2.0 / 3.0) * std::cbrt(T));
        case ScenarioId::S3:
            if (d != nullptr && d->M) return std::pow(K, -2.0 / 3.0) * std::pow(*d->M, 2.0 / 3.0) * std::pow(T, 2.0 / 3.0);
            return agnostic_sparse;
        case ScenarioId::S4:
            if (in.s0 && know_a) {
                const double sparse = std::pow(K, -2.0 / 3.0) * std::cbrt(*in.s0) * std::pow(T, 2.0 / 3.0);
                return std::max(sparse, decay_a_terms(*d->a, static_cast<double>(d->p)));
            }
            return agnostic_sparse;
    }
    return agnostic_sparse;
}

long n_formula_rounded(const NChoiceInputs& in) { return std::lround(n_formula(in)); }

long choose_N(const NChoiceInputs& in) {
    if (in.T < 4L * in.K) {
        throw ConfigError("choose_N: horizon T must be at least 4K");
    }
    const long upper = in.T / (2L * in.K);
    return std::clamp(n_formula_rounded(in), 2L, upper);
}

}  // namespace hope

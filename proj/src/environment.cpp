#include "hope/environment.hpp"

#include <cmath>

namespace hope {

std::string_view to_string(CovarianceKind k) {
    switch (k) {
        case CovarianceKind::Identity: return "identity";
        case CovarianceKind::DecayA: return "decay-a";
        case CovarianceKind::DecayB: return "decay-b";
        case CovarianceKind::ExperimentDecay: return "experiment-decay";
    }
    return "unknown";
}

CovarianceKind parse_covariance_kind(std::string_view s) {
    if (s == "identity") return CovarianceKind::Identity;
    if (s == "decay-a") return CovarianceKind::DecayA;
    if (s == "decay-b") return CovarianceKind::DecayB;
    if (s == "experiment-decay") return CovarianceKind::ExperimentDecay;
    throw ConfigError("unknown covariance kind '" + std::string(s) + "'");
}

void CovarianceSpec::validate() const {
    if (p < 1) throw ConfigError("covariance: p must be at least 1");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("covariance: scale must be positive");
    if (kind == CovarianceKind::DecayA && !(a > 0.0 && a < 1.0)) {
        throw ConfigError("covariance: decay-a requires a in (0, 1)");
    }
    if (kind == CovarianceKind::DecayB) {
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("covariance: decay-b requires b in (0, 1)");
        if (!(c > 1.0 && c < 1.0 / (1.0 - b))) {
            throw ConfigError("covariance: decay-b requires c in (1, 1/(1-b))");
        }
    }
}

Vector make_covariance(const CovarianceSpec& spec, long T) {
    spec.validate();
    if (T < 1) throw ConfigError("covariance: T must be positive");
    const double t = static_cast<double>(T);
    double exponent = 0.0;
    switch (spec.kind) {
        case CovarianceKind::Identity: exponent = 0.0; break;
        case CovarianceKind::DecayA: exponent = -(1.0 + 1.0 / std::pow(t, spec.a)); break;
        case CovarianceKind::DecayB: exponent = -spec.b; break;
        case CovarianceKind::ExperimentDecay: exponent = -1.0 + 1.0 / t; break;
    }
    Vector eig(spec.p);
    for (Eigen::Index k = 0; k < spec.p; ++k) {
        eig(k) = spec.scale * std::pow(static_cast<double>(k + 1), exponent);
    }
    return eig;
}

Eigen::Index ArmModel::nonzeros() const { return (theta.array() != 0.0).count(); }

double ArmModel::signal_variance() const { return (theta.array().square() * eigenvalues.array()).sum(); }

std::string_view to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::S1: return "s1";
        case ScenarioId::S2: return "s2";
        case ScenarioId::S3: return "s3";
        case ScenarioId::S4: return "s4";
    }
    return "unknown";
}

ScenarioId parse_scenario_id(std::string_view s) {
    if (s == "s1") return ScenarioId::S1;
    if (s == "s2") return ScenarioId::S2;
    if (s == "s3") return ScenarioId::S3;
    if (s == "s4") return ScenarioId::S4;
    throw ConfigError("unknown scenario id '" + std::string(s) + "'");
}

void ScenarioParams::validate() const {
    if (K < 1) throw ConfigError("scenario: K must be at least 1");
    if (T < 1) throw ConfigError("scenario: T must be at least 1");
    if (p < 1) throw ConfigError("scenario: p must be at least 1");
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
        throw ConfigError("scenario: noise variance must be finite and nonnegative");
    }
    for (double r : {sparse_ratio, dense_ratio}) {
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("scenario: sparsity ratios must lie in [0, 1]");
    }
    if (!(scale_low > 0.0 && scale_low <= scale_high)) {
        throw ConfigError("scenario: covariance scale range must satisfy 0 < low <= high");
    }
    if (mixed_sparse_arms < 0) throw ConfigError("scenario: mixed_sparse_arms must be nonnegative");
    if (!(theta_bound > 0.0)) throw ConfigError("scenario: theta bound must be positive");
    CovarianceSpec probe{decay_kind, p, decay_a, decay_b, decay_c, 1.0};
    probe.validate();
}

double ScenarioSpec::sigma() const { return std::sqrt(params.noise_variance); }

ArmModel make_arm(const CovarianceSpec& cov, long T, double sparsity_ratio, double theta_bound, RngStream& rng) {
    ArmModel arm;
    arm.covariance = cov;
    arm.eigenvalues = make_covariance(cov, T);
    arm.sqrt_eigenvalues = arm.eigenvalues.cwiseSqrt();
    arm.sparsity_ratio = sparsity_ratio;
    const auto s0 = static_cast<Eigen::Index>(std::llround(sparsity_ratio * static_cast<double>(cov.p)));
    arm.theta = Vector::Zero(cov.p);
    for (Eigen::Index j : rng.sample_without_replacement(cov.p, s0)) {
        arm.theta(j) = rng.normal();
    }
    const double norm = arm.theta.norm();
    if (std::isfinite(theta_bound) && norm > theta_bound) {
        arm.theta *= theta_bound / norm;
    }
    return arm;
}

ScenarioSpec build_scenario(ScenarioId id, const ScenarioParams& params, RngStream& rng) {
    params.validate();
    ScenarioSpec spec;
    spec.id = id;
    spec.params = params;
    spec.arms.reserve(static_cast<std::size_t>(params.K));

    const CovarianceSpec identity{CovarianceKind::Identity, params.p, 0.5, 0.5, 1.5, 1.0};
    auto decayed = [&]() {
        CovarianceSpec cov{params.decay_kind, params.p, params.decay_a, params.decay_b, params.decay_c, 1.0};
        cov.scale = rng.uniform(params.scale_low, params.scale_high);
        return cov;
    };

    for (int i = 0; i < params.K; ++i) {
        switch (id) {
            case ScenarioId::S1:
                spec.arms.push_back(make_arm(identity, params.T, params.sparse_ratio, params.theta_bound, rng));
                break;
            case ScenarioId::S2: {
                const CovarianceSpec cov = decayed();
                spec.arms.push_back(make_arm(cov, params.T, params.dense_ratio, params.theta_bound, rng));
                break;
            }
            case ScenarioId::S3: {
                const CovarianceSpec cov = decayed();
                spec.arms.push_back(make_arm(cov, params.T, params.sparse_ratio, params.theta_bound, rng));
                break;
            }
            case ScenarioId::S4:
                if (i < params.mixed_sparse_arms) {
                    spec.arms.push_back(make_arm(identity, params.T, params.sparse_ratio, params.theta_bound, rng));
                } else {
                    const CovarianceSpec cov = decayed();
                    spec.arms.push_back(make_arm(cov, params.T, params.dense_ratio, params.theta_bound, rng));
                }
                break;
        }
    }
    return spec;
}

std::vector<Vector> sample_round(const ScenarioSpec& scenario, RngStream& rng) {
    std::vector<Vector> contexts;
    contexts.reserve(scenario.arms.size());
    if (scenario.params.shared_contexts) {
        const Vector g = rng.normal_vector(scenario.p());
        for (const auto& arm : scenario.arms) {
            contexts.emplace_back(arm.sqrt_eigenvalues.cwiseProduct(g));
        }
        return contexts;
    }
    for (const auto& arm : scenario.arms) {
        contexts.emplace_back(arm.sqrt_eigenvalues.cwiseProduct(rng.normal_vector(arm.theta.size())));
    }
    return contexts;
}

double expected_reward(const ConstVectorRef& x, const ArmModel& arm) {
    if (x.size() != arm.theta.size()) {
        throw StructuralError("reward: context dimension differs from theta");
    }
    return x.dot(arm.theta);
}

double reward(const ConstVectorRef& x, const ArmModel& arm, double sigma, RngStream& rng) {
    const double g = rng.normal();
    return expected_reward(x, arm) + sigma * g;
}

int oracle_arm(const std::vector<Vector>& contexts, const ScenarioSpec& scenario) {
    if (contexts.size() != scenario.arms.size() || contexts.empty()) {
        throw StructuralError("oracle_arm: need one context per arm");
    }
    int best = 0;
    double best_mu = expected_reward(contexts[0], scenario.arms[0]);
    for (std::size_t i = 1; i < contexts.size(); ++i) {
        const double mu = expected_reward(contexts[i], scenario.arms[i]);
        if (mu > best_mu) {
            best_mu = mu;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace hope

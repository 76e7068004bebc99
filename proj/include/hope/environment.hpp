#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "hope/core.hpp"

namespace hope {

enum class CovarianceKind { Identity, DecayA, DecayB, ExperimentDecay };

std::string_view to_string(CovarianceKind k);
CovarianceKind parse_covariance_kind(std::string_view s);

/// Diagonal covariance family. Eigenvalue k (1-indexed), before `scale`:
///   Identity:        1
///   DecayA:          k^-(1 + 1/T^a),   a in (0, 1)
///   DecayB:          k^-b,             b in (0, 1), p = O(T^c), c in (1, 1/(1-b))
///   ExperimentDecay: k^(-1 + 1/T)
struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::Identity;
    Eigen::Index p = 1;
    double a = 0.5;
    double b = 0.5;
    double c = 1.5;
    double scale = 1.0;

    void validate() const;
};

Vector make_covariance(const CovarianceSpec& spec, long T);

struct ArmModel {
    Vector theta;
    CovarianceSpec covariance;
    // Diagonal of Sigma, cached from make_covariance.
    Vector eigenvalues;
    Vector sqrt_eigenvalues;
    double sparsity_ratio = 0.0;

    Eigen::Index nonzeros() const;
    // theta^T Sigma theta
    double signal_variance() const;
};

enum class ScenarioId { S1, S2, S3, S4 };

std::string_view to_string(ScenarioId id);
ScenarioId parse_scenario_id(std::string_view s);

/// Knobs shared by every scenario generator; defaults follow the desk-scale profile.
struct ScenarioParams {
    int K = 5;
    long T = 500;
    Eigen::Index p = 200;
    double noise_variance = 0.1;
    double sparse_ratio = 0.1;
    double dense_ratio = 0.9;
    double scale_low = 0.5;
    double scale_high = 1.5;
    // Covariance family for the decayed arms.
    CovarianceKind decay_kind = CovarianceKind::ExperimentDecay;
    double decay_a = 0.5;
    double decay_b = 0.5;
    double decay_c = 1.5;
    // Number of sparse identity-covariance arms in the mixed scenario.
    int mixed_sparse_arms = 2;
    // Upper bound on ||theta||_2; exceeded vectors are rescaled onto the bound.
    double theta_bound = std::numeric_limits<double>::infinity();
    // Every arm receives the same context draw each round.
    bool shared_contexts = false;

    void validate() const;
};

struct ScenarioSpec {
    ScenarioId id = ScenarioId::S1;
    ScenarioParams params;
    std::vector<ArmModel> arms;

    int K() const { return static_cast<int>(arms.size()); }
    long T() const { return params.T; }
    Eigen::Index p() const { return params.p; }
    double sigma() const;
};

/// theta with round(ratio * p) standard-normal entries at uniformly drawn positions.
ArmModel make_arm(const CovarianceSpec& cov, long T, double sparsity_ratio, double theta_bound, RngStream& rng);

ScenarioSpec build_scenario(ScenarioId id, const ScenarioParams& params, RngStream& rng);

/// One context per arm, x_i = Sigma_i^{1/2} g_i with independent standard normal g_i.
std::vector<Vector> sample_round(const ScenarioSpec& scenario, RngStream& rng);

double expected_reward(const ConstVectorRef& x, const ArmModel& arm);

/// <x, theta> + sigma * g.
double reward(const ConstVectorRef& x, const ArmModel& arm, double sigma, RngStream& rng);

// Lowest index among maximizers.
int oracle_arm(const std::vector<Vector>& contexts, const ScenarioSpec& scenario);

}  // namespace hope

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hope/core.hpp"
#include "hope/environment.hpp"
#include "hope/pwe.hpp"

namespace hope {

enum class PolicyName { Hope, LassoEtc, RdlEtc, LassoBandit, LinUcb, Oracle };

std::string_view to_string(PolicyName n);
PolicyName parse_policy_name(std::string_view s);

struct PolicySpec {
    PolicyName name = PolicyName::Hope;
    // Per-arm budget: HOPE pulls each arm 2N times, the other ETC policies N times.
    long exploration_N = 0;
    PweConfig pwe{};
    // Replaces HOPE's support screening by the true support of each arm.
    bool oracle_support = false;
    // Lasso-ETC and Lasso-Bandit: lambda = constant * sigma * sqrt(log p / n).
    double lasso_lambda_constant = 1.0;
    double ucb_alpha = 1.0;
    double ridge_reg = 1.0;
    // Lasso-Bandit forced-sampling block length per arm.
    int forced_q = 5;
    // Lasso-Bandit refits when an arm's sample count reaches refit_base * 2^m.
    int refit_base = 25;

    // Total exploration length for ETC-style policies (0 for the others).
    long exploration_rounds(int K) const;
    void validate(int K, long T) const;
};

struct RegretTrace {
    std::string scenario;
    std::string policy;
    int repetition = 0;
    std::uint64_t seed = 0;
    std::vector<double> cumulative;
    std::vector<int> choices;
    // Commit-phase predictions that hit a degenerate fallback.
    long degenerate_predictions = 0;
};

/// Contexts and reward noise drawn by the simulator. Every policy run with the
/// same streams sees identical contexts and noise draws.
struct RunStreams {
    RngStream contexts;
    RngStream noise;

    static RunStreams make(std::uint64_t master_seed, std::uint32_t scenario, std::uint32_t repetition);
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual int choose(long round, const std::vector<Vector>& contexts) = 0;
    virtual void observe(long round, int arm, const Vector& context, double reward) = 0;
    virtual long degenerate_predictions() const { return 0; }
};

/// Explore-then-commit skeleton: round-robin for pulls_per_arm * K rounds, a
/// one-off fit on the frozen data, then greedy selection on the fitted predictor.
class EtcPolicy : public Policy {
public:
    EtcPolicy(const ScenarioSpec& scenario, long pulls_per_arm);

    int choose(long round, const std::vector<Vector>& contexts) override;
    void observe(long round, int arm, const Vector& context, double reward) override;

    long exploration_rounds() const { return pulls_per_arm_ * K_; }
    const std::vector<long>& pulls() const { return pulls_; }

protected:
    virtual void fit(const std::vector<Matrix>& X, const std::vector<Vector>& y) = 0;
    virtual double predict(int arm, const Vector& x) = 0;

    const ScenarioSpec& scenario_;
    int K_;
    long pulls_per_arm_;

private:
    std::vector<Matrix> X_;
    std::vector<Vector> y_;
    std::vector<long> pulls_;
    bool fitted_ = false;
};

class HopePolicy final : public EtcPolicy {
public:
    HopePolicy(const ScenarioSpec& scenario, const PolicySpec& spec);
    long degenerate_predictions() const override { return degenerate_; }
    const std::vector<PwePreparation>& preparations() const { return prep_; }

protected:
    void fit(const std::vector<Matrix>& X, const std::vector<Vector>& y) override;
    double predict(int arm, const Vector& x) override;

private:
    PolicySpec spec_;
    std::vector<PwePreparation> prep_;
    long degenerate_ = 0;
};

class LinearEtcPolicy final : public EtcPolicy {
public:
    LinearEtcPolicy(const ScenarioSpec& scenario, const PolicySpec& spec);
    const std::vector<Vector>& estimates() const { return theta_; }

protected:
    void fit(const std::vector<Matrix>& X, const std::vector<Vector>& y) override;
    double predict(int arm, const Vector& x) override;

private:
    PolicySpec spec_;
    std::vector<Vector> theta_;
};

/// Disjoint ridge UCB with Sherman-Morrison updates of each arm's inverse design.
class LinUcbPolicy final : public Policy {
public:
    LinUcbPolicy(int K, Eigen::Index p, double ucb_alpha, double ridge_reg);

    int choose(long round, const std::vector<Vector>& contexts) override;
    void observe(long round, int arm, const Vector& context, double reward) override;

    const Matrix& a_inverse(int arm) const { return a_inv_[static_cast<std::size_t>(arm)]; }
    double trace_a(int arm) const { return trace_a_[static_cast<std::size_t>(arm)]; }
    const Vector& estimate(int arm) const { return theta_[static_cast<std::size_t>(arm)]; }

private:
    double alpha_;
    std::vector<Matrix> a_inv_;
    std::vector<Vector> b_;
    std::vector<Vector> theta_;
    std::vector<double> trace_a_;
};

/// Forced sampling in blocks of q rounds per arm starting at rounds (2^n - 1) K q,
/// greedy on per-arm Lasso estimates otherwise. Each arm's Lasso is refit when
/// its sample count reaches refit_base * 2^m.
class LassoBanditPolicy final : public Policy {
public:
    LassoBanditPolicy(const ScenarioSpec& scenario, const PolicySpec& spec);

    int choose(long round, const std::vector<Vector>& contexts) override;
    void observe(long round, int arm, const Vector& context, double reward) override;

    // Arm forced at this round, if any.
    std::optional<int> forced_arm(long round) const;

    struct Refit {
        long round;
        int arm;
        long samples;
    };
    const std::vector<Refit>& refits() const { return refits_; }

private:
    const ScenarioSpec& scenario_;
    PolicySpec spec_;
    int K_;
    std::vector<std::vector<Vector>> X_;
    std::vector<std::vector<double>> y_;
    std::vector<Vector> theta_;
    std::vector<long> next_refit_;
    std::vector<Refit> refits_;
};

class OraclePolicy final : public Policy {
public:
    explicit OraclePolicy(const ScenarioSpec& scenario) : scenario_(scenario) {}
    int choose(long round, const std::vector<Vector>& contexts) override;
    void observe(long, int, const Vector&, double) override {}

private:
    const ScenarioSpec& scenario_;
};

std::unique_ptr<Policy> make_policy(const ScenarioSpec& scenario, const PolicySpec& spec);

/// max_i <x_i, theta_i> - <x_chosen, theta_chosen>.
double oracle_regret_increment(const std::vector<Vector>& contexts, int chosen, const ScenarioSpec& scenario);

/// Runs `policy` for T rounds and records pathwise cumulative regret.
RegretTrace simulate(const ScenarioSpec& scenario, Policy& policy, RunStreams& streams);

RegretTrace run_policy(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams);
RegretTrace run_hope(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams);
RegretTrace run_etc_baseline(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams);
RegretTrace run_lin_ucb(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams);
RegretTrace run_lasso_bandit(const ScenarioSpec& scenario, const PolicySpec& spec, RunStreams& streams);

// Spectral knowledge for the exploration-length formulas.
struct DecayKnowledge {
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> c;
    // tr(Sigma_S) / ||Sigma_S||_F on the learned support.
    std::optional<double> M;
    Eigen::Index p = 0;
};

struct NChoiceInputs {
    ScenarioId hint = ScenarioId::S1;
    int K = 1;
    long T = 1;
    std::optional<double> s0;
    std::optional<DecayKnowledge> decay;
};

/// Unrounded exploration-length formula with unit constant. Falls back to the
/// parameter-agnostic variant when the scenario's structural knowledge is absent.
double n_formula(const NChoiceInputs& in);

// n_formula rounded to the nearest integer, without clamping.
long n_formula_rounded(const NChoiceInputs& in);

/// n_formula rounded and clamped to [2, floor(T / 2K)]. Throws ConfigError when T < 4K.
long choose_N(const NChoiceInputs& in);

}  // namespace hope

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hope/bandit.hpp"
#include "hope/environment.hpp"

namespace hope {

// How the harness derives the exploration length when no override is given.
enum class NRule {
    // Parameter-agnostic formulas (no sparsity or spectral knowledge).
    Agnostic,
    // Formulas fed with the generator's true s0 and decay parameters.
    Informed,
};

struct ScenarioEntry {
    ScenarioId id = ScenarioId::S1;
    ScenarioParams params;
};

struct ExperimentConfig {
    std::vector<ScenarioEntry> scenarios;
    std::vector<PolicySpec> policies;
    int repetitions = 10;
    std::uint64_t master_seed = 20240917;
    std::string output_dir = "results";
    int jobs = 1;
    NRule n_rule = NRule::Agnostic;
    // Explicit per-arm exploration budget keyed by policy name.
    std::map<std::string, long> n_override;
};

/// Parses and validates a JSON experiment file. Errors carry the JSON pointer
/// of the offending value (or line/column for syntax errors).
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

/// The shipped default profile: four scenarios, five policies, 10 repetitions,
/// K=5, T=500, p=200, noise variance 0.1.
ExperimentConfig default_config();

std::string config_to_json(const ExperimentConfig& cfg);

/// Exploration budget N for `policy` on `scenario` (0 for non-ETC policies).
/// HOPE then pulls each arm 2N times, the other ETC policies N times.
long resolve_exploration_n(const ExperimentConfig& cfg, const ScenarioEntry& scenario, const PolicySpec& policy);

struct InfeasiblePair {
    std::string scenario;
    std::string policy;
    std::string reason;
};

std::vector<InfeasiblePair> check_feasibility(const ExperimentConfig& cfg);

struct AggregateSeries {
    std::string scenario;
    std::string policy;
    std::vector<double> mean;
    std::vector<double> std;
    int repetitions = 0;
    double wall_seconds = 0.0;

    double final_mean() const { return mean.empty() ? 0.0 : mean.back(); }
    double final_std() const { return std.empty() ? 0.0 : std.back(); }
};

struct AggregateResult {
    std::vector<AggregateSeries> series;

    const AggregateSeries* find(const std::string& scenario, const std::string& policy) const;
    std::vector<std::string> scenarios() const;
};

/// Pointwise mean and population standard deviation of traces sharing one
/// (scenario, policy) key and one length.
AggregateSeries aggregate(const std::vector<RegretTrace>& traces);

struct ExperimentOutcome {
    std::vector<RegretTrace> traces;
    AggregateResult aggregate;
    std::vector<InfeasiblePair> skipped;
    std::vector<std::string> failures;
    double wall_seconds = 0.0;

    bool ok() const { return skipped.empty() && failures.empty(); }
};

/// Runs every (scenario, policy, repetition) cell on up to cfg.jobs threads.
/// Traces are ordered by scenario, policy, repetition regardless of scheduling.
ExperimentOutcome run_grid(const ExperimentConfig& cfg);

/// run_grid plus raw_traces.csv, aggregate.csv, summary.csv and one SVG per
/// scenario under cfg.output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

void write_raw_csv(std::ostream& os, const std::vector<RegretTrace>& traces);
void write_aggregate_csv(std::ostream& os, const AggregateResult& agg);
void write_summary_csv(std::ostream& os, const AggregateResult& agg);

std::vector<RegretTrace> read_raw_csv(std::istream& is);
AggregateResult read_aggregate_csv(std::istream& is);

/// Groups traces by (scenario, policy) in first-seen order and aggregates each group.
AggregateResult aggregate_all(const std::vector<RegretTrace>& traces);

/// Self-contained 800x500 SVG of the mean cumulative-regret curves of one
/// scenario with +-1 std bands.
std::string render_svg(const AggregateResult& agg, const std::string& scenario);

// Writes plot_<scenario>.svg for every scenario; returns the written paths.
std::vector<std::filesystem::path> emit_plots(const AggregateResult& agg, const std::filesystem::path& dir);

// Stable "%.17g" rendering used by every CSV writer.
std::string format_double(double v);

}  // namespace hope

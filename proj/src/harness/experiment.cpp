#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <thread>

#include "hope/harness.hpp"

namespace hope {

namespace {

NChoiceInputs n_inputs(const ExperimentConfig& cfg, const ScenarioEntry& scenario) {
    const ScenarioParams& p = scenario.params;
    NChoiceInputs in;
    in.hint = scenario.id;
    in.K = p.K;
    in.T = p.T;
    if (cfg.n_rule == NRule::Agnostic) {
        return in;
    }
    const double s0 = static_cast<double>(std::llround(p.sparse_ratio * static_cast<double>(p.p)));
    DecayKnowledge decay;
    decay.p = p.p;
    decay.a = p.decay_a;
    decay.b = p.decay_b;
    decay.c = p.decay_c;
    switch (scenario.id) {
        case ScenarioId::S1:
            in.s0 = s0;
            break;
        case ScenarioId::S2:
            in.decay = decay;
            break;
        case ScenarioId::S3:
            // M depends on the learned support, unknown before the run.
            break;
        case ScenarioId::S4:
            in.s0 = s0;
            in.decay = decay;
            break;
    }
    return in;
}

bool is_etc(PolicyName n) {
    return n == PolicyName::Hope || n == PolicyName::LassoEtc || n == PolicyName::RdlEtc;
}

PolicySpec resolved_spec(const ExperimentConfig& cfg, const ScenarioEntry& scenario, const PolicySpec& policy) {
    PolicySpec spec = policy;
    spec.exploration_N = resolve_exploration_n(cfg, scenario, policy);
    spec.validate(scenario.params.K, scenario.params.T);
    return spec;
}

}  // namespace

long resolve_exploration_n(const ExperimentConfig& cfg, const ScenarioEntry& scenario, const PolicySpec& policy) {
    if (!is_etc(policy.name)) {
        return 0;
    }
    const auto it = cfg.n_override.find(std::string(to_string(policy.name)));
    if (it != cfg.n_override.end()) {
        return it->second;
    }
    return choose_N(n_inputs(cfg, scenario));
}

std::vector<InfeasiblePair> check_feasibility(const ExperimentConfig& cfg) {
    std::vector<InfeasiblePair> out;
    for (const auto& s : cfg.scenarios) {
        for (const auto& p : cfg.policies) {
            try {
                resolved_spec(cfg, s, p);
            } catch (const ConfigError& e) {
                out.push_back({std::string(to_string(s.id)), std::string(to_string(p.name)), e.what()});
            }
        }
    }
    return out;
}

const AggregateSeries* AggregateResult::find(const std::string& scenario, const std::string& policy) const {
    for (const auto& s : series) {
        if (s.scenario == scenario && s.policy == policy) return &s;
    }
    return nullptr;
}

std::vector<std::string> AggregateResult::scenarios() const {
    std::vector<std::string> out;
    for (const auto& s : series) {
        if (std::find(out.begin(), out.end(), s.scenario) == out.end()) out.push_back(s.scenario);
    }
    return out;
}

AggregateSeries aggregate(const std::vector<RegretTrace>& traces) {
    if (traces.empty()) {
        throw StructuralError("aggregate: no traces");
    }
    const RegretTrace& first = traces.front();
    const std::size_t len = first.cumulative.size();
    for (const auto& t : traces) {
        if (t.scenario != first.scenario || t.policy != first.policy) {
            throw StructuralError("aggregate: traces mix scenario/policy keys");
        }
        if (t.cumulative.size() != len) {
            throw StructuralError("aggregate: traces differ in length");
        }
    }
    AggregateSeries out;
    out.scenario = first.scenario;
    out.policy = first.policy;
    out.repetitions = static_cast<int>(traces.size());
    out.mean.assign(len, 0.0);
    out.std.assign(len, 0.0);
    const double n = static_cast<double>(traces.size());
    for (std::size_t r = 0; r < len; ++r) {
        double sum = 0.0;
        for (const auto& t : traces) sum += t.cumulative[r];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& t : traces) {
            const double d = t.cumulative[r] - mean;
            ss += d * d;
        }
        out.mean[r] = mean;
        out.std[r] = std::sqrt(ss / n);
    }
    return out;
}

AggregateResult aggregate_all(const std::vector<RegretTrace>& traces) {
    std::vector<std::pair<std::string, std::string>> keys;
    std::vector<std::vector<RegretTrace>> groups;
    for (const auto& t : traces) {
        const auto key = std::make_pair(t.scenario, t.policy);
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
            keys.push_back(key);
            groups.emplace_back();
            groups.back().push_back(t);
        } else {
            groups[static_cast<std::size_t>(it - keys.begin())].push_back(t);
        }
    }
    AggregateResult out;
    for (const auto& g : groups) out.series.push_back(aggregate(g));
    return out;
}

ExperimentOutcome run_grid(const ExperimentConfig& cfg) {
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be at least 1");
    if (cfg.scenarios.empty()) throw ConfigError("no scenarios configured");
    if (cfg.policies.empty()) throw ConfigError("no policies configured");
    const auto start = std::chrono::steady_clock::now();

    ExperimentOutcome outcome;
    outcome.skipped = check_feasibility(cfg);

    struct Cell {
        std::size_t scenario;
        std::size_t policy;
        int repetition;
        PolicySpec spec;
    };
    std::vector<Cell> cells;
    std::vector<std::vector<ScenarioSpec>> built(cfg.scenarios.size());
    for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
        const ScenarioEntry& entry = cfg.scenarios[si];
        const auto sid = static_cast<std::uint32_t>(entry.id);
        for (int r = 0; r < cfg.repetitions; ++r) {
            RngStream model(cfg.master_seed, StreamId{sid, static_cast<std::uint32_t>(r), StreamRole::Model});
            built[si].push_back(build_scenario(entry.id, entry.params, model));
        }
        for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
            PolicySpec spec;
            try {
                spec = resolved_spec(cfg, entry, cfg.policies[pi]);
            } catch (const ConfigError&) {
                continue;
            }
            for (int r = 0; r < cfg.repetitions; ++r) cells.push_back(Cell{si, pi, r, spec});
        }
    }

    std::vector<std::optional<RegretTrace>> results(cells.size());
    std::vector<double> seconds(cells.size(), 0.0);
    std::vector<std::string> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& c = cells[i];
            const ScenarioEntry& entry = cfg.scenarios[c.scenario];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                RunStreams streams = RunStreams::make(cfg.master_seed, static_cast<std::uint32_t>(entry.id),
                                                      static_cast<std::uint32_t>(c.repetition));
                RegretTrace trace = run_policy(built[c.scenario][static_cast<std::size_t>(c.repetition)], c.spec,
                                               streams);
                trace.repetition = c.repetition;
                results[i] = std::move(trace);
            } catch (const std::exception& e) {
                errors[i] = std::string(to_string(entry.id)) + "/" + std::string(to_string(c.spec.name)) + "/rep" +
                            std::to_string(c.repetition) + ": " + e.what();
            }
            seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(cfg.jobs, 1)), 1,
                                                     std::max<std::size_t>(cells.size(), 1));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::map<std::pair<std::string, std::string>, double> wall;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (results[i]) {
            wall[{results[i]->scenario, results[i]->policy}] += seconds[i];
            outcome.traces.push_back(std::move(*results[i]));
        } else if (!errors[i].empty()) {
            outcome.failures.push_back(errors[i]);
        }
    }
    outcome.aggregate = aggregate_all(outcome.traces);
    for (auto& s : outcome.aggregate.series) s.wall_seconds = wall[{s.scenario, s.policy}];
    outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return outcome;
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    ExperimentOutcome outcome = run_grid(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_file(dir / "raw_traces.csv", [&](std::ostream& os) { write_raw_csv(os, outcome.traces); });
    write_file(dir / "aggregate.csv", [&](std::ostream& os) { write_aggregate_csv(os, outcome.aggregate); });
    write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, outcome.aggregate); });
    if (!outcome.aggregate.series.empty()) emit_plots(outcome.aggregate, dir);
    return outcome;
}

}  // namespace hope

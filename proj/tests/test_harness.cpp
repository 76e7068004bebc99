#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "hope/harness.hpp"

using namespace hope;

namespace {

RegretTrace trace_of(std::string scenario, std::string policy, int rep, std::vector<double> values) {
    RegretTrace t;
    t.scenario = std::move(scenario);
    t.policy = std::move(policy);
    t.repetition = rep;
    t.seed = 1000 + static_cast<std::uint64_t>(rep);
    t.cumulative = std::move(values);
    return t;
}

const char* kSmallGrid = R"({
  "master_seed": 5,
  "repetitions": 3,
  "jobs": 2,
  "defaults": {"K": 3, "T": 50, "p": 20},
  "scenarios": [{"id": "s1"}, {"id": "s2"}],
  "policies": [{"name": "hope"}, {"name": "rdl-etc"}, {"name": "lin-ucb"}]
})";

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("aggregate of two traces") {
    const AggregateSeries s = aggregate({trace_of("s1", "hope", 0, {0, 1, 2}), trace_of("s1", "hope", 1, {0, 3, 4})});
    CHECK(s.mean == std::vector<double>{0, 2, 3});
    CHECK(s.std == std::vector<double>{0, 1, 1});
    CHECK(s.repetitions == 2);
    CHECK(s.final_mean() == 3.0);
}

TEST_CASE("aggregate of a single trace and of zero traces") {
    const AggregateSeries one = aggregate({trace_of("s2", "rdl-etc", 0, {0.5, 1.5, 4.0})});
    CHECK(one.mean == std::vector<double>{0.5, 1.5, 4.0});
    CHECK(one.std == std::vector<double>{0, 0, 0});

    std::vector<RegretTrace> zeros;
    for (int r = 0; r < 10; ++r) zeros.push_back(trace_of("s3", "lin-ucb", r, std::vector<double>(7, 0.0)));
    const AggregateSeries z = aggregate(zeros);
    CHECK(z.mean == std::vector<double>(7, 0.0));
    CHECK(z.std == std::vector<double>(7, 0.0));
}

TEST_CASE("aggregate rejects mixed keys and lengths") {
    CHECK_THROWS_AS(aggregate({trace_of("s1", "hope", 0, {1}), trace_of("s2", "hope", 1, {1})}), StructuralError);
    CHECK_THROWS_AS(aggregate({trace_of("s1", "hope", 0, {1}), trace_of("s1", "rdl-etc", 1, {1})}), StructuralError);
    CHECK_THROWS_AS(aggregate({trace_of("s1", "hope", 0, {1}), trace_of("s1", "hope", 1, {1, 2})}), StructuralError);
    CHECK_THROWS_AS(aggregate({}), StructuralError);
}

TEST_CASE("grid run is complete, ordered and deterministic") {
    const ExperimentConfig cfg = parse_config(kSmallGrid);
    const ExperimentOutcome a = run_grid(cfg);
    REQUIRE(a.ok());
    CHECK(a.traces.size() == 2 * 3 * 3);
    std::size_t k = 0;
    for (const char* s : {"s1", "s2"}) {
        for (const char* p : {"hope", "rdl-etc", "lin-ucb"}) {
            for (int r = 0; r < 3; ++r, ++k) {
                CHECK(a.traces[k].scenario == s);
                CHECK(a.traces[k].policy == p);
                CHECK(a.traces[k].repetition == r);
                CHECK(a.traces[k].cumulative.size() == 50);
            }
        }
    }
    CHECK(a.aggregate.series.size() == 6);
    for (const auto& s : a.aggregate.series) {
        for (std::size_t t = 0; t < s.mean.size(); ++t) {
            CHECK(s.std[t] >= 0.0);
            if (t > 0) CHECK(s.mean[t] >= s.mean[t - 1]);
        }
    }

    ExperimentConfig serial = cfg;
    serial.jobs = 1;
    const ExperimentOutcome b = run_grid(serial);
    std::ostringstream ra, rb;
    write_raw_csv(ra, a.traces);
    write_raw_csv(rb, b.traces);
    CHECK(ra.str() == rb.str());
}

TEST_CASE("a single repetition has zero spread") {
    ExperimentConfig cfg = parse_config(kSmallGrid);
    cfg.repetitions = 1;
    for (const auto& s : run_grid(cfg).aggregate.series) CHECK(s.std == std::vector<double>(s.std.size(), 0.0));
}

TEST_CASE("raw CSV round trip reproduces the aggregate exactly") {
    const ExperimentOutcome out = run_grid(parse_config(kSmallGrid));
    std::ostringstream raw;
    write_raw_csv(raw, out.traces);
    std::istringstream in(raw.str());
    const std::vector<RegretTrace> back = read_raw_csv(in);
    REQUIRE(back.size() == out.traces.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].cumulative == out.traces[i].cumulative);
        CHECK(back[i].seed == out.traces[i].seed);
    }

    std::ostringstream direct, replayed;
    write_aggregate_csv(direct, out.aggregate);
    write_aggregate_csv(replayed, aggregate_all(back));
    CHECK(direct.str() == replayed.str());

    std::istringstream agg_in(direct.str());
    std::ostringstream again;
    write_aggregate_csv(again, read_aggregate_csv(agg_in));
    CHECK(again.str() == direct.str());

    const std::string header = raw.str().substr(0, raw.str().find('\n'));
    CHECK(header == "scenario,policy,repetition,seed,round,cumulative_regret");
    CHECK(direct.str().rfind("scenario,policy,round,mean,std\n", 0) == 0);
}

TEST_CASE("CSV readers reject malformed input") {
    std::istringstream bad_header("scenario,policy,round\n");
    CHECK_THROWS(read_aggregate_csv(bad_header));
    std::istringstream bad_round("scenario,policy,repetition,seed,round,cumulative_regret\ns1,hope,0,1,2,0.5\n");
    CHECK_THROWS(read_raw_csv(bad_round));
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("SVG rendering") {
    AggregateResult agg;
    agg.series.push_back(aggregate({trace_of("s1", "hope", 0, {0, 1, 2}), trace_of("s1", "hope", 1, {0, 2, 2})}));
    agg.series.push_back(aggregate({trace_of("s1", "lin-ucb", 0, {1, 2, 5})}));
    agg.series.push_back(aggregate({trace_of("s2", "hope", 0, {0, 0, 1})}));
    const std::string svg = render_svg(agg, "s1");
    CHECK(count(svg, "<path class=\"mean\"") == 2);
    CHECK(count(svg, "<polygon class=\"band\"") == 2);
    CHECK(svg.find("viewBox=\"0 0 800 500\"") != std::string::npos);
    CHECK(svg.find("lin-ucb") != std::string::npos);
    CHECK(render_svg(agg, "s1") == svg);
    CHECK_THROWS(render_svg(agg, "s4"));
    CHECK_THROWS(render_svg(AggregateResult{}, "s1"));
}

TEST_CASE("emitted plot files are identical across runs") {
    AggregateResult agg;
    agg.series.push_back(aggregate({trace_of("s3", "hope", 0, {0, 1, 3})}));
    const auto dir = std::filesystem::temp_directory_path() / "hope_plot_test";
    std::filesystem::remove_all(dir);
    const auto first = emit_plots(agg, dir);
    REQUIRE(first.size() == 1);
    CHECK(first.front().filename() == "plot_s3.svg");
    std::ifstream f1(first.front());
    const std::string a((std::istreambuf_iterator<char>(f1)), {});
    emit_plots(agg, dir);
    std::ifstream f2(first.front());
    const std::string b((std::istreambuf_iterator<char>(f2)), {});
    CHECK(a == b);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_experiment writes every artifact") {
    ExperimentConfig cfg = parse_config(kSmallGrid);
    cfg.repetitions = 1;
    const auto dir = std::filesystem::temp_directory_path() / "hope_experiment_test";
    std::filesystem::remove_all(dir);
    cfg.output_dir = dir.string();
    REQUIRE(run_experiment(cfg).ok());
    for (const char* f : {"raw_traces.csv", "aggregate.csv", "summary.csv", "plot_s1.svg", "plot_s2.svg"}) {
        CHECK(std::filesystem::exists(dir / f));
    }
    std::ifstream raw(dir / "raw_traces.csv");
    std::size_t lines = 0;
    for (std::string line; std::getline(raw, line);) ++lines;
    CHECK(lines == 1 + 2 * 3 * 50);
    std::ifstream summary(dir / "summary.csv");
    std::string header;
    std::getline(summary, header);
    CHECK(header == "scenario,policy,repetitions,final_mean,final_std,wall_seconds");
    std::filesystem::remove_all(dir);
}

TEST_CASE("default configuration matches the shipped profile") {
    const ExperimentConfig cfg = default_config();
    CHECK(cfg.scenarios.size() == 4);
    CHECK(cfg.policies.size() == 5);
    CHECK(cfg.repetitions == 10);
    for (const auto& s : cfg.scenarios) {
        CHECK(s.params.K == 5);
        CHECK(s.params.T == 500);
        CHECK(s.params.p == 200);
        CHECK(s.params.noise_variance == 0.1);
    }
    CHECK(check_feasibility(cfg).empty());

    const ExperimentConfig shipped = load_config(std::filesystem::path(HOPE_SOURCE_DIR) / "configs/default.json");
    CHECK(config_to_json(shipped) == config_to_json(cfg));
}

TEST_CASE("config serialisation round-trips") {
    const ExperimentConfig cfg = parse_config(kSmallGrid);
    const std::string json = config_to_json(cfg);
    CHECK(config_to_json(parse_config(json)) == json);
}

TEST_CASE("exploration budgets under the agnostic and informed rules") {
    ExperimentConfig cfg = default_config();
    const auto& s1 = cfg.scenarios[0];
    const auto& s2 = cfg.scenarios[1];
    const PolicySpec hope = cfg.policies[0];
    CHECK(resolve_exploration_n(cfg, s1, hope) == 22);
    CHECK(resolve_exploration_n(cfg, s2, hope) == 10);
    for (const auto& p : cfg.policies) {
        const long n = resolve_exploration_n(cfg, s1, p);
        if (p.name == PolicyName::LinUcb || p.name == PolicyName::LassoBandit) {
            CHECK(n == 0);
        } else {
            CHECK(n == 22);
        }
    }
    cfg.n_rule = NRule::Informed;
    CHECK(resolve_exploration_n(cfg, s1, hope) == 50);
    cfg.n_override["hope"] = 7;
    CHECK(resolve_exploration_n(cfg, s1, hope) == 7);
}

TEST_CASE("infeasible pairs are skipped and reported") {
    ExperimentConfig cfg = parse_config(kSmallGrid);
    cfg.n_override["hope"] = 9;
    const auto bad = check_feasibility(cfg);
    REQUIRE(bad.size() == 2);
    CHECK(bad[0].policy == "hope");
    const ExperimentOutcome out = run_grid(cfg);
    CHECK(out.skipped.size() == 2);
    CHECK(out.traces.size() == 2 * 2 * 3);
    for (const auto& t : out.traces) CHECK(t.policy != "hope");
}

TEST_CASE("config errors carry the location of the offending value") {
    CHECK(error_of(R"({"scenarios":[{"id":"s1"}],"policies":[{"name":"hope","ucb_alpah":1}]})") ==
          "config error at /policies/0/ucb_alpah: unknown key");
    CHECK(error_of(R"({"scenarios":[{"id":"s9"}],"policies":[{"name":"hope"}]})").rfind(
              "config error at /scenarios/0/id", 0) == 0);
    CHECK(error_of(R"({"repetitions":0,"scenarios":[{"id":"s1"}],"policies":[{"name":"hope"}]})").rfind(
              "config error at /repetitions", 0) == 0);
    CHECK(error_of(R"({"scenarios":[{"id":"s1","T":"long"}],"policies":[{"name":"hope"}]})") ==
          "config error at /scenarios/0/T: expected an integer");
    CHECK(error_of(R"({"scenarios":[{"id":"s1"},{"id":"s1"}],"policies":[{"name":"hope"}]})").rfind(
              "config error at /scenarios/1/id", 0) == 0);
    CHECK(error_of(R"({"scenarios":[{"id":"s1"}],"policies":[{"name":"lin-ucb","pwe":{}}]})").rfind(
              "config error at /policies/0/pwe", 0) == 0);
    CHECK(error_of(R"({"scenarios":[{"id":"s1"}],"policies":[{"name":"hope","pwe":{"support_rule":"x"}}]})")
              .rfind("config error at /policies/0/pwe/support_rule", 0) == 0);
    CHECK(error_of(R"({"scenarios":[{"id":"s1"}],"policies":[{"name":"hope"}],"n_override":{"lin-ucb":3}})")
              .rfind("config error at /n_override/lin-ucb", 0) == 0);
    CHECK(error_of(R"({"policies":[{"name":"hope"}]})").rfind("config error at /scenarios", 0) == 0);
    const std::string syntax = error_of("{\n  \"repetitions\": 2,\n  ,\n}");
    CHECK(std::regex_search(syntax, std::regex("line 3, column \\d+")));
}

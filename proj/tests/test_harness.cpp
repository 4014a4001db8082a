#include "csmasim/error.hpp"
#include "csmasim/harness.hpp"
#include "csmasim/reproduce.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace csmasim;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("summary statistics") {
    CHECK(summarize({}).mean == 0.0);
    const auto one = summarize({4.0});
    CHECK(one.mean == 4.0);
    CHECK(one.std == 0.0);
    const auto two = summarize({1.0, 3.0});
    CHECK(two.mean == 2.0);
    CHECK(two.std == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("suite layout") {
    auto s = parse_scenario(R"({"generator": "fim", "params": {"outer": 2}, "duration_s": 2,
                                "protocol": ["odcf", "dcf"], "overrides": {"odcf": {"v": 1000}}})",
                            "fim2");
    RunOptions o;
    o.reps = 3;
    const auto r = run_suite(s, o);
    REQUIRE(r.runs.size() == 6);
    CHECK(r.runs[0].protocol == Protocol::Odcf);
    CHECK(r.runs[3].protocol == Protocol::Dcf);
    for (int i = 0; i < 3; ++i) CHECK(r.runs[static_cast<std::size_t>(i)].seed == 1u + static_cast<unsigned>(i));
    const auto csv = results_csv(r);
    CHECK(csv.rfind(std::string(kResultsCsvHeader) + "\n", 0) == 0);
    CHECK(lines(csv) == 1 + 6 * 3);
    CHECK(lines(timeseries_csv(r)) == 1 + 6 * 3 * 2);
    const auto j = nlohmann::json::parse(summary_json(r));
    CHECK(j["scenario"] == "fim2");
    CHECK(j["replications"] == 3);
    CHECK(j["protocols"].size() == 2);
    CHECK(j["protocols"][0]["flows"].size() == 3);
    // PF column: the discounted 2:1:2 allocation.
    CHECK(r.runs[0].flows[0].pf_bps == doctest::Approx(2.0 * r.runs[0].flows[1].pf_bps));
}

TEST_CASE("one replication has zero spread") {
    auto s = parse_scenario(R"({"generator": "fc", "params": {"n": 3}, "duration_s": 1})");
    RunOptions o;
    o.reps = 1;
    const auto r = run_suite(s, o);
    for (const auto& p : r.summary) {
        CHECK(p.jain.std == 0.0);
        CHECK(p.aggregate_bps.std == 0.0);
        for (const auto& g : p.goodput_bps) CHECK(g.std == 0.0);
    }
}

TEST_CASE("overrides and validation") {
    auto s = parse_scenario(R"({"generator": "fc", "duration_s": 100})");
    RunOptions o;
    o.reps = 1;
    o.duration_s = 0.5;
    o.seed = 9;
    o.protocols = {Protocol::Diffq};
    const auto r = run_suite(s, o);
    CHECK(r.scenario.duration_s == 0.5);
    CHECK(r.seed_base == 9);
    REQUIRE(r.summary.size() == 1);
    CHECK(r.summary[0].protocol == Protocol::Diffq);
    o.reps = 0;
    CHECK_THROWS_AS(run_suite(s, o), ConfigError);
}

TEST_CASE("randomized draws are shared by the protocols of a replication") {
    auto s = parse_scenario(R"({"generator": "grid", "duration_s": 1, "protocol": ["odcf", "dcf"]})");
    RunOptions o;
    o.reps = 3;
    const auto r = run_suite(s, o);
    const auto odcf = r.runs_of(Protocol::Odcf), dcf = r.runs_of(Protocol::Dcf);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t l = 0; l < odcf[i]->flows.size(); ++l) {
            CHECK(odcf[i]->flows[l].label == dcf[i]->flows[l].label);
            CHECK(odcf[i]->flows[l].pf_bps == dcf[i]->flows[l].pf_bps);
        }
    bool differ = false;
    for (std::size_t l = 0; l < odcf[0]->flows.size(); ++l) differ |= odcf[0]->flows[l].label != odcf[1]->flows[l].label;
    CHECK(differ);
}

TEST_CASE("files are byte-identical across runs and thread counts") {
    auto s = parse_scenario(R"({"generator": "mixed_a", "duration_s": 2, "overrides": {"odcf": {"v": 500}}})", "mix");
    const auto base = std::filesystem::temp_directory_path() / "csmasim_harness_test";
    std::filesystem::remove_all(base);
    RunOptions o;
    o.reps = 2;
    o.record_events = true;
    write_results(run_suite(s, o), base / "a");
    write_results(run_suite(s, o), base / "b");
    o.parallel = true;
    o.threads = 3;
    write_results(run_suite(s, o), base / "c");
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(base / "a")) {
        ++n;
        const auto name = e.path().filename();
        CAPTURE(name.string());
        const auto a = slurp(e.path());
        CHECK(a == slurp(base / "b" / name));
        CHECK(a == slurp(base / "c" / name));
    }
    CHECK(n == 3 + 5 * 2);
    std::filesystem::remove_all(base);
}

TEST_CASE("event-log CW average equals the counted mean window") {
    auto s = parse_scenario(R"({"generator": "mixed_b", "duration_s": 2, "protocol": ["odcf"],
                                "overrides": {"odcf": {"v": 500}}})");
    RunOptions o;
    o.reps = 1;
    o.record_events = true;
    const auto r = run_suite(s, o);
    const auto& run = r.runs.front();
    const auto cw = mean_cw_from_log(run.event_log, run.flows.size());
    for (std::size_t l = 0; l < cw.size(); ++l) CHECK(cw[l] == doctest::Approx(run.flows[l].mean_cw));
}

}  // TEST_SUITE

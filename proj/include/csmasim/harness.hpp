#pragma once

#include "csmasim/pf_oracle.hpp"
#include "csmasim/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace csmasim {

struct RunOptions {
    int reps = 10;
    std::optional<double> duration_s;    // overrides the scenario
    std::optional<std::uint64_t> seed;   // overrides the scenario's seed base
    std::vector<Protocol> protocols;     // empty keeps the scenario's list
    bool parallel = false;
    unsigned threads = 0;                // 0: hardware concurrency
    bool record_events = false;
};

struct FlowRow {
    LinkId flow = 0;
    std::string label;
    double capacity_mbps = 0.0;
    double goodput_bps = 0.0;
    double pf_bps = 0.0;  // overhead-discounted PF optimum, 0 when the oracle was skipped
    double ratio_to_pf = 0.0;
    double airtime_share = 0.0;
    double collision_ratio = 0.0;
    double mean_cw = 0.0;
    std::uint64_t attempts = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t in_flight = 0;
    double short_term_fairness = 0.0;
    std::vector<std::uint64_t> delivered_per_second;
};

struct Replication {
    Protocol protocol = Protocol::Odcf;
    int index = 0;
    std::uint64_t seed = 0;
    bool rts_cts = false;
    std::vector<FlowRow> flows;
    double aggregate_bps = 0.0;
    double jain = 0.0;
    double sum_log = 0.0;
    bool sum_log_finite = true;
    double min_ratio = 0.0;
    double pf_residual = 0.0;
    std::string event_log;
};

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for one replication
};

Stat summarize(const std::vector<double>& xs);

struct ProtocolSummary {
    Protocol protocol = Protocol::Odcf;
    Stat aggregate_bps;
    Stat jain;
    Stat sum_log;  // over replications with every flow served
    int starved_reps = 0;
    Stat min_ratio;
    std::vector<Stat> goodput_bps;
    std::vector<Stat> pf_bps;
    std::vector<Stat> ratio_to_pf;
    std::vector<Stat> airtime_share;
    std::vector<Stat> mean_cw;
};

struct SuiteResult {
    Scenario scenario;
    int reps = 0;
    std::uint64_t seed_base = 0;
    std::vector<Replication> runs;  // protocol-major, then replication index
    std::vector<ProtocolSummary> summary;

    const ProtocolSummary& of(Protocol p) const;
    std::vector<const Replication*> runs_of(Protocol p) const;
};

// Runs every (protocol, replication) pair. Replication i uses seed base + i
// for the engine and, for randomized generators, for the topology draw.
// Any failure aborts the suite.
SuiteResult run_suite(const Scenario& scenario, const RunOptions& options);

// Stable-schema exports.
std::string results_csv(const SuiteResult& r);
std::string timeseries_csv(const SuiteResult& r);
std::string summary_json(const SuiteResult& r);
// Writes <name>.csv, <name>.timeseries.csv, <name>.summary.json and, when
// recorded, <name>.<protocol>.rep<i>.events.csv into `dir`.
void write_results(const SuiteResult& r, const std::filesystem::path& dir);

extern const char* const kResultsCsvHeader;

}  // namespace csmasim

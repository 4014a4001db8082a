// Command-line front end: run scenario files, reproduce canned cases, solve
// the PF oracle.
#include "csmasim/error.hpp"
#include "csmasim/harness.hpp"
#include "csmasim/kernels.hpp"
#include "csmasim/pf_oracle.hpp"
#include "csmasim/reproduce.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace csmasim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAcceptance = 2;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int reps = 10;
    std::optional<double> duration_s;
    std::vector<std::string> protocols;
    bool parallel = false;
    unsigned threads = 0;
};

std::vector<Protocol> parse_protocols(const std::vector<std::string>& names) {
    std::vector<Protocol> out;
    for (const auto& arg : names) {
        std::size_t pos = 0;
        while (pos <= arg.size()) {
            const auto comma = std::min(arg.find(',', pos), arg.size());
            const auto name = arg.substr(pos, comma - pos);
            if (name == "all") {
                out.assign(kAllProtocols.begin(), kAllProtocols.end());
            } else if (!name.empty()) {
                try {
                    out.push_back(parse_protocol(name));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError("--protocol", e.what());
                }
            }
            pos = comma + 1;
        }
    }
    return out;
}

void print_summary(const SuiteResult& r) {
    fmt::print("{} ({}, {} reps x {:g} s, seed {})\n", r.scenario.name, r.scenario.generator, r.reps,
               r.scenario.duration_s, r.seed_base);
    fmt::print("  {:<9} {:>12} {:>7} {:>9} {:>9}\n", "protocol", "agg kb/s", "jain", "sum-log", "min/PF");
    for (const auto& p : r.summary) {
        const std::string ulog = p.starved_reps ? fmt::format("-inf({})", p.starved_reps)
                                                : fmt::format("{:.2f}", p.sum_log.mean);
        fmt::print("  {:<9} {:>12.0f} {:>7.3f} {:>9} {:>9.3f}\n", to_string(p.protocol),
                   p.aggregate_bps.mean / 1e3, p.jain.mean, ulog, p.min_ratio.mean);
    }
}

int cmd_run(const Common& c, bool events) {
    auto scenario = load_scenario(c.config);
    RunOptions o;
    o.reps = c.reps;
    o.duration_s = c.duration_s;
    o.seed = c.seed;
    o.protocols = parse_protocols(c.protocols);
    o.parallel = c.parallel;
    o.threads = c.threads;
    o.record_events = events;
    const auto r = run_suite(scenario, o);
    if (!c.out.empty()) write_results(r, c.out);
    print_summary(r);
    return kExitOk;
}

int cmd_reproduce(const Common& c, std::vector<std::string> names) {
    if (names.empty() || (names.size() == 1 && names.front() == "all"))
        names.assign(reproduce_names().begin(), reproduce_names().end());
    for (const auto& n : names) canned_scenario_json(n);
    ReproduceOptions o;
    o.reps = c.reps;
    o.duration_s = c.duration_s;
    o.seed = c.seed;
    o.parallel = c.parallel;
    o.threads = c.threads;
    Reproducer rep(o);
    bool all = true;
    for (const auto& n : names) {
        const auto cr = rep.run(n);
        for (const auto& k : cr.checks)
            fmt::print("{} {}: {}: measured {}, expected {}\n", k.pass ? "PASS" : "FAIL", cr.name, k.what, k.measured,
                       k.expected);
        all = all && cr.pass();
        if (!c.out.empty()) write_results(rep.suite(n), c.out);
    }
    return all ? kExitOk : kExitAcceptance;
}

int cmd_oracle(const Common& c, bool raw) {
    auto s = load_scenario(c.config);
    const auto seed = c.seed.value_or(s.seed);
    const auto topo = build_topology(s, seed);
    const auto sol = solve_pf(topo, s.timing, !raw);
    nlohmann::ordered_json j;
    j["scenario"] = s.name;
    j["draw_seed"] = seed;
    j["discounted"] = !raw;
    j["residual"] = sol.residual;
    j["iterations"] = sol.iterations;
    fmt::print("{}: {} links, residual {:.3g} after {} iterations ({} kernels)\n", s.name, topo.size(), sol.residual,
               sol.iterations, kernels::active_isa());
    auto flows = nlohmann::ordered_json::array();
    for (LinkId l = 0; l < topo.size(); ++l) {
        fmt::print("  {:<10} {:>8g} Mb/s  PF {:>10.1f} kb/s\n", topo.label(l), topo.capacity(l), sol.rates_bps[l] / 1e3);
        flows.push_back({{"flow", l}, {"label", topo.label(l)}, {"capacity_mbps", topo.capacity(l)},
                         {"pf_kbps", sol.rates_bps[l] / 1e3}});
    }
    j["flows"] = std::move(flows);
    auto sched = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < sol.sets.size(); ++i) {
        if (sol.shares[i] <= 0.0) continue;
        auto members = nlohmann::ordered_json::array();
        for (LinkId l = 0; l < topo.size(); ++l)
            if (sol.sets[i] >> l & 1) members.push_back(topo.label(l));
        sched.push_back({{"links", std::move(members)}, {"share", sol.shares[i]}});
    }
    j["schedule"] = std::move(sched);
    if (!c.out.empty()) {
        std::filesystem::create_directories(c.out);
        std::ofstream(std::filesystem::path(c.out) / (s.name + ".oracle.json"), std::ios::binary) << j.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_list() {
    fmt::print("canned scenarios (reproduce):\n");
    for (auto n : reproduce_names()) fmt::print("  {}\n", n);
    fmt::print("generators (scenario files):\n");
    for (auto n : generator_names()) fmt::print("  {}\n", n);
    fmt::print("protocols:\n");
    for (auto p : kAllProtocols) fmt::print("  {}\n", to_string(p));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"O-DCF mini-slot CSMA simulator"};
    app.require_subcommand(1);
    Common c;
    bool events = false, raw = false;
    std::vector<std::string> names;

    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--seed", c.seed, "Seed base; replication i uses base + i");
        sub->add_option("--reps", c.reps, "Replications per protocol")->check(CLI::PositiveNumber);
        sub->add_option("--duration-s", c.duration_s, "Simulated seconds per run")->check(CLI::PositiveNumber);
        sub->add_flag("--parallel", c.parallel, "Run replications on worker threads");
        sub->add_option("--threads", c.threads, "Worker threads with --parallel (default: all cores)");
        sub->add_option("--out", c.out, "Directory for result files");
    };

    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("--config", c.config, "Scenario JSON")->required();
    run->add_option("--protocol", c.protocols, "Protocols to run (comma list or repeated; default: the scenario's)");
    run->add_flag("--events", events, "Write per-run event logs");
    add_run_flags(run);

    auto* repro = app.add_subcommand("reproduce", "Run canned scenarios and check their targets");
    repro->add_option("names", names, "Canned scenario names, or 'all'");
    add_run_flags(repro);

    auto* oracle = app.add_subcommand("oracle", "Solve the PF allocation of a scenario's topology");
    oracle->add_option("--config", c.config, "Scenario JSON")->required();
    oracle->add_option("--seed", c.seed, "Draw seed for randomized generators");
    oracle->add_option("--out", c.out, "Directory for <name>.oracle.json");
    oracle->add_flag("--raw", raw, "Use raw capacities instead of overhead-discounted rates");

    app.add_subcommand("list-scenarios", "List canned scenarios, generators and protocols");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(c, events);
        if (*repro) return cmd_reproduce(c, names);
        if (*oracle) return cmd_oracle(c, raw);
        return cmd_list();
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitConfig;
    }
}

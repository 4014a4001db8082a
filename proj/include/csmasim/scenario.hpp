#pragma once

#include "csmasim/baselines.hpp"
#include "csmasim/engine.hpp"
#include "csmasim/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csmasim {

// Relation lists of an explicit topology.
struct ExplicitTopology {
    std::vector<std::pair<std::size_t, double>> links;  // (id, capacity Mb/s), ids 0..n-1
    std::vector<std::string> labels;                    // optional, empty or one per link
    std::vector<std::pair<LinkId, LinkId>> sense;       // directed (a hears b) pairs
    std::vector<std::pair<LinkId, LinkId>> interfere;   // directed (k corrupts l) pairs
    std::vector<std::pair<LinkId, LinkId>> capture;     // (a dominates b)
    std::vector<std::pair<LinkId, LinkId>> conflict;    // mutual sense + interfere

    bool operator==(const ExplicitTopology&) const = default;
};

struct GeneratorParams {
    std::size_t n = 2;       // fc
    std::size_t outer = 2;   // fim
    GridParams grid{};
    RandomParams random{};
    ExplicitTopology explicit_topology{};
    std::vector<double> capacities;  // optional per-link override, Mb/s

    bool operator==(const GeneratorParams&) const = default;
};

/**
 * One scenario file. Everything not given keeps the library default, except
 * that an unset rts_cts means "on iff some conflicting pair cannot sense
 * each other".
 */
struct Scenario {
    std::string name;
    std::string generator;  // see generator_names()
    GeneratorParams params{};
    std::vector<Protocol> protocols{kAllProtocols.begin(), kAllProtocols.end()};
    double duration_s = 100.0;
    std::uint64_t seed = 1;
    MacParams mac{};
    TimingParams timing{};
    std::optional<bool> rts_cts;
    std::map<LinkId, std::vector<std::pair<double, double>>> capacity_trace;  // link -> (time s, Mb/s)

    // Generators whose topology depends on the replication seed.
    bool randomized() const { return generator == "grid" || generator == "random"; }
};

const std::vector<std::string_view>& generator_names();

// Throws ConfigError naming the offending field (or line:column for syntax).
Scenario parse_scenario(std::string_view text, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

// Builds the topology; randomized generators draw with `draw_seed`.
Topology build_topology(const Scenario& s, std::uint64_t draw_seed);
// Engine configuration for one replication.
EngineConfig engine_config(const Scenario& s, const Topology& topology, std::uint64_t seed, bool record_events);

}  // namespace csmasim

#pragma once

#include "csmasim/harness.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csmasim {

struct Check {
    std::string what;
    bool pass = false;
    std::string measured;
    std::string expected;
};

struct CaseResult {
    std::string name;
    std::vector<Check> checks;
    double wall_s = 0.0;  // simulation time spent on this case, not written to result files

    bool pass() const;
};

// Canned scenario names accepted by `reproduce`.
const std::vector<std::string_view>& reproduce_names();
// The embedded scenario document for a canned name; throws ConfigError.
std::string_view canned_scenario_json(std::string_view name);
Scenario canned_scenario(std::string_view name);

struct ReproduceOptions {
    int reps = 10;
    std::optional<double> duration_s;
    std::optional<std::uint64_t> seed;
    bool parallel = false;
    unsigned threads = 0;
};

/**
 * Runs canned scenarios and checks them against their targets. Suites are
 * cached, so cases that share a scenario (fim3 and fim4 both need fim2)
 * simulate it once.
 */
class Reproducer {
public:
    explicit Reproducer(ReproduceOptions options = {});

    CaseResult run(std::string_view name);
    const SuiteResult& suite(std::string_view name);
    double suite_wall_s(std::string_view name) const;

private:
    ReproduceOptions options_;
    std::map<std::string, std::unique_ptr<SuiteResult>, std::less<>> suites_;
    std::map<std::string, double, std::less<>> wall_;
};

// Mean window of the tx_start events in an event log, per link.
std::vector<double> mean_cw_from_log(std::string_view event_log, std::size_t links);

}  // namespace csmasim

#pragma once

#include "csmasim/timing.hpp"
#include "csmasim/topology.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace csmasim {

inline constexpr std::size_t kOracleMaxLinks = 25;
inline constexpr std::size_t kOracleMaxSets = std::size_t{1} << 22;

/**
 * Every independent set of the conflict graph (symmetric closure of sense
 * and interfere), the empty set first. Subsets of members are members.
 */
struct ThroughputRegion {
    std::size_t links = 0;
    std::vector<LinkMask> sets;

    // Sets not contained in any other set; enough to span the region.
    std::vector<LinkMask> maximal(const Topology& topology) const;
};

// Throws OracleError above kOracleMaxLinks links or kOracleMaxSets sets.
ThroughputRegion enumerate_independent_sets(const Topology& topology);

// Service rate of each link when scheduled, b/s. With `discount` the raw
// capacity is scaled by the per-packet overhead fraction of `timing`.
std::vector<double> link_rates_bps(const Topology& topology, const TimingParams& timing, bool discount);

struct PfOptions {
    double tolerance = 1e-9;  // stop once the certificate residual is below this
    int max_iterations = 200000;
};

struct PfSolution {
    std::vector<double> rates_bps;     // gamma*, one per link; 0 for excluded links
    std::vector<LinkMask> sets;        // schedules the shares refer to
    std::vector<double> shares;        // time fraction per schedule, sums to 1
    std::vector<LinkId> excluded;      // links with zero rate in every schedule
    double residual = 0.0;             // max_s sum_l r_sl / gamma_l - n
    int iterations = 0;
};

/**
 * Maximizes sum(log gamma) over convex combinations of the schedules'
 * rate vectors with pairwise Frank-Wolfe and an exact line search.
 * `schedules` may be any spanning family (all or only maximal sets).
 */
PfSolution solve_pf(std::span<const LinkMask> schedules, std::span<const double> rates_bps,
                    const PfOptions& options = {});

// Convenience: enumerate, keep maximal sets and solve.
PfSolution solve_pf(const Topology& topology, const TimingParams& timing, bool discount,
                    const PfOptions& options = {});

// Residual of the first-order certificate at `gamma` over `schedules`.
double pf_certificate(std::span<const LinkMask> schedules, std::span<const double> rates_bps,
                      std::span<const double> gamma);

// (sum x)^2 / (n sum x^2); 0 for an all-zero or empty vector.
double jain_index(std::span<const double> x);

// Sum of ln(x / 1 kb/s). -infinity when any flow is zero.
double sum_log_utility(std::span<const double> rates_bps);

struct Scores {
    double jain = 0.0;
    double sum_log = 0.0;
    bool sum_log_finite = true;
    std::vector<double> ratio_to_optimal;
    double min_ratio = 0.0;
    std::vector<double> short_term_fairness;  // copied through, 1/s
};

Scores score(std::span<const double> sim_bps, std::span<const double> opt_bps,
             std::span<const double> short_term_fairness = {});

}  // namespace csmasim

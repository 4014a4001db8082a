#pragma once

// Brute-force references shared by the unit tests and the acceptance binary.

#include "csmasim/topology.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace csmasim::testing {

// Maximal independent sets by exhaustive subset scan of the symmetric
// sense/interfere relation.
inline std::vector<LinkMask> brute_force_maximal_sets(const Topology& t) {
    const std::size_t n = t.size();
    auto conflict = [&](LinkId a, LinkId b) {
        return t.sense(a, b) || t.sense(b, a) || t.interfere(a, b) || t.interfere(b, a);
    };
    std::vector<LinkMask> independent;
    for (LinkMask s = 1; s < (LinkMask{1} << n); ++s) {
        bool ok = true;
        for (LinkId a = 0; a < n && ok; ++a)
            for (LinkId b = a + 1; b < n && ok; ++b)
                if ((s >> a & 1) && (s >> b & 1) && conflict(a, b)) ok = false;
        if (ok) independent.push_back(s);
    }
    std::vector<LinkMask> maximal;
    for (LinkMask s : independent) {
        bool contained = false;
        for (LinkMask o : independent)
            if (o != s && (o & s) == s) contained = true;
        if (!contained) maximal.push_back(s);
    }
    return maximal;
}

/**
 * PF allocation by exhaustive search over time shares on a lattice with
 * `steps` divisions of the simplex. Only practical for a handful of
 * schedules.
 */
inline std::vector<double> grid_search_pf(const std::vector<LinkMask>& sets, const std::vector<double>& rates,
                                          int steps = 240) {
    const std::size_t n = rates.size(), k = sets.size();
    std::vector<int> share(k, 0);
    std::vector<double> best(n, 0.0), gamma(n);
    double best_u = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == k) {
            share[i] = left;
            std::fill(gamma.begin(), gamma.end(), 0.0);
            for (std::size_t s = 0; s < k; ++s)
                for (std::size_t l = 0; l < n; ++l)
                    if (sets[s] >> l & 1) gamma[l] += rates[l] * share[s] / steps;
            double u = 0.0;
            for (double g : gamma) u += g > 0.0 ? std::log(g) : -std::numeric_limits<double>::infinity();
            if (u > best_u) {
                best_u = u;
                best = gamma;
            }
            return;
        }
        for (int x = 0; x <= left; ++x) {
            share[i] = x;
            rec(i + 1, left - x);
        }
    };
    rec(0, steps);
    return best;
}

}  // namespace csmasim::testing

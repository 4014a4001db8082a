#include "csmasim/pf_oracle.hpp"

#include "csmasim/error.hpp"
#include "csmasim/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace csmasim {

namespace {

LinkMask bit(LinkId l) { return LinkMask{1} << l; }

std::vector<LinkMask> closed_conflicts(const Topology& topology) {
    auto rows = topology.conflict_rows();
    for (LinkId l = 0; l < rows.size(); ++l) rows[l] &= ~bit(l);
    return rows;
}

void extend(const std::vector<LinkMask>& conflicts, LinkId next, LinkMask chosen, LinkMask blocked,
            std::vector<LinkMask>& out) {
    for (LinkId l = next; l < conflicts.size(); ++l) {
        if ((blocked >> l) & 1u) continue;
        const LinkMask with = chosen | bit(l);
        if (out.size() >= kOracleMaxSets)
            throw OracleError(fmt::format("more than {} independent sets; use simulation-only mode", kOracleMaxSets));
        out.push_back(with);
        extend(conflicts, l + 1, with, blocked | conflicts[l], out);
    }
}

// Root of phi'(t) = sum d_l / (g_l + t d_l) on [0, hi]; phi' is decreasing.
double line_search(const std::vector<double>& g, const std::vector<double>& d, const std::vector<char>& active,
                   double hi) {
    auto slope = [&](double t, double* curv) {
        double s = 0.0, c = 0.0;
        for (std::size_t l = 0; l < g.size(); ++l) {
            if (!active[l] || d[l] == 0.0) continue;
            const double v = g[l] + t * d[l];
            if (v <= 0.0) {
                s = -std::numeric_limits<double>::infinity();
                break;
            }
            s += d[l] / v;
            c -= (d[l] / v) * (d[l] / v);
        }
        if (curv) *curv = c;
        return s;
    };
    if (slope(0.0, nullptr) <= 0.0) return 0.0;
    const double at_hi = slope(hi, nullptr);
    if (at_hi >= 0.0) return hi;
    double lo = 0.0, up = hi, t = 0.5 * hi;
    for (int it = 0; it < 100; ++it) {
        double curv = 0.0;
        const double s = slope(t, &curv);
        if (s > 0.0) lo = t; else up = t;
        double next = (curv < 0.0 && std::isfinite(s)) ? t - s / curv : 0.5 * (lo + up);
        if (!(next > lo && next < up)) next = 0.5 * (lo + up);
        if (std::abs(next - t) <= 1e-15 * std::max(1.0, hi)) return next;
        t = next;
    }
    return t;
}

}  // namespace

ThroughputRegion enumerate_independent_sets(const Topology& topology) {
    if (topology.size() > kOracleMaxLinks)
        throw OracleError(fmt::format("{} links exceed the oracle limit of {}; use simulation-only mode",
                                      topology.size(), kOracleMaxLinks));
    ThroughputRegion region;
    region.links = topology.size();
    region.sets.push_back(0);
    extend(closed_conflicts(topology), 0, 0, 0, region.sets);
    return region;
}

std::vector<LinkMask> ThroughputRegion::maximal(const Topology& topology) const {
    const auto conflicts = closed_conflicts(topology);
    std::vector<LinkMask> out;
    for (const LinkMask s : sets) {
        bool grows = false;
        for (LinkId l = 0; l < links && !grows; ++l)
            if (!((s >> l) & 1u) && (conflicts[l] & s) == 0) grows = true;
        if (!grows) out.push_back(s);
    }
    return out;
}

std::vector<double> link_rates_bps(const Topology& topology, const TimingParams& timing, bool discount) {
    std::vector<double> r(topology.size());
    for (LinkId l = 0; l < r.size(); ++l) {
        const double c = topology.capacity(l);
        r[l] = c * 1e6 * (discount ? timing.efficiency(c) : 1.0);
    }
    return r;
}

double pf_certificate(std::span<const LinkMask> schedules, std::span<const double> rates_bps,
                      std::span<const double> gamma) {
    double n = 0.0;
    for (std::size_t l = 0; l < gamma.size(); ++l)
        if (gamma[l] > 0.0) n += 1.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const LinkMask s : schedules) {
        double v = 0.0;
        for (std::size_t l = 0; l < gamma.size(); ++l)
            if (((s >> l) & 1u) && gamma[l] > 0.0) v += rates_bps[l] / gamma[l];
        best = std::max(best, v);
    }
    return best - n;
}

PfSolution solve_pf(std::span<const LinkMask> schedules, std::span<const double> rates_bps,
                    const PfOptions& options) {
    const std::size_t n = rates_bps.size();
    const std::size_t m = schedules.size();
    if (m == 0) throw OracleError("empty throughput region");
    for (double r : rates_bps)
        if (!(r >= 0.0) || !std::isfinite(r)) throw OracleError("link rates must be finite and >= 0");

    // Dense schedule x link rate matrix, rows padded for the vector kernel.
    const std::size_t stride = (n + 3) & ~std::size_t{3};
    std::vector<double> rmat(m * stride, 0.0);
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t l = 0; l < n; ++l)
            if ((schedules[s] >> l) & 1u) rmat[s * stride + l] = rates_bps[l];

    PfSolution sol;
    sol.sets.assign(schedules.begin(), schedules.end());
    sol.shares.assign(m, 0.0);

    std::vector<char> active(n, 0);
    std::size_t n_active = 0;
    std::vector<std::size_t> first_home(n, m);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t s = 0; s < m && first_home[l] == m; ++s)
            if (rmat[s * stride + l] > 0.0) first_home[l] = s;
        if (first_home[l] == m) {
            sol.excluded.push_back(l);
        } else {
            active[l] = 1;
            ++n_active;
        }
    }
    sol.rates_bps.assign(n, 0.0);
    if (n_active == 0) {
        sol.shares[0] = 1.0;
        return sol;
    }

    auto& x = sol.shares;
    for (std::size_t l = 0; l < n; ++l)
        if (active[l]) x[first_home[l]] += 1.0 / static_cast<double>(n_active);
    std::vector<double> g(stride, 0.0);
    for (std::size_t s = 0; s < m; ++s)
        if (x[s] > 0.0)
            for (std::size_t l = 0; l < n; ++l) g[l] += x[s] * rmat[s * stride + l];

    std::vector<double> w(stride, 0.0), scores(m), d(n);
    const double target = static_cast<double>(n_active);
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        for (std::size_t l = 0; l < n; ++l) w[l] = active[l] ? 1.0 / g[l] : 0.0;
        kernels::gemv(rmat.data(), m, n, stride, w.data(), scores.data());
        std::size_t fw = 0, away = m;
        for (std::size_t s = 1; s < m; ++s)
            if (scores[s] > scores[fw]) fw = s;
        residual = scores[fw] - target;
        if (residual <= options.tolerance) break;
        for (std::size_t s = 0; s < m; ++s)
            if (x[s] > 0.0 && (away == m || scores[s] < scores[away])) away = s;
        if (away == fw) break;
        for (std::size_t l = 0; l < n; ++l) d[l] = rmat[fw * stride + l] - rmat[away * stride + l];
        const double t = line_search(g, d, active, x[away]);
        if (t <= 0.0) break;
        x[fw] += t;
        x[away] -= t;
        if (x[away] <= 1e-15) {
            x[fw] += x[away];
            x[away] = 0.0;
        }
        for (std::size_t l = 0; l < n; ++l) g[l] += t * d[l];
    }

    // Recompute from the shares so the answer carries no drift.
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t l = 0; l < n; ++l) g[l] += x[s] * rmat[s * stride + l];
    for (std::size_t l = 0; l < n; ++l) sol.rates_bps[l] = active[l] ? g[l] : 0.0;
    sol.residual = pf_certificate(schedules, rates_bps, sol.rates_bps);
    sol.iterations = it;
    return sol;
}

PfSolution solve_pf(const Topology& topology, const TimingParams& timing, bool discount, const PfOptions& options) {
    const auto region = enumerate_independent_sets(topology);
    const auto sets = region.maximal(topology);
    const auto rates = link_rates_bps(topology, timing, discount);
    return solve_pf(sets, rates, options);
}

double jain_index(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const auto s = kernels::sum_sq(x.data(), x.size());
    if (s.sum_sq <= 0.0) return 0.0;
    return s.sum * s.sum / (static_cast<double>(x.size()) * s.sum_sq);
}

double sum_log_utility(std::span<const double> rates_bps) {
    double u = 0.0;
    for (double r : rates_bps) {
        if (!(r > 0.0)) return -std::numeric_limits<double>::infinity();
        u += std::log(r / 1e3);
    }
    return u;
}

Scores score(std::span<const double> sim_bps, std::span<const double> opt_bps,
             std::span<const double> short_term_fairness) {
    if (sim_bps.size() != opt_bps.size()) throw std::invalid_argument("simulated and optimal vectors differ in length");
    Scores sc;
    sc.jain = jain_index(sim_bps);
    sc.sum_log = sum_log_utility(sim_bps);
    sc.sum_log_finite = std::isfinite(sc.sum_log);
    sc.ratio_to_optimal.resize(sim_bps.size());
    sc.min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sim_bps.size(); ++i) {
        sc.ratio_to_optimal[i] = opt_bps[i] > 0.0 ? sim_bps[i] / opt_bps[i] : 0.0;
        sc.min_ratio = std::min(sc.min_ratio, sc.ratio_to_optimal[i]);
    }
    if (sim_bps.empty()) sc.min_ratio = 0.0;
    sc.short_term_fairness.assign(short_term_fairness.begin(), short_term_fairness.end());
    return sc;
}

}  // namespace csmasim

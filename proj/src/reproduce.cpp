#include "csmasim/reproduce.hpp"

#include "csmasim/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace csmasim {

namespace {

struct Canned {
    std::string_view name;
    std::string_view json;
};

// FIM runs with a larger V: the outer links need deep queues before their
// window settles below the center's.
constexpr Canned kCanned[] = {
    {"fc_table", R"({"generator": "fc", "params": {"n": 12}, "overrides": {"odcf": {"v": 500}}})"},
    {"fim2", R"({"generator": "fim", "params": {"outer": 2}, "overrides": {"odcf": {"v": 1000}}})"},
    {"fim3", R"({"generator": "fim", "params": {"outer": 3}, "overrides": {"odcf": {"v": 1000}}})"},
    {"fim4", R"({"generator": "fim", "params": {"outer": 4}, "overrides": {"odcf": {"v": 1000}}})"},
    {"mixed_a", R"({"generator": "mixed_a", "overrides": {"odcf": {"v": 500}}})"},
    {"mixed_b", R"({"generator": "mixed_b", "overrides": {"odcf": {"v": 500}}})"},
    {"ht", R"({"generator": "ht", "overrides": {"odcf": {"v": 500}}})"},
    {"ia", R"({"generator": "ia", "overrides": {"odcf": {"v": 500}}})"},
    {"ht_capture", R"({"generator": "ht_capture", "overrides": {"odcf": {"v": 500}}})"},
    {"hetero_static",
     R"({"generator": "fc", "params": {"n": 3, "capacities": [6, 18, 48]}, "overrides": {"odcf": {"v": 500}}})"},
    {"hetero_mobile",
     R"({"generator": "fc", "params": {"n": 2, "capacities": [48, 48]}, "overrides": {"odcf": {"v": 500}}, "capacity_trace": {"1": [[0, 48], [60, 6]]}})"},
    {"grid", R"({"generator": "grid", "overrides": {"odcf": {"v": 500}}})"},
    {"random", R"({"generator": "random", "overrides": {"odcf": {"v": 500}}})"},
};

constexpr double kKbps = 1e-3;

std::string kbps(double bps) { return fmt::format("{:.0f} kb/s", bps * kKbps); }

Check check(std::string what, bool pass, std::string measured, std::string expected) {
    return {std::move(what), pass, std::move(measured), std::move(expected)};
}

LinkId link_by_label(const SuiteResult& s, std::string_view label) {
    const auto& flows = s.runs.front().flows;
    for (const auto& f : flows)
        if (f.label == label) return f.flow;
    throw std::logic_error(fmt::format("scenario {} has no flow {}", s.scenario.name, label));
}

double mean_goodput(const SuiteResult& s, Protocol p, LinkId l) { return s.of(p).goodput_bps[l].mean; }
double mean_ratio(const SuiteResult& s, Protocol p, LinkId l) { return s.of(p).ratio_to_pf[l].mean; }

// Mean over replications of the sum-log utility, -inf when any replication starved a flow.
double sum_log_with_starvation(const SuiteResult& s, Protocol p) {
    const auto& ps = s.of(p);
    if (ps.starved_reps > 0) return -std::numeric_limits<double>::infinity();
    return ps.sum_log.mean;
}

// Goodput of link l over the seconds [from, to).
double window_goodput_bps(const SuiteResult& s, Protocol p, LinkId l, std::size_t from, std::size_t to) {
    double sum = 0.0;
    int reps = 0;
    for (const auto* r : s.runs_of(p)) {
        const auto& per_s = r->flows[l].delivered_per_second;
        const std::size_t end = std::min(to, per_s.size());
        std::uint64_t pkts = 0;
        for (std::size_t t = from; t < end; ++t) pkts += per_s[t];
        if (end > from) sum += static_cast<double>(pkts) * s.scenario.timing.packet_bytes * 8.0 / static_cast<double>(end - from);
        ++reps;
    }
    return reps ? sum / reps : 0.0;
}

}  // namespace

bool CaseResult::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string_view>& reproduce_names() {
    static const std::vector<std::string_view> names = [] {
        std::vector<std::string_view> v;
        for (const auto& c : kCanned) v.push_back(c.name);
        return v;
    }();
    return names;
}

std::string_view canned_scenario_json(std::string_view name) {
    for (const auto& c : kCanned)
        if (c.name == name) return c.json;
    std::string list;
    for (const auto& c : kCanned) list += (list.empty() ? "" : ", ") + std::string(c.name);
    throw ConfigError("name", fmt::format("unknown canned scenario '{}'; expected one of {}", name, list));
}

Scenario canned_scenario(std::string_view name) {
    return parse_scenario(canned_scenario_json(name), std::string(name));
}

std::vector<double> mean_cw_from_log(std::string_view log, std::size_t links) {
    std::vector<double> sum(links, 0.0);
    std::vector<std::uint64_t> count(links, 0);
    std::size_t pos = 0;
    while (pos < log.size()) {
        std::size_t end = log.find('\n', pos);
        if (end == std::string_view::npos) end = log.size();
        const std::string_view line = log.substr(pos, end - pos);
        pos = end + 1;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        if (c3 == std::string_view::npos || line.substr(c2 + 1, c3 - c2 - 1) != "tx_start") continue;
        const auto link = static_cast<std::size_t>(std::stoul(std::string(line.substr(c1 + 1, c2 - c1 - 1))));
        const auto cw_at = line.find("cw=", c3);
        if (link >= links || cw_at == std::string_view::npos) continue;
        sum[link] += std::stod(std::string(line.substr(cw_at + 3, line.find(' ', cw_at) - cw_at - 3)));
        ++count[link];
    }
    for (std::size_t l = 0; l < links; ++l) sum[l] = count[l] ? sum[l] / static_cast<double>(count[l]) : 0.0;
    return sum;
}

Reproducer::Reproducer(ReproduceOptions options) : options_(options) {}

const SuiteResult& Reproducer::suite(std::string_view name) {
    if (auto it = suites_.find(name); it != suites_.end()) return *it->second;
    RunOptions o;
    o.reps = options_.reps;
    o.duration_s = options_.duration_s;
    o.seed = options_.seed;
    o.parallel = options_.parallel;
    o.threads = options_.threads;
    const auto t0 = std::chrono::steady_clock::now();
    auto r = std::make_unique<SuiteResult>(run_suite(canned_scenario(name), o));
    wall_[std::string(name)] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return *suites_.emplace(std::string(name), std::move(r)).first->second;
}

double Reproducer::suite_wall_s(std::string_view name) const {
    auto it = wall_.find(name);
    return it == wall_.end() ? 0.0 : it->second;
}

CaseResult Reproducer::run(std::string_view name) {
    canned_scenario_json(name);  // validates the name
    CaseResult cr;
    cr.name = std::string(name);
    const auto t0 = std::chrono::steady_clock::now();
    auto& out = cr.checks;
    using P = Protocol;

    if (name == "fc_table") {
        const auto& s = suite(name);
        auto agg = [&](P p) { return s.of(p).aggregate_bps.mean; };
        const double o = agg(P::Odcf), mu = agg(P::OcsmaMu), d = agg(P::Dcf), q = agg(P::Diffq), cw = agg(P::OcsmaCw);
        out.push_back(check("FC(12) aggregate ordering", std::min(o, mu) > d && d > q && q > cw,
                            fmt::format("odcf={:.0f} ocsma_mu={:.0f} dcf={:.0f} diffq={:.0f} ocsma_cw={:.0f} kb/s",
                                        o * kKbps, mu * kKbps, d * kKbps, q * kKbps, cw * kKbps),
                            "odcf, ocsma_mu > dcf > diffq > ocsma_cw"));
        out.push_back(check("O-DCF FC(12) aggregate", std::abs(o * kKbps - 4501.0) <= 0.15 * 4501.0, kbps(o),
                            "4501 kb/s +-15%"));
        out.push_back(check("FC(12) runtime", suite_wall_s(name) < 120.0, fmt::format("{:.1f} s", suite_wall_s(name)),
                            "< 120 s"));
    } else if (name == "fim2") {
        const auto& s = suite(name);
        const LinkId c = link_by_label(s, "c");
        std::string m;
        bool ok = true;
        for (LinkId l = 0; l < s.of(P::Odcf).ratio_to_pf.size(); ++l) {
            const double r = mean_ratio(s, P::Odcf, l);
            ok = ok && std::abs(r - 1.0) <= 0.10;
            m += fmt::format("{}{}={:.3f}", m.empty() ? "" : " ", s.runs.front().flows[l].label, r);
        }
        out.push_back(check("O-DCF FIM(2) per-flow ratio to PF", ok, m, "each within 1 +-0.10"));
        const double dr = mean_ratio(s, P::Dcf, c);
        out.push_back(check("DCF FIM(2) center ratio to PF", dr < 0.15, fmt::format("{:.3f}", dr), "< 0.15"));
    } else if (name == "fim3" || name == "fim4") {
        const auto& s = suite(name);
        const double r = mean_ratio(s, P::Odcf, link_by_label(s, "c"));
        out.push_back(check(fmt::format("O-DCF {} center ratio to PF", name), std::abs(r - 1.0) <= 0.15,
                            fmt::format("{:.3f}", r), "1 +-0.15"));
        auto mu_center = [&](std::string_view n) {
            const auto& t = suite(n);
            return mean_ratio(t, P::OcsmaMu, link_by_label(t, "c"));
        };
        const double r2 = mu_center("fim2"), r3 = mu_center("fim3");
        if (name == "fim3") {
            out.push_back(check("mu-adaptation center ratio degrades with outer count", r3 < r2,
                                fmt::format("fim2={:.3f} fim3={:.3f}", r2, r3), "fim3 < fim2"));
        } else {
            const double r4 = mu_center("fim4");
            out.push_back(check("mu-adaptation center ratio degrades with outer count", r4 <= r3 && r3 < r2 && r4 < r2,
                                fmt::format("fim2={:.3f} fim3={:.3f} fim4={:.3f}", r2, r3, r4),
                                "fim4 <= fim3 < fim2"));
        }
    } else if (name == "ht" || name == "ia") {
        const auto& s = suite(name);
        const auto& o = s.of(P::Odcf);
        out.push_back(check("RTS/CTS enabled", s.runs.front().rts_cts, s.runs.front().rts_cts ? "on" : "off", "on"));
        out.push_back(check("O-DCF Jain's index", o.jain.mean > 0.9, fmt::format("{:.3f}", o.jain.mean), "> 0.9"));
        bool ok = true;
        std::string m;
        for (LinkId l = 0; l < o.ratio_to_pf.size(); ++l) {
            ok = ok && std::abs(o.ratio_to_pf[l].mean - 1.0) <= 0.20;
            m += fmt::format("{}{}={:.3f}", m.empty() ? "" : " ", s.runs.front().flows[l].label, o.ratio_to_pf[l].mean);
        }
        out.push_back(check("O-DCF per-flow ratio to PF", ok, m, "each within 1 +-0.20"));
        if (name == "ht") {
            const double ot = o.aggregate_bps.mean, dt = s.of(P::Dcf).aggregate_bps.mean;
            out.push_back(check("O-DCF total above DCF total", ot > dt, fmt::format("{} vs {}", kbps(ot), kbps(dt)),
                                "strictly higher"));
        }
        if (name == "ia") {
            const LinkId adv = link_by_label(s, "adv"), dis = link_by_label(s, "dis");
            for (P p : {P::OcsmaMu, P::Dcf}) {
                const double ratio = mean_goodput(s, p, dis) / mean_goodput(s, p, adv);
                out.push_back(check(fmt::format("{} disadvantaged / advantaged goodput", to_string(p)), ratio < 0.5,
                                    fmt::format("{:.3f}", ratio), "< 0.5"));
            }
        }
    } else if (name == "ht_capture") {
        const auto& s = suite(name);
        const LinkId strong = link_by_label(s, "strong"), weak = link_by_label(s, "weak");
        const double o = mean_goodput(s, P::Odcf, weak) / mean_goodput(s, P::Odcf, strong);
        const double d = mean_goodput(s, P::Dcf, weak) / mean_goodput(s, P::Dcf, strong);
        out.push_back(check("O-DCF weak / strong goodput", o >= 0.6, fmt::format("{:.3f}", o), ">= 0.6"));
        out.push_back(check("DCF weak / strong goodput", d < 0.25, fmt::format("{:.3f}", d), "< 0.25"));
    } else if (name == "hetero_static") {
        const auto& s = suite(name);
        const auto& air = s.of(P::Odcf).airtime_share;
        double mean = 0.0;
        for (const auto& a : air) mean += a.mean;
        mean /= static_cast<double>(air.size());
        bool ok = true;
        std::string m;
        for (LinkId l = 0; l < air.size(); ++l) {
            ok = ok && std::abs(air[l].mean - mean) <= 0.10 * mean;
            m += fmt::format("{}{:g}Mb/s={:.3f}", m.empty() ? "" : " ", s.runs.front().flows[l].capacity_mbps,
                             air[l].mean);
        }
        out.push_back(check("O-DCF airtime shares equal", ok, m, "each within +-10% of their mean"));
        LinkId lo = 0, hi = 0;
        const auto& flows = s.runs.front().flows;
        for (LinkId l = 0; l < flows.size(); ++l) {
            if (flows[l].capacity_mbps < flows[lo].capacity_mbps) lo = l;
            if (flows[l].capacity_mbps > flows[hi].capacity_mbps) hi = l;
        }
        for (P p : {P::Dcf, P::OcsmaCw, P::OcsmaMu, P::Diffq}) {
            const double ratio = mean_goodput(s, p, hi) / mean_goodput(s, p, lo);
            out.push_back(check(fmt::format("{} performance anomaly (high / low rate goodput)", to_string(p)),
                                ratio < 2.0, fmt::format("{:.3f}", ratio), "< 2"));
        }
    } else if (name == "hetero_mobile") {
        const auto& s = suite(name);
        // Capacity drops at 60% of a 100 s run; leave 10 s for the estimate to settle.
        const auto secs = static_cast<std::size_t>(s.scenario.duration_s);
        const std::size_t from = secs * 7 / 10;
        for (P p : {P::Odcf, P::Dcf}) {
            const double ratio = window_goodput_bps(s, p, 0, from, secs) / window_goodput_bps(s, p, 1, from, secs);
            const bool ok = p == P::Odcf ? ratio >= 2.0 : ratio < 2.0;
            out.push_back(check(fmt::format("{} fixed / mobile goodput after the rate drop", to_string(p)), ok,
                                fmt::format("{:.3f}", ratio), p == P::Odcf ? ">= 2" : "< 2"));
        }
    } else if (name == "mixed_a" || name == "mixed_b") {
        const auto& s = suite(name);
        const auto& o = s.of(P::Odcf);
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& r : o.ratio_to_pf) mn = std::min(mn, r.mean);
        out.push_back(check("O-DCF minimum per-flow ratio to PF", mn >= 0.7, fmt::format("{:.3f}", mn), ">= 0.7"));
        for (P p : {P::Dcf, P::OcsmaMu}) {
            const double j = s.of(p).jain.mean;
            out.push_back(check(fmt::format("O-DCF Jain's index above {}", to_string(p)), o.jain.mean > j,
                                fmt::format("{:.3f} vs {:.3f}", o.jain.mean, j), "strictly higher"));
        }
        // Center: the flow sensing both groups (a) or the FC block in the middle (b).
        std::vector<LinkId> center, outer;
        if (name == "mixed_a") {
            center = {5};
            outer = {6, 7, 8};
        } else {
            center = {0, 1, 2, 3, 4, 5};
            outer = {6, 7, 8, 9};
        }
        RunOptions ro;
        ro.reps = 1;
        ro.duration_s = options_.duration_s;
        ro.seed = options_.seed;
        ro.protocols = {P::Odcf};
        ro.record_events = true;
        const auto traced = run_suite(canned_scenario(name), ro);
        const auto cw = mean_cw_from_log(traced.runs.front().event_log, traced.runs.front().flows.size());
        auto avg = [&](const std::vector<LinkId>& ls) {
            double a = 0.0;
            for (LinkId l : ls) a += cw[l];
            return a / static_cast<double>(ls.size());
        };
        const double ac = avg(center), ao = avg(outer);
        out.push_back(check("O-DCF center average CW below outer (event log)", ac < ao,
                            fmt::format("center={:.1f} outer={:.1f}", ac, ao), "center < outer"));
    } else if (name == "grid" || name == "random") {
        const auto& s = suite(name);
        const double o = s.of(P::Odcf).jain.mean, d = s.of(P::Dcf).jain.mean, q = s.of(P::Diffq).jain.mean;
        out.push_back(check("O-DCF Jain's index vs DCF", o >= 1.20 * d, fmt::format("{:.3f} vs {:.3f} (x{:.3f})", o, d, o / d),
                            ">= 1.20x"));
        out.push_back(check("O-DCF Jain's index vs DiffQ", o >= 1.08 * q,
                            fmt::format("{:.3f} vs {:.3f} (x{:.3f})", o, q, o / q), ">= 1.08x"));
        const double ou = sum_log_with_starvation(s, P::Odcf);
        for (P p : {P::Dcf, P::OcsmaCw, P::OcsmaMu, P::Diffq}) {
            const double u = sum_log_with_starvation(s, p);
            out.push_back(check(fmt::format("O-DCF sum-log utility vs {}", to_string(p)), ou >= u,
                                fmt::format("{:.3f} vs {:.3f}", ou, u), ">="));
        }
        out.push_back(check(fmt::format("{} runtime", name), suite_wall_s(name) < 900.0,
                            fmt::format("{:.1f} s", suite_wall_s(name)), "< 900 s"));
    }
    cr.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cr;
}

}  // namespace csmasim

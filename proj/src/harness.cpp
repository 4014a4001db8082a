#include "csmasim/harness.hpp"

#include "csmasim/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace csmasim {

const char* const kResultsCsvHeader =
    "protocol,rep,seed,flow,label,capacity_mbps,goodput_kbps,pf_kbps,ratio_to_pf,airtime_share,"
    "collision_ratio,mean_cw,attempts,delivered,dropped,in_flight,short_term_fairness_hz";

Stat summarize(const std::vector<double>& xs) {
    Stat s;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

const ProtocolSummary& SuiteResult::of(Protocol p) const {
    for (const auto& s : summary)
        if (s.protocol == p) return s;
    throw std::out_of_range("protocol not in suite: " + std::string(to_string(p)));
}

std::vector<const Replication*> SuiteResult::runs_of(Protocol p) const {
    std::vector<const Replication*> out;
    for (const auto& r : runs)
        if (r.protocol == p) out.push_back(&r);
    return out;
}

namespace {

struct Draw {
    Topology topology;
    std::vector<double> pf_bps;
    double residual = 0.0;
};

Draw prepare(const Scenario& s, std::uint64_t seed) {
    Draw d;
    d.topology = build_topology(s, seed);
    try {
        const auto sol = solve_pf(d.topology, s.timing, true);
        d.pf_bps = sol.rates_bps;
        d.residual = sol.residual;
    } catch (const OracleError&) {
        d.pf_bps.assign(d.topology.size(), 0.0);
        d.residual = std::nan("");
    }
    return d;
}

Replication run_one(const Scenario& s, const Draw& d, Protocol p, int index, std::uint64_t seed, bool events) {
    const auto cfg = engine_config(s, d.topology, seed, events);
    std::vector<std::unique_ptr<Mac>> macs;
    for (LinkId l = 0; l < d.topology.size(); ++l) {
        const CapacityTrace trace = cfg.capacity.empty() ? CapacityTrace(d.topology.capacity(l)) : cfg.capacity[l];
        macs.push_back(make_mac(p, s.mac, s.timing, trace));
    }
    Engine engine(d.topology, cfg, std::move(macs));
    const SimResult sim = engine.run();

    Replication r;
    r.protocol = p;
    r.index = index;
    r.seed = seed;
    r.rts_cts = cfg.rts_cts;
    r.pf_residual = d.residual;
    const auto goodputs = sim.goodputs_bps();
    std::vector<double> stf(goodputs.size());
    for (LinkId l = 0; l < goodputs.size(); ++l) {
        const auto& ls = sim.links[l];
        FlowRow f;
        f.flow = l;
        f.label = d.topology.label(l);
        f.capacity_mbps = d.topology.capacity(l);
        f.goodput_bps = goodputs[l];
        f.pf_bps = d.pf_bps[l];
        f.airtime_share = sim.airtime_share(l);
        f.collision_ratio = ls.collision_ratio();
        f.mean_cw = ls.mean_cw();
        f.attempts = ls.attempts;
        f.delivered = ls.delivered;
        f.dropped = ls.dropped;
        f.in_flight = ls.in_flight;
        f.short_term_fairness = sim.short_term_fairness(l);
        f.delivered_per_second = ls.delivered_per_second;
        stf[l] = f.short_term_fairness;
        r.flows.push_back(std::move(f));
        r.aggregate_bps += goodputs[l];
    }
    const auto sc = score(goodputs, d.pf_bps, stf);
    for (LinkId l = 0; l < r.flows.size(); ++l) r.flows[l].ratio_to_pf = sc.ratio_to_optimal[l];
    r.jain = sc.jain;
    r.sum_log = sc.sum_log;
    r.sum_log_finite = sc.sum_log_finite;
    r.min_ratio = sc.min_ratio;
    r.event_log = sim.event_log;
    return r;
}

ProtocolSummary summarize_protocol(Protocol p, const std::vector<const Replication*>& runs) {
    ProtocolSummary s;
    s.protocol = p;
    std::vector<double> agg, jain, ulog, minr;
    const std::size_t n = runs.empty() ? 0 : runs.front()->flows.size();
    std::vector<std::vector<double>> g(n), pf(n), ratio(n), air(n), cw(n);
    for (const auto* r : runs) {
        agg.push_back(r->aggregate_bps);
        jain.push_back(r->jain);
        minr.push_back(r->min_ratio);
        if (r->sum_log_finite) ulog.push_back(r->sum_log);
        else ++s.starved_reps;
        for (std::size_t l = 0; l < n && l < r->flows.size(); ++l) {
            const auto& f = r->flows[l];
            g[l].push_back(f.goodput_bps);
            pf[l].push_back(f.pf_bps);
            ratio[l].push_back(f.ratio_to_pf);
            air[l].push_back(f.airtime_share);
            cw[l].push_back(f.mean_cw);
        }
    }
    s.aggregate_bps = summarize(agg);
    s.jain = summarize(jain);
    s.sum_log = summarize(ulog);
    s.min_ratio = summarize(minr);
    for (std::size_t l = 0; l < n; ++l) {
        s.goodput_bps.push_back(summarize(g[l]));
        s.pf_bps.push_back(summarize(pf[l]));
        s.ratio_to_pf.push_back(summarize(ratio[l]));
        s.airtime_share.push_back(summarize(air[l]));
        s.mean_cw.push_back(summarize(cw[l]));
    }
    return s;
}

}  // namespace

SuiteResult run_suite(const Scenario& scenario, const RunOptions& options) {
    if (options.reps < 1) throw ConfigError("--reps", "replications must be >= 1");
    SuiteResult res;
    res.scenario = scenario;
    if (options.duration_s) {
        if (!(*options.duration_s > 0.0)) throw ConfigError("--duration-s", "duration must be > 0");
        res.scenario.duration_s = *options.duration_s;
    }
    if (options.seed) res.scenario.seed = *options.seed;
    if (!options.protocols.empty()) res.scenario.protocols = options.protocols;
    res.reps = options.reps;
    res.seed_base = res.scenario.seed;
    const auto& s = res.scenario;

    // Topologies and oracles first: shared by every protocol of a replication.
    std::vector<Draw> draws;
    if (s.randomized()) {
        for (int i = 0; i < options.reps; ++i) draws.push_back(prepare(s, s.seed + static_cast<std::uint64_t>(i)));
    } else {
        draws.push_back(prepare(s, s.seed));
    }

    const std::size_t n_proto = s.protocols.size();
    const std::size_t total = n_proto * static_cast<std::size_t>(options.reps);
    res.runs.resize(total);
    auto task = [&](std::size_t k) {
        const Protocol p = s.protocols[k / static_cast<std::size_t>(options.reps)];
        const int i = static_cast<int>(k % static_cast<std::size_t>(options.reps));
        const auto& d = s.randomized() ? draws[static_cast<std::size_t>(i)] : draws.front();
        res.runs[k] = run_one(s, d, p, i, s.seed + static_cast<std::uint64_t>(i), options.record_events);
    };

    if (!options.parallel || total < 2) {
        for (std::size_t k = 0; k < total; ++k) task(k);
    } else {
        unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
        workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(total);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < total; k = next++) {
                    try {
                        task(k);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (const Protocol p : s.protocols) res.summary.push_back(summarize_protocol(p, res.runs_of(p)));
    return res;
}

std::string results_csv(const SuiteResult& r) {
    std::string out = kResultsCsvHeader;
    out.push_back('\n');
    for (const auto& run : r.runs) {
        for (const auto& f : run.flows) {
            fmt::format_to(std::back_inserter(out),
                           "{},{},{},{},{},{:.3f},{:.3f},{:.3f},{:.6f},{:.6f},{:.6f},{:.3f},{},{},{},{},{:.6f}\n",
                           to_string(run.protocol), run.index, run.seed, f.flow, f.label, f.capacity_mbps,
                           f.goodput_bps / 1e3, f.pf_bps / 1e3, f.ratio_to_pf, f.airtime_share, f.collision_ratio,
                           f.mean_cw, f.attempts, f.delivered, f.dropped, f.in_flight, f.short_term_fairness);
        }
    }
    return out;
}

std::string timeseries_csv(const SuiteResult& r) {
    std::string out = "protocol,rep,second,flow,goodput_kbps\n";
    const double kbits = r.scenario.timing.packet_bytes * 8.0 / 1e3;
    for (const auto& run : r.runs)
        for (const auto& f : run.flows)
            for (std::size_t sec = 0; sec < f.delivered_per_second.size(); ++sec)
                fmt::format_to(std::back_inserter(out), "{},{},{},{},{:.3f}\n", to_string(run.protocol), run.index,
                               sec, f.flow, static_cast<double>(f.delivered_per_second[sec]) * kbits);
    return out;
}

namespace {

nlohmann::ordered_json stat_json(const Stat& s, double scale = 1.0) {
    nlohmann::ordered_json j;
    j["mean"] = s.mean * scale;
    j["std"] = s.std * scale;
    return j;
}

}  // namespace

std::string summary_json(const SuiteResult& r) {
    using oj = nlohmann::ordered_json;
    const auto& s = r.scenario;
    oj j;
    j["scenario"] = s.name;
    j["generator"] = s.generator;
    j["duration_s"] = s.duration_s;
    j["replications"] = r.reps;
    j["seed_base"] = r.seed_base;
    j["v"] = s.mac.odcf.queue.v;
    j["rts_cts"] = r.runs.empty() ? false : r.runs.front().rts_cts;
    j["units"] = {{"goodput", "kb/s"}, {"sum_log", "sum of ln(goodput / 1 kb/s)"}};
    oj protos = oj::array();
    for (const auto& ps : r.summary) {
        oj p;
        p["protocol"] = std::string(to_string(ps.protocol));
        p["aggregate_kbps"] = stat_json(ps.aggregate_bps, 1e-3);
        p["jain"] = stat_json(ps.jain);
        p["sum_log"] = stat_json(ps.sum_log);
        p["starved_replications"] = ps.starved_reps;
        p["min_ratio_to_pf"] = stat_json(ps.min_ratio);
        oj flows = oj::array();
        for (std::size_t l = 0; l < ps.goodput_bps.size(); ++l) {
            oj f;
            f["flow"] = l;
            f["goodput_kbps"] = stat_json(ps.goodput_bps[l], 1e-3);
            f["pf_kbps"] = stat_json(ps.pf_bps[l], 1e-3);
            f["ratio_to_pf"] = stat_json(ps.ratio_to_pf[l]);
            f["airtime_share"] = stat_json(ps.airtime_share[l]);
            f["mean_cw"] = stat_json(ps.mean_cw[l]);
            flows.push_back(std::move(f));
        }
        p["flows"] = std::move(flows);
        protos.push_back(std::move(p));
    }
    j["protocols"] = std::move(protos);
    return j.dump(2) + "\n";
}

void write_results(const SuiteResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& file, const std::string& body) {
        std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
        out << body;
    };
    const auto& name = r.scenario.name;
    put(name + ".csv", results_csv(r));
    put(name + ".timeseries.csv", timeseries_csv(r));
    put(name + ".summary.json", summary_json(r));
    for (const auto& run : r.runs)
        if (!run.event_log.empty())
            put(fmt::format("{}.{}.rep{}.events.csv", name, to_string(run.protocol), run.index),
                "slot,link,event,detail\n" + run.event_log);
}

}  // namespace csmasim

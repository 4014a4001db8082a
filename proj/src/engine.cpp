#include "csmasim/engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace csmasim {

LinkMask arbitrate(const Topology& topology, LinkMask transmitting) {
    LinkMask ok = 0;
    for (LinkId l = 0; l < topology.size(); ++l) {
        if (!((transmitting >> l) & 1u)) continue;
        bool lost = false;
        for (LinkId k = 0; k < topology.size() && !lost; ++k)
            if (((transmitting >> k) & 1u) && corrupts(topology, k, l)) lost = true;
        if (!lost) ok |= LinkMask{1} << l;
    }
    return ok;
}

double SimResult::goodput_bps(LinkId l) const {
    return static_cast<double>(links.at(l).delivered) * packet_bytes * 8.0 / seconds();
}

std::vector<double> SimResult::goodputs_bps() const {
    std::vector<double> out(links.size());
    for (LinkId l = 0; l < links.size(); ++l) out[l] = goodput_bps(l);
    return out;
}

double SimResult::airtime_share(LinkId l) const {
    return static_cast<double>(links.at(l).airtime) / static_cast<double>(duration);
}

double SimResult::short_term_fairness(LinkId l) const {
    const auto& s = links.at(l);
    if (s.delivered < 2 || s.max_delivery_gap <= 0) return 0.0;
    return 1.0 / slots_to_seconds(s.max_delivery_gap);
}

double single_link_goodput_bps(const TimingParams& t, double mbps, int cw) {
    const double cycle_slots = t.difs_slots + cw / 2.0 + static_cast<double>(t.data_slots(mbps)) + t.sifs_slots +
                               t.ack_slots;
    return 8.0 * t.packet_bytes / (cycle_slots * kSlotUs * 1e-6);
}

namespace {

constexpr SlotTime kNever = std::numeric_limits<SlotTime>::max();

enum class Mode { Backoff, Exchange };
enum class Step { RtsEnd, CtsEnd, DataStart, DataEnd, AckEnd, TimeoutEnd };

struct LinkRuntime {
    Mode mode = Mode::Backoff;

    // Backoff.
    int counter = 0;
    int cw = 0;
    int aifs = 0;
    bool idle = false;
    SlotTime idle_since = 0;
    SlotTime nav_until = 0;

    // Exchange.
    Step step = Step::DataStart;
    SlotTime next = kNever;
    SlotTime start = 0;
    SlotTime data_len = 0;
    SlotTime cts_start = 0;
    SlotTime planned_end = 0;
    int delivered_now = 0;
    bool failed = false;

    // Current frame on the air.
    bool on_air = false;
    bool corrupted = false;
    SlotTime air_start = 0;
    SlotTime last_air_end = -1;

    int iq = 0;  // interface queue
};

}  // namespace

struct Engine::Impl {
    const Topology& topo;
    EngineConfig cfg;
    std::vector<std::unique_ptr<Mac>> macs;
    std::vector<LinkRuntime> rt;
    std::vector<LinkStats> stats;
    std::vector<LinkMask> heard_by;  // bit k set when k hears l's CTS or senses l
    std::vector<CapacityTrace> capacity;
    std::mt19937_64 rng;
    LinkMask exchange_mask = 0;
    LinkMask on_air_mask = 0;
    std::string log;
    std::size_t seconds_bins = 0;

    Impl(const Topology& t, EngineConfig c, std::vector<std::unique_ptr<Mac>> m)
        : topo(t), cfg(std::move(c)), macs(std::move(m)), rng(cfg.seed) {
        const auto n = topo.size();
        if (macs.size() != n) throw std::invalid_argument("one MAC per link required");
        if (cfg.duration <= 0) throw std::invalid_argument("duration must be > 0");
        cfg.timing.validate();
        capacity = cfg.capacity;
        if (capacity.empty())
            for (LinkId l = 0; l < n; ++l) capacity.emplace_back(topo.capacity(l));
        if (capacity.size() != n) throw std::invalid_argument("one capacity trace per link required");
        rt.resize(n);
        stats.resize(n);
        seconds_bins = static_cast<std::size_t>(std::ceil(slots_to_seconds(cfg.duration) - 1e-9));
        for (auto& s : stats) s.delivered_per_second.assign(seconds_bins, 0);
        heard_by.assign(n, 0);
        for (LinkId l = 0; l < n; ++l)
            for (LinkId k = 0; k < n; ++k)
                if (k != l && (topo.interfere(k, l) || topo.sense(k, l))) heard_by[l] |= LinkMask{1} << k;
    }

    template <typename... Args>
    void emit(SlotTime t, LinkId l, std::string_view event, fmt::format_string<Args...> f, Args&&... args) {
        if (!cfg.record_events) return;
        fmt::format_to(std::back_inserter(log), "{},{},{},", t, l, event);
        fmt::format_to(std::back_inserter(log), f, std::forward<Args>(args)...);
        log.push_back('\n');
    }

    bool medium_idle(LinkId j, SlotTime t) const {
        return rt[j].nav_until <= t && (topo.sense_row(j) & exchange_mask) == 0;
    }

    SlotTime fire_time(LinkId j) const {
        const auto& r = rt[j];
        return r.idle_since + r.aifs + r.counter;
    }

    void begin_backoff(LinkId l, SlotTime t) {
        auto& r = rt[l];
        r.mode = Mode::Backoff;
        r.cw = macs[l]->begin_backoff(t);
        r.aifs = macs[l]->aifs_slots(cfg.timing);
        r.counter = std::uniform_int_distribution<int>(0, r.cw)(rng);
        r.idle = false;  // resolved by the next refresh
        r.next = kNever;
    }

    void refresh(SlotTime t) {
        for (LinkId j = 0; j < rt.size(); ++j) {
            auto& r = rt[j];
            if (r.mode != Mode::Backoff) continue;
            const bool idle = medium_idle(j, t);
            if (r.idle && !idle) {
                const SlotTime counted = std::max<SlotTime>(0, t - (r.idle_since + r.aifs));
                r.counter = static_cast<int>(std::max<SlotTime>(0, r.counter - counted));
            } else if (!r.idle && idle) {
                r.idle_since = t;
                r.aifs = macs[j]->aifs_slots(cfg.timing);
                const int w = macs[j]->resume_window(t);
                if (w >= 0 && w < r.cw) {
                    r.cw = w;
                    if (r.counter > w) r.counter = std::uniform_int_distribution<int>(0, w)(rng);
                }
            }
            r.idle = idle;
        }
    }

    void begin_air(LinkId l, SlotTime t) {
        auto& r = rt[l];
        r.on_air = true;
        r.corrupted = false;
        r.air_start = t;
        for (LinkMask m = on_air_mask; m; m &= m - 1) {
            const auto k = static_cast<LinkId>(std::countr_zero(m));
            if (corrupts(topo, k, l)) r.corrupted = true;
            if (corrupts(topo, l, k)) rt[k].corrupted = true;
        }
        on_air_mask |= LinkMask{1} << l;
    }

    void end_air(LinkId l, SlotTime t) {
        rt[l].on_air = false;
        rt[l].last_air_end = t;
        on_air_mask &= ~(LinkMask{1} << l);
    }

    void start_exchange(LinkId l, SlotTime t) {
        auto& r = rt[l];
        auto& s = stats[l];
        const auto& tm = cfg.timing;
        if (r.iq == 0) {
            const int packets = macs[l]->select_burst(t);
            if (packets < 1) throw std::logic_error("MAC granted an empty burst");
            r.iq = packets;
            s.granted += static_cast<std::uint64_t>(packets);
        }
        r.mode = Mode::Exchange;
        r.start = t;
        r.delivered_now = 0;
        r.failed = false;
        r.data_len = tm.data_slots(capacity[l].at(t));
        const SlotTime per_packet = r.data_len + tm.sifs_slots + tm.ack_slots;
        r.planned_end = t + r.iq * per_packet + (r.iq - 1) * tm.sifs_slots;
        if (cfg.rts_cts) r.planned_end += tm.rts_slots + tm.sifs_slots + tm.cts_slots + tm.sifs_slots;
        exchange_mask |= LinkMask{1} << l;
        ++s.attempts;
        s.cw_sum += r.cw;
        if (cfg.record_events) {
            const auto snap = macs[l]->snapshot();
            emit(t, l, "tx_start", "cw={} q={} ptilde={:.6f} mu={:.1f} pkts={}", snap.cw, snap.queue,
                 snap.p_tilde, snap.mu_slots, r.iq);
        }
        if (cfg.rts_cts) {
            ++s.rts_sent;
            begin_air(l, t);
            r.step = Step::RtsEnd;
            r.next = t + tm.rts_slots;
        } else {
            start_data(l, t);
        }
    }

    void start_data(LinkId l, SlotTime t) {
        auto& r = rt[l];
        ++stats[l].data_sent;
        begin_air(l, t);
        r.step = Step::DataEnd;
        r.next = t + r.data_len;
    }

    // NAV for every transmitter that heard the CTS (or the RTS) and was not
    // itself on the air while the CTS was sent.
    void hold_channel(LinkId l, SlotTime cts_start, SlotTime cts_end, SlotTime until) {
        for (LinkMask m = heard_by[l]; m; m &= m - 1) {
            const auto k = static_cast<LinkId>(std::countr_zero(m));
            auto& rk = rt[k];
            const bool deaf = (rk.on_air && rk.air_start < cts_end) || rk.last_air_end > cts_start;
            if (deaf) continue;
            if (until > rk.nav_until) {
                rk.nav_until = until;
                ++stats[k].nav_holds;
                emit(cts_end, k, "nav", "holder={} until={}", l, until);
            }
        }
    }

    void finish(LinkId l, SlotTime t, bool success) {
        auto& r = rt[l];
        auto& s = stats[l];
        s.airtime += t - r.start;
        exchange_mask &= ~(LinkMask{1} << l);
        if (success) {
            macs[l]->on_success(t, r.delivered_now);
            emit(t, l, "success", "delivered={}", r.delivered_now);
        } else {
            ++s.collisions;
            const bool drop = macs[l]->on_collision(t, r.delivered_now);
            if (drop && r.iq > 0) {
                --r.iq;
                ++s.dropped;
            }
            emit(t, l, "collision", "delivered={} dropped={}", r.delivered_now, drop ? 1 : 0);
        }
        begin_backoff(l, t);
    }

    void deliver(LinkId l, SlotTime t) {
        auto& s = stats[l];
        ++s.delivered;
        if (s.last_delivery >= 0) s.max_delivery_gap = std::max(s.max_delivery_gap, t - s.last_delivery);
        s.last_delivery = t;
        const auto bin = static_cast<std::size_t>(slots_to_seconds(t));
        if (bin < s.delivered_per_second.size()) ++s.delivered_per_second[bin];
    }

    void process_end_step(LinkId l, SlotTime t) {
        auto& r = rt[l];
        const auto& tm = cfg.timing;
        switch (r.step) {
            case Step::RtsEnd:
                end_air(l, t);
                if (r.corrupted) {
                    ++stats[l].rts_failed;
                    r.failed = true;
                    r.step = Step::TimeoutEnd;
                    r.next = t + tm.sifs_slots + tm.cts_slots;
                } else {
                    r.cts_start = t + tm.sifs_slots;
                    r.step = Step::CtsEnd;
                    r.next = r.cts_start + tm.cts_slots;
                }
                break;
            case Step::CtsEnd:
                hold_channel(l, r.cts_start, t, r.planned_end);
                r.step = Step::DataStart;
                r.next = t + tm.sifs_slots;
                break;
            case Step::DataEnd:
                end_air(l, t);
                if (r.corrupted) {
                    ++stats[l].data_failed;
                    r.failed = true;
                    r.step = Step::TimeoutEnd;
                } else {
                    r.step = Step::AckEnd;
                }
                r.next = t + tm.sifs_slots + tm.ack_slots;
                break;
            case Step::AckEnd:
                ++r.delivered_now;
                --r.iq;
                deliver(l, t);
                if (r.iq > 0) {
                    r.step = Step::DataStart;
                    r.next = t + tm.sifs_slots;
                } else {
                    finish(l, t, true);
                }
                break;
            case Step::TimeoutEnd:
                finish(l, t, false);
                break;
            case Step::DataStart:
                break;
        }
    }

    SlotTime next_event(SlotTime now) const {
        SlotTime best = kNever;
        for (LinkId l = 0; l < rt.size(); ++l) {
            const auto& r = rt[l];
            if (r.mode == Mode::Exchange) {
                best = std::min(best, r.next);
            } else if (r.idle) {
                best = std::min(best, fire_time(l));
            } else if (r.nav_until > now && (topo.sense_row(l) & exchange_mask) == 0) {
                best = std::min(best, r.nav_until);
            }
        }
        return best;
    }

    SimResult run() {
        const auto n = rt.size();
        for (LinkId l = 0; l < n; ++l) begin_backoff(l, 0);
        refresh(0);
        SlotTime t = 0;
        std::vector<LinkId> firing;
        firing.reserve(n);
        while (true) {
            const SlotTime next = next_event(t);
            if (next >= cfg.duration) break;
            t = next;

            for (LinkId l = 0; l < n; ++l)
                if (rt[l].mode == Mode::Exchange && rt[l].next == t && rt[l].step != Step::DataStart)
                    process_end_step(l, t);
            for (LinkId l = 0; l < n; ++l)
                if (rt[l].mode == Mode::Exchange && rt[l].next == t && rt[l].step == Step::DataStart)
                    start_data(l, t);
            refresh(t);

            firing.clear();
            for (LinkId l = 0; l < n; ++l)
                if (rt[l].mode == Mode::Backoff && rt[l].idle && fire_time(l) == t) firing.push_back(l);
            for (auto l : firing) start_exchange(l, t);
            if (!firing.empty()) refresh(t);
        }

        SimResult res;
        res.duration = cfg.duration;
        res.packet_bytes = cfg.timing.packet_bytes;
        for (LinkId l = 0; l < n; ++l) {
            // Count the unfinished exchange's airtime up to the horizon.
            if (rt[l].mode == Mode::Exchange) stats[l].airtime += cfg.duration - rt[l].start;
            stats[l].in_flight = static_cast<std::uint64_t>(rt[l].iq);
        }
        res.links = std::move(stats);
        res.event_log = std::move(log);
        return res;
    }
};

Engine::Engine(const Topology& topology, EngineConfig config, std::vector<std::unique_ptr<Mac>> macs)
    : impl_(std::make_unique<Impl>(topology, std::move(config), std::move(macs))) {}

Engine::~Engine() = default;

SimResult Engine::run() { return impl_->run(); }

}  // namespace csmasim

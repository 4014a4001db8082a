#pragma once

#include "csmasim/mac.hpp"
#include "csmasim/timing.hpp"
#include "csmasim/topology.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace csmasim {

/**
 * Channel verdict for a set of links whose frames overlap in time: link l
 * survives iff every overlapping link that interferes with l is
 * capture-dominated by l. Returns the mask of surviving links.
 */
LinkMask arbitrate(const Topology& topology, LinkMask transmitting);

// True when a frame from k destroys a concurrent reception on l.
inline bool corrupts(const Topology& t, LinkId k, LinkId l) {
    return k != l && t.interfere(k, l) && !t.captures(l, k);
}

struct EngineConfig {
    TimingParams timing{};
    bool rts_cts = false;
    SlotTime duration = seconds_to_slots(100.0);
    std::uint64_t seed = 1;
    bool record_events = false;
    // One trace per link; empty means every link runs at its topology capacity.
    std::vector<CapacityTrace> capacity;
};

struct LinkStats {
    std::uint64_t granted = 0;      // packets moved into the interface queue
    std::uint64_t delivered = 0;    // acknowledged packets
    std::uint64_t dropped = 0;      // retry limit exceeded
    std::uint64_t attempts = 0;     // channel accesses (exchanges started)
    std::uint64_t collisions = 0;   // exchanges that ended without the full burst acknowledged
    std::uint64_t rts_sent = 0;
    std::uint64_t rts_failed = 0;
    std::uint64_t data_sent = 0;
    std::uint64_t data_failed = 0;
    std::uint64_t nav_holds = 0;    // times this link was silenced by a CTS it heard
    SlotTime airtime = 0;           // slots spent inside own exchanges
    double cw_sum = 0.0;            // windows the winning backoffs were drawn from
    SlotTime max_delivery_gap = 0;
    SlotTime last_delivery = -1;
    std::uint64_t in_flight = 0;    // packets left in the interface queue at the end
    std::vector<std::uint64_t> delivered_per_second;

    double mean_cw() const { return attempts ? cw_sum / static_cast<double>(attempts) : 0.0; }
    double collision_ratio() const {
        return attempts ? static_cast<double>(collisions) / static_cast<double>(attempts) : 0.0;
    }
};

struct SimResult {
    SlotTime duration = 0;
    int packet_bytes = 1000;
    std::vector<LinkStats> links;
    std::string event_log;  // "slot,link,event,detail" lines when recording

    double seconds() const { return slots_to_seconds(duration); }
    double goodput_bps(LinkId l) const;
    std::vector<double> goodputs_bps() const;
    double airtime_share(LinkId l) const;
    // Inverse of the largest gap between consecutive deliveries, 1/s.
    double short_term_fairness(LinkId l) const;
};

/**
 * Slotted CSMA/CA channel.
 *
 * Time advances from event to event in whole 9 µs slots. A link counts its
 * backoff down only while the medium is idle for it: no link it senses is
 * inside an exchange and its NAV has expired. Countdowns that expire in the
 * same slot start simultaneously. Reception of every RTS and data frame is
 * checked against all overlapping frames from interfering transmitters;
 * CTS and ACK frames are always delivered.
 *
 * With RTS/CTS, only the first packet of a burst is preceded by the
 * handshake, and every transmitter that hears the CTS (it interferes with
 * the receiver) or senses the holder defers until the burst ends.
 */
class Engine {
public:
    Engine(const Topology& topology, EngineConfig config, std::vector<std::unique_ptr<Mac>> macs);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    SimResult run();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Closed-form goodput of one saturated DCF-style link sending single
// packets with mean backoff cw/2: payload / (DIFS + backoff + data + SIFS + ACK).
double single_link_goodput_bps(const TimingParams& t, double mbps, int cw);

}  // namespace csmasim

#pragma once

#include <array>
#include <cstdint>

namespace csmasim {

// Simulation time in 9 µs mini-slots.
using SlotTime = std::int64_t;

inline constexpr double kSlotUs = 9.0;
inline constexpr std::size_t kCwLevels = 10;

// Contention windows the hardware can be programmed with: 2^n - 1, n = 1..10.
inline constexpr std::array<int, kCwLevels> kCwSet = {1, 3, 7, 15, 31, 63, 127, 255, 511, 1023};

inline constexpr SlotTime seconds_to_slots(double s) {
    return static_cast<SlotTime>(s * 1e6 / kSlotUs + 0.5);
}
inline constexpr double slots_to_seconds(SlotTime t) { return static_cast<double>(t) * kSlotUs * 1e-6; }

// Index into kCwSet of the member closest to `raw`; ties go to the smaller CW.
std::size_t nearest_cw_index(double raw);
inline int nearest_cw(double raw) { return kCwSet[nearest_cw_index(raw)]; }
// Index of an exact member, or throws std::invalid_argument.
std::size_t cw_index(int cw);

/**
 * 802.11a-style durations rounded up to whole mini-slots.
 *
 * Control frames go at the 6 Mb/s basic rate. A data frame carries a fixed
 * PHY preamble plus MAC header and payload at the link rate.
 */
struct TimingParams {
    int difs_slots = 4;   // 34 µs
    int sifs_slots = 2;   // 16 µs
    int ack_slots = 5;    // 44 µs
    int rts_slots = 6;    // 52 µs
    int cts_slots = 5;    // 44 µs
    double phy_preamble_us = 20.0;
    int mac_overhead_bytes = 64;
    int phy_service_tail_bits = 22;
    int retry_limit = 4;
    int max_burst_packets = 64;
    int packet_bytes = 1000;

    // Airtime of one data frame at `mbps`, in whole slots.
    SlotTime data_slots(double mbps) const;
    // Payload bytes carried per slot at `mbps` (rate × 9 µs / 8).
    static double bytes_per_slot(double mbps) { return mbps * kSlotUs / 8.0; }
    // Fractional slots worth of payload for one packet at `mbps`.
    double payload_slots(double mbps) const { return packet_bytes / bytes_per_slot(mbps); }
    // Goodput fraction of a saturated single link sending one packet per DIFS:
    // payload time / (data + SIFS + ACK + DIFS). Backoff is not included.
    double efficiency(double mbps) const;

    // Throws std::invalid_argument when a duration is < 1 slot or counts are
    // out of range.
    void validate() const;
};

}  // namespace csmasim

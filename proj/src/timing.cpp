#include "csmasim/timing.hpp"

#include <cmath>
#include <stdexcept>

namespace csmasim {

std::size_t nearest_cw_index(double raw) {
    std::size_t best = 0;
    double best_dist = std::abs(raw - kCwSet[0]);
    for (std::size_t i = 1; i < kCwSet.size(); ++i) {
        const double d = std::abs(raw - kCwSet[i]);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

std::size_t cw_index(int cw) {
    for (std::size_t i = 0; i < kCwSet.size(); ++i)
        if (kCwSet[i] == cw) return i;
    throw std::invalid_argument("CW " + std::to_string(cw) + " is not of the form 2^n - 1, n = 1..10");
}

SlotTime TimingParams::data_slots(double mbps) const {
    const double bits = 8.0 * (packet_bytes + mac_overhead_bytes) + phy_service_tail_bits;
    const double us = phy_preamble_us + bits / mbps;
    return static_cast<SlotTime>(std::ceil(us / kSlotUs - 1e-9));
}

double TimingParams::efficiency(double mbps) const {
    const double payload_us = 8.0 * packet_bytes / mbps;
    const double cycle_us = kSlotUs * static_cast<double>(data_slots(mbps) + sifs_slots + ack_slots + difs_slots);
    return payload_us / cycle_us;
}

void TimingParams::validate() const {
    if (difs_slots < 1 || sifs_slots < 1 || ack_slots < 1 || rts_slots < 1 || cts_slots < 1)
        throw std::invalid_argument("all frame and inter-frame durations must be >= 1 slot");
    if (retry_limit < 0) throw std::invalid_argument("retry limit must be >= 0");
    if (max_burst_packets < 1) throw std::invalid_argument("max burst must be >= 1 packet");
    if (packet_bytes < 1) throw std::invalid_argument("packet size must be >= 1 byte");
}

}  // namespace csmasim

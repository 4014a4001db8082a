#pragma once

#include "csmasim/mac.hpp"

#include <optional>
#include <span>

namespace csmasim {

struct OdcfParams {
    QueueParams queue{};
    double c = 500.0;                      // sigmoid constant
    int max_burst_packets = 64;            // transmission length cap
    double pc_window_s = 1.0;              // collision-ratio measurement window
    double reference_capacity_mbps = 6.0;  // c_rel = smoothed rate / reference
    double p_tilde_floor = 1e-4;

    void validate() const;
};

// ---- Queue-driven access rules ------------------------------------------

// Access probability e^x / (e^x + C).
double sigmoid_access(double x, double c);
// Unquantized initial window 2(e^x + C)/e^x - 1, i.e. 2/p - 1 for the sigmoid p.
double initial_cw_raw(double x, double c);
// Initial window for scaled queue q and relative capacity c_rel, snapped to
// the nearest hardware CW (ties toward the smaller window).
int initial_cw(double q, double c_rel, double c);

/**
 * Success access probability after BEB for initial window `cw`, per-attempt
 * collision probability `pc` and retry limit `m`:
 *
 *   p~ = 2 s (1 - pc^(m+1)) / ((cw+1)(1 - (2pc)^(m+1))(1 - pc) + s (1 - pc^(m+1))),  s = 1 - 2pc.
 *
 * The expression has a removable singularity at pc = 1/2; there and above the
 * value at the limit pc -> 1/2 is used. The result never drops below `floor`.
 */
double estimate_success_p(int cw, double pc, int m, double floor = 1e-4);
// Limit of estimate_success_p as pc -> 1/2.
double success_p_at_half(int cw, int m);

struct BurstGrant {
    double mu_slots = 0.0;   // after the cap
    double mu_bytes = 0.0;   // slots converted at the link rate, plus carried deficit
    int packets = 0;         // whole packets to send (>= 1)
    double deficit_bytes = 0.0;   // unconsumed grant carried to the next access
    double borrowed_bytes = 0.0;  // shortfall when a sub-packet grant was rounded up to one
};

/**
 * Transmission length for one access.
 *
 * mu_slots = min(weight / p_tilde, cap_slots); the slots are converted to
 * bytes at `mbps` and topped up with the carried deficit (less any
 * outstanding borrow). At least one and at most `max_packets` whole packets
 * are sent; the remainder is carried.
 */
BurstGrant grant_burst(double weight, double p_tilde, double mbps, double deficit_bytes,
                       double borrowed_bytes, int packet_bytes, int max_packets);

// Slots that `packets` packets of `packet_bytes` take at `mbps`.
double packets_to_slots(int packets, int packet_bytes, double mbps);

// Picks the neighbor with the largest MAQ; ties go to the lowest index.
// Empty when every queue is empty.
std::optional<std::size_t> schedule_next_maq(std::span<const int> queue_lengths);

// Exponential smoothing of the link rate, sampled once per second.
class CapacitySmoother {
public:
    CapacitySmoother(const CapacityTrace& trace, double reference_mbps, double weight = 0.5);

    void advance(SlotTime now);
    double smoothed_mbps() const { return smoothed_; }
    double relative() const { return smoothed_ / reference_; }

private:
    CapacityTrace trace_;
    double reference_;
    double weight_;
    double smoothed_;
    SlotTime next_sample_;
};

// Collision ratio measured over fixed windows and exponentially averaged
// with a one-window time constant.
class CollisionMeter {
public:
    explicit CollisionMeter(double window_s = 1.0);

    void advance(SlotTime now);
    void record(bool collided);
    double estimate() const { return estimate_; }

private:
    SlotTime window_;
    SlotTime window_end_;
    long attempts_ = 0;
    long failures_ = 0;
    double estimate_ = 0.0;
};

struct OdcfLinkState {
    int cq = 1;               // saturated: never empty
    int maq = 1;
    double q = 0.01;
    std::size_t cw_stage = 0;
    int initial_cw = 1023;
    double pc_est = 0.0;
    double p_tilde = 2.0 / 1025.0;
    double deficit_bytes = 0.0;
    double borrowed_bytes = 0.0;
    double c_rel = 1.0;
    double last_mu_slots = 0.0;
};

class OdcfMac final : public Mac {
public:
    OdcfMac(const OdcfParams& params, const TimingParams& timing, CapacityTrace capacity);

    std::string_view protocol() const override { return "odcf"; }
    int begin_backoff(SlotTime now) override;
    int resume_window(SlotTime now) override;
    int select_burst(SlotTime now) override;
    void on_success(SlotTime now, int delivered) override;
    bool on_collision(SlotTime now, int delivered) override;
    MacSnapshot snapshot() const override;

    OdcfLinkState state() const;
    const MediaAccessQueue& maq() const { return maq_; }
    MediaAccessQueue& maq() { return maq_; }
    int current_cw() const { return beb_.cw(); }

    // Totals for the deficit-conservation check.
    double granted_bytes() const { return granted_bytes_; }
    double sent_bytes() const { return sent_bytes_; }

private:
    void advance(SlotTime now);

    OdcfParams params_;
    TimingParams timing_;
    CapacityTrace capacity_;
    MediaAccessQueue maq_;
    CapacitySmoother smoother_;
    CollisionMeter meter_;
    Beb beb_;
    int initial_cw_ = 1023;
    double p_tilde_;
    double deficit_bytes_ = 0.0;
    double borrowed_bytes_ = 0.0;
    double last_mu_slots_ = 0.0;
    double granted_bytes_ = 0.0;
    double sent_bytes_ = 0.0;
};

}  // namespace csmasim

#pragma once

#include "csmasim/timing.hpp"

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

namespace csmasim {

// Piecewise-constant link rate. Steps are (start slot, Mb/s), sorted, and the
// first step starts at slot 0.
class CapacityTrace {
public:
    CapacityTrace() : steps_{{0, 6.0}} {}
    explicit CapacityTrace(double constant_mbps);
    explicit CapacityTrace(std::vector<std::pair<SlotTime, double>> steps);

    double at(SlotTime t) const;
    bool constant() const { return steps_.size() == 1; }
    const std::vector<std::pair<SlotTime, double>>& steps() const { return steps_; }

private:
    std::vector<std::pair<SlotTime, double>> steps_;
};

// Binary exponential backoff over kCwSet with a retry counter.
class Beb {
public:
    Beb() = default;
    Beb(std::size_t base_index, std::size_t cap_index) : base_(base_index), cap_(cap_index) {}

    int cw() const { return kCwSet[std::min(base_ + stage_, cap_)]; }
    std::size_t stage() const { return stage_; }
    int retries() const { return retries_; }
    void set_base(std::size_t index) { base_ = index; }
    void set_cap(std::size_t index) { cap_ = index; }
    std::size_t base() const { return base_; }

    // Doubles the window (saturating at the cap). Returns true when the
    // retry limit is exceeded; the caller drops the HOL packet and the
    // backoff resets.
    bool on_collision(int retry_limit);
    void reset() {
        stage_ = 0;
        retries_ = 0;
    }

private:
    std::size_t base_ = 0;
    std::size_t cap_ = kCwLevels - 1;
    std::size_t stage_ = 0;
    int retries_ = 0;
};

struct QueueParams {
    double b = 0.01;     // q = b·Q
    double v = 2.0;      // CQ -> MAQ dequeue rate is v / q packets per second
    int q_min = 1;
    int q_max = 1000;

    void validate() const;
};

/**
 * Media access queue length driven by a saturated control queue.
 *
 * Arrivals come from the control queue at v / q(t) packets per second and
 * services are packets granted to the interface queue. The length is clamped
 * to [q_min, q_max] after every update. Arrivals are integrated lazily with a
 * token bucket, so advance() may be called at any granularity.
 */
class MediaAccessQueue {
public:
    explicit MediaAccessQueue(QueueParams p = {});

    void advance(SlotTime now);
    // Clamped update with explicit counts.
    void update(int arrivals, int services);
    void serve(int packets) { update(0, packets); }

    int length() const { return length_; }
    double scaled() const { return params_.b * length_; }
    double dequeue_rate() const { return params_.v / scaled(); }
    const QueueParams& params() const { return params_; }
    void set_length(int q);

private:
    QueueParams params_;
    int length_;
    double tokens_ = 0.0;
    double last_ = 0.0;  // slots
};

// Per-transmission state published to the event log.
struct MacSnapshot {
    int queue = 0;           // Q_M in packets (0 for queue-less MACs)
    double scaled_queue = 0.0;
    int cw = 0;              // window the current backoff was drawn from
    double p_tilde = 0.0;    // estimated success access probability (O-DCF)
    double mu_slots = 0.0;   // transmission length chosen at the last grant
};

/**
 * One link's MAC, driven by the engine.
 *
 * The engine owns carrier sensing, the interface queue and timing; the MAC
 * owns its contention window, queues and burst sizing.
 */
class Mac {
public:
    virtual ~Mac() = default;

    virtual std::string_view protocol() const = 0;

    // A new backoff starts; returns the window to draw uniformly from [0, cw].
    virtual int begin_backoff(SlotTime now) = 0;
    // A frozen countdown is about to resume. A queue-driven MAC whose window
    // has shrunk since the draw returns the new window; -1 keeps the counter.
    virtual int resume_window(SlotTime) { return -1; }
    // Arbitration inter-frame space in slots.
    virtual int aifs_slots(const TimingParams& t) const { return t.difs_slots; }
    // The link won the medium with an empty interface queue. Returns the
    // number of packets moved into it (>= 1).
    virtual int select_burst(SlotTime now) = 0;
    // `delivered` packets of the current exchange were acknowledged.
    virtual void on_success(SlotTime now, int delivered) = 0;
    // The exchange failed after `delivered` acknowledged packets. Returns true
    // when the HOL packet must be dropped.
    virtual bool on_collision(SlotTime now, int delivered) = 0;

    virtual MacSnapshot snapshot() const = 0;
};

}  // namespace csmasim

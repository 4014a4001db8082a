#include "csmasim/odcf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmasim {

void OdcfParams::validate() const {
    queue.validate();
    if (!(c > 0.0)) throw std::invalid_argument("sigmoid constant C must be > 0");
    if (max_burst_packets < 1) throw std::invalid_argument("max burst must be >= 1 packet");
    if (!(pc_window_s > 0.0)) throw std::invalid_argument("collision window must be > 0");
    if (!(reference_capacity_mbps > 0.0)) throw std::invalid_argument("reference capacity must be > 0");
    if (!(p_tilde_floor > 0.0 && p_tilde_floor < 1.0)) throw std::invalid_argument("p~ floor must be in (0, 1)");
}

double sigmoid_access(double x, double c) {
    // e^x / (e^x + C) written to stay finite for large x.
    return 1.0 / (1.0 + c * std::exp(-x));
}

double initial_cw_raw(double x, double c) { return 1.0 + 2.0 * c * std::exp(-x); }

int initial_cw(double q, double c_rel, double c) { return nearest_cw(initial_cw_raw(c_rel * q, c)); }

double success_p_at_half(int cw, int m) {
    const double tail = 1.0 - std::pow(0.5, m + 1);
    return 2.0 * tail / ((cw + 1.0) * (m + 1.0) * 0.5 + tail);
}

double estimate_success_p(int cw, double pc, int m, double floor) {
    if (!(pc >= 0.0)) pc = 0.0;
    double p;
    if (pc >= 0.5 - 1e-9) {
        p = success_p_at_half(cw, m);
    } else {
        const double s = 1.0 - 2.0 * pc;
        const double tail = 1.0 - std::pow(pc, m + 1);
        const double denom = (cw + 1.0) * (1.0 - std::pow(2.0 * pc, m + 1)) * (1.0 - pc) + s * tail;
        p = 2.0 * s * tail / denom;
    }
    return std::clamp(p, floor, 1.0);
}

double packets_to_slots(int packets, int packet_bytes, double mbps) {
    return static_cast<double>(packets) * packet_bytes / TimingParams::bytes_per_slot(mbps);
}

BurstGrant grant_burst(double weight, double p_tilde, double mbps, double deficit_bytes,
                       double borrowed_bytes, int packet_bytes, int max_packets) {
    BurstGrant g;
    const double cap_slots = packets_to_slots(max_packets, packet_bytes, mbps);
    g.mu_slots = std::min(weight / p_tilde, cap_slots);
    g.mu_bytes = g.mu_slots * TimingParams::bytes_per_slot(mbps) + deficit_bytes - borrowed_bytes;
    const double whole = std::floor(g.mu_bytes / packet_bytes);
    g.packets = static_cast<int>(std::clamp(whole, 1.0, static_cast<double>(max_packets)));
    const double rest = g.mu_bytes - static_cast<double>(g.packets) * packet_bytes;
    if (rest >= 0.0) {
        g.deficit_bytes = rest;
        g.borrowed_bytes = 0.0;
    } else {
        g.deficit_bytes = 0.0;
        g.borrowed_bytes = -rest;
    }
    return g;
}

std::optional<std::size_t> schedule_next_maq(std::span<const int> queue_lengths) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < queue_lengths.size(); ++i) {
        if (queue_lengths[i] <= 0) continue;
        if (!best || queue_lengths[i] > queue_lengths[*best]) best = i;
    }
    return best;
}

CapacitySmoother::CapacitySmoother(const CapacityTrace& trace, double reference_mbps, double weight)
    : trace_(trace),
      reference_(reference_mbps),
      weight_(weight),
      smoothed_(trace.at(0)),
      next_sample_(seconds_to_slots(1.0)) {}

void CapacitySmoother::advance(SlotTime now) {
    if (trace_.constant()) return;
    const SlotTime second = seconds_to_slots(1.0);
    while (next_sample_ <= now) {
        smoothed_ = weight_ * trace_.at(next_sample_) + (1.0 - weight_) * smoothed_;
        next_sample_ += second;
    }
}

CollisionMeter::CollisionMeter(double window_s)
    : window_(std::max<SlotTime>(1, seconds_to_slots(window_s))), window_end_(window_) {}

void CollisionMeter::advance(SlotTime now) {
    // 1 - e^-1: one-window time constant.
    constexpr double kAlpha = 0.6321205588285577;
    while (window_end_ <= now) {
        if (attempts_ > 0) {
            const double ratio = static_cast<double>(failures_) / static_cast<double>(attempts_);
            estimate_ = kAlpha * ratio + (1.0 - kAlpha) * estimate_;
        }
        attempts_ = 0;
        failures_ = 0;
        window_end_ += window_;
    }
}

void CollisionMeter::record(bool collided) {
    ++attempts_;
    if (collided) ++failures_;
}

OdcfMac::OdcfMac(const OdcfParams& params, const TimingParams& timing, CapacityTrace capacity)
    : params_(params),
      timing_(timing),
      capacity_(std::move(capacity)),
      maq_(params.queue),
      smoother_(capacity_, params.reference_capacity_mbps),
      meter_(params.pc_window_s) {
    params_.validate();
    initial_cw_ = initial_cw(maq_.scaled(), smoother_.relative(), params_.c);
    beb_.set_base(cw_index(initial_cw_));
    p_tilde_ = estimate_success_p(initial_cw_, 0.0, timing_.retry_limit, params_.p_tilde_floor);
}

void OdcfMac::advance(SlotTime now) {
    maq_.advance(now);
    smoother_.advance(now);
    meter_.advance(now);
}

int OdcfMac::begin_backoff(SlotTime now) {
    advance(now);
    initial_cw_ = initial_cw(maq_.scaled(), smoother_.relative(), params_.c);
    beb_.set_base(cw_index(initial_cw_));
    return beb_.cw();
}

int OdcfMac::resume_window(SlotTime now) {
    const int before = beb_.cw();
    const int cw = begin_backoff(now);
    return cw < before ? cw : -1;
}

int OdcfMac::select_burst(SlotTime now) {
    advance(now);
    p_tilde_ = estimate_success_p(initial_cw_, meter_.estimate(), timing_.retry_limit, params_.p_tilde_floor);
    const double weight = std::exp(smoother_.relative() * maq_.scaled());
    const double mbps = capacity_.at(now);
    const auto g = grant_burst(weight, p_tilde_, mbps, deficit_bytes_, borrowed_bytes_, timing_.packet_bytes,
                               std::min(params_.max_burst_packets, timing_.max_burst_packets));
    granted_bytes_ += g.mu_slots * TimingParams::bytes_per_slot(mbps);
    sent_bytes_ += static_cast<double>(g.packets) * timing_.packet_bytes;
    deficit_bytes_ = g.deficit_bytes;
    borrowed_bytes_ = g.borrowed_bytes;
    last_mu_slots_ = g.mu_slots;
    // Service from the MAQ happens when packets move to the interface queue.
    maq_.serve(g.packets);
    return g.packets;
}

void OdcfMac::on_success(SlotTime now, int /*delivered*/) {
    advance(now);
    meter_.record(false);
    beb_.reset();
}

bool OdcfMac::on_collision(SlotTime now, int /*delivered*/) {
    advance(now);
    meter_.record(true);
    return beb_.on_collision(timing_.retry_limit);
}

MacSnapshot OdcfMac::snapshot() const {
    return {maq_.length(), maq_.scaled(), beb_.cw(), p_tilde_, last_mu_slots_};
}

OdcfLinkState OdcfMac::state() const {
    OdcfLinkState s;
    s.maq = maq_.length();
    s.q = maq_.scaled();
    s.cw_stage = beb_.stage();
    s.initial_cw = initial_cw_;
    s.pc_est = meter_.estimate();
    s.p_tilde = p_tilde_;
    s.deficit_bytes = deficit_bytes_;
    s.borrowed_bytes = borrowed_bytes_;
    s.c_rel = smoother_.relative();
    s.last_mu_slots = last_mu_slots_;
    return s;
}

}  // namespace csmasim

#include "csmasim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csmasim {

void BaselineParams::validate(int q_max) const {
    cw_index(dcf_cwmin);
    cw_index(dcf_cwmax);
    if (dcf_cwmin > dcf_cwmax) throw std::invalid_argument("dcf_cwmin must be <= dcf_cwmax");
    if (!(ocsma_fixed_mu_slots > 0.0)) throw std::invalid_argument("oCSMA transmission length must be > 0");
    if (!(p_bar > 0.0 && p_bar < 1.0)) throw std::invalid_argument("p_bar must be in (0, 1)");
    if (diffq_levels.front().min_queue != 0) throw std::invalid_argument("DiffQ bands must start at queue 0");
    for (std::size_t i = 0; i < diffq_levels.size(); ++i) {
        const auto& l = diffq_levels[i];
        cw_index(l.cw_min);
        cw_index(l.cw_max);
        if (l.cw_min > l.cw_max) throw std::invalid_argument("DiffQ cw_min must be <= cw_max");
        if (l.aifsn < 1) throw std::invalid_argument("DiffQ AIFSN must be >= 1");
        if (l.min_queue > q_max) throw std::invalid_argument("DiffQ bands must lie within [0, Q_max]");
        if (i > 0) {
            const auto& prev = diffq_levels[i - 1];
            if (l.min_queue <= prev.min_queue) throw std::invalid_argument("DiffQ bands must be increasing");
            if (l.cw_min > prev.cw_min) throw std::invalid_argument("higher DiffQ band must not get a larger CW");
        }
    }
}

double ocsma_cw_probability(double q, double mu_slots, double p_bar) {
    return std::min(p_bar, std::exp(q) / mu_slots);
}

int ocsma_cw_window(double q, double mu_slots, double p_bar) {
    return nearest_cw(2.0 / ocsma_cw_probability(q, mu_slots, p_bar) - 1.0);
}

double ocsma_mu_slots(double q, int cw, double cap_slots) {
    const double p = 2.0 / (cw + 1.0);
    return std::min(std::exp(q) / p, cap_slots);
}

const DiffqLevel& diffq_level(const BaselineParams& p, int queue) {
    const DiffqLevel* chosen = &p.diffq_levels.front();
    for (const auto& l : p.diffq_levels)
        if (queue >= l.min_queue) chosen = &l;
    return *chosen;
}

// ---- 802.11 DCF -----------------------------------------------------------

DcfMac::DcfMac(const BaselineParams& params, const TimingParams& timing)
    : timing_(timing), beb_(cw_index(params.dcf_cwmin), cw_index(params.dcf_cwmax)) {}

int DcfMac::begin_backoff(SlotTime) { return beb_.cw(); }
int DcfMac::select_burst(SlotTime) { return 1; }
void DcfMac::on_success(SlotTime, int) { beb_.reset(); }
bool DcfMac::on_collision(SlotTime, int) { return beb_.on_collision(timing_.retry_limit); }
MacSnapshot DcfMac::snapshot() const { return {0, 0.0, beb_.cw(), 0.0, 0.0}; }

// ---- oCSMA, CW adaptation -------------------------------------------------

OcsmaCwMac::OcsmaCwMac(const BaselineParams& params, const QueueParams& queue, const TimingParams& timing)
    : params_(params), timing_(timing), maq_(queue) {}

int OcsmaCwMac::begin_backoff(SlotTime now) {
    maq_.advance(now);
    beb_.set_base(cw_index(ocsma_cw_window(maq_.scaled(), params_.ocsma_fixed_mu_slots, params_.p_bar)));
    return beb_.cw();
}

int OcsmaCwMac::resume_window(SlotTime now) {
    const int before = beb_.cw();
    const int cw = begin_backoff(now);
    return cw < before ? cw : -1;
}

int OcsmaCwMac::select_burst(SlotTime now) {
    maq_.advance(now);
    maq_.serve(1);
    return 1;
}

void OcsmaCwMac::on_success(SlotTime now, int) {
    maq_.advance(now);
    beb_.reset();
}

bool OcsmaCwMac::on_collision(SlotTime now, int) {
    maq_.advance(now);
    return beb_.on_collision(timing_.retry_limit);
}

MacSnapshot OcsmaCwMac::snapshot() const {
    return {maq_.length(), maq_.scaled(), beb_.cw(), 0.0, params_.ocsma_fixed_mu_slots};
}

// ---- oCSMA, transmission-length adaptation with BEB -----------------------

OcsmaMuMac::OcsmaMuMac(const BaselineParams& params, const QueueParams& queue, const TimingParams& timing,
                       CapacityTrace capacity)
    : params_(params),
      timing_(timing),
      capacity_(std::move(capacity)),
      maq_(queue),
      beb_(cw_index(params.dcf_cwmin), cw_index(params.dcf_cwmax)) {}

int OcsmaMuMac::begin_backoff(SlotTime now) {
    maq_.advance(now);
    return beb_.cw();
}

int OcsmaMuMac::select_burst(SlotTime now) {
    maq_.advance(now);
    const double mbps = capacity_.at(now);
    // p is taken from the window this access was won with.
    const double p = 2.0 / (beb_.cw() + 1.0);
    const auto g = grant_burst(std::exp(maq_.scaled()), p, mbps, deficit_bytes_, borrowed_bytes_,
                               timing_.packet_bytes, timing_.max_burst_packets);
    deficit_bytes_ = g.deficit_bytes;
    borrowed_bytes_ = g.borrowed_bytes;
    last_mu_slots_ = g.mu_slots;
    maq_.serve(g.packets);
    return g.packets;
}

void OcsmaMuMac::on_success(SlotTime now, int) {
    maq_.advance(now);
    beb_.reset();
}

bool OcsmaMuMac::on_collision(SlotTime now, int) {
    maq_.advance(now);
    return beb_.on_collision(timing_.retry_limit);
}

MacSnapshot OcsmaMuMac::snapshot() const {
    return {maq_.length(), maq_.scaled(), beb_.cw(), 2.0 / (beb_.cw() + 1.0), last_mu_slots_};
}

// ---- DiffQ-style priority classes -----------------------------------------

DiffqMac::DiffqMac(const BaselineParams& params, const QueueParams& queue, const TimingParams& timing)
    : params_(params), timing_(timing), maq_(queue) {
    const auto& l = diffq_level(params_, maq_.length());
    beb_ = Beb(cw_index(l.cw_min), cw_index(l.cw_max));
    aifsn_ = l.aifsn;
}

int DiffqMac::begin_backoff(SlotTime now) {
    maq_.advance(now);
    const auto& l = diffq_level(params_, maq_.length());
    beb_.set_base(cw_index(l.cw_min));
    beb_.set_cap(cw_index(l.cw_max));
    aifsn_ = l.aifsn;
    return beb_.cw();
}

int DiffqMac::resume_window(SlotTime now) {
    const int before = beb_.cw();
    const int cw = begin_backoff(now);
    return cw < before ? cw : -1;
}

int DiffqMac::aifs_slots(const TimingParams& t) const { return t.sifs_slots + aifsn_; }

int DiffqMac::select_burst(SlotTime now) {
    maq_.advance(now);
    maq_.serve(1);
    return 1;
}

void DiffqMac::on_success(SlotTime now, int) {
    maq_.advance(now);
    beb_.reset();
}

bool DiffqMac::on_collision(SlotTime now, int) {
    maq_.advance(now);
    return beb_.on_collision(timing_.retry_limit);
}

MacSnapshot DiffqMac::snapshot() const { return {maq_.length(), maq_.scaled(), beb_.cw(), 0.0, 0.0}; }

// ---- Registry -------------------------------------------------------------

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::Odcf: return "odcf";
        case Protocol::Dcf: return "dcf";
        case Protocol::OcsmaCw: return "ocsma_cw";
        case Protocol::OcsmaMu: return "ocsma_mu";
        case Protocol::Diffq: return "diffq";
    }
    return "?";
}

Protocol parse_protocol(std::string_view name) {
    for (auto p : kAllProtocols)
        if (to_string(p) == name) return p;
    throw std::invalid_argument("unknown protocol '" + std::string(name) +
                                "'; expected one of odcf, dcf, ocsma_cw, ocsma_mu, diffq");
}

std::unique_ptr<Mac> make_mac(Protocol p, const MacParams& params, const TimingParams& timing,
                              const CapacityTrace& capacity) {
    switch (p) {
        case Protocol::Odcf: return std::make_unique<OdcfMac>(params.odcf, timing, capacity);
        case Protocol::Dcf: return std::make_unique<DcfMac>(params.baseline, timing);
        case Protocol::OcsmaCw: return std::make_unique<OcsmaCwMac>(params.baseline, params.odcf.queue, timing);
        case Protocol::OcsmaMu:
            return std::make_unique<OcsmaMuMac>(params.baseline, params.odcf.queue, timing, capacity);
        case Protocol::Diffq: return std::make_unique<DiffqMac>(params.baseline, params.odcf.queue, timing);
    }
    throw std::invalid_argument("unknown protocol");
}

}  // namespace csmasim

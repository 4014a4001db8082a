#pragma once

#include "csmasim/mac.hpp"
#include "csmasim/odcf.hpp"

#include <array>
#include <memory>
#include <string>
#include <string_view>

namespace csmasim {

// One DiffQ priority class. Queues with length >= min_queue use it.
struct DiffqLevel {
    int min_queue = 0;
    int cw_min = 15;
    int cw_max = 1023;
    int aifsn = 2;  // AIFS = SIFS + aifsn slots
};

struct BaselineParams {
    int dcf_cwmin = 15;
    int dcf_cwmax = 1023;
    double ocsma_fixed_mu_slots = 150.0;
    double p_bar = 0.99;  // largest access probability; maps to CW 1
    // Bottom band first; min_queue must be increasing and start at 0.
    std::array<DiffqLevel, 4> diffq_levels{{
        {0, 31, 1023, 3},
        {250, 31, 511, 3},
        {500, 15, 255, 2},
        {750, 7, 127, 2},
    }};

    void validate(int q_max) const;
};

// ---- Per-access rules, exposed for tests --------------------------------

// Access probability min(p_bar, e^q / mu) and its nearest hardware window.
double ocsma_cw_probability(double q, double mu_slots, double p_bar);
int ocsma_cw_window(double q, double mu_slots, double p_bar);
// Transmission length e^q / p with p = 2 / (cw + 1), capped.
double ocsma_mu_slots(double q, int cw, double cap_slots);
// Priority class for a MAQ length.
const DiffqLevel& diffq_level(const BaselineParams& p, int queue);

class DcfMac final : public Mac {
public:
    DcfMac(const BaselineParams& params, const TimingParams& timing);

    std::string_view protocol() const override { return "dcf"; }
    int begin_backoff(SlotTime now) override;
    int select_burst(SlotTime now) override;
    void on_success(SlotTime now, int delivered) override;
    bool on_collision(SlotTime now, int delivered) override;
    MacSnapshot snapshot() const override;

    int current_cw() const { return beb_.cw(); }

private:
    TimingParams timing_;
    Beb beb_;
};

class OcsmaCwMac final : public Mac {
public:
    OcsmaCwMac(const BaselineParams& params, const QueueParams& queue, const TimingParams& timing);

    std::string_view protocol() const override { return "ocsma_cw"; }
    int begin_backoff(SlotTime now) override;
    int resume_window(SlotTime now) override;
    int select_burst(SlotTime now) override;
    void on_success(SlotTime now, int delivered) override;
    bool on_collision(SlotTime now, int delivered) override;
    MacSnapshot snapshot() const override;

    MediaAccessQueue& maq() { return maq_; }
    int current_cw() const { return beb_.cw(); }

private:
    BaselineParams params_;
    TimingParams timing_;
    MediaAccessQueue maq_;
    Beb beb_;
};

class OcsmaMuMac final : public Mac {
public:
    OcsmaMuMac(const BaselineParams& params, const QueueParams& queue, const TimingParams& timing,
               CapacityTrace capacity);

    std::string_view protocol() const override { return "ocsma_mu"; }
    int begin_backoff(SlotTime now) override;
    int select_burst(SlotTime now) override;
    void on_success(SlotTime now, int delivered) override;
    bool on_collision(SlotTime now, int delivered) override;
    MacSnapshot snapshot() const override;

    MediaAccessQueue& maq() { return maq_; }
    int current_cw() const { return beb_.cw(); }

private:
    BaselineParams params_;
    TimingParams timing_;
    CapacityTrace capacity_;
    MediaAccessQueue maq_;
    Beb beb_;
    double deficit_bytes_ = 0.0;
    double borrowed_bytes_ = 0.0;
    double last_mu_slots_ = 0.0;
};

class DiffqMac final : public Mac {
public:
    DiffqMac(const BaselineParams& params, const QueueParams& queue, const TimingParams& timing);

    std::string_view protocol() const override { return "diffq"; }
    int begin_backoff(SlotTime now) override;
    int resume_window(SlotTime now) override;
    int aifs_slots(const TimingParams& t) const override;
    int select_burst(SlotTime now) override;
    void on_success(SlotTime now, int delivered) override;
    bool on_collision(SlotTime now, int delivered) override;
    MacSnapshot snapshot() const override;

    MediaAccessQueue& maq() { return maq_; }
    int current_cw() const { return beb_.cw(); }

private:
    BaselineParams params_;
    TimingParams timing_;
    MediaAccessQueue maq_;
    Beb beb_;
    int aifsn_ = 2;
};

enum class Protocol { Odcf, Dcf, OcsmaCw, OcsmaMu, Diffq };

inline constexpr std::array<Protocol, 5> kAllProtocols = {Protocol::Odcf, Protocol::Dcf, Protocol::OcsmaCw,
                                                          Protocol::OcsmaMu, Protocol::Diffq};

std::string_view to_string(Protocol p);
// Throws std::invalid_argument listing the valid names.
Protocol parse_protocol(std::string_view name);

struct MacParams {
    OdcfParams odcf{};
    BaselineParams baseline{};
};

std::unique_ptr<Mac> make_mac(Protocol p, const MacParams& params, const TimingParams& timing,
                              const CapacityTrace& capacity);

}  // namespace csmasim

#include "csmasim/mac.hpp"

#include <algorithm>
#include <stdexcept>

namespace csmasim {

CapacityTrace::CapacityTrace(double constant_mbps) : steps_{{0, constant_mbps}} {
    if (!(constant_mbps > 0.0)) throw std::invalid_argument("capacity must be > 0");
}

CapacityTrace::CapacityTrace(std::vector<std::pair<SlotTime, double>> steps) : steps_(std::move(steps)) {
    if (steps_.empty() || steps_.front().first != 0)
        throw std::invalid_argument("capacity trace must start at time 0");
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        if (!(steps_[i].second > 0.0)) throw std::invalid_argument("capacity must be > 0");
        if (i > 0 && steps_[i].first <= steps_[i - 1].first)
            throw std::invalid_argument("capacity trace times must be strictly increasing");
    }
}

double CapacityTrace::at(SlotTime t) const {
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](SlotTime v, const auto& step) { return v < step.first; });
    return std::prev(it)->second;
}

bool Beb::on_collision(int retry_limit) {
    if (base_ + stage_ < cap_) ++stage_;
    ++retries_;
    if (retries_ > retry_limit) {
        reset();
        return true;
    }
    return false;
}

void QueueParams::validate() const {
    if (!(b > 0.0)) throw std::invalid_argument("queue scale b must be > 0");
    if (!(v > 0.0)) throw std::invalid_argument("dequeue constant V must be > 0");
    if (q_min < 1) throw std::invalid_argument("Q_min must be >= 1");
    if (q_min >= q_max) throw std::invalid_argument("Q_min must be < Q_max");
}

MediaAccessQueue::MediaAccessQueue(QueueParams p) : params_(p), length_(p.q_min) { params_.validate(); }

void MediaAccessQueue::set_length(int q) { length_ = std::clamp(q, params_.q_min, params_.q_max); }

void MediaAccessQueue::update(int arrivals, int services) {
    if (arrivals < 0 || services < 0) throw std::invalid_argument("arrivals and services must be >= 0");
    const long next = static_cast<long>(length_) + arrivals - services;
    length_ = static_cast<int>(std::clamp<long>(next, params_.q_min, params_.q_max));
}

void MediaAccessQueue::advance(SlotTime now) {
    const double t = static_cast<double>(now);
    if (t <= last_) return;
    constexpr double kSlotSeconds = kSlotUs * 1e-6;
    // At the cap the rate no longer changes, so the remaining span is a
    // single linear fill.
    while (last_ < t) {
        const double per_slot = dequeue_rate() * kSlotSeconds;
        if (length_ >= params_.q_max) {
            tokens_ += per_slot * (t - last_);
            tokens_ -= static_cast<double>(static_cast<long>(tokens_));
            last_ = t;
            break;
        }
        const double needed = (1.0 - tokens_) / per_slot;
        if (last_ + needed <= t) {
            last_ += needed;
            tokens_ = 0.0;
            ++length_;
        } else {
            tokens_ += per_slot * (t - last_);
            last_ = t;
        }
    }
}

}  // namespace csmasim

#include "csmasim/odcf.hpp"

#include <stdexcept>
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <set>

using namespace csmasim;

namespace {

// Attempts per backoff slot under BEB, summed stage by stage: stage i is
// reached with probability pc^i, draws from [0, 2^i (W+1) - 1] and ends in one
// attempt slot.
double success_p_series(int cw, double pc, int m) {
    double attempts = 0.0, slots = 0.0, reach = 1.0;
    for (int i = 0; i <= m; ++i) {
        attempts += reach;
        slots += reach * (std::ldexp(cw + 1.0, i) + 1.0) / 2.0;
        reach *= pc;
    }
    return attempts / slots;
}

}  // namespace

TEST_SUITE("odcf") {

TEST_CASE("initial window from the scaled queue") {
    CHECK(initial_cw_raw(0.01, 500.0) == doctest::Approx(1.0 + 1000.0 * std::exp(-0.01)));
    CHECK(initial_cw_raw(0.01, 500.0) == doctest::Approx(991.05).epsilon(1e-4));
    CHECK(initial_cw(0.01, 1.0, 500.0) == 1023);
    CHECK(sigmoid_access(0.01, 500.0) == doctest::Approx(1.0 / 495.0).epsilon(0.01));

    CHECK(sigmoid_access(5.0, 500.0) == doctest::Approx(std::exp(5.0) / (std::exp(5.0) + 500.0)));
    CHECK(sigmoid_access(5.0, 500.0) == doctest::Approx(0.2289).epsilon(1e-3));
    CHECK(initial_cw_raw(5.0, 500.0) == doctest::Approx(7.738).epsilon(1e-3));
    CHECK(initial_cw(5.0, 1.0, 500.0) == 7);

    CHECK(initial_cw(10.0, 1.0, 500.0) == 1);
    CHECK(sigmoid_access(10.0, 500.0) < 1.0);
    // raw window is 2/p - 1 for the sigmoid probability
    for (double x : {0.0, 0.5, 3.0, 7.0}) CHECK(initial_cw_raw(x, 500.0) == doctest::Approx(2.0 / sigmoid_access(x, 500.0) - 1.0));
}

TEST_CASE("sigmoid is increasing, window non-increasing") {
    double prev_p = 0.0;
    int prev_cw = 1023;
    for (int Q = 1; Q <= 1000; ++Q) {
        const double q = 0.01 * Q;
        CHECK(sigmoid_access(q, 500.0) > prev_p);
        prev_p = sigmoid_access(q, 500.0);
        const int cw = initial_cw(q, 1.0, 500.0);
        CHECK(cw <= prev_cw);
        prev_cw = cw;
    }
}

TEST_CASE("window spans the whole hardware set over the queue range") {
    std::set<int> seen;
    for (int Q = 1; Q <= 1000; ++Q) seen.insert(initial_cw(0.01 * Q, 1.0, 500.0));
    CHECK(seen.size() == kCwLevels);
    for (int cw : kCwSet) CHECK(seen.count(cw) == 1);
}

TEST_CASE("relative capacity scales the exponent") {
    CHECK(initial_cw(1.0, 3.0, 500.0) == initial_cw(3.0, 1.0, 500.0));
}

TEST_CASE("success probability without collisions") {
    CHECK(estimate_success_p(15, 0.0, 4) == doctest::Approx(2.0 / 17.0));
    CHECK(estimate_success_p(15, 0.0, 4) == doctest::Approx(0.1176).epsilon(1e-3));
    CHECK(estimate_success_p(1, 0.0, 4) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("success probability matches the per-stage series") {
    for (int cw : {1, 7, 15, 255, 1023})
        for (int m : {0, 1, 4, 7})
            for (double pc : {0.0, 0.05, 0.2, 0.33, 0.45, 0.499, 0.4999999})
                CHECK(estimate_success_p(cw, pc, m, 1e-12) == doctest::Approx(success_p_series(cw, pc, m)).epsilon(1e-6));
    // At one half the closed form is 0/0; the limit is the series value.
    for (int cw : {1, 15, 1023}) CHECK(success_p_at_half(cw, 4) == doctest::Approx(success_p_series(cw, 0.5, 4)));
    CHECK(estimate_success_p(15, 0.5, 4) == doctest::Approx(success_p_series(15, 0.5, 4)));
}

TEST_CASE("success probability decreases with collisions") {
    double prev = 1.0;
    for (double pc = 0.0; pc < 0.5; pc += 0.001) {
        const double p = estimate_success_p(15, pc, 4);
        CHECK(p < prev);
        prev = p;
    }
    CHECK(estimate_success_p(1023, 0.95, 4) >= 1e-4);
    CHECK(estimate_success_p(1023, 0.95, 4, 0.01) == doctest::Approx(0.01));
}

TEST_CASE("transmission length") {
    CHECK(packets_to_slots(1, 1000, 6.0) == doctest::Approx(148.148).epsilon(1e-4));

    const auto one = grant_burst(1.0, 1.0, 6.0, 0.0, 0.0, 1000, 64);
    CHECK(one.mu_slots == doctest::Approx(1.0));
    CHECK(one.packets == 1);
    CHECK(one.deficit_bytes == 0.0);
    CHECK(one.borrowed_bytes == doctest::Approx(1000.0 - 6.75));

    const auto capped = grant_burst(std::exp(10.0), 1e-4, 6.0, 0.0, 0.0, 1000, 64);
    CHECK(capped.packets == 64);
    CHECK(capped.mu_slots == doctest::Approx(64 * 1000.0 / 6.75));
}

TEST_CASE("product law when uncapped") {
    for (double q : {0.0, 0.5, 1.0, 2.0, 3.0})
        for (double c_rel : {1.0, 3.0})
            for (int cw : {15, 63, 255}) {
                const double p = estimate_success_p(cw, 0.0, 4);
                CHECK(p == doctest::Approx(2.0 / (cw + 2.0)));
                const auto g = grant_burst(std::exp(c_rel * q), p, 6.0 * c_rel, 0.0, 0.0, 1000, 1 << 20);
                CHECK(g.mu_slots * p == doctest::Approx(std::exp(c_rel * q)));
            }
}

TEST_CASE("deficit and borrow conserve bytes") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> weight(0.2, 400.0), pt(0.001, 0.7);
    double deficit = 0.0, borrowed = 0.0, granted = 0.0, sent = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const auto g = grant_burst(weight(rng), pt(rng), 6.0, deficit, borrowed, 1000, 64);
        CHECK(g.packets >= 1);
        CHECK(g.packets <= 64);
        CHECK((g.deficit_bytes == 0.0 || g.borrowed_bytes == 0.0));
        CHECK(g.deficit_bytes < 1000.0);
        granted += g.mu_slots * 6.75;
        sent += 1000.0 * g.packets;
        deficit = g.deficit_bytes;
        borrowed = g.borrowed_bytes;
    }
    // Totals reach ~1e9 bytes, so compare with an absolute rounding allowance.
    CHECK(std::abs((granted - sent) - (deficit - borrowed)) < 1e-3);
}

TEST_CASE("next MAQ to serve") {
    const std::array<int, 3> a{5, 9, 2};
    CHECK(schedule_next_maq(a) == 1u);
    const std::array<int, 2> tie{7, 7};
    CHECK(schedule_next_maq(tie) == 0u);
    const std::array<int, 1> single{4};
    CHECK(schedule_next_maq(single) == 0u);
    const std::array<int, 2> empty{0, 0};
    CHECK_FALSE(schedule_next_maq(empty).has_value());
}

TEST_CASE("relative capacity") {
    for (double c : {6.0, 18.0, 48.0}) {
        CapacitySmoother s(CapacityTrace(c), 6.0);
        CHECK(s.relative() == doctest::Approx(c / 6.0));
        s.advance(seconds_to_slots(30.0));
        CHECK(s.relative() == doctest::Approx(c / 6.0));
    }
    CapacitySmoother m(CapacityTrace({{0, 48.0}, {seconds_to_slots(60.0), 6.0}}), 6.0);
    m.advance(seconds_to_slots(59.5));
    CHECK(m.relative() == doctest::Approx(8.0));
    m.advance(seconds_to_slots(61.0));
    CHECK(m.relative() < 8.0);
    m.advance(seconds_to_slots(66.0));
    CHECK(m.relative() == doctest::Approx(1.0).epsilon(0.2));
    m.advance(seconds_to_slots(80.0));
    CHECK(m.relative() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("collision meter") {
    CollisionMeter m(1.0);
    for (int i = 0; i < 100; ++i) m.record(i % 4 == 0);
    CHECK(m.estimate() == 0.0);
    m.advance(seconds_to_slots(1.0));
    CHECK(m.estimate() == doctest::Approx(0.25 * (1.0 - std::exp(-1.0))));
    for (int w = 2; w < 40; ++w) {
        for (int i = 0; i < 100; ++i) m.record(i % 4 == 0);
        m.advance(seconds_to_slots(w));
    }
    CHECK(m.estimate() == doctest::Approx(0.25));
}

TEST_CASE("O-DCF link") {
    OdcfParams p;
    p.queue.v = 500.0;
    const TimingParams t;
    OdcfMac mac(p, t, CapacityTrace(6.0));
    CHECK(mac.begin_backoff(0) == 1023);

    SUBCASE("success after backoff restarts from the queue-driven window") {
        mac.maq().set_length(300);  // q = 3 -> CW 63
        CHECK(mac.begin_backoff(1) == 63);
        mac.on_collision(2, 0);
        mac.on_collision(3, 0);
        CHECK(mac.current_cw() == 255);
        mac.on_success(4, 1);
        CHECK(mac.begin_backoff(5) == 63);
    }
    SUBCASE("a frozen countdown shrinks when the queue grew") {
        CHECK(mac.resume_window(1) == -1);
        mac.maq().set_length(500);
        const int w = mac.resume_window(2);
        CHECK(w == initial_cw(5.0, 1.0, 500.0));
        CHECK(mac.resume_window(3) == -1);
    }
    SUBCASE("burst sizing follows the queue") {
        mac.maq().set_length(1000);
        mac.begin_backoff(1);
        CHECK(mac.select_burst(2) == 64);
        mac.maq().set_length(1);
        mac.begin_backoff(3);
        const int n = mac.select_burst(4);
        CHECK(n >= 1);
        CHECK(n < 64);
    }
    SUBCASE("granted and sent bytes differ by the carried balance") {
        std::mt19937_64 rng(5);
        for (SlotTime now = 10; now < 2000000; now += 5000) {
            mac.maq().set_length(1 + static_cast<int>(rng() % 1000));
            mac.begin_backoff(now);
            mac.select_burst(now);
            if (rng() % 3 == 0) mac.on_collision(now, 0);
            else mac.on_success(now, 1);
        }
        const auto s = mac.state();
        CHECK(mac.granted_bytes() - mac.sent_bytes() == doctest::Approx(s.deficit_bytes - s.borrowed_bytes));
    }
}

TEST_CASE("parameter validation") {
    OdcfParams p;
    CHECK_NOTHROW(p.validate());
    p.c = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.queue.q_min = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

}  // TEST_SUITE

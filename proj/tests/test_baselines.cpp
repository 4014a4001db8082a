#include "csmasim/baselines.hpp"

#include <stdexcept>
#include <doctest.h>

#include <cmath>

using namespace csmasim;

TEST_SUITE("baselines") {

TEST_CASE("802.11 DCF") {
    const BaselineParams p;
    const TimingParams t;
    DcfMac mac(p, t);
    CHECK(mac.begin_backoff(0) == 15);
    for (int i = 0; i < 3; ++i) mac.on_collision(0, 0);
    CHECK(mac.begin_backoff(0) == 127);
    mac.on_success(0, 1);
    CHECK(mac.begin_backoff(0) == 15);
    CHECK(mac.select_burst(0) == 1);
    CHECK(mac.resume_window(0) == -1);
}

TEST_CASE("CW adaptation access probability") {
    CHECK(ocsma_cw_probability(6.0, 150.0, 0.99) == doctest::Approx(0.99));
    CHECK(ocsma_cw_window(5.0, 150.0, 0.99) == 1);
    CHECK(ocsma_cw_probability(0.01, 150.0, 0.99) == doctest::Approx(std::exp(0.01) / 150.0));
    CHECK(ocsma_cw_probability(0.01, 150.0, 0.99) == doctest::Approx(0.00673).epsilon(1e-3));
    CHECK(ocsma_cw_window(0.01, 150.0, 0.99) == 255);
    for (double q : {0.0, 1.0, 3.0, 4.5})
        CHECK(ocsma_cw_probability(q, 150.0, 0.99) * 150.0 == doctest::Approx(std::exp(q)));
}

TEST_CASE("CW adaptation keeps BEB on top of the queue-driven window") {
    BaselineParams p;
    QueueParams q;
    q.v = 500.0;
    OcsmaCwMac mac(p, q, TimingParams{});
    CHECK(mac.begin_backoff(0) == 255);
    mac.on_collision(1, 0);
    CHECK(mac.begin_backoff(2) == 511);
    mac.on_success(3, 1);
    CHECK(mac.begin_backoff(4) == 255);
    CHECK(mac.select_burst(5) == 1);
}

TEST_CASE("mu adaptation") {
    CHECK(ocsma_mu_slots(0.0, 15, 1e9) == doctest::Approx(8.0));
    CHECK(ocsma_mu_slots(20.0, 15, 64 * 148.148) == doctest::Approx(64 * 148.148));
    CHECK(ocsma_mu_slots(1.0, 63, 1e9) > ocsma_mu_slots(1.0, 15, 1e9));

    const BaselineParams p;
    QueueParams q;
    OcsmaMuMac mac(p, q, TimingParams{}, CapacityTrace(6.0));
    CHECK(mac.begin_backoff(0) == 15);
    CHECK(mac.select_burst(1) == 1);
    mac.on_collision(2, 0);
    mac.on_collision(3, 0);
    CHECK(mac.begin_backoff(4) == 63);
    mac.on_success(5, 1);
    CHECK(mac.begin_backoff(6) == 15);
}

TEST_CASE("DiffQ bands") {
    const BaselineParams p;
    CHECK_NOTHROW(p.validate(1000));
    // Higher queue never gets a larger window or a longer AIFS.
    for (std::size_t i = 1; i < p.diffq_levels.size(); ++i) {
        CHECK(p.diffq_levels[i].cw_min <= p.diffq_levels[i - 1].cw_min);
        CHECK(p.diffq_levels[i].aifsn <= p.diffq_levels[i - 1].aifsn);
        CHECK(p.diffq_levels[i].min_queue > p.diffq_levels[i - 1].min_queue);
    }
    CHECK(&diffq_level(p, 0) == &p.diffq_levels.front());
    CHECK(&diffq_level(p, 1000) == &p.diffq_levels.back());
    CHECK(&diffq_level(p, p.diffq_levels[2].min_queue) == &p.diffq_levels[2]);
    CHECK(&diffq_level(p, p.diffq_levels[2].min_queue - 1) == &p.diffq_levels[1]);
    for (int cw : {p.diffq_levels.front().cw_min, p.diffq_levels.back().cw_min}) CHECK_NOTHROW(cw_index(cw));
}

TEST_CASE("DiffQ link follows its band") {
    BaselineParams p;
    QueueParams q;
    DiffqMac mac(p, q, TimingParams{});
    const TimingParams t;
    CHECK(mac.begin_backoff(0) == p.diffq_levels.front().cw_min);
    CHECK(mac.aifs_slots(t) == t.sifs_slots + p.diffq_levels.front().aifsn);
    mac.maq().set_length(900);
    CHECK(mac.resume_window(1) == p.diffq_levels.back().cw_min);
    CHECK(mac.aifs_slots(t) == t.sifs_slots + p.diffq_levels.back().aifsn);
    CHECK(mac.select_burst(2) == 1);
}

TEST_CASE("DiffQ table validation") {
    BaselineParams p;
    p.diffq_levels[0].min_queue = 5;
    CHECK_THROWS_AS(p.validate(1000), std::invalid_argument);
    p = {};
    p.diffq_levels[3].cw_min = 1023;
    CHECK_THROWS_AS(p.validate(1000), std::invalid_argument);
    p = {};
    p.diffq_levels[1].cw_min = 16;
    CHECK_THROWS_AS(p.validate(1000), std::invalid_argument);
    p = {};
    p.diffq_levels[3].min_queue = 2000;
    CHECK_THROWS_AS(p.validate(1000), std::invalid_argument);
}

TEST_CASE("protocol registry") {
    for (auto p : kAllProtocols) CHECK(parse_protocol(to_string(p)) == p);
    CHECK_THROWS_AS(parse_protocol("tdma"), std::invalid_argument);
    MacParams mp;
    for (auto p : kAllProtocols) CHECK(make_mac(p, mp, TimingParams{}, CapacityTrace(6.0))->protocol() == to_string(p));
}

}  // TEST_SUITE

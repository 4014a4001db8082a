#include "csmasim/topology.hpp"

#include <stdexcept>
#include <doctest.h>

#include <cmath>

using namespace csmasim;

TEST_SUITE("topology") {

TEST_CASE("fully connected pair counts") {
    CHECK(make_fc(2).count_sense_pairs() == 1);
    const auto t4 = make_fc(4);
    CHECK(t4.count_sense_pairs() == 6);
    CHECK(t4.count_interfere_pairs() == 6);
    CHECK(make_fc(12).count_sense_pairs() == 66);
    CHECK_THROWS_AS(make_fc(1), std::invalid_argument);
}

TEST_CASE("FIM is a star around the center") {
    const auto t = make_fim(2);
    const auto c = *t.find("c");
    const auto o1 = *t.find("o1"), o2 = *t.find("o2");
    CHECK(t.sense(c, o1));
    CHECK(t.sense(o2, c));
    CHECK_FALSE(t.sense(o1, o2));
    CHECK_FALSE(t.interfere(o1, o2));
    const auto t4 = make_fim(4);
    CHECK(t4.degree(*t4.find("c")) == 4);
    for (LinkId l = 0; l < t4.size(); ++l)
        if (t4.label(l) != "c") CHECK(t4.degree(l) == 1);
}

TEST_CASE("hidden terminal, information asymmetry and capture") {
    const auto ht = make_ht();
    CHECK(ht.count_sense_pairs() == 0);
    CHECK(ht.interfere(0, 1));
    CHECK(ht.interfere(1, 0));
    CHECK(ht.missing_sense_edge());

    const auto ia = make_ia();
    const auto adv = *ia.find("adv"), dis = *ia.find("dis");
    CHECK(ia.interfere(adv, dis));
    CHECK_FALSE(ia.interfere(dis, adv));
    CHECK(ia.count_sense_pairs() == 0);

    const auto hc = make_ht_capture();
    CHECK(hc.captures(*hc.find("strong"), *hc.find("weak")));
    CHECK_FALSE(hc.captures(*hc.find("weak"), *hc.find("strong")));
    CHECK_FALSE(make_fc(3).missing_sense_edge());
}

TEST_CASE("mixed topologies") {
    const auto a = make_mixed_fim_fc();
    REQUIRE(a.size() == 9);
    for (LinkId l = 0; l < 9; ++l)
        if (l != 5) CHECK(a.sense(5, l));
    CHECK(a.degree(5) == 8);
    CHECK_FALSE(a.sense(6, 7));
    CHECK_FALSE(a.sense(0, 6));

    const auto b = make_fc_in_fim();
    REQUIRE(b.size() == 10);
    for (LinkId x = 0; x < 6; ++x)
        for (LinkId y = 0; y < 10; ++y)
            if (x != y) CHECK(b.sense(x, y));
    CHECK_FALSE(b.sense(6, 7));
    CHECK(b.degree(6) == 6);
}

TEST_CASE("grid geometry: only orthogonal neighbours are in range") {
    GridParams p;
    p.flows = 8;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        p.seed = seed;
        const auto t = make_grid(p);
        REQUIRE(t.size() == 8);
        REQUIRE(t.nodes().size() == 16);
        for (const auto& e : t.endpoints()) {
            const auto& a = t.nodes()[e.tx];
            const auto& b = t.nodes()[e.rx];
            CHECK(std::hypot(a.x - b.x, a.y - b.y) == doctest::Approx(250.0));
        }
        // Sense iff transmitters are at most one grid step apart.
        for (LinkId x = 0; x < t.size(); ++x) {
            for (LinkId y = 0; y < t.size(); ++y) {
                if (x == y) continue;
                const auto& a = t.nodes()[t.endpoints()[x].tx];
                const auto& b = t.nodes()[t.endpoints()[y].tx];
                CHECK(t.sense(x, y) == (std::hypot(a.x - b.x, a.y - b.y) <= 280.0));
            }
        }
    }
    // Diagonal neighbours are out of range.
    CHECK(std::hypot(250.0, 250.0) > 280.0);
}

TEST_CASE("random placement is seeded and bounded") {
    RandomParams p;
    p.seed = 7;
    const auto a = make_random(p);
    const auto b = make_random(p);
    CHECK(a == b);
    REQUIRE(a.nodes().size() == 30);
    for (const auto& n : a.nodes()) {
        CHECK(n.x >= 0.0);
        CHECK(n.x <= 1000.0);
        CHECK(n.y >= 0.0);
        CHECK(n.y <= 1000.0);
    }
    for (const auto& e : a.endpoints()) {
        const auto& s = a.nodes()[e.tx];
        const auto& r = a.nodes()[e.rx];
        CHECK(std::hypot(s.x - r.x, s.y - r.y) <= 280.0);
    }
    p.seed = 8;
    CHECK_FALSE(make_random(p) == a);
}

TEST_CASE("relations are validated") {
    Topology t(2);
    CHECK_NOTHROW(t.validate());
    CHECK_THROWS(t.set_capacity(0, 0.0));
    t.set_capture(0, 1);
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // capture needs interference
    t.set_interfere(1, 0);
    CHECK_NOTHROW(t.validate());
}

}  // TEST_SUITE

#include "csmasim/topology.hpp"

#include "csmasim/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace csmasim {

namespace {

constexpr LinkMask bit(LinkId l) { return LinkMask{1} << l; }

void check_index(const Topology& t, LinkId l) {
    if (l >= t.size()) throw std::out_of_range("link id " + std::to_string(l) + " out of range");
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

Topology::Topology(std::size_t n, double capacity_mbps)
    : sense_(n, 0), interfere_(n, 0), capture_(n, 0), capacity_(n, capacity_mbps), labels_(n) {
    if (n > kMaxLinks) throw std::invalid_argument("at most 64 links are supported");
    if (!(capacity_mbps > 0.0)) throw std::invalid_argument("capacity must be > 0");
    for (std::size_t i = 0; i < n; ++i) labels_[i] = std::to_string(i + 1);
}

void Topology::set_sense(LinkId a, LinkId b, bool on) {
    check_index(*this, a);
    check_index(*this, b);
    if (a == b) return;
    sense_[a] = on ? (sense_[a] | bit(b)) : (sense_[a] & ~bit(b));
}

void Topology::set_interfere(LinkId k, LinkId l, bool on) {
    check_index(*this, k);
    check_index(*this, l);
    if (k == l) return;
    interfere_[k] = on ? (interfere_[k] | bit(l)) : (interfere_[k] & ~bit(l));
}

void Topology::set_capture(LinkId a, LinkId b, bool on) {
    check_index(*this, a);
    check_index(*this, b);
    capture_[a] = on ? (capture_[a] | bit(b)) : (capture_[a] & ~bit(b));
}

void Topology::add_conflict(LinkId a, LinkId b) {
    set_sense(a, b);
    set_sense(b, a);
    set_interfere(a, b);
    set_interfere(b, a);
}

void Topology::set_capacity(LinkId l, double mbps) {
    check_index(*this, l);
    if (!(mbps > 0.0)) throw std::invalid_argument("capacity must be > 0");
    capacity_[l] = mbps;
}

std::optional<LinkId> Topology::find(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<LinkId>(it - labels_.begin());
}

void Topology::set_geometry(std::vector<Point> nodes, std::vector<LinkEndpoints> endpoints) {
    if (endpoints.size() != size()) throw std::invalid_argument("one endpoint pair per link required");
    for (const auto& e : endpoints) {
        if (e.tx >= nodes.size() || e.rx >= nodes.size() || e.tx == e.rx)
            throw std::invalid_argument("link endpoints must be two distinct existing nodes");
    }
    nodes_ = std::move(nodes);
    endpoints_ = std::move(endpoints);
}

std::vector<LinkMask> Topology::conflict_rows() const {
    std::vector<LinkMask> rows(size(), 0);
    for (LinkId a = 0; a < size(); ++a) rows[a] = sense_[a] | interfere_[a];
    for (LinkId a = 0; a < size(); ++a) {
        for (LinkId b = 0; b < size(); ++b) {
            if ((rows[a] >> b) & 1u) rows[b] |= bit(a);
        }
    }
    return rows;
}

bool Topology::missing_sense_edge() const {
    // Any conflicting pair where one transmitter cannot hear the other.
    for (LinkId a = 0; a < size(); ++a) {
        for (LinkId b = 0; b < size(); ++b) {
            if (a == b) continue;
            const bool conflict = interfere(a, b) || interfere(b, a);
            if (conflict && !(sense(a, b) && sense(b, a))) return true;
        }
    }
    return false;
}

std::size_t Topology::count_sense_pairs() const {
    std::size_t n = 0;
    for (LinkId a = 0; a < size(); ++a)
        for (LinkId b = a + 1; b < size(); ++b) n += (sense(a, b) || sense(b, a)) ? 1 : 0;
    return n;
}

std::size_t Topology::count_interfere_pairs() const {
    std::size_t n = 0;
    for (LinkId a = 0; a < size(); ++a)
        for (LinkId b = a + 1; b < size(); ++b) n += (interfere(a, b) || interfere(b, a)) ? 1 : 0;
    return n;
}

std::size_t Topology::degree(LinkId l) const {
    return static_cast<std::size_t>(std::popcount(conflict_rows().at(l)));
}

void Topology::validate() const {
    const auto n = size();
    if (n == 0) throw std::invalid_argument("topology has no links");
    for (LinkId a = 0; a < n; ++a) {
        if (!(capacity_[a] > 0.0)) throw std::invalid_argument("capacity of link " + labels_[a] + " must be > 0");
        if (captures(a, a)) throw std::invalid_argument("capture must be irreflexive");
        for (LinkId b = 0; b < n; ++b) {
            if (captures(a, b) && !(interfere(a, b) || interfere(b, a)))
                throw std::invalid_argument("capture " + labels_[a] + ">" + labels_[b] +
                                            " defined on a non-interfering pair");
            if (captures(a, b) && captures(b, a))
                throw std::invalid_argument("capture must be antisymmetric");
        }
    }
    // Links that share a node conflict at the receiver whenever they sense
    // each other, so they must also interfere.
    if (!endpoints_.empty()) {
        for (LinkId a = 0; a < n; ++a) {
            for (LinkId b = 0; b < n; ++b) {
                if (a == b || !sense(a, b)) continue;
                const auto& ea = endpoints_[a];
                const auto& eb = endpoints_[b];
                const bool shares_receiver_side = ea.tx == eb.rx || ea.tx == eb.tx || ea.rx == eb.rx;
                if (shares_receiver_side && !interfere(a, b))
                    throw std::invalid_argument("sensed link sharing a node must interfere");
            }
        }
    }
}

Topology make_fc(std::size_t n) {
    if (n < 2) throw std::invalid_argument("FC needs at least 2 links");
    Topology t(n);
    for (LinkId a = 0; a < n; ++a)
        for (LinkId b = a + 1; b < n; ++b) t.add_conflict(a, b);
    return t;
}

// Link order: o1, c, o2, o3, ... so FIM(2) prints as outer/center/outer.
Topology make_fim(std::size_t outer) {
    if (outer < 2) throw std::invalid_argument("FIM needs at least 2 outer links");
    Topology t(outer + 1);
    constexpr LinkId center = 1;
    t.set_label(center, "c");
    std::size_t k = 1;
    for (LinkId l = 0; l < t.size(); ++l) {
        if (l == center) continue;
        t.set_label(l, "o" + std::to_string(k++));
        t.add_conflict(center, l);
    }
    return t;
}

Topology make_ht() {
    Topology t(2);
    t.set_label(0, "ht1");
    t.set_label(1, "ht2");
    t.set_interfere(0, 1);
    t.set_interfere(1, 0);
    return t;
}

// The advantaged transmitter sits next to the disadvantaged receiver.
Topology make_ia() {
    Topology t(2);
    t.set_label(0, "adv");
    t.set_label(1, "dis");
    t.set_interfere(0, 1);
    return t;
}

Topology make_ht_capture() {
    Topology t = make_ht();
    t.set_label(0, "strong");
    t.set_label(1, "weak");
    t.set_capture(0, 1);
    return t;
}

// Flows 1-5 and 6 form an FC group; flows 7, 8, 9 are FIM arms around flow 6.
Topology make_mixed_fim_fc() {
    Topology t(9);
    for (LinkId a = 0; a < 6; ++a)
        for (LinkId b = a + 1; b < 6; ++b) t.add_conflict(a, b);
    for (LinkId arm = 6; arm < 9; ++arm) t.add_conflict(5, arm);
    return t;
}

// Flows 1-6 are mutually conflicting and act jointly as the middle of a FIM
// whose outer flows 7-10 each conflict with every member of the group.
Topology make_fc_in_fim() {
    Topology t(10);
    for (LinkId a = 0; a < 6; ++a)
        for (LinkId b = a + 1; b < 6; ++b) t.add_conflict(a, b);
    for (LinkId arm = 6; arm < 10; ++arm)
        for (LinkId m = 0; m < 6; ++m) t.add_conflict(m, arm);
    return t;
}

Topology compile_placement(std::vector<Point> nodes, const std::vector<LinkEndpoints>& flows,
                           double range_m) {
    Topology t(flows.size());
    for (LinkId a = 0; a < flows.size(); ++a) {
        t.set_label(a, std::to_string(flows[a].tx) + "->" + std::to_string(flows[a].rx));
        for (LinkId b = 0; b < flows.size(); ++b) {
            if (a == b) continue;
            if (distance(nodes.at(flows[a].tx), nodes.at(flows[b].tx)) <= range_m) t.set_sense(a, b);
            if (distance(nodes.at(flows[a].tx), nodes.at(flows[b].rx)) <= range_m) t.set_interfere(a, b);
        }
    }
    t.set_geometry(std::move(nodes), flows);
    return t;
}

namespace {

std::vector<LinkEndpoints> draw_flows(const std::vector<Point>& nodes, std::size_t flows,
                                      double range_m, std::mt19937_64& rng) {
    std::vector<std::vector<std::size_t>> neighbors(nodes.size());
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = 0; b < nodes.size(); ++b)
            if (a != b && distance(nodes[a], nodes[b]) <= range_m) neighbors[a].push_back(b), ++pairs;
    pairs /= 2;
    if (pairs < flows)
        throw GenerationError("only " + std::to_string(pairs) + " node pairs are within " +
                              std::to_string(range_m) + " m; cannot place " + std::to_string(flows) +
                              " single-hop flows");

    std::vector<LinkEndpoints> out;
    std::set<std::pair<std::size_t, std::size_t>> used;
    std::uniform_int_distribution<std::size_t> pick_node(0, nodes.size() - 1);
    std::size_t attempts = 0;
    while (out.size() < flows) {
        if (++attempts > 100000) throw GenerationError("could not draw distinct single-hop flows");
        const auto tx = pick_node(rng);
        if (neighbors[tx].empty()) continue;
        std::uniform_int_distribution<std::size_t> pick_nb(0, neighbors[tx].size() - 1);
        const auto rx = neighbors[tx][pick_nb(rng)];
        const auto key = std::minmax(tx, rx);
        if (!used.insert(key).second) continue;
        out.push_back({tx, rx});
    }
    return out;
}

}  // namespace

Topology make_grid(const GridParams& p) {
    if (p.side < 2) throw std::invalid_argument("grid side must be >= 2");
    if (!(p.spacing_m > 0.0) || !(p.range_m > 0.0)) throw std::invalid_argument("grid spacing and range must be > 0");
    if (p.flows == 0 || p.flows > kMaxLinks) throw std::invalid_argument("grid flows must be in [1, 64]");
    std::vector<Point> nodes;
    for (std::size_t r = 0; r < p.side; ++r)
        for (std::size_t c = 0; c < p.side; ++c)
            nodes.push_back({static_cast<double>(c) * p.spacing_m, static_cast<double>(r) * p.spacing_m});
    std::mt19937_64 rng(p.seed);
    auto flows = draw_flows(nodes, p.flows, p.range_m, rng);
    return compile_placement(std::move(nodes), flows, p.range_m);
}

Topology make_random(const RandomParams& p) {
    if (p.nodes < 2) throw std::invalid_argument("random topology needs at least 2 nodes");
    if (!(p.area_m > 0.0) || !(p.range_m > 0.0)) throw std::invalid_argument("area and range must be > 0");
    if (p.flows == 0 || p.flows > kMaxLinks) throw std::invalid_argument("random flows must be in [1, 64]");
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> coord(0.0, p.area_m);
    std::vector<Point> nodes(p.nodes);
    for (auto& n : nodes) {
        n.x = coord(rng);
        n.y = coord(rng);
    }
    auto flows = draw_flows(nodes, p.flows, p.range_m, rng);
    return compile_placement(std::move(nodes), flows, p.range_m);
}

}  // namespace csmasim

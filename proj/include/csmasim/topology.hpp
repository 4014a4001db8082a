#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace csmasim {

using LinkId = std::size_t;
using LinkMask = std::uint64_t;

inline constexpr std::size_t kMaxLinks = 64;
inline constexpr double kDefaultCapacityMbps = 6.0;

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

// Endpoints of a link when the topology was compiled from node placement.
struct LinkEndpoints {
    std::size_t tx = 0;
    std::size_t rx = 0;
    bool operator==(const LinkEndpoints&) const = default;
};

/**
 * Dual conflict structure over a set of links.
 *
 * sense(a, b):     transmitter of a carrier-senses an ongoing transmission of b.
 * interfere(k, l): a transmission on k corrupts a concurrent reception on l.
 * captures(a, b):  when a and b collide at a receiver, a's frame survives.
 *
 * Relations are stored as one bit row per link, so at most kMaxLinks links.
 */
class Topology {
public:
    Topology() = default;
    explicit Topology(std::size_t n, double capacity_mbps = kDefaultCapacityMbps);

    std::size_t size() const { return capacity_.size(); }

    bool sense(LinkId a, LinkId b) const { return (sense_[a] >> b) & 1u; }
    bool interfere(LinkId k, LinkId l) const { return (interfere_[k] >> l) & 1u; }
    bool captures(LinkId a, LinkId b) const { return (capture_[a] >> b) & 1u; }

    // Bit b of sensed_by(a) is set when a senses b.
    LinkMask sense_row(LinkId a) const { return sense_[a]; }
    // Bit l is set when k corrupts l's reception.
    LinkMask interfere_row(LinkId k) const { return interfere_[k]; }
    LinkMask capture_row(LinkId a) const { return capture_[a]; }

    void set_sense(LinkId a, LinkId b, bool on = true);
    void set_interfere(LinkId k, LinkId l, bool on = true);
    void set_capture(LinkId a, LinkId b, bool on = true);
    // Mutual sense + mutual interfere.
    void add_conflict(LinkId a, LinkId b);

    double capacity(LinkId l) const { return capacity_[l]; }
    const std::vector<double>& capacities() const { return capacity_; }
    void set_capacity(LinkId l, double mbps);

    const std::string& label(LinkId l) const { return labels_[l]; }
    const std::vector<std::string>& labels() const { return labels_; }
    void set_label(LinkId l, std::string name) { labels_[l] = std::move(name); }
    std::optional<LinkId> find(const std::string& label) const;

    // Present only for placement-based generators.
    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<LinkEndpoints>& endpoints() const { return endpoints_; }
    void set_geometry(std::vector<Point> nodes, std::vector<LinkEndpoints> endpoints);

    // Symmetric closure of sense ∪ interfere, as bit rows.
    std::vector<LinkMask> conflict_rows() const;
    bool missing_sense_edge() const;

    std::size_t count_sense_pairs() const;      // unordered pairs with sense either way
    std::size_t count_interfere_pairs() const;  // unordered pairs with interfere either way
    std::size_t degree(LinkId l) const;         // in the symmetric conflict graph

    // Throws std::invalid_argument when an invariant is broken.
    void validate() const;

    bool operator==(const Topology&) const = default;

private:
    std::vector<LinkMask> sense_;
    std::vector<LinkMask> interfere_;
    std::vector<LinkMask> capture_;
    std::vector<double> capacity_;
    std::vector<std::string> labels_;
    std::vector<Point> nodes_;
    std::vector<LinkEndpoints> endpoints_;
};

// Named generators. All are deterministic in their arguments.
Topology make_fc(std::size_t n);
Topology make_fim(std::size_t outer);
Topology make_ht();
Topology make_ia();
Topology make_ht_capture();
Topology make_mixed_fim_fc();
Topology make_fc_in_fim();

inline constexpr double kGridSpacingM = 250.0;
inline constexpr double kRadioRangeM = 280.0;

struct GridParams {
    std::size_t side = 4;
    double spacing_m = kGridSpacingM;
    double range_m = kRadioRangeM;
    std::size_t flows = 6;
    std::uint64_t seed = 1;
};

struct RandomParams {
    std::size_t nodes = 30;
    double area_m = 1000.0;
    double range_m = kRadioRangeM;
    std::size_t flows = 12;
    std::uint64_t seed = 1;
};

Topology make_grid(const GridParams& p);
Topology make_random(const RandomParams& p);

// Compiles a placement and a list of (tx, rx) flows into sense/interfere
// relations with the disk model: sense iff the transmitters are within range,
// interfere iff the other transmitter is within range of this receiver.
Topology compile_placement(std::vector<Point> nodes,
                           const std::vector<LinkEndpoints>& flows, double range_m);

}  // namespace csmasim

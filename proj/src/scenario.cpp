#include "csmasim/scenario.hpp"

#include "csmasim/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace csmasim {

namespace {

using json = nlohmann::json;

// Reads one JSON object, remembers which keys were consumed and rejects the rest.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where(), "expected an object");
    }

    std::string at(std::string_view key) const { return path_ + "/" + std::string(key); }
    std::string where() const { return path_.empty() ? "/" : path_; }

    const json* find(std::string_view key) {
        const auto it = j_.find(std::string(key));
        if (it == j_.end()) return nullptr;
        used_.insert(std::string(key));
        return &*it;
    }

    std::optional<double> number(std::string_view key, double lo, double hi) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) throw ConfigError(at(key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x) || x < lo || x > hi)
            throw ConfigError(at(key), fmt::format("{} is outside [{}, {}]", x, lo, hi));
        return x;
    }

    std::optional<long long> integer(std::string_view key, long long lo, long long hi) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
        const long long x = v->get<long long>();
        if (x < lo || x > hi) throw ConfigError(at(key), fmt::format("{} is outside [{}, {}]", x, lo, hi));
        return x;
    }

    std::optional<std::string> string(std::string_view key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) throw ConfigError(at(key), "expected a string");
        return v->get<std::string>();
    }

    template <typename T>
    void set(std::string_view key, T& out, double lo, double hi) {
        if constexpr (std::is_integral_v<T>) {
            if (auto v = integer(key, static_cast<long long>(lo), static_cast<long long>(hi))) out = static_cast<T>(*v);
        } else {
            if (auto v = number(key, lo, hi)) out = static_cast<T>(*v);
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

constexpr double kBig = 1e12;

std::vector<std::pair<LinkId, LinkId>> read_pairs(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of [a, b] pairs");
    std::vector<std::pair<LinkId, LinkId>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = v[i];
        const auto here = fmt::format("{}/{}", path, i);
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() || !p[1].is_number_unsigned())
            throw ConfigError(here, "expected a pair of non-negative link ids");
        out.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
    }
    return out;
}

ExplicitTopology read_explicit(Fields& f, const std::string& path) {
    ExplicitTopology e;
    const json* links = f.find("links");
    if (!links) throw ConfigError(f.at("links"), "explicit topologies need a links array");
    if (!links->is_array() || links->empty()) throw ConfigError(f.at("links"), "expected a non-empty array");
    if (links->size() > kMaxLinks) throw ConfigError(f.at("links"), fmt::format("at most {} links", kMaxLinks));
    std::vector<bool> seen(links->size(), false);
    bool any_label = false;
    std::vector<std::string> labels(links->size());
    for (std::size_t i = 0; i < links->size(); ++i) {
        Fields lf((*links)[i], fmt::format("{}/links/{}", path, i));
        const auto id = lf.integer("id", 0, static_cast<long long>(links->size()) - 1);
        if (!id) throw ConfigError(lf.at("id"), "missing");
        const auto idx = static_cast<std::size_t>(*id);
        if (seen[idx]) throw ConfigError(lf.at("id"), fmt::format("duplicate link id {}", idx));
        seen[idx] = true;
        const double cap = lf.number("capacity_mbps", 1e-6, 1e6).value_or(kDefaultCapacityMbps);
        if (auto l = lf.string("label")) {
            labels[idx] = *l;
            any_label = true;
        }
        lf.finish();
        e.links.emplace_back(idx, cap);
    }
    std::sort(e.links.begin(), e.links.end());
    if (any_label) e.labels = labels;
    const auto rel = [&](std::string_view key, std::vector<std::pair<LinkId, LinkId>>& out) {
        if (const json* v = f.find(key)) {
            out = read_pairs(*v, f.at(key));
            for (std::size_t i = 0; i < out.size(); ++i) {
                const auto [a, b] = out[i];
                const auto here = fmt::format("{}/{}", f.at(key), i);
                if (a >= e.links.size() || b >= e.links.size()) throw ConfigError(here, "link id out of range");
                if (a == b) throw ConfigError(here, "a link cannot relate to itself");
            }
        }
    };
    rel("sense", e.sense);
    rel("interfere", e.interfere);
    rel("capture", e.capture);
    rel("conflict", e.conflict);
    return e;
}

GeneratorParams read_params(const std::string& generator, const json* j, const std::string& path) {
    GeneratorParams p;
    static const json empty = json::object();
    Fields f(j ? *j : empty, path);
    if (generator == "fc") {
        p.n = static_cast<std::size_t>(f.integer("n", 2, kMaxLinks).value_or(2));
    } else if (generator == "fim") {
        p.outer = static_cast<std::size_t>(f.integer("outer", 2, kMaxLinks - 1).value_or(2));
    } else if (generator == "grid") {
        f.set("side", p.grid.side, 2, 32);
        f.set("spacing_m", p.grid.spacing_m, 1e-3, 1e7);
        f.set("range_m", p.grid.range_m, 1e-3, 1e7);
        f.set("flows", p.grid.flows, 1, kMaxLinks);
    } else if (generator == "random") {
        f.set("nodes", p.random.nodes, 2, 4096);
        f.set("area_m", p.random.area_m, 1e-3, 1e7);
        f.set("range_m", p.random.range_m, 1e-3, 1e7);
        f.set("flows", p.random.flows, 1, kMaxLinks);
    } else if (generator == "explicit") {
        p.explicit_topology = read_explicit(f, path);
    }
    if (const json* caps = f.find("capacities")) {
        if (!caps->is_array()) throw ConfigError(f.at("capacities"), "expected an array of Mb/s values");
        for (std::size_t i = 0; i < caps->size(); ++i) {
            const auto& c = (*caps)[i];
            if (!c.is_number() || !(c.get<double>() > 0.0) || !std::isfinite(c.get<double>()))
                throw ConfigError(fmt::format("{}/{}", f.at("capacities"), i), "capacity must be a number > 0");
            p.capacities.push_back(c.get<double>());
        }
    }
    f.finish();
    return p;
}

std::vector<Protocol> read_protocols(const json& v, const std::string& path) {
    auto one = [](const json& s, const std::string& where) {
        if (!s.is_string()) throw ConfigError(where, "expected a protocol name");
        try {
            return parse_protocol(s.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where, e.what());
        }
    };
    if (v.is_string() && v.get<std::string>() == "all") return {kAllProtocols.begin(), kAllProtocols.end()};
    if (v.is_string()) return {one(v, path)};
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a protocol name, \"all\" or a non-empty array");
    std::vector<Protocol> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = one(v[i], fmt::format("{}/{}", path, i));
        if (std::find(out.begin(), out.end(), p) != out.end())
            throw ConfigError(fmt::format("{}/{}", path, i), "protocol listed twice");
        out.push_back(p);
    }
    return out;
}

void read_overrides(Scenario& s, const json& j, const std::string& path) {
    Fields f(j, path);
    if (const json* o = f.find("odcf")) {
        Fields g(*o, f.at("odcf"));
        auto& p = s.mac.odcf;
        g.set("b", p.queue.b, 1e-9, 1e3);
        g.set("v", p.queue.v, 1e-9, 1e9);
        g.set("q_min", p.queue.q_min, 1, 1000000000);
        g.set("q_max", p.queue.q_max, 1, 1000000000);
        g.set("c", p.c, 1e-9, 1e12);
        g.set("max_burst_packets", p.max_burst_packets, 1, 100000);
        g.set("pc_window_s", p.pc_window_s, 1e-6, 1e6);
        g.set("reference_capacity_mbps", p.reference_capacity_mbps, 1e-6, 1e6);
        g.set("p_tilde_floor", p.p_tilde_floor, 1e-12, 1.0);
        g.finish();
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(f.at("odcf"), e.what());
        }
    }
    if (const json* o = f.find("baseline")) {
        Fields g(*o, f.at("baseline"));
        auto& p = s.mac.baseline;
        g.set("dcf_cwmin", p.dcf_cwmin, 1, 1023);
        g.set("dcf_cwmax", p.dcf_cwmax, 1, 1023);
        g.set("ocsma_fixed_mu_slots", p.ocsma_fixed_mu_slots, 1e-9, 1e9);
        g.set("p_bar", p.p_bar, 0.0, 1.0);
        if (const json* lv = g.find("diffq_levels")) {
            const auto where = g.at("diffq_levels");
            if (!lv->is_array() || lv->size() != p.diffq_levels.size())
                throw ConfigError(where, fmt::format("expected exactly {} bands", p.diffq_levels.size()));
            for (std::size_t i = 0; i < lv->size(); ++i) {
                Fields b((*lv)[i], fmt::format("{}/{}", where, i));
                auto& band = p.diffq_levels[i];
                b.set("min_queue", band.min_queue, 0, 1000000000);
                b.set("cw_min", band.cw_min, 1, 1023);
                b.set("cw_max", band.cw_max, 1, 1023);
                b.set("aifsn", band.aifsn, 1, 1000);
                b.finish();
            }
        }
        g.finish();
        try {
            p.validate(s.mac.odcf.queue.q_max);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(f.at("baseline"), e.what());
        }
    }
    if (const json* o = f.find("timing")) {
        Fields g(*o, f.at("timing"));
        auto& t = s.timing;
        g.set("difs_slots", t.difs_slots, 1, 100000);
        g.set("sifs_slots", t.sifs_slots, 1, 100000);
        g.set("ack_slots", t.ack_slots, 1, 100000);
        g.set("rts_slots", t.rts_slots, 1, 100000);
        g.set("cts_slots", t.cts_slots, 1, 100000);
        g.set("phy_preamble_us", t.phy_preamble_us, 0.0, 1e6);
        g.set("mac_overhead_bytes", t.mac_overhead_bytes, 0, 100000);
        g.set("phy_service_tail_bits", t.phy_service_tail_bits, 0, 100000);
        g.set("retry_limit", t.retry_limit, 0, 1000);
        g.set("max_burst_packets", t.max_burst_packets, 1, 100000);
        g.set("packet_bytes", t.packet_bytes, 1, 100000);
        g.finish();
        try {
            t.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(f.at("timing"), e.what());
        }
    }
    if (const json* o = f.find("rts_cts")) {
        if (o->is_boolean()) {
            s.rts_cts = o->get<bool>();
        } else if (!(o->is_string() && o->get<std::string>() == "auto")) {
            throw ConfigError(f.at("rts_cts"), "expected true, false or \"auto\"");
        }
    }
    f.finish();
}

void read_trace(Scenario& s, const json& j, const std::string& path) {
    Fields f(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        const auto where = f.at(key);
        std::size_t id = 0;
        const bool digits = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (!digits || key.size() > 4) throw ConfigError(where, "trace keys are decimal link ids");
        id = static_cast<std::size_t>(std::stoul(key));
        f.find(key);
        const json& steps = it.value();
        if (!steps.is_array() || steps.empty()) throw ConfigError(where, "expected a non-empty array of [time_s, mbps]");
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const auto& st = steps[i];
            const auto here = fmt::format("{}/{}", where, i);
            if (!st.is_array() || st.size() != 2 || !st[0].is_number() || !st[1].is_number())
                throw ConfigError(here, "expected [time_s, mbps]");
            const double t = st[0].get<double>();
            const double c = st[1].get<double>();
            if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError(here, "time must be >= 0");
            if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError(here, "capacity must be > 0");
            if (!out.empty() && !(t > out.back().first)) throw ConfigError(here, "times must be strictly increasing");
            out.emplace_back(t, c);
        }
        s.capacity_trace[id] = std::move(out);
    }
    f.finish();
}

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

const std::vector<std::string_view>& generator_names() {
    static const std::vector<std::string_view> names = {"fc",       "fim",     "ht",   "ia",     "ht_capture",
                                                        "mixed_a",  "mixed_b", "grid", "random", "explicit"};
    return names;
}

Scenario parse_scenario(std::string_view text, std::string name) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        throw ConfigError(fmt::format("line {}:{}", line, col), "malformed JSON");
    }
    Scenario s;
    s.name = std::move(name);
    Fields f(root, "");
    const auto gen = f.string("generator");
    if (!gen) throw ConfigError("/generator", "missing");
    const auto& names = generator_names();
    if (std::find(names.begin(), names.end(), *gen) == names.end()) {
        std::string list;
        for (auto n : names) list += (list.empty() ? "" : ", ") + std::string(n);
        throw ConfigError("/generator", fmt::format("unknown generator '{}'; expected one of {}", *gen, list));
    }
    s.generator = *gen;
    s.params = read_params(s.generator, f.find("params"), "/params");
    if (const json* p = f.find("protocol")) s.protocols = read_protocols(*p, "/protocol");
    s.duration_s = f.number("duration_s", 1e-3, 1e6).value_or(s.duration_s);
    if (const json* seed = f.find("seed")) {
        if (!seed->is_number_unsigned()) throw ConfigError("/seed", "expected a non-negative integer");
        s.seed = seed->get<std::uint64_t>();
    }
    if (const json* o = f.find("overrides")) read_overrides(s, *o, "/overrides");
    if (const json* t = f.find("capacity_trace")) read_trace(s, *t, "/capacity_trace");
    f.finish();

    // Topology-dependent checks, once with the base seed.
    Topology topo;
    try {
        topo = build_topology(s, s.seed);
    } catch (const GenerationError& e) {
        if (!s.randomized()) throw ConfigError("/params", e.what());
        // Randomized draws are checked per replication.
        return s;
    }
    for (const auto& [id, steps] : s.capacity_trace)
        if (id >= topo.size())
            throw ConfigError(fmt::format("/capacity_trace/{}", id),
                              fmt::format("link id out of range (topology has {} links)", topo.size()));
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open scenario file");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str(), path.stem().string());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ":" + e.where(), e.detail());
    }
}

Topology build_topology(const Scenario& s, std::uint64_t draw_seed) {
    Topology t;
    const auto& p = s.params;
    if (s.generator == "fc") {
        t = make_fc(p.n);
    } else if (s.generator == "fim") {
        t = make_fim(p.outer);
    } else if (s.generator == "ht") {
        t = make_ht();
    } else if (s.generator == "ia") {
        t = make_ia();
    } else if (s.generator == "ht_capture") {
        t = make_ht_capture();
    } else if (s.generator == "mixed_a") {
        t = make_mixed_fim_fc();
    } else if (s.generator == "mixed_b") {
        t = make_fc_in_fim();
    } else if (s.generator == "grid") {
        auto g = p.grid;
        g.seed = draw_seed;
        t = make_grid(g);
    } else if (s.generator == "random") {
        auto r = p.random;
        r.seed = draw_seed;
        t = make_random(r);
    } else if (s.generator == "explicit") {
        const auto& e = p.explicit_topology;
        t = Topology(e.links.size());
        for (const auto& [id, cap] : e.links) t.set_capacity(id, cap);
        for (std::size_t i = 0; i < e.labels.size(); ++i)
            if (!e.labels[i].empty()) t.set_label(i, e.labels[i]);
        for (auto [a, b] : e.sense) t.set_sense(a, b);
        for (auto [a, b] : e.interfere) t.set_interfere(a, b);
        for (auto [a, b] : e.conflict) t.add_conflict(a, b);
        for (auto [a, b] : e.capture) t.set_capture(a, b);
    } else {
        throw ConfigError("/generator", "unknown generator '" + s.generator + "'");
    }
    if (!p.capacities.empty()) {
        if (p.capacities.size() != t.size())
            throw ConfigError("/params/capacities",
                              fmt::format("{} values for {} links", p.capacities.size(), t.size()));
        for (LinkId l = 0; l < t.size(); ++l) t.set_capacity(l, p.capacities[l]);
    }
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/params", e.what());
    }
    return t;
}

EngineConfig engine_config(const Scenario& s, const Topology& topology, std::uint64_t seed, bool record_events) {
    EngineConfig c;
    c.timing = s.timing;
    c.rts_cts = s.rts_cts.value_or(topology.missing_sense_edge());
    c.duration = seconds_to_slots(s.duration_s);
    c.seed = seed;
    c.record_events = record_events;
    if (!s.capacity_trace.empty()) {
        for (LinkId l = 0; l < topology.size(); ++l) {
            const auto it = s.capacity_trace.find(l);
            if (it == s.capacity_trace.end()) {
                c.capacity.emplace_back(topology.capacity(l));
                continue;
            }
            std::vector<std::pair<SlotTime, double>> steps;
            if (it->second.front().first > 0.0) steps.emplace_back(0, topology.capacity(l));
            for (const auto& [ts, mbps] : it->second) {
                const SlotTime at = seconds_to_slots(ts);
                if (!steps.empty() && steps.back().first == at) steps.back().second = mbps;
                else steps.emplace_back(at, mbps);
            }
            c.capacity.emplace_back(std::move(steps));
        }
    }
    return c;
}

}  // namespace csmasim

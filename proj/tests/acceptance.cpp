// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// of every check underneath.
//
//   csmasim_acceptance [--parallel] [--only 1,4] [--expect-fail 6]
//
// Exit status is 0 when the failing criteria are exactly the expected ones,
// 2 otherwise.

#include "csmasim/harness.hpp"
#include "csmasim/mac.hpp"
#include "csmasim/odcf.hpp"
#include "csmasim/pf_oracle.hpp"
#include "csmasim/reproduce.hpp"
#include "support.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

using namespace csmasim;

namespace {

// Pinned tolerances for the criteria checked here; the scenario criteria
// carry theirs in the reproduce checks.
constexpr double kCertificateTol = 1e-5;
constexpr double kGridSearchTol = 0.01;
constexpr double kCriterion8BudgetS = 900.0;

struct Criterion {
    int id;
    std::string title;
    std::vector<Check> checks;
};

Criterion from_cases(int id, std::string title, Reproducer& rep, std::initializer_list<std::string_view> names) {
    Criterion c{id, std::move(title), {}};
    for (auto n : names) {
        const auto cr = rep.run(n);
        for (auto k : cr.checks) {
            k.what = fmt::format("[{}] {}", n, k.what);
            c.checks.push_back(std::move(k));
        }
    }
    return c;
}

Criterion equations() {
    Criterion c{9, "queue-driven access equations", {}};
    auto add = [&](std::string what, bool ok, std::string measured, std::string expected) {
        c.checks.push_back({std::move(what), ok, std::move(measured), std::move(expected)});
    };
    const auto t0 = std::chrono::steady_clock::now();
    add("initial CW at q=0.01", initial_cw(0.01, 1.0, 500.0) == 1023, fmt::format("{}", initial_cw(0.01, 1.0, 500.0)),
        "1023");
    add("initial CW at q=5", initial_cw(5.0, 1.0, 500.0) == 7, fmt::format("{}", initial_cw(5.0, 1.0, 500.0)), "7");

    double worst = 0.0;
    for (int cw : kCwSet) worst = std::max(worst, std::abs(estimate_success_p(cw, 0.0, 4) - 2.0 / (cw + 2.0)));
    add("success probability at pc=0 equals 2/(CW+2)", worst < 1e-12, fmt::format("max error {:.2e}", worst),
        "< 1e-12");

    double prod = 0.0;
    for (double q : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        for (int cw : {15, 63, 255, 1023}) {
            const double p = estimate_success_p(cw, 0.0, 4);
            const auto g = grant_burst(std::exp(q), p, 6.0, 0.0, 0.0, 1000, 1 << 20);
            prod = std::max(prod, std::abs(g.mu_slots * p / std::exp(q) - 1.0));
        }
    }
    add("product law p~ x mu = exp(q) uncapped", prod < 1e-12, fmt::format("max rel error {:.2e}", prod), "< 1e-12");

    std::set<int> span;
    for (int Q = 1; Q <= 1000; ++Q) span.insert(initial_cw(0.01 * Q, 1.0, 500.0));
    add("initial CW spans the hardware set over [Q_min, Q_max]", span.size() == kCwLevels,
        fmt::format("{} of {} windows", span.size(), kCwLevels), "all");

    MediaAccessQueue q;
    q.set_length(1000);
    q.update(5, 0);
    const int hi = q.length();
    q.set_length(1);
    q.update(0, 3);
    const int lo = q.length();
    q.set_length(100);
    q.update(2, 1);
    const int mid = q.length();
    add("queue clamps", hi == 1000 && lo == 1 && mid == 101, fmt::format("{} {} {}", hi, lo, mid), "1000 1 101");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    add("suite runtime", ms < 1000.0, fmt::format("{:.2f} ms", ms), "< 1000 ms");
    return c;
}

Criterion oracle() {
    Criterion c{10, "PF oracle certificate and lattice agreement", {}};
    std::vector<std::pair<std::string, Topology>> ts;
    for (std::size_t n = 2; n <= 6; ++n) ts.emplace_back(fmt::format("FC({})", n), make_fc(n));
    for (std::size_t o = 2; o <= 4; ++o) ts.emplace_back(fmt::format("FIM({})", o), make_fim(o));
    ts.emplace_back("HT", make_ht());
    ts.emplace_back("IA", make_ia());
    const TimingParams tm;
    for (const auto& [name, t] : ts) {
        double worst = 0.0;
        for (bool discount : {false, true}) worst = std::max(worst, solve_pf(t, tm, discount).residual);
        c.checks.push_back({fmt::format("{} certificate residual", name), worst <= kCertificateTol,
                            fmt::format("{:.2e}", worst), fmt::format("<= {:g}", kCertificateTol)});
        if (t.size() > 4) continue;
        const auto rates = link_rates_bps(t, tm, true);
        const auto ref = testing::grid_search_pf(testing::brute_force_maximal_sets(t), rates);
        const auto sol = solve_pf(t, tm, true);
        double dev = 0.0;
        for (LinkId l = 0; l < t.size(); ++l) dev = std::max(dev, std::abs(sol.rates_bps[l] / ref[l] - 1.0));
        c.checks.push_back({fmt::format("{} vs lattice search", name), dev <= kGridSearchTol,
                            fmt::format("max deviation {:.3f}%", 100.0 * dev), fmt::format("<= {:g}%", 100.0 * kGridSearchTol)});
    }
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Criterion determinism() {
    Criterion c{11, "byte-identical results and event logs", {}};
    const auto base = std::filesystem::temp_directory_path() / fmt::format("csmasim_accept_{}", ::getpid());
    std::filesystem::remove_all(base);
    for (auto name : {"fim2", "ht", "grid"}) {
        auto s = canned_scenario(name);
        RunOptions o;
        o.reps = 2;
        o.duration_s = 5.0;
        o.record_events = true;
        write_results(run_suite(s, o), base / name / "serial1");
        write_results(run_suite(s, o), base / name / "serial2");
        o.parallel = true;
        o.threads = 4;
        write_results(run_suite(s, o), base / name / "parallel");
        std::size_t files = 0, same = 0;
        for (const auto& e : std::filesystem::directory_iterator(base / name / "serial1")) {
            ++files;
            const auto a = slurp(e.path());
            if (a == slurp(base / name / "serial2" / e.path().filename()) &&
                a == slurp(base / name / "parallel" / e.path().filename()))
                ++same;
        }
        c.checks.push_back({fmt::format("{}: files identical over two serial runs and a parallel run", name),
                            files > 0 && same == files, fmt::format("{}/{} files", same, files), "all"});
    }
    std::filesystem::remove_all(base);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    bool parallel = false;
    std::vector<int> only, expect_fail;
    app.add_flag("--parallel", parallel, "Run replications on worker threads");
    app.add_option("--only", only, "Criteria to run")->delimiter(',');
    app.add_option("--expect-fail", expect_fail, "Criteria known to fail")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    ReproduceOptions ro;
    ro.parallel = parallel;
    Reproducer rep(ro);

    std::vector<Criterion> done;
    auto run = [&](int id, auto&& fn) {
        if (!wanted(id)) return;
        done.push_back(fn());
        const auto& c = done.back();
        bool ok = !c.checks.empty();
        for (const auto& k : c.checks) ok = ok && k.pass;
        for (const auto& k : c.checks)
            fmt::print("    {} {}: measured {}, expected {}\n", k.pass ? "ok  " : "FAIL", k.what, k.measured,
                       k.expected);
        fmt::print("criterion {:>2} {}: {}\n", c.id, ok ? "PASS" : "FAIL", c.title);
        std::fflush(stdout);
    };

    run(1, [&] { return from_cases(1, "FC(12) aggregate ordering and level", rep, {"fc_table"}); });
    run(2, [&] { return from_cases(2, "FIM(2) proportional fairness, DCF center starvation", rep, {"fim2"}); });
    run(3, [&] { return from_cases(3, "FIM(3)/FIM(4) center ratio trends", rep, {"fim3", "fim4"}); });
    run(4, [&] { return from_cases(4, "hidden terminal and information asymmetry with RTS/CTS", rep, {"ht", "ia"}); });
    run(5, [&] { return from_cases(5, "hidden terminal with capture", rep, {"ht_capture"}); });
    run(6, [&] { return from_cases(6, "heterogeneous rates: time fairness and anomaly", rep, {"hetero_static"}); });
    run(7, [&] { return from_cases(7, "mixed topologies", rep, {"mixed_a", "mixed_b"}); });
    run(8, [&] {
        auto c = from_cases(8, "grid and random networks", rep, {"grid", "random"});
        const double total = rep.suite_wall_s("grid") + rep.suite_wall_s("random");
        c.checks.push_back({"combined runtime", total < kCriterion8BudgetS, fmt::format("{:.1f} s", total),
                            fmt::format("< {:g} s", kCriterion8BudgetS)});
        return c;
    });
    run(9, equations);
    run(10, oracle);
    run(11, determinism);

    std::set<int> failed;
    for (const auto& c : done) {
        bool ok = !c.checks.empty();
        for (const auto& k : c.checks) ok = ok && k.pass;
        if (!ok) failed.insert(c.id);
    }
    std::set<int> expected;
    for (int id : expect_fail)
        if (wanted(id)) expected.insert(id);
    fmt::print("{} of {} criteria passed", done.size() - failed.size(), done.size());
    if (!expected.empty()) fmt::print("; expected failures: {}", fmt::join(expected, ","));
    fmt::print("\n");
    return failed == expected ? 0 : 2;
}

// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Every run is pinned to an explicit seed so reruns are byte-identical.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "treecast/cli.hpp"
#include "treecast/engine.hpp"
#include "treecast/rate_region.hpp"

using namespace treecast;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("[%2d] %s  %-34s %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
}

void report_sub(const std::string& tag, bool pass, const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("     %s  %-34s %s\n", pass ? "pass" : "FAIL", tag.c_str(), detail.c_str());
}

void info(const std::string& tag, const std::string& detail) {
    std::printf("     info  %-34s %s\n", tag.c_str(), detail.c_str());
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string k4_edges_text() {
    std::string text;
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b)
            if (a != b) text += std::to_string(a) + " " + std::to_string(b) + " 1\n";
    return text;
}

Scenario k4_scenario(Algorithm alg, double rate, long slots, std::uint64_t seed) {
    Scenario sc;
    sc.net = load_topology(k4_edges_text());
    Session s;
    s.id = 0;
    s.source = sc.net.node_of_label(1);
    s.receivers = {sc.net.node_of_label(2), sc.net.node_of_label(3)};
    s.rate = rate;
    s.arrivals = ArrivalKind::Poisson;
    sc.sessions = {s};
    sc.algorithm = alg;
    sc.selector = Selector::Exact;
    sc.slots = slots;
    sc.seed = seed;
    return sc;
}

double g_worst_loynes = 0.0;

MetricsLog run_checked(const Scenario& sc) {
    Eigen::VectorXd caps(sc.net.num_links());
    for (const Link& l : sc.net.links()) caps[l.id] = l.capacity;
    LoynesChecker checker(caps, std::max(1, sc.net.num_nodes() - 1));
    MetricsLog log = run(sc, [&](const SlotView& view) {
        checker.observe(view.hop_arrivals, view.hop_backlog);
    });
    g_worst_loynes = std::max(g_worst_loynes, checker.max_discrepancy());
    return log;
}

// ---------------------------------------------------------------------------

void criterion_1_steiner_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(20240601);
    int equal = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        // random digraph with at most 7 nodes, integer costs 0..9, 1-3 receivers
        Network net;
        NodeId source = 0;
        std::vector<NodeId> receivers;
        for (;;) {
            int n = 4 + static_cast<int>(rng.next_u64() % 4);
            Network candidate;
            for (int v = 0; v < n; ++v) candidate.intern_node(v);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    if (a != b && rng.uniform() < 0.5) candidate.add_link(a, b, 1.0);
            source = static_cast<NodeId>(rng.next_u64() % static_cast<std::uint64_t>(n));
            int want = 1 + static_cast<int>(rng.next_u64() % 3);
            receivers.clear();
            for (int v = 0; v < n && static_cast<int>(receivers.size()) < want; ++v)
                if (v != source) receivers.push_back(v);
            Session s;
            s.source = source;
            s.receivers = receivers;
            if (!receivers.empty() && unreachable_receivers(candidate, s).empty()) {
                net = std::move(candidate);
                break;
            }
        }
        CostVector q(net.num_links());
        for (int e = 0; e < net.num_links(); ++e)
            q[e] = static_cast<double>(rng.next_u64() % 10);

        double fast = tree_cost(exact_min_tree(net, source, receivers, q), q);
        double brute = std::numeric_limits<double>::infinity();
        for (const Tree& t : enumerate_trees(net, source, receivers))
            brute = std::min(brute, tree_cost(t, q));
        if (fast == brute) ++equal;
    }
    double elapsed = seconds_since(t0);
    report(1, "steiner-exact-vs-enumeration", equal == trials && elapsed < 10.0,
           std::to_string(equal) + "/" + std::to_string(trials) + " instances equal, " +
               fmt(elapsed) + " s");
}

void criterion_2_throughput_oracle() {
    Scenario toy = k4_scenario(Algorithm::Regulated, 1.0, 0, 1);
    double star = max_uniform_rate(toy.net, toy.sessions);
    bool k4_ok = std::abs(star - 3.0) <= 1e-6;

    Network path = load_topology("0 1 5\n1 2 3\n2 3 4");
    Session s;
    s.id = 0;
    s.source = 0;
    s.receivers = {3};
    s.rate = 1.0;
    double bottleneck = max_uniform_rate(path, {s});
    bool path_ok = bottleneck == 3.0;

    report(2, "throughput-region-oracle", k4_ok && path_ok,
           "toy max rate " + fmt(star) + " (want 3 +- 1e-6), path bottleneck " + fmt(bottleneck) +
               " (want exactly 3)");
}

double toy_max_rate() {
    Scenario toy = k4_scenario(Algorithm::Regulated, 1.0, 0, 1);
    return max_uniform_rate(toy.net, toy.sessions);
}

void criterion_3_regulated_transition(double star) {
    auto t0 = std::chrono::steady_clock::now();
    const long K = 100000;

    Scenario stable = k4_scenario(Algorithm::Regulated, 0.9 * star, K, 1);
    stable.eps1 = 0.01 * star;
    MetricsLog log = run_checked(stable);
    double max_q_first = log.virtual_q.topRows(K / 2).maxCoeff();
    double max_q_second = log.virtual_q.bottomRows(K - K / 2).maxCoeff();
    double max_p = log.regulator.maxCoeff();
    double rho_max = log.rho().maxCoeff();
    Verdict v_stable = classify(log).verdict;

    Scenario overloaded = k4_scenario(Algorithm::Regulated, 1.1 * star, K, 1);
    overloaded.eps1 = 0.01 * star;
    MetricsLog log_over = run_checked(overloaded);
    StabilityVerdict v_over = classify(log_over);

    double elapsed = seconds_since(t0);
    bool pass = max_q_second <= max_q_first + 5.0 && max_p <= 2000.0 && rho_max < 1.0 &&
                v_stable == Verdict::Stable && v_over.verdict == Verdict::Unstable &&
                v_over.virtual_series.slope >= 0.05 * star && elapsed < 60.0;
    report(3, "regulated-stability-transition", pass,
           "0.9x: verdict " + std::string(verdict_name(v_stable)) + ", q2nd " + fmt(max_q_second) +
               " vs q1st+5 " + fmt(max_q_first + 5.0) + ", max regulator " + fmt(max_p) +
               " (bound 2000), rho max " + fmt(rho_max) + "; 1.1x: verdict " +
               std::string(verdict_name(v_over.verdict)) + ", tail slope " +
               fmt(v_over.virtual_series.slope) + " >= " + fmt(0.05 * star) + "; " + fmt(elapsed) +
               " s");
}

void criterion_4_gamma_degradation(double star) {
    // measure the achieved ratio bound of the approximate selector, then
    // run at the correspondingly reduced rate
    Scenario probe = k4_scenario(Algorithm::Regulated, 0.9 * star, 20000, 2);
    probe.eps1 = 0.01 * star;
    probe.selector = Selector::ApproxLevel2;
    probe.measure_optimality = MeasureMode::On;
    MetricsLog probe_log = run(probe);
    double gamma_hat = std::max(1.0, probe_log.gamma_ratio.maxCoeff());

    Scenario reduced = k4_scenario(Algorithm::Regulated, 0.9 * star / gamma_hat, 100000, 2);
    reduced.eps1 = 0.01 * star;
    reduced.selector = Selector::ApproxLevel2;
    reduced.measure_optimality = MeasureMode::On;
    MetricsLog log = run_checked(reduced);
    double final_ratio = log.gamma_ratio.maxCoeff();
    Verdict v = classify(log).verdict;

    bool pass = v == Verdict::Stable && final_ratio <= gamma_hat + 1e-12;
    report(4, "approx-selector-degradation", pass,
           "measured gamma " + fmt(gamma_hat) + ", run at 0.9*max/gamma: verdict " +
               std::string(verdict_name(v)) + ", ratios <= " + fmt(final_ratio));
}

void criterion_6_randomized_properties(double star) {
    const long K = 100000;
    const double eps2 = 0.05 * star;
    Scenario sc = k4_scenario(Algorithm::Randomized, 0.9 * star, K, 1);
    sc.eps2 = eps2;
    sc.delta = 0.1;
    MetricsLog log = run_checked(sc);

    // (a) per-link running mean of q settles over the final quarter
    double worst_drift = 0.0;
    for (int e = 0; e < sc.net.num_links(); ++e) {
        Eigen::VectorXd series = log.virtual_q.col(e);
        double mean_end = series.mean();
        double mean_34 = series.head(3 * K / 4).mean();
        worst_drift =
            std::max(worst_drift, std::abs(mean_end - mean_34) / std::max(mean_end, 1.0));
    }
    report_sub("6a: cesaro drift < 1%", worst_drift < 0.01,
               "worst " + fmt(100.0 * worst_drift) + "%");

    // (b) per-link signaled arrival average within the reduced service
    double worst_excess = -1e9;
    for (int e = 0; e < sc.net.num_links(); ++e)
        worst_excess = std::max(worst_excess, log.virtual_arrival_total[e] / double(K) -
                                                  (log.capacities[e] - eps2));
    report_sub("6b: virtual load <= c - eps2 + 1e-6", worst_excess <= 1e-6,
               "worst excess " + fmt(worst_excess));

    // (c) measured intensity below one on every link
    double rho_max = log.rho().maxCoeff();
    report_sub("6c: rho < 1", rho_max < 1.0, "max " + fmt(rho_max));

    // (d) real queues rate stable
    double q_over_k = (log.real_q.row(K - 1).transpose() / double(K)).maxCoeff();
    report_sub("6d: Q(K)/K < 1e-3", q_over_k < 1e-3, "max " + fmt(q_over_k));

    // (e) compare stage never regresses
    report_sub("6e: compare monotone", log.compare_violations == 0,
               std::to_string(log.compare_violations) + " violations");

    Scenario over = k4_scenario(Algorithm::Randomized, 1.1 * star, K, 1);
    over.eps2 = eps2;
    over.delta = 0.1;
    MetricsLog log_over = run_checked(over);
    Verdict v = classify(log_over).verdict;
    report_sub("6f: overload verdict unstable", v == Verdict::Unstable,
               std::string(verdict_name(v)));

    // supplementary: the same battery with the service margin inside the
    // region's uniform slack (which is 0.1 at this operating point)
    Scenario alt = k4_scenario(Algorithm::Randomized, 0.9 * star, K, 1);
    alt.eps2 = 0.05;
    alt.delta = 0.1;
    MetricsLog alt_log = run_checked(alt);
    double alt_excess = -1e9;
    for (int e = 0; e < alt.net.num_links(); ++e)
        alt_excess = std::max(alt_excess, alt_log.virtual_arrival_total[e] / double(K) -
                                              (alt_log.capacities[e] - alt.eps2));
    Eigen::VectorXd sums = alt_log.vq_sum_series();
    double alt_drift =
        std::abs(sums.mean() - sums.head(3 * K / 4).mean()) / std::max(sums.mean(), 1.0);
    info("eps2 = 0.05 (inside the slack)",
         "verdict " + std::string(verdict_name(classify(alt_log).verdict)) + ", aggregate drift " +
             fmt(100.0 * alt_drift) + "%, worst virtual-load excess " + fmt(alt_excess) +
             ", rho max " + fmt(alt_log.rho().maxCoeff()));
}

void criterion_7_pick_frequency(double star) {
    const long K = 10000;
    Scenario sc = k4_scenario(Algorithm::Randomized, 0.9 * star, K, 3);
    sc.eps2 = 0.05;
    sc.delta = 0.1;
    sc.measure_optimality = MeasureMode::On;
    MetricsLog log = run(sc);
    double freq = static_cast<double>(log.pick_min_slots) / double(log.pick_measured_slots);
    double sigma = std::sqrt(0.1 * 0.9 / double(K));
    bool pass = log.pick_measured_slots == K && freq >= 0.1 - 3.0 * sigma;
    report(7, "pick-stage min-cost frequency", pass,
           "freq " + fmt(freq) + " >= " + fmt(0.1 - 3.0 * sigma) + " over " + std::to_string(K) +
               " slots");
}

void criterion_8_control_overhead() {
    ControlOverhead c = control_overhead(300, 3000, 0.5);
    bool pass =
        c.forward_bits == 163200 && c.feedback_bits == 249600 && c.forward_bps == 326400.0;
    report(8, "control-overhead-arithmetic", pass,
           "forward " + std::to_string(c.forward_bits) + " bits, feedback " +
               std::to_string(c.feedback_bits) + " bits, forward rate " +
               fmt(c.forward_bps / 1000.0) + " Kbps");
}

void criterion_9_poisson_calibration() {
    Rng rng = Rng::stream(99, "poisson-calibration");
    const int n = 100000;
    const double mean_want = 972.0;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double a = static_cast<double>(rng.poisson(mean_want));
        sum += a;
        sq += a * a;
    }
    double mean = sum / n;
    double sd = std::sqrt(sq / n - mean * mean);
    bool pass =
        std::abs(mean - mean_want) <= 0.01 * mean_want && std::abs(sd - 31.2) <= 0.05 * 31.2;
    report(9, "poisson-arrival-calibration", pass,
           "mean " + fmt(mean) + " (want 972 +- 1%), sd " + fmt(sd) + " (want 31.2 +- 5%)");
}

void criterion_10_regulator_heavy_load() {
    // single regulator, Poisson(100) input, release quantum 100.1 per slot
    // (intensity 0.999). Boundedness evidence: the post-release carryover
    // p(k) - D(k) returns below 10 chunks inside the final window. The
    // pre-release backlog always contains the newest ~Poisson(100) arrivals,
    // so it is reported alongside but cannot sit below 10.
    Rng rng = Rng::stream(2, "regulator-load");
    const long K = 100000;
    double p = 0.0;
    double min_carry = 1e18, min_pre = 1e18, max_p = 0.0;
    for (long k = 0; k < K; ++k) {
        double released = regulator_release(p, 100.0, 0.1);
        double carry = p - released;
        p = carry + static_cast<double>(rng.poisson(100.0));
        if (k >= K - 10000) {
            min_carry = std::min(min_carry, carry);
            min_pre = std::min(min_pre, p);
        }
        max_p = std::max(max_p, p);
    }
    bool pass = min_carry < 10.0;
    report(10, "regulator-heavy-load", pass,
           "post-release backlog min " + fmt(min_carry) + " (< 10), pre-release min " +
               fmt(min_pre) + ", max " + fmt(max_p));
}

void criterion_11_determinism(double star) {
    // library-level: identical digests for repeated runs
    Scenario sc = k4_scenario(Algorithm::Randomized, 0.9 * star, 20000, 5);
    sc.eps2 = 0.05;
    bool digest_ok = run(sc).byte_digest() == run(sc).byte_digest();

    // CLI-level: byte-identical artifacts from (config, seed)
    fs::path dir = fs::temp_directory_path() / "treecast_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream net(dir / "net.edges");
        net << k4_edges_text();
        std::ofstream conf(dir / "toy.ini");
        conf << "[network]\nfile = net.edges\n\n[session 0]\nsource = 1\nreceivers = 2 3\n"
             << "rate = 2.7\narrivals = poisson\n\n[run]\nalgorithm = alg2\neps2 = 0.05\n"
             << "delta = 0.1\nslots = 5000\nseed = 7\n";
    }
    std::ostringstream sink, err;
    cli::RunOptions a;
    a.config_path = (dir / "toy.ini").string();
    a.out_dir = (dir / "a").string();
    cli::RunOptions b = a;
    b.out_dir = (dir / "b").string();
    bool cli_ok = cli::cmd_run(a, sink, err) == cli::kOk && cli::cmd_run(b, sink, err) == cli::kOk;
    auto slurp = [](const std::string& d) {
        std::map<std::string, std::string> out;
        for (const auto& entry : fs::directory_iterator(d)) {
            std::ifstream in(entry.path(), std::ios::binary);
            out[entry.path().filename().string()] =
                std::string(std::istreambuf_iterator<char>(in), {});
        }
        return out;
    };
    bool files_ok = cli_ok && slurp(a.out_dir) == slurp(b.out_dir);
    fs::remove_all(dir);
    report(11, "determinism", digest_ok && files_ok,
           std::string("log digests ") + (digest_ok ? "equal" : "DIFFER") + ", artifacts " +
               (files_ok ? "byte-identical" : "DIFFER"));
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    auto t0 = std::chrono::steady_clock::now();

    criterion_1_steiner_oracle();
    criterion_2_throughput_oracle();
    const double star = toy_max_rate();
    criterion_3_regulated_transition(star);
    criterion_4_gamma_degradation(star);

    std::printf("[ 6] ....  %s\n", "randomized-scheduling-properties");
    criterion_6_randomized_properties(star);

    // criterion 5 covers every engine run instrumented above
    report(5, "backlog-formula-equivalence", g_worst_loynes <= 1e-9,
           "max |engine - formula| = " + fmt(g_worst_loynes) + " over all instrumented runs");

    criterion_7_pick_frequency(star);
    criterion_8_control_overhead();
    criterion_9_poisson_calibration();
    criterion_10_regulator_heavy_load();
    criterion_11_determinism(star);

    std::printf("total %.1f s, %d failing check(s)\n", seconds_since(t0), g_failures);
    return g_failures == 0 ? 0 : 1;
}

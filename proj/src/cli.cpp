#include "treecast/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "treecast/engine.hpp"
#include "treecast/rate_region.hpp"

namespace treecast::cli {

namespace {

int map_exception(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << '\n';
    try {
        throw;
    } catch (const SizeError&) {
        return kTooLarge;
    } catch (const TopologyError&) {
        return kTopologyError;
    } catch (const ParseError&) {
        return kConfigError;
    } catch (const ConfigError&) {
        return kConfigError;
    } catch (const ValidationError&) {
        return kTopologyError;
    } catch (...) {
        return kFailure;
    }
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << body;
}

std::string verdict_report(const Scenario& sc, const MetricsLog& log) {
    std::ostringstream r;
    r << "scenario " << log.meta.digest << "\n";
    r << "algorithm " << log.meta.algorithm << " selector " << log.meta.selector << " seed "
      << log.meta.seed << " slots " << log.slots << "\n";
    for (size_t i = 0; i < sc.sessions.size(); ++i) {
        const Session& s = sc.sessions[i];
        r << "session " << s.id << " source " << sc.net.label(s.source) << " rate "
          << num(s.rate) << " chunks/slot arrivals " << arrival_name(s.arrivals) << "\n";
    }
    try {
        StabilityVerdict v = classify(log);
        r << "verdict " << verdict_name(v.verdict) << "\n";
        r << "slope_threshold " << num(v.slope_threshold) << "\n";
        r << "virtual_slope " << num(v.virtual_series.slope) << " tail_overflow "
          << num(v.virtual_series.tail_overflow) << "\n";
        r << "real_slope " << num(v.real_series.slope) << " tail_overflow "
          << num(v.real_series.tail_overflow) << "\n";
    } catch (const ValidationError& e) {
        r << "verdict inconclusive (" << e.what() << ")\n";
    }
    if (log.slots > 0) {
        r << "final_sum_q " << num(log.vq_sum_series()[log.slots - 1]) << "\n";
        r << "final_sum_Q " << num(log.rq_sum_series()[log.slots - 1]) << "\n";
        if (log.regulator.size() > 0) r << "max_regulator " << num(log.regulator.maxCoeff()) << "\n";
        r << "max_rho " << num(log.rho().maxCoeff()) << "\n";
    }
    r << "flow_imbalance " << num(log.max_flow_imbalance) << "\n";
    if (log.pick_measured_slots > 0) {
        r << "pick_min_frequency "
          << num(static_cast<double>(log.pick_min_slots) /
                 static_cast<double>(log.pick_measured_slots))
          << "\n";
        r << "compare_violations " << log.compare_violations << "\n";
    }
    for (const std::string& d : log.meta.deviations) r << "note " << d << "\n";
    return r.str();
}

}  // namespace

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        Scenario sc = load_scenario(opt.config_path, opt.overrides);
        MetricsLog log = run(sc);
        std::filesystem::create_directories(opt.out_dir);
        std::vector<std::string> files = export_csv(log, opt.out_dir);
        std::string report = verdict_report(sc, log);
        std::string report_path = opt.out_dir + "/" + log.meta.digest + ".verdict.txt";
        write_text(report_path, report);
        out << report;
        out << "wrote " << files.size() + 1 << " files under " << opt.out_dir << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        Scenario base = load_scenario(opt.base.config_path, opt.base.overrides);
        SweepSpec spec;
        spec.multipliers = opt.multipliers;
        spec.seeds = opt.seeds;
        spec.parallel = opt.parallel;
        std::vector<SweepResult> rows = run_sweep(base, spec);
        std::string table = sweep_table(rows);
        out << table;
        std::filesystem::create_directories(opt.base.out_dir);
        write_text(opt.base.out_dir + "/sweep_summary.csv", sweep_csv(rows));
        return kOk;
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

namespace {

int oracle_region(const Scenario& sc, std::ostream& out) {
    double star = max_uniform_rate(sc.net, sc.sessions);
    out << "max_uniform_rate " << num(star) << " chunks/slot\n";
    std::vector<double> rates;
    for (const Session& s : sc.sessions) rates.push_back(s.rate);
    MembershipResult m = membership(sc.net, sc.sessions, rates);
    if (m.inside) {
        out << "configured rates inside, eps0 " << num(m.allocation.eps0) << "\n";
        for (size_t si = 0; si < m.allocation.per_session.size(); ++si) {
            for (const TreeShare& share : m.allocation.per_session[si]) {
                out << "session " << sc.sessions[si].id << " weight " << num(share.weight)
                    << " edges";
                for (LinkId e : share.tree.edges) out << ' ' << e;
                out << "\n";
            }
        }
    } else {
        out << "configured rates outside\n";
        out << "certificate: priced min load " << num(m.certificate.min_priced_load)
            << " > priced capacity " << num(m.certificate.priced_capacity) << "\n";
        out << "link prices";
        for (long e = 0; e < m.certificate.link_prices.size(); ++e)
            out << ' ' << num(m.certificate.link_prices[e]);
        out << "\n";
    }
    return kOk;
}

int oracle_steiner(const Scenario& sc, std::uint64_t cost_seed, std::ostream& out) {
    CostVector q = CostVector::Ones(sc.net.num_links());
    if (cost_seed != 0) {
        Rng rng(cost_seed);
        for (long e = 0; e < q.size(); ++e)
            q[e] = static_cast<double>(rng.next_u64() % 10);
    }
    for (const Session& s : sc.sessions) {
        Tree exact = exact_min_tree(sc.net, s.source, s.receivers, q);
        Tree approx = approx_min_tree(sc.net, s.source, s.receivers, q, 2);
        double ce = tree_cost(exact, q);
        double ca = tree_cost(approx, q);
        double ratio = ce > 0.0 ? ca / ce : (ca > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
        out << "session " << s.id << " exact " << num(ce) << " approx " << num(ca) << " ratio "
            << num(ratio) << "\n";
    }
    return kOk;
}

int oracle_loynes(const Scenario& sc, std::ostream& out) {
    Eigen::VectorXd caps(sc.net.num_links());
    for (const Link& l : sc.net.links()) caps[l.id] = l.capacity;
    LoynesChecker checker(caps, std::max(1, sc.net.num_nodes() - 1));
    run(sc, [&](const SlotView& view) { checker.observe(view.hop_arrivals, view.hop_backlog); });
    out << "max_backlog_discrepancy " << num(checker.max_discrepancy()) << "\n";
    return kOk;
}

}  // namespace

int cmd_oracle(const OracleOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        Scenario sc = load_scenario(opt.config_path, opt.overrides);
        if (opt.kind == "region") return oracle_region(sc, out);
        if (opt.kind == "steiner") return oracle_steiner(sc, opt.cost_seed, out);
        if (opt.kind == "loynes") return oracle_loynes(sc, out);
        throw ConfigError("oracle: expected region|steiner|loynes, got '" + opt.kind + "'");
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

}  // namespace treecast::cli

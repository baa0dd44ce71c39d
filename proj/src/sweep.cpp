#include "treecast/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

namespace treecast {

std::vector<SweepResult> run_sweep(const Scenario& base, const SweepSpec& spec) {
    if (spec.multipliers.empty()) throw ConfigError("sweep: empty multiplier list");
    if (spec.seeds.empty()) throw ConfigError("sweep: empty seed list");
    for (double m : spec.multipliers)
        if (!(m > 0.0)) throw ConfigError("sweep: multipliers must be positive");

    struct Task {
        double multiplier;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (double m : spec.multipliers)
        for (std::uint64_t s : spec.seeds) tasks.push_back(Task{m, s});

    std::vector<SweepResult> rows(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            Scenario sc = base;
            sc.seed = tasks[i].seed;
            for (Session& s : sc.sessions) s.rate *= tasks[i].multiplier;
            MetricsLog log = run(sc);
            SweepResult r;
            r.multiplier = tasks[i].multiplier;
            r.seed = tasks[i].seed;
            try {
                r.verdict = classify(log).verdict;
            } catch (const ValidationError&) {
                r.verdict = Verdict::Inconclusive;  // run too short to judge
            }
            if (log.slots > 0) {
                r.final_virtual_sum = log.vq_sum_series()[log.slots - 1];
                r.final_real_sum = log.rq_sum_series()[log.slots - 1];
                r.max_regulator = log.regulator.size() > 0 ? log.regulator.maxCoeff() : 0.0;
            }
            rows[i] = r;
        }
    };
    const int workers = std::max(1, std::min<int>(spec.parallel, static_cast<int>(tasks.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

namespace {

std::string fixed(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string sweep_table(const std::vector<SweepResult>& rows) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-10s %-14s %-16s %-16s %-14s\n", "multiplier",
                  "seed", "verdict", "final_sum_q", "final_sum_Q", "max_regulator");
    out << line;
    for (const SweepResult& r : rows) {
        std::snprintf(line, sizeof line, "%-12s %-10llu %-14s %-16s %-16s %-14s\n",
                      fixed(r.multiplier).c_str(), static_cast<unsigned long long>(r.seed),
                      std::string(verdict_name(r.verdict)).c_str(),
                      fixed(r.final_virtual_sum).c_str(), fixed(r.final_real_sum).c_str(),
                      fixed(r.max_regulator).c_str());
        out << line;
    }
    return out.str();
}

std::string sweep_csv(const std::vector<SweepResult>& rows) {
    std::ostringstream out;
    out << "multiplier,seed,verdict,final_sum_q,final_sum_Q,max_regulator\n";
    for (const SweepResult& r : rows)
        out << fixed(r.multiplier) << ',' << r.seed << ',' << verdict_name(r.verdict) << ','
            << fixed(r.final_virtual_sum) << ',' << fixed(r.final_real_sum) << ','
            << fixed(r.max_regulator) << '\n';
    return out.str();
}

}  // namespace treecast

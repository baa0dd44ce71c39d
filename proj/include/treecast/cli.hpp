#pragma once

#include <iosfwd>
#include <string>

#include "treecast/scenario.hpp"
#include "treecast/sweep.hpp"

namespace treecast::cli {

// Stable exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kTopologyError = 3;
inline constexpr int kTooLarge = 4;

struct RunOptions {
    std::string config_path;
    std::string out_dir = "out";
    ScenarioOverrides overrides;
};

struct SweepOptions {
    RunOptions base;
    std::vector<double> multipliers;
    std::vector<std::uint64_t> seeds;
    int parallel = 1;
};

struct OracleOptions {
    std::string kind;  // region | steiner | loynes
    std::string config_path;
    ScenarioOverrides overrides;
    std::uint64_t cost_seed = 0;  // steiner: 0 = uniform unit costs, else random integers
};

// Executes a scenario, writes the CSV families and a verdict summary to the
// output directory. Exit 0 on completion regardless of verdict.
int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);

// Cross product of multipliers and seeds; prints the summary table and
// writes sweep_summary.csv.
int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);

// region: throughput oracle (max rate + allocation). steiner: exact vs
// approximate tree cost. loynes: replays the scenario and reports the worst
// engine-vs-formula backlog discrepancy.
int cmd_oracle(const OracleOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace treecast::cli

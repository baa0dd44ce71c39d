#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treecast/engine.hpp"

namespace treecast {

struct SweepSpec {
    std::vector<double> multipliers;    // applied to every session rate
    std::vector<std::uint64_t> seeds;
    int parallel = 1;
};

struct SweepResult {
    double multiplier = 0.0;
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::Inconclusive;
    double final_virtual_sum = 0.0;
    double final_real_sum = 0.0;
    double max_regulator = 0.0;
};

// Runs the multiplier x seed cross product of the base scenario. Runs are
// independent (each owns its state and rng streams), so the worker count
// changes wall time only, never the results; rows come back in cross
// product order.
std::vector<SweepResult> run_sweep(const Scenario& base, const SweepSpec& spec);

std::string sweep_table(const std::vector<SweepResult>& rows);
std::string sweep_csv(const std::vector<SweepResult>& rows);

}  // namespace treecast

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treecast/topology.hpp"

namespace treecast {

enum class Algorithm { Regulated, Randomized };  // alg1, alg2
enum class Selector { Exact, ApproxLevel2, Random };
enum class MeasureMode { Auto, On, Off };

// Everything a run depends on. Two scenarios with equal digest() produce
// byte-identical logs.
struct Scenario {
    Network net;
    std::vector<Session> sessions;

    Algorithm algorithm = Algorithm::Regulated;
    Selector selector = Selector::Exact;
    double eps1 = 1.0;   // regulator margin, chunks/slot
    double eps2 = 0.1;   // virtual service margin, chunks/slot
    double gamma = 1.0;  // accepted tree-cost approximation factor
    double delta = 0.1;  // min-cost injection probability of the pick stage
    long slots = 10000;
    std::uint64_t seed = 1;
    double chunk_bytes = 256000.0;  // 256 kB chunks: 1 chunk/slot = 2.048 Mbps at 1 s slots
    double slot_seconds = 1.0;
    int control_delay = 0;  // selection sees costs this many slots old
    bool strict_gamma = false;
    MeasureMode measure_optimality = MeasureMode::Auto;
    bool record_hop_detail = false;
    std::string topology_path;

    void validate() const;  // parameter invariants; throws ConfigError
    // Whether per-slot optimality measurements (approx ratio, pick-stage
    // min hits) run: Auto resolves against the instance size.
    bool measure_enabled() const;

    std::string digest() const;  // 16 hex chars over the canonical form
};

struct ScenarioOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> slots;
    std::optional<std::string> algorithm;
    std::optional<std::string> selector;
    std::optional<double> gamma;
    std::optional<double> eps1;
    std::optional<double> eps2;
    std::optional<double> delta;
    std::optional<int> control_delay;
    std::optional<double> rate_multiplier;  // scales every session rate
};

// Sectioned key-value config ('#' comments):
//   [network]   file, capacity-unit (chunks|mbps)
//   [session N] source, receivers, rate | rate-mbps, arrivals
//   [run]       algorithm, selector, gamma, eps1, eps2, delta, slots, seed,
//               chunk-bytes, slot-seconds, control-delay, strict-gamma,
//               measure-optimality, record-hop-detail
// Topology paths resolve relative to the config file.
Scenario load_scenario(const std::string& config_path, const ScenarioOverrides& ov = {});
Scenario parse_scenario(std::string_view text, const std::string& base_dir,
                        const ScenarioOverrides& ov = {});

std::string_view algorithm_name(Algorithm a);
std::string_view selector_name(Selector s);
std::string_view arrival_name(ArrivalKind k);

}  // namespace treecast

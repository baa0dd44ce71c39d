#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "treecast/steiner.hpp"

namespace treecast {

// Data-plane fluid precision: extended, so the split arithmetic of very
// long congested runs stays far inside the backlog cross-check tolerance.
using Fluid = long double;
using FluidMatrix = Eigen::Matrix<Fluid, Eigen::Dynamic, Eigen::Dynamic>;

struct RunMetadata {
    std::string digest;
    std::uint64_t seed = 0;
    std::string algorithm;
    std::string selector;
    std::vector<double> session_rates;
    double total_rate = 0.0;
    std::vector<std::string> deviations;  // modeling notes attached to this run
};

// Complete per-slot record of a run. Matrices are slots x entity with
// deterministic column order (link ids / session ids ascending), so two
// runs of the same scenario compare bit for bit.
struct MetricsLog {
    long slots = 0;
    Eigen::MatrixXd virtual_q;    // end-of-slot q_e
    Eigen::MatrixXd real_q;       // end-of-slot real backlog per link
    Eigen::MatrixXd regulator;    // end-of-slot regulator backlog per session
    Eigen::MatrixXd arrivals;     // chunk arrivals per session
    Eigen::MatrixXi tree_id;      // selected tree per session (table index)
    Eigen::MatrixXd tree_cost;    // cost of the selection under pre-update q
    Eigen::MatrixXd gamma_ratio;  // measured cost ratio per session (1 when exact)
    Eigen::MatrixXd delivered;    // per (session, receiver) column
    std::vector<std::pair<int, NodeId>> receiver_cols;
    std::vector<Tree> tree_table;
    // filled only when the scenario asks for hop detail: one E x hop-class
    // backlog snapshot per slot
    std::vector<Eigen::MatrixXd> hop_backlog_series;

    Eigen::VectorXd capacities;
    Eigen::VectorXd virtual_arrival_total;  // per link, cumulative signaled arrivals
    Eigen::VectorXd real_arrival_total;     // per link, cumulative data arrivals
    long compare_violations = 0;
    long pick_min_slots = 0;       // slots where the pick stage hit a min-cost tree
    long pick_measured_slots = 0;  // slots where that was evaluated
    double max_flow_imbalance = 0.0;

    RunMetadata meta;

    Eigen::VectorXd vq_sum_series() const { return virtual_q.rowwise().sum(); }
    Eigen::VectorXd rq_sum_series() const { return real_q.rowwise().sum(); }
    // Long-run traffic intensity per link: cumulative real arrivals over
    // cumulative capacity.
    Eigen::VectorXd rho() const;

    std::uint64_t byte_digest() const;  // over all series, for determinism checks
};

struct Window {
    long begin = 0;
    long end = 0;  // exclusive
    long width() const { return end - begin; }
};

// Fraction of slots in the window where the trace exceeds the threshold;
// the empirical overflow estimate. Monotone nonincreasing in the threshold.
double overflow_estimate(const Eigen::VectorXd& trace, double threshold, Window window);

enum class Verdict { Stable, Unstable, Inconclusive };
std::string_view verdict_name(Verdict v);

struct SeriesEvidence {
    double slope = 0.0;            // least-squares slope over the tail half
    double first_half_max = 0.0;
    double overflow_threshold = 0.0;
    double tail_overflow = 0.0;    // overflow estimate at that threshold
    std::vector<std::pair<double, double>> overflow_grid;  // (M, g) samples
};

struct StabilityVerdict {
    Verdict verdict = Verdict::Inconclusive;
    SeriesEvidence virtual_series;
    SeriesEvidence real_series;
    double slope_threshold = 0.0;
};

struct ClassifyParams {
    long min_slots = 10000;
    double slope_factor = 0.01;    // of the total arrival rate, per slot
    double overflow_factor = 2.0;  // tail must stay under factor * first-half max
    double overflow_floor = 1.0;   // chunks; keeps the threshold meaningful near zero
};

// Unstable: either aggregate queue series grows faster than the slope
// threshold. Stable: both slopes within the threshold and the tail never
// overflows the evidence threshold. Anything else is inconclusive.
StabilityVerdict classify(const MetricsLog& log, const ClassifyParams& params = {});

// Queue backlog as the largest excess of window arrivals over window
// capacity, over every window ending at slot k (empty window included, so
// the value is never negative). x holds per-slot arrivals from slot 0.
double loynes_oracle(const Eigen::VectorXd& x, double capacity, long k);

// The same maximum for every k at once, evaluated incrementally through a
// running prefix minimum.
Eigen::VectorXd loynes_series(const Eigen::VectorXd& x, double capacity);

// Streaming cross-check of the data plane: feeds per-slot per-hop-class
// arrivals and end-of-slot backlogs, and tracks the worst disagreement
// between the engine's queues and the window-maximum formula applied to the
// recorded arrivals, per link and cumulative hop class.
class LoynesChecker {
public:
    LoynesChecker(const Eigen::VectorXd& capacities, int max_hops);
    void observe(const FluidMatrix& hop_arrivals, const FluidMatrix& hop_backlog);
    double max_discrepancy() const { return static_cast<double>(max_diff_); }

private:
    Eigen::VectorXd caps_;
    FluidMatrix prefix_;      // F(k) per (link, cumulative class)
    FluidMatrix prefix_min_;  // min over earlier F
    Fluid max_diff_ = 0.0;
};

// Average chunks per slot delivered to one receiver over the window.
double receiving_rate(const MetricsLog& log, int session, NodeId receiver, Window window);
// Cumulative time-average delivery rate per slot.
Eigen::VectorXd receiving_rate_series(const MetricsLog& log, int session, NodeId receiver);

struct ControlOverhead {
    long long forward_bits = 0;   // per slot, all signaling packets of one source
    long long feedback_bits = 0;  // per slot, all feedback packets to one source
    double forward_bps = 0.0;
    double feedback_bps = 0.0;
};

// Signaling arithmetic: each node on the tree gets a header plus session id
// plus rate field, plus one id per designated link; feedback carries per
// node a header plus node id, plus id and cost per link. Exactly linear in
// nodes and links.
ControlOverhead control_overhead(long long nodes, long long links, double slot_seconds = 1.0,
                                 long long header_bytes = 20, long long id_bits = 32);

// One wide CSV per series family plus the tree table, named
// <digest>.<family>.csv inside dir. Re-exporting the same log is
// byte-identical.
std::vector<std::string> export_csv(const MetricsLog& log, const std::string& dir);

}  // namespace treecast

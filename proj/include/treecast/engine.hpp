#pragma once

#include <deque>
#include <functional>
#include <map>

#include "treecast/alg1.hpp"
#include "treecast/alg2.hpp"
#include "treecast/metrics.hpp"

namespace treecast {

// Integer chunk arrivals per slot. The deterministic kind carries the
// fractional part forward so the long-run mean is exactly the configured
// rate; the Poisson kind draws from the session's dedicated stream.
class ArrivalProcess {
public:
    ArrivalProcess(ArrivalKind kind, double mean, Rng rng)
        : kind_(kind), mean_(mean), rng_(std::move(rng)) {}
    long draw();

private:
    ArrivalKind kind_;
    double mean_;
    Rng rng_;
    double carry_ = 0.0;
};

// A distribution tree with everything the data plane needs precomputed:
// per-node child links, depth, receiver flags, and for every tree edge the
// number of receivers at or below its head (the weight a queued chunk
// carries in duplication-aware flow accounting).
struct TreeInfo {
    Tree tree;
    int session = 0;      // external session id
    int session_row = 0;  // position in the scenario's session list
    int depth = 0;
    int num_receivers = 0;
    std::vector<std::vector<LinkId>> children;  // per node
    std::vector<bool> is_receiver;              // per node
    std::vector<int> receivers_below;           // per link id (dense over the network)
};

class TreePool {
public:
    explicit TreePool(const Network& net) : net_(net) {}
    int intern(const Tree& t, const Session& sess, int session_row);
    const TreeInfo& info(int id) const { return infos_[static_cast<size_t>(id)]; }
    int size() const { return static_cast<int>(infos_.size()); }
    std::vector<Tree> table() const;

private:
    const Network& net_;
    std::vector<TreeInfo> infos_;
    std::map<std::pair<int, std::vector<LinkId>>, int> index_;
};

// Per-link fluid queues in hop-class buckets with strict low-hop-first
// priority. Within a class, service is FIFO by arrival slot; parcels that
// arrived on the same slot split the remaining budget proportionally.
// Fluid served during a slot surfaces at the next hop as the following
// slot's arrivals.
class RealQueues {
public:
    RealQueues(const Network& net, int num_sessions, int max_hops);

    void begin_slot();
    // Enqueues the amount on every tree link leaving the source, hop class 1.
    void inject(const TreePool& pool, int tree_id, double amount, long slot);
    // Serves every link up to capacity, snapshots backlogs, then duplicates
    // the served fluid onto child links and credits receivers.
    void forward(const TreePool& pool, const Eigen::VectorXd& capacities, long slot);

    const FluidMatrix& hop_arrivals() const { return hop_arrivals_; }  // this slot, E x H
    const FluidMatrix& hop_backlog() const { return hop_backlog_; }    // end of slot, E x H
    const Eigen::MatrixXd& delivered_slot() const { return delivered_slot_; }  // S x V
    const Eigen::VectorXd& cumulative_arrivals() const { return cum_arrivals_; }

    Eigen::VectorXd backlog_totals() const {
        return hop_backlog_.rowwise().sum().cast<double>();
    }

    // Per interned tree: injected * receivers - delivered - weighted
    // in-flight fluid. Exact conservation keeps this at zero.
    double max_flow_imbalance(const TreePool& pool) const;

private:
    struct Parcel {
        int tree = -1;
        Fluid amount = 0.0;
        long arrival_slot = 0;
    };
    void push_fluid(const TreePool& pool, int tree_id, NodeId at, int next_hop, Fluid amount,
                    long slot);

    const Network& net_;
    int max_hops_;
    std::vector<std::vector<std::deque<Parcel>>> buckets_;  // [link][hop-1]
    FluidMatrix hop_arrivals_;
    FluidMatrix next_arrivals_;
    FluidMatrix hop_backlog_;
    Eigen::MatrixXd delivered_slot_;
    Eigen::VectorXd cum_arrivals_;
    std::vector<Fluid> injected_by_tree_;
    std::vector<Fluid> delivered_by_tree_;
};

struct SlotView {
    long slot = 0;
    const FluidMatrix& hop_arrivals;  // E x H, this slot's arrivals by hop class
    const FluidMatrix& hop_backlog;   // E x H, end-of-slot backlogs by hop class
};
using SlotObserver = std::function<void(const SlotView&)>;

// Full slotted run: draw arrivals, advance the scheduler, inject and
// forward real traffic, record everything. Deterministic given the
// scenario digest (which includes the seed).
MetricsLog run(const Scenario& sc, const SlotObserver& observer = {});

}  // namespace treecast

#pragma once

#include <deque>

#include "treecast/alg1.hpp"
#include "treecast/rng.hpp"

namespace treecast {

// Virtual queue projection update with the actual signaled arrivals and a
// service capacity reduced by eps2; the reduction is what keeps every
// link's long-run traffic intensity strictly under one.
Eigen::VectorXd virtual_queue_step_randomized(const Eigen::VectorXd& q,
                                              const std::vector<Tree>& selected,
                                              const std::vector<long>& arrivals,
                                              const Eigen::VectorXd& capacities, double eps2);

// Pick stage: a random candidate with a pinned minimum probability of being
// a min-cost tree (the injection). selector chooses the injected solver;
// Selector::Random disables injection entirely.
Tree pick_tree(const Network& net, const Session& sess, const CostVector& q, Rng& rng,
               double delta, Selector selector, const SteinerLimits& lim = {});

// Compare stage: keep the candidate only if it does not cost more than the
// incumbent under the current costs (ties go to the candidate).
const Tree& compare_trees(const Tree& candidate, const Tree& previous, const CostVector& q);

// Pick-and-compare scheduling: unregulated sources signal their actual
// arrivals; tree choice only ever improves against the current costs.
class Alg2Scheduler {
public:
    Alg2Scheduler(const Network& net, std::vector<Session> sessions, const Scenario& sc);

    SchedulerSlot advance(const std::vector<long>& arrivals);

    const Eigen::VectorXd& virtual_queues() const { return q_; }
    long compare_violations() const { return compare_violations_; }
    long pick_min_slots() const { return pick_min_slots_; }
    long pick_measured_slots() const { return pick_measured_slots_; }

private:
    const Network& net_;
    std::vector<Session> sessions_;
    double eps2_;
    double delta_;
    Selector selector_;
    bool measure_;
    SteinerLimits lim_;
    Eigen::VectorXd q_;
    Eigen::VectorXd caps_;
    std::vector<Tree> previous_;  // t_s(k-1); starts as the breadth-first tree
    std::vector<Rng> pick_rng_;
    std::deque<Eigen::VectorXd> q_history_;
    long compare_violations_ = 0;
    long pick_min_slots_ = 0;
    long pick_measured_slots_ = 0;
};

}  // namespace treecast

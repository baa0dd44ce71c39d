#pragma once

#include <deque>

#include "treecast/scenario.hpp"
#include "treecast/steiner.hpp"

namespace treecast {

// One real-traffic release handed to the data plane.
struct Emission {
    int session = 0;
    Tree tree;
    double amount = 0.0;
};

// What a scheduler produces for one slot, shared by both algorithms.
struct SchedulerSlot {
    std::vector<Emission> emissions;       // one per session
    std::vector<double> tree_cost;         // cost of t_s(k) under the pre-update queues
    std::vector<double> gamma_ratio;       // achieved cost ratio (alg1, when measured; else 1)
    bool pick_measured = false;            // alg2: min-cost hit was evaluated this slot
    bool pick_hit_min = false;             // alg2: pick stage hit a min-cost tree for all sessions
    Eigen::VectorXd virtual_arrivals;      // per link, what the virtual update charged
};

// Source regulator: releases lambda + eps1 chunks when that much is backed
// up, otherwise drains the backlog. The return value never exceeds backlog.
double regulator_release(double backlog, double rate, double eps1);

// Virtual queue projection update with the constant signaled rates
// lambda_s + eps1 per selected tree crossing a link (never the random
// arrivals; boundedness of the virtual queues depends on this).
Eigen::VectorXd virtual_queue_step_regulated(const Eigen::VectorXd& q,
                                             const std::vector<Tree>& selected,
                                             const std::vector<Session>& sessions,
                                             const Eigen::VectorXd& capacities, double eps1);

// Tree selection under the accepted-ratio bound. The exact selector meets
// the bound with gamma = 1 by construction. The approximate selector's
// achieved ratio is measured against the exact optimum when requested;
// exceeding gamma raises only in strict mode, otherwise the ratio is
// reported to the caller for logging.
Tree select_tree_gamma(const Network& net, const Session& sess, const CostVector& q,
                       Selector selector, double gamma, bool strict, bool measure_ratio,
                       double* ratio_out, const SteinerLimits& lim = {});

// Regulated scheduling: select trees on (possibly delayed) virtual-queue
// costs, release regulated traffic, advance the virtual queues on constant
// rates.
class Alg1Scheduler {
public:
    Alg1Scheduler(const Network& net, std::vector<Session> sessions, const Scenario& sc);

    SchedulerSlot advance(const std::vector<long>& arrivals);

    const Eigen::VectorXd& virtual_queues() const { return q_; }
    const Eigen::VectorXd& regulators() const { return p_; }

private:
    const Network& net_;
    std::vector<Session> sessions_;
    double eps1_;
    double gamma_;
    Selector selector_;
    bool strict_;
    bool measure_;
    SteinerLimits lim_;
    Eigen::VectorXd q_;
    Eigen::VectorXd p_;
    Eigen::VectorXd caps_;
    std::deque<Eigen::VectorXd> q_history_;  // front() is q(k - control_delay)
};

}  // namespace treecast

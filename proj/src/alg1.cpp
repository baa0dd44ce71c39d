#include "treecast/alg1.hpp"

#include <cmath>
#include <limits>

namespace treecast {

double regulator_release(double backlog, double rate, double eps1) {
    const double full = rate + eps1;
    return backlog >= full ? full : backlog;
}

Eigen::VectorXd virtual_queue_step_regulated(const Eigen::VectorXd& q,
                                             const std::vector<Tree>& selected,
                                             const std::vector<Session>& sessions,
                                             const Eigen::VectorXd& capacities, double eps1) {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(q.size());
    for (size_t si = 0; si < sessions.size(); ++si)
        for (LinkId e : selected[si].edges) load[e] += sessions[si].rate + eps1;
    return (q + load - capacities).cwiseMax(0.0);
}

Tree select_tree_gamma(const Network& net, const Session& sess, const CostVector& q,
                       Selector selector, double gamma, bool strict, bool measure_ratio,
                       double* ratio_out, const SteinerLimits& lim) {
    Tree t;
    double ratio = 1.0;
    switch (selector) {
        case Selector::Exact:
            t = exact_min_tree(net, sess.source, sess.receivers, q, lim);
            break;
        case Selector::ApproxLevel2: {
            t = approx_min_tree(net, sess.source, sess.receivers, q, 2);
            if (measure_ratio) {
                double opt = tree_cost(exact_min_tree(net, sess.source, sess.receivers, q, lim), q);
                double got = tree_cost(t, q);
                if (opt > 0.0) ratio = got / opt;
                else ratio = got > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
                if (strict && ratio > gamma + 1e-12)
                    throw ValidationError("tree cost ratio " + std::to_string(ratio) +
                                          " exceeds gamma " + std::to_string(gamma));
            }
            break;
        }
        case Selector::Random:
            throw ConfigError("selector=random is not an optimizing selector");
    }
    t.session = sess.id;
    if (ratio_out) *ratio_out = ratio;
    return t;
}

Alg1Scheduler::Alg1Scheduler(const Network& net, std::vector<Session> sessions, const Scenario& sc)
    : net_(net),
      sessions_(std::move(sessions)),
      eps1_(sc.eps1),
      gamma_(sc.gamma),
      selector_(sc.selector),
      strict_(sc.strict_gamma),
      measure_(sc.measure_enabled() && sc.selector == Selector::ApproxLevel2),
      q_(Eigen::VectorXd::Zero(net.num_links())),
      p_(Eigen::VectorXd::Zero(static_cast<long>(sessions_.size()))),
      caps_(net.num_links()) {
    for (const Link& l : net.links()) caps_[l.id] = l.capacity;
    // history primed with zeros: selections before slot d see the empty net
    for (int i = 0; i <= sc.control_delay; ++i) q_history_.push_back(q_);
}

SchedulerSlot Alg1Scheduler::advance(const std::vector<long>& arrivals) {
    const size_t S = sessions_.size();
    SchedulerSlot slot;
    slot.emissions.resize(S);
    slot.tree_cost.resize(S);
    slot.gamma_ratio.assign(S, 1.0);

    const Eigen::VectorXd& q_select = q_history_.front();
    std::vector<Tree> selected(S);
    for (size_t si = 0; si < S; ++si) {
        double ratio = 1.0;
        selected[si] = select_tree_gamma(net_, sessions_[si], q_select, selector_, gamma_,
                                         strict_, measure_, &ratio, lim_);
        slot.gamma_ratio[si] = ratio;
        slot.tree_cost[si] = tree_cost(selected[si], q_);  // current costs, pre-update
    }
    for (size_t si = 0; si < S; ++si) {
        double released = regulator_release(p_[static_cast<long>(si)], sessions_[si].rate, eps1_);
        p_[static_cast<long>(si)] += static_cast<double>(arrivals[si]) - released;
        slot.emissions[si] = Emission{sessions_[si].id, selected[si], released};
    }
    slot.virtual_arrivals = Eigen::VectorXd::Zero(net_.num_links());
    for (size_t si = 0; si < S; ++si)
        for (LinkId e : selected[si].edges) slot.virtual_arrivals[e] += sessions_[si].rate + eps1_;
    q_ = (q_ + slot.virtual_arrivals - caps_).cwiseMax(0.0);

    q_history_.push_back(q_);
    q_history_.pop_front();
    return slot;
}

}  // namespace treecast

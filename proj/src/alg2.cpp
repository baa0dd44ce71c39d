#include "treecast/alg2.hpp"

namespace treecast {

Eigen::VectorXd virtual_queue_step_randomized(const Eigen::VectorXd& q,
                                              const std::vector<Tree>& selected,
                                              const std::vector<long>& arrivals,
                                              const Eigen::VectorXd& capacities, double eps2) {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(q.size());
    for (size_t si = 0; si < selected.size(); ++si)
        for (LinkId e : selected[si].edges) load[e] += static_cast<double>(arrivals[si]);
    return (q + load - (capacities.array() - eps2).matrix()).cwiseMax(0.0);
}

Tree pick_tree(const Network& net, const Session& sess, const CostVector& q, Rng& rng,
               double delta, Selector selector, const SteinerLimits& lim) {
    double inject = selector == Selector::Random ? 0.0 : delta;
    Tree t = sample_random_tree(net, sess.source, sess.receivers, q, rng, inject, lim);
    t.session = sess.id;
    return t;
}

const Tree& compare_trees(const Tree& candidate, const Tree& previous, const CostVector& q) {
    return tree_cost(candidate, q) <= tree_cost(previous, q) ? candidate : previous;
}

Alg2Scheduler::Alg2Scheduler(const Network& net, std::vector<Session> sessions, const Scenario& sc)
    : net_(net),
      sessions_(std::move(sessions)),
      eps2_(sc.eps2),
      delta_(sc.delta),
      selector_(sc.selector),
      measure_(sc.measure_enabled()),
      q_(Eigen::VectorXd::Zero(net.num_links())),
      caps_(net.num_links()) {
    for (const Link& l : net.links()) caps_[l.id] = l.capacity;
    for (size_t si = 0; si < sessions_.size(); ++si) {
        Tree t = breadth_first_tree(net_, sessions_[si].source, sessions_[si].receivers);
        t.session = sessions_[si].id;
        previous_.push_back(std::move(t));
        pick_rng_.push_back(Rng::stream(sc.seed, "pick", si));
    }
    for (int i = 0; i <= sc.control_delay; ++i) q_history_.push_back(q_);
}

SchedulerSlot Alg2Scheduler::advance(const std::vector<long>& arrivals) {
    const size_t S = sessions_.size();
    SchedulerSlot slot;
    slot.emissions.resize(S);
    slot.tree_cost.resize(S);
    slot.gamma_ratio.assign(S, 1.0);

    const Eigen::VectorXd& q_known = q_history_.front();
    bool all_min = true;
    std::vector<Tree> selected(S);
    for (size_t si = 0; si < S; ++si) {
        Tree candidate = pick_tree(net_, sessions_[si], q_known, pick_rng_[si], delta_, selector_, lim_);
        if (measure_) {
            double opt = tree_cost(
                exact_min_tree(net_, sessions_[si].source, sessions_[si].receivers, q_known, lim_),
                q_known);
            if (tree_cost(candidate, q_known) > opt + 1e-9) all_min = false;
        }
        const Tree& chosen = compare_trees(candidate, previous_[si], q_known);
        if (tree_cost(chosen, q_known) > tree_cost(previous_[si], q_known) + 1e-9)
            ++compare_violations_;  // must never happen
        selected[si] = chosen;
        selected[si].session = sessions_[si].id;
        previous_[si] = selected[si];
        slot.tree_cost[si] = tree_cost(selected[si], q_);
        slot.emissions[si] = Emission{sessions_[si].id, selected[si], static_cast<double>(arrivals[si])};
    }
    if (measure_) {
        slot.pick_measured = true;
        slot.pick_hit_min = all_min;
        ++pick_measured_slots_;
        if (all_min) ++pick_min_slots_;
    }

    slot.virtual_arrivals = Eigen::VectorXd::Zero(net_.num_links());
    for (size_t si = 0; si < S; ++si)
        for (LinkId e : selected[si].edges)
            slot.virtual_arrivals[e] += static_cast<double>(arrivals[si]);
    q_ = (q_ + slot.virtual_arrivals - (caps_.array() - eps2_).matrix()).cwiseMax(0.0);

    q_history_.push_back(q_);
    q_history_.pop_front();
    return slot;
}

}  // namespace treecast

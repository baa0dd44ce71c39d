#include "treecast/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace treecast {

long ArrivalProcess::draw() {
    if (kind_ == ArrivalKind::Poisson) return rng_.poisson(mean_);
    carry_ += mean_;
    long a = static_cast<long>(std::floor(carry_));
    carry_ -= static_cast<double>(a);
    return a;
}

int TreePool::intern(const Tree& t, const Session& sess, int session_row) {
    auto key = std::make_pair(sess.id, t.edges);
    if (auto it = index_.find(key); it != index_.end()) return it->second;

    TreeInfo info;
    info.tree = t;
    info.tree.session = sess.id;
    info.session = sess.id;
    info.session_row = session_row;
    info.num_receivers = static_cast<int>(sess.receivers.size());
    info.children.resize(static_cast<size_t>(net_.num_nodes()));
    info.is_receiver.assign(static_cast<size_t>(net_.num_nodes()), false);
    for (NodeId r : sess.receivers) info.is_receiver[static_cast<size_t>(r)] = true;
    for (LinkId e : t.edges) info.children[static_cast<size_t>(net_.link(e).tail)].push_back(e);

    // depth and receivers-below by walking from the root
    info.receivers_below.assign(static_cast<size_t>(net_.num_links()), 0);
    std::function<int(NodeId, int)> walk = [&](NodeId v, int depth) -> int {
        info.depth = std::max(info.depth, depth);
        int below = info.is_receiver[static_cast<size_t>(v)] ? 1 : 0;
        for (LinkId e : info.children[static_cast<size_t>(v)]) {
            int sub = walk(net_.link(e).head, depth + 1);
            info.receivers_below[static_cast<size_t>(e)] = sub;
            below += sub;
        }
        return below;
    };
    walk(t.source, 0);
    if (info.depth > net_.num_nodes() - 1)
        throw ValidationError("tree depth exceeds node count bound");

    int id = static_cast<int>(infos_.size());
    infos_.push_back(std::move(info));
    index_.emplace(std::move(key), id);
    return id;
}

std::vector<Tree> TreePool::table() const {
    std::vector<Tree> out;
    out.reserve(infos_.size());
    for (const TreeInfo& i : infos_) out.push_back(i.tree);
    return out;
}

RealQueues::RealQueues(const Network& net, int num_sessions, int max_hops)
    : net_(net),
      max_hops_(max_hops),
      buckets_(static_cast<size_t>(net.num_links())),
      hop_arrivals_(FluidMatrix::Zero(net.num_links(), max_hops)),
      next_arrivals_(FluidMatrix::Zero(net.num_links(), max_hops)),
      hop_backlog_(FluidMatrix::Zero(net.num_links(), max_hops)),
      delivered_slot_(Eigen::MatrixXd::Zero(num_sessions, net.num_nodes())),
      cum_arrivals_(Eigen::VectorXd::Zero(net.num_links())) {
    for (auto& b : buckets_) b.resize(static_cast<size_t>(max_hops));
}

void RealQueues::begin_slot() {
    hop_arrivals_ = next_arrivals_;
    next_arrivals_.setZero();
    delivered_slot_.setZero();
    cum_arrivals_ += hop_arrivals_.rowwise().sum().cast<double>();
}

void RealQueues::push_fluid(const TreePool& pool, int tree_id, NodeId at, int next_hop,
                            Fluid amount, long slot) {
    const TreeInfo& info = pool.info(tree_id);
    if (info.is_receiver[static_cast<size_t>(at)]) {
        delivered_slot_(info.session_row, at) += static_cast<double>(amount);
        delivered_by_tree_[static_cast<size_t>(tree_id)] += amount;
    }
    if (info.children[static_cast<size_t>(at)].empty()) return;
    if (next_hop > max_hops_) throw ValidationError("hop class overflow");
    for (LinkId e : info.children[static_cast<size_t>(at)]) {
        buckets_[static_cast<size_t>(e)][static_cast<size_t>(next_hop - 1)].push_back(
            Parcel{tree_id, amount, slot});
        next_arrivals_(e, next_hop - 1) += amount;
    }
}

void RealQueues::inject(const TreePool& pool, int tree_id, double amount, long slot) {
    if (static_cast<size_t>(tree_id) >= injected_by_tree_.size()) {
        injected_by_tree_.resize(static_cast<size_t>(pool.size()), 0.0);
        delivered_by_tree_.resize(static_cast<size_t>(pool.size()), 0.0);
    }
    if (amount <= 0.0) return;
    injected_by_tree_[static_cast<size_t>(tree_id)] += amount;
    const TreeInfo& info = pool.info(tree_id);
    for (LinkId e : info.children[static_cast<size_t>(info.tree.source)]) {
        buckets_[static_cast<size_t>(e)][0].push_back(Parcel{tree_id, amount, slot});
        hop_arrivals_(e, 0) += amount;
        cum_arrivals_[e] += amount;
    }
}

void RealQueues::forward(const TreePool& pool, const Eigen::VectorXd& capacities, long slot) {
    struct Served {
        LinkId link;
        int hop;
        int tree;
        Fluid amount;
    };
    std::vector<Served> served;

    for (LinkId e = 0; e < net_.num_links(); ++e) {
        Fluid budget = static_cast<Fluid>(capacities[e]);
        for (int h = 0; h < max_hops_ && budget > 0.0; ++h) {
            auto& dq = buckets_[static_cast<size_t>(e)][static_cast<size_t>(h)];
            while (budget > 0.0 && !dq.empty()) {
                // the group of parcels that arrived on the same slot
                const long group_slot = dq.front().arrival_slot;
                size_t group_end = 0;
                Fluid group_sum = 0.0;
                while (group_end < dq.size() && dq[group_end].arrival_slot == group_slot) {
                    group_sum += dq[group_end].amount;
                    ++group_end;
                }
                if (group_sum <= budget) {
                    for (size_t i = 0; i < group_end; ++i)
                        served.push_back(Served{e, h, dq[i].tree, dq[i].amount});
                    dq.erase(dq.begin(), dq.begin() + static_cast<long>(group_end));
                    budget -= group_sum;
                } else {
                    // proportional split; the last share takes the exact
                    // remainder so the group hands out precisely the budget
                    const Fluid fraction = budget / group_sum;
                    Fluid handed = 0.0;
                    for (size_t i = 0; i < group_end; ++i) {
                        Fluid part = (i + 1 == group_end) ? budget - handed
                                                          : dq[i].amount * fraction;
                        part = std::clamp(part, static_cast<Fluid>(0.0), dq[i].amount);
                        handed += part;
                        served.push_back(Served{e, h, dq[i].tree, part});
                        dq[i].amount -= part;
                    }
                    budget = 0.0;
                }
            }
        }
    }

    hop_backlog_.setZero();
    for (LinkId e = 0; e < net_.num_links(); ++e)
        for (int h = 0; h < max_hops_; ++h)
            for (const Parcel& p : buckets_[static_cast<size_t>(e)][static_cast<size_t>(h)])
                hop_backlog_(e, h) += p.amount;

    // served fluid crosses its link now and shows up downstream as the next
    // slot's arrivals (bucket index h holds hop class h + 1)
    for (const Served& s : served)
        push_fluid(pool, s.tree, net_.link(s.link).head, s.hop + 2, s.amount, slot + 1);
}

double RealQueues::max_flow_imbalance(const TreePool& pool) const {
    std::vector<Fluid> inflight(injected_by_tree_.size(), 0.0);
    for (LinkId e = 0; e < net_.num_links(); ++e)
        for (const auto& dq : buckets_[static_cast<size_t>(e)])
            for (const Parcel& p : dq)
                inflight[static_cast<size_t>(p.tree)] +=
                    p.amount * pool.info(p.tree).receivers_below[static_cast<size_t>(e)];
    Fluid worst = 0.0;
    for (size_t t = 0; t < injected_by_tree_.size(); ++t) {
        Fluid expect = injected_by_tree_[t] * pool.info(static_cast<int>(t)).num_receivers;
        worst = std::max(worst, std::abs(expect - delivered_by_tree_[t] - inflight[t]));
    }
    return static_cast<double>(worst);
}

MetricsLog run(const Scenario& sc, const SlotObserver& observer) {
    sc.validate();
    for (const Session& s : sc.sessions) {
        std::vector<NodeId> missing = unreachable_receivers(sc.net, s);
        if (!missing.empty()) {
            std::string labels;
            for (NodeId r : missing) labels += " " + std::to_string(sc.net.label(r));
            throw ValidationError("session " + std::to_string(s.id) +
                                  ": unreachable receivers:" + labels);
        }
    }

    const Network& net = sc.net;
    const int S = static_cast<int>(sc.sessions.size());
    const int E = net.num_links();
    const long K = sc.slots;
    const int max_hops = std::max(1, net.num_nodes() - 1);

    Eigen::VectorXd caps(E);
    for (const Link& l : net.links()) caps[l.id] = l.capacity;

    std::unique_ptr<Alg1Scheduler> alg1;
    std::unique_ptr<Alg2Scheduler> alg2;
    if (sc.algorithm == Algorithm::Regulated)
        alg1 = std::make_unique<Alg1Scheduler>(net, sc.sessions, sc);
    else
        alg2 = std::make_unique<Alg2Scheduler>(net, sc.sessions, sc);

    std::vector<ArrivalProcess> procs;
    for (int si = 0; si < S; ++si)
        procs.emplace_back(sc.sessions[static_cast<size_t>(si)].arrivals,
                           sc.sessions[static_cast<size_t>(si)].rate,
                           Rng::stream(sc.seed, "arrivals", static_cast<std::uint64_t>(si)));

    TreePool pool(net);
    RealQueues rq(net, S, max_hops);

    MetricsLog log;
    log.slots = K;
    log.virtual_q = Eigen::MatrixXd::Zero(K, E);
    log.real_q = Eigen::MatrixXd::Zero(K, E);
    log.regulator = Eigen::MatrixXd::Zero(K, S);
    log.arrivals = Eigen::MatrixXd::Zero(K, S);
    log.tree_id = Eigen::MatrixXi::Zero(K, S);
    log.tree_cost = Eigen::MatrixXd::Zero(K, S);
    log.gamma_ratio = Eigen::MatrixXd::Zero(K, S);
    std::vector<int> receiver_rows;
    for (int si = 0; si < S; ++si)
        for (NodeId r : sc.sessions[static_cast<size_t>(si)].receivers) {
            log.receiver_cols.emplace_back(sc.sessions[static_cast<size_t>(si)].id, r);
            receiver_rows.push_back(si);
        }
    log.delivered = Eigen::MatrixXd::Zero(K, static_cast<long>(log.receiver_cols.size()));
    log.capacities = caps;
    log.virtual_arrival_total = Eigen::VectorXd::Zero(E);

    log.meta.digest = sc.digest();
    log.meta.seed = sc.seed;
    log.meta.algorithm = algorithm_name(sc.algorithm);
    log.meta.selector = selector_name(sc.selector);
    for (const Session& s : sc.sessions) {
        log.meta.session_rates.push_back(s.rate);
        log.meta.total_rate += s.rate;
        if (s.arrivals == ArrivalKind::Deterministic)
            log.meta.deviations.push_back("session " + std::to_string(s.id) +
                                          ": deterministic arrivals (zero-arrival slots not "
                                          "guaranteed)");
    }
    log.meta.deviations.push_back(
        "control packets consume no data-plane capacity; their size is reported separately");
    if (sc.algorithm == Algorithm::Randomized) {
        bool exact_feasible = true;
        SteinerLimits lim;
        for (const Session& s : sc.sessions)
            if (static_cast<int>(s.receivers.size()) > lim.max_receivers_exact)
                exact_feasible = false;
        if (sc.selector == Selector::Random)
            log.meta.deviations.push_back("pick stage runs without min-cost injection");
        else if (!exact_feasible)
            log.meta.deviations.push_back(
                "min-cost injection falls back to the approximation (instance too large)");
    }

    std::vector<long> arrivals(static_cast<size_t>(S), 0);
    for (long k = 0; k < K; ++k) {
        for (int si = 0; si < S; ++si) arrivals[static_cast<size_t>(si)] = procs[static_cast<size_t>(si)].draw();

        SchedulerSlot slot = alg1 ? alg1->advance(arrivals) : alg2->advance(arrivals);

        rq.begin_slot();
        for (int si = 0; si < S; ++si) {
            const Emission& em = slot.emissions[static_cast<size_t>(si)];
            int tid = pool.intern(em.tree, sc.sessions[static_cast<size_t>(si)], si);
            log.tree_id(k, si) = tid;
            rq.inject(pool, tid, em.amount, k);
        }
        rq.forward(pool, caps, k);

        log.virtual_q.row(k) = (alg1 ? alg1->virtual_queues() : alg2->virtual_queues()).transpose();
        log.real_q.row(k) = rq.backlog_totals().transpose();
        if (alg1) log.regulator.row(k) = alg1->regulators().transpose();
        for (int si = 0; si < S; ++si) {
            log.arrivals(k, si) = static_cast<double>(arrivals[static_cast<size_t>(si)]);
            log.tree_cost(k, si) = slot.tree_cost[static_cast<size_t>(si)];
            log.gamma_ratio(k, si) = slot.gamma_ratio[static_cast<size_t>(si)];
        }
        for (size_t c = 0; c < log.receiver_cols.size(); ++c)
            log.delivered(k, static_cast<long>(c)) =
                rq.delivered_slot()(receiver_rows[c], log.receiver_cols[c].second);
        log.virtual_arrival_total += slot.virtual_arrivals;
        if (sc.record_hop_detail) log.hop_backlog_series.push_back(rq.hop_backlog().cast<double>());

        if (observer) observer(SlotView{k, rq.hop_arrivals(), rq.hop_backlog()});
    }

    log.real_arrival_total = rq.cumulative_arrivals();
    log.max_flow_imbalance = rq.max_flow_imbalance(pool);
    if (alg2) {
        log.compare_violations = alg2->compare_violations();
        log.pick_min_slots = alg2->pick_min_slots();
        log.pick_measured_slots = alg2->pick_measured_slots();
    }
    log.tree_table = pool.table();
    return log;
}

}  // namespace treecast

#include "treecast/rate_region.hpp"

#include <algorithm>
#include <limits>

#include "treecast/lp.hpp"

namespace treecast {

namespace {

struct TreeColumns {
    std::vector<std::vector<Tree>> trees;  // per session
    std::vector<int> offset;               // first column of each session
    int total = 0;
};

TreeColumns enumerate_columns(const Network& net, const std::vector<Session>& sessions,
                              const SteinerLimits& lim) {
    TreeColumns cols;
    for (const Session& s : sessions) {
        cols.offset.push_back(cols.total);
        std::vector<Tree> ts = enumerate_trees(net, s.source, s.receivers, lim);
        if (ts.empty())
            throw ValidationError("session " + std::to_string(s.id) + " has no distribution tree");
        cols.total += static_cast<int>(ts.size());
        cols.trees.push_back(std::move(ts));
    }
    return cols;
}

}  // namespace

bool verify_allocation(const Network& net, const std::vector<Session>& sessions,
                       const std::vector<double>& rates, const TreeRateAllocation& alloc,
                       double tol, std::string* why) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (alloc.per_session.size() != sessions.size()) return fail("session count mismatch");
    Eigen::VectorXd load = Eigen::VectorXd::Zero(net.num_links());
    for (size_t si = 0; si < sessions.size(); ++si) {
        double sum = 0.0;
        for (const TreeShare& share : alloc.per_session[si]) {
            if (share.weight < -tol) return fail("negative tree weight");
            std::string tree_why;
            if (!valid_tree(net, sessions[si].source, sessions[si].receivers, share.tree, &tree_why))
                return fail("invalid tree in allocation: " + tree_why);
            sum += share.weight;
            for (LinkId e : share.tree.edges) load[e] += share.weight * rates[si];
        }
        if (std::abs(sum - 1.0) > tol) return fail("tree weights do not sum to 1");
    }
    for (const Link& l : net.links())
        if (load[l.id] > l.capacity - alloc.eps0 + tol)
            return fail("link " + std::to_string(l.id) + " overloaded");
    return true;
}

MembershipResult membership(const Network& net, const std::vector<Session>& sessions,
                            const std::vector<double>& rates, const SteinerLimits& lim) {
    if (rates.size() != sessions.size()) throw ValidationError("rate vector size mismatch");
    TreeColumns cols = enumerate_columns(net, sessions, lim);
    const int S = static_cast<int>(sessions.size());
    const int E = net.num_links();
    const int n = cols.total + 2;  // tree weights, then eps0 split into +/-

    // maximize eps0:  sum_t alpha_t = 1 per session,
    //                 sum_s rate_s * [e in t] alpha_t + eps0 <= c_e per link.
    lp::Problem prob;
    prob.A = Eigen::MatrixXd::Zero(S + E, n);
    prob.b = Eigen::VectorXd::Zero(S + E);
    prob.c = Eigen::VectorXd::Zero(n);
    prob.equality.assign(static_cast<size_t>(S + E), false);
    const int eps_pos = cols.total;
    const int eps_neg = cols.total + 1;
    prob.c[eps_pos] = -1.0;  // minimize -eps0
    prob.c[eps_neg] = 1.0;

    for (int si = 0; si < S; ++si) {
        prob.equality[static_cast<size_t>(si)] = true;
        prob.b[si] = 1.0;
        for (size_t ti = 0; ti < cols.trees[static_cast<size_t>(si)].size(); ++ti)
            prob.A(si, cols.offset[static_cast<size_t>(si)] + static_cast<int>(ti)) = 1.0;
    }
    for (int e = 0; e < E; ++e) {
        const int row = S + e;
        prob.b[row] = net.link(e).capacity;
        prob.A(row, eps_pos) = 1.0;
        prob.A(row, eps_neg) = -1.0;
    }
    for (int si = 0; si < S; ++si) {
        for (size_t ti = 0; ti < cols.trees[static_cast<size_t>(si)].size(); ++ti) {
            int col = cols.offset[static_cast<size_t>(si)] + static_cast<int>(ti);
            for (LinkId e : cols.trees[static_cast<size_t>(si)][ti].edges)
                prob.A(S + e, col) = rates[static_cast<size_t>(si)];
        }
    }

    lp::Solution sol = lp::solve(prob);
    if (sol.status != lp::Status::Optimal)
        throw ValidationError("membership: LP did not reach an optimum");
    const double eps0 = sol.x[eps_pos] - sol.x[eps_neg];

    MembershipResult result;
    result.inside = eps0 >= -1e-9;
    if (result.inside) {
        result.allocation.eps0 = std::max(0.0, eps0);
        result.allocation.per_session.resize(static_cast<size_t>(S));
        for (int si = 0; si < S; ++si) {
            for (size_t ti = 0; ti < cols.trees[static_cast<size_t>(si)].size(); ++ti) {
                double w = sol.x[cols.offset[static_cast<size_t>(si)] + static_cast<int>(ti)];
                if (w > 1e-12) {
                    Tree t = cols.trees[static_cast<size_t>(si)][ti];
                    t.session = sessions[static_cast<size_t>(si)].id;
                    result.allocation.per_session[static_cast<size_t>(si)].push_back(
                        TreeShare{std::move(t), w});
                }
            }
        }
        std::string why;
        if (!verify_allocation(net, sessions, rates, result.allocation, 1e-9, &why))
            throw ValidationError("membership: allocation failed re-verification: " + why);
    } else {
        // Link duals of the max-eps0 LP: y_e <= 0, sum -y_e = 1. The prices
        // certify infeasibility because even the cheapest trees cost more
        // than the priced capacity buys.
        CostVector prices = CostVector::Zero(E);
        for (int e = 0; e < E; ++e) prices[e] = std::max(0.0, -sol.y[S + e]);
        double total = prices.sum();
        if (total > 0) prices /= total;
        double lhs = 0.0;
        for (int si = 0; si < S; ++si) {
            double best = std::numeric_limits<double>::infinity();
            for (const Tree& t : cols.trees[static_cast<size_t>(si)])
                best = std::min(best, tree_cost(t, prices));
            lhs += rates[static_cast<size_t>(si)] * best;
        }
        double rhs = 0.0;
        for (const Link& l : net.links()) rhs += prices[l.id] * l.capacity;
        result.certificate = RegionCertificate{prices, lhs, rhs};
    }
    return result;
}

double max_uniform_rate(const Network& net, const std::vector<Session>& sessions,
                        const SteinerLimits& lim, const std::optional<std::vector<double>>& profile) {
    TreeColumns cols = enumerate_columns(net, sessions, lim);
    const int S = static_cast<int>(sessions.size());
    const int E = net.num_links();
    std::vector<double> prof =
        profile.value_or(std::vector<double>(static_cast<size_t>(S), 1.0));
    if (prof.size() != sessions.size()) throw ValidationError("profile size mismatch");

    // maximize lambda:  sum_t beta_t - profile_s * lambda = 0 per session,
    //                   sum_{t owning e} beta_t <= c_e per link.
    const int n = cols.total + 1;
    const int lam = cols.total;
    lp::Problem prob;
    prob.A = Eigen::MatrixXd::Zero(S + E, n);
    prob.b = Eigen::VectorXd::Zero(S + E);
    prob.c = Eigen::VectorXd::Zero(n);
    prob.equality.assign(static_cast<size_t>(S + E), false);
    prob.c[lam] = -1.0;

    for (int si = 0; si < S; ++si) {
        prob.equality[static_cast<size_t>(si)] = true;
        prob.b[si] = 0.0;
        prob.A(si, lam) = -prof[static_cast<size_t>(si)];
        for (size_t ti = 0; ti < cols.trees[static_cast<size_t>(si)].size(); ++ti)
            prob.A(si, cols.offset[static_cast<size_t>(si)] + static_cast<int>(ti)) = 1.0;
    }
    for (int e = 0; e < E; ++e) prob.b[S + e] = net.link(e).capacity;
    for (int si = 0; si < S; ++si) {
        for (size_t ti = 0; ti < cols.trees[static_cast<size_t>(si)].size(); ++ti) {
            int col = cols.offset[static_cast<size_t>(si)] + static_cast<int>(ti);
            for (LinkId e : cols.trees[static_cast<size_t>(si)][ti].edges) prob.A(S + e, col) = 1.0;
        }
    }
    lp::Solution sol = lp::solve(prob);
    if (sol.status != lp::Status::Optimal)
        throw ValidationError("max_uniform_rate: LP did not reach an optimum");
    return sol.x[lam];
}

}  // namespace treecast

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treecast/steiner.hpp"

namespace treecast {

struct TreeShare {
    Tree tree;
    double weight = 0.0;  // fraction of the session's traffic on this tree
};

// Convex split of every session's traffic over its enumerated trees,
// together with the uniform per-link slack it achieves.
struct TreeRateAllocation {
    std::vector<std::vector<TreeShare>> per_session;
    double eps0 = 0.0;
};

// Witness that no tree split can fit: nonnegative link prices summing to 1
// under which the cheapest possible priced load already exceeds the priced
// capacity.
struct RegionCertificate {
    CostVector link_prices;
    double min_priced_load = 0.0;  // sum over sessions of rate * min-tree price
    double priced_capacity = 0.0;  // sum over links of price * capacity
};

struct MembershipResult {
    bool inside = false;
    TreeRateAllocation allocation;  // meaningful when inside
    RegionCertificate certificate;  // meaningful when outside
};

// Re-checks an allocation against its own invariants by direct summation,
// independent of how it was produced: weights nonnegative and summing to 1
// per session, and per-link load within capacity minus eps0 (up to tol).
bool verify_allocation(const Network& net, const std::vector<Session>& sessions,
                       const std::vector<double>& rates, const TreeRateAllocation& alloc,
                       double tol = 1e-9, std::string* why = nullptr);

// Throughput-region membership for the given per-session rates, decided by
// a linear program over all enumerated trees (desk scale only). Inside
// means some split leaves uniform slack eps0 >= 0 on every link.
MembershipResult membership(const Network& net, const std::vector<Session>& sessions,
                            const std::vector<double>& rates, const SteinerLimits& lim = {});

// Largest multiplier lambda such that lambda * profile is in the region;
// profile defaults to 1 for every session. Single LP, no bisection.
double max_uniform_rate(const Network& net, const std::vector<Session>& sessions,
                        const SteinerLimits& lim = {},
                        const std::optional<std::vector<double>>& profile = std::nullopt);

}  // namespace treecast

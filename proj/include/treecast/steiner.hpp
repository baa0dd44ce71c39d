#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "treecast/rng.hpp"
#include "treecast/topology.hpp"

namespace treecast {

// Per-link nonnegative cost, indexed by link id. Schedulers pass their
// virtual queue vector here: the queue size of a link is its cost.
using CostVector = Eigen::VectorXd;

// Out-arborescence rooted at `source` covering a receiver set, possibly
// through out-of-session helper nodes. The sorted edge-id list is the
// canonical identity of a tree.
struct Tree {
    NodeId source = -1;
    int session = -1;
    std::vector<LinkId> edges;  // sorted ascending

    bool operator==(const Tree& other) const {
        return source == other.source && edges == other.edges;
    }
};

// Sum of link costs over the tree's edges.
double tree_cost(const Tree& t, const CostVector& q);

// Checks the structural invariants: every touched non-root node has exactly
// one incoming tree edge, the root has none, edges form an acyclic graph
// reachable from the root, every receiver is covered, and every leaf is a
// receiver (no dangling branches). On failure, *why names the violation.
bool valid_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                const Tree& t, std::string* why = nullptr);

struct SteinerLimits {
    int max_nodes_enumerate = 8;   // bound for exhaustive tree enumeration
    int max_receivers_exact = 12;  // bound for the subset dynamic program
};

// All distinct valid trees for (source, receivers), over every subset of
// helper nodes. Exhaustive and deterministic; refuses graphs above the node
// bound with SizeError. Practical only for tiny instances; this is the
// oracle the optimizing selectors are tested against.
std::vector<Tree> enumerate_trees(const Network& net, NodeId source,
                                  const std::vector<NodeId>& receivers,
                                  const SteinerLimits& lim = {});

// Minimum-cost tree by dynamic programming over receiver subsets on the
// shortest-path closure of the costs (Dreyfus-Wagner, directed). Exact for
// any graph size with up to max_receivers_exact receivers. Every tie is
// broken by a fixed deterministic scan order, so a fixed input always
// yields the same tree and scaling all costs by a positive constant leaves
// the argmin edge set unchanged.
Tree exact_min_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                    const CostVector& q, const SteinerLimits& lim = {});

// Bounded-level recursive greedy approximation: level 1 bundles cheapest
// shortest paths from the root, level l >= 2 repeatedly picks the best
// density (path to an intermediate node + level l-1 cover below it). Always
// returns a valid tree; no optimality claim beyond level-1-with-one-receiver
// which is a plain shortest path.
Tree approx_min_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                     const CostVector& q, int level = 2);

// Randomized tree construction. With probability delta_injection the exact
// min-cost tree is returned (the approximation if the instance exceeds the
// exact bound), pinning a known lower bound on the chance of sampling an
// optimal tree. Otherwise candidate links are scanned repeatedly in
// breadth-first order from the source and admitted with probability
// proportional to 1/(1 + q_e), loop-forming links discarded, until all
// receivers are connected; the admission weights are normalized per scan so
// each pass admits one link in expectation regardless of queue magnitudes.
Tree sample_random_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                        const CostVector& q, Rng& rng, double delta_injection,
                        const SteinerLimits& lim = {});

// Deterministic breadth-first tree (hop-count shortest paths, smallest link
// id first), pruned to the receivers. Used as the initial incumbent of the
// pick-and-compare scheduler.
Tree breadth_first_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers);

}  // namespace treecast

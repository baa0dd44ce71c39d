#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "treecast/rng.hpp"
#include "treecast/steiner.hpp"
#include "treecast/topology.hpp"

namespace testutil {

using namespace treecast;

inline std::string k4_text() {
    std::string text;
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b)
            if (a != b) text += std::to_string(a) + " " + std::to_string(b) + " 1\n";
    return text;
}

inline Network k4() { return load_topology(k4_text()); }

inline Session make_session(int id, NodeId source, std::vector<NodeId> receivers, double rate,
                            ArrivalKind kind = ArrivalKind::Poisson) {
    Session s;
    s.id = id;
    s.source = source;
    s.receivers = std::move(receivers);
    s.rate = rate;
    s.arrivals = kind;
    return s;
}

// Random digraph with every ordered pair present independently; retries
// until the chosen receivers are reachable from the source.
struct RandomInstance {
    Network net;
    NodeId source = 0;
    std::vector<NodeId> receivers;
};

inline RandomInstance random_instance(Rng& rng, int max_nodes = 7, int max_receivers = 3) {
    for (;;) {
        int n = 4 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_nodes - 3));
        Network net;
        for (int v = 0; v < n; ++v) net.intern_node(v);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b && rng.uniform() < 0.5) net.add_link(a, b, 1.0);
        NodeId source = static_cast<NodeId>(rng.next_u64() % static_cast<std::uint64_t>(n));
        int want = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_receivers));
        std::vector<NodeId> receivers;
        for (int v = 0; v < n && static_cast<int>(receivers.size()) < want; ++v)
            if (v != source) receivers.push_back(v);
        // shuffle-ish pick: rotate by a random offset
        if (!receivers.empty()) {
            size_t off = rng.next_u64() % receivers.size();
            std::rotate(receivers.begin(), receivers.begin() + static_cast<long>(off), receivers.end());
            receivers.resize(static_cast<size_t>(want) < receivers.size() ? static_cast<size_t>(want)
                                                                          : receivers.size());
        }
        Session s = make_session(0, source, receivers, 1.0);
        if (!receivers.empty() && unreachable_receivers(net, s).empty())
            return RandomInstance{std::move(net), source, std::move(receivers)};
    }
}

inline CostVector random_integer_costs(const Network& net, Rng& rng, int max_cost = 9) {
    CostVector q(net.num_links());
    for (int e = 0; e < net.num_links(); ++e)
        q[e] = static_cast<double>(rng.next_u64() % static_cast<std::uint64_t>(max_cost + 1));
    return q;
}

// Validity check written independently of the library's valid_tree: unique
// in-edge per node, everything hangs off the source, receivers covered,
// every leaf is a receiver.
inline bool independent_tree_check(const Network& net, NodeId source,
                                   const std::vector<NodeId>& receivers,
                                   const std::vector<LinkId>& edges) {
    std::vector<int> parent(static_cast<size_t>(net.num_nodes()), -2);
    std::vector<int> child_count(static_cast<size_t>(net.num_nodes()), 0);
    for (LinkId e : edges) {
        const Link& l = net.link(e);
        if (parent[static_cast<size_t>(l.head)] != -2) return false;
        parent[static_cast<size_t>(l.head)] = l.tail;
        ++child_count[static_cast<size_t>(l.tail)];
    }
    if (parent[static_cast<size_t>(source)] != -2) return false;
    std::set<NodeId> touched;
    touched.insert(source);
    for (LinkId e : edges) {
        touched.insert(net.link(e).tail);
        touched.insert(net.link(e).head);
    }
    // every touched node must walk up to the source without loops
    for (NodeId v : touched) {
        std::set<NodeId> seen;
        NodeId w = v;
        while (w != source) {
            if (!seen.insert(w).second) return false;
            int p = parent[static_cast<size_t>(w)];
            if (p < 0) return false;
            w = p;
        }
    }
    std::set<NodeId> recv(receivers.begin(), receivers.end());
    for (NodeId r : receivers)
        if (!touched.count(r)) return false;
    for (NodeId v : touched)
        if (v != source && child_count[static_cast<size_t>(v)] == 0 && !recv.count(v)) return false;
    return true;
}

// Second, completely independent enumerator: filter every edge subset.
// Exponential in |E|; only for instances with few links.
inline long count_trees_by_edge_subsets(const Network& net, NodeId source,
                                        const std::vector<NodeId>& receivers) {
    const int m = net.num_links();
    long count = 0;
    for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
        std::vector<LinkId> edges;
        for (int e = 0; e < m; ++e)
            if (mask & (1ULL << e)) edges.push_back(e);
        if (independent_tree_check(net, source, receivers, edges)) ++count;
    }
    return count;
}

// Bellman-Ford shortest path cost, independent of the library's Dijkstra.
inline double shortest_path_cost(const Network& net, NodeId from, NodeId to, const CostVector& q) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<size_t>(net.num_nodes()), inf);
    dist[static_cast<size_t>(from)] = 0.0;
    for (int round = 0; round < net.num_nodes(); ++round)
        for (const Link& l : net.links())
            if (dist[static_cast<size_t>(l.tail)] + q[l.id] < dist[static_cast<size_t>(l.head)])
                dist[static_cast<size_t>(l.head)] = dist[static_cast<size_t>(l.tail)] + q[l.id];
    return dist[static_cast<size_t>(to)];
}

}  // namespace testutil

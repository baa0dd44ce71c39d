#include "treecast/steiner.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <set>

namespace treecast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ShortestPaths {
    std::vector<double> dist;    // from the root
    std::vector<LinkId> parent;  // in-link of v on the chosen min-cost path, -1 at root/unreached
};

// Deterministic Dijkstra: pop order (dist, node id), relaxation in link-id
// order, parents only change on strict improvement. First-set parents keep
// the parent chains acyclic even when many paths tie at equal cost.
ShortestPaths dijkstra(const Network& net, NodeId root, const CostVector& q) {
    const int n = net.num_nodes();
    ShortestPaths sp;
    sp.dist.assign(static_cast<size_t>(n), kInf);
    sp.parent.assign(static_cast<size_t>(n), -1);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    sp.dist[static_cast<size_t>(root)] = 0.0;
    heap.push({0.0, root});
    std::vector<bool> done(static_cast<size_t>(n), false);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (done[static_cast<size_t>(v)]) continue;
        done[static_cast<size_t>(v)] = true;
        for (LinkId e : net.out_links(v)) {
            const Link& l = net.link(e);
            const auto h = static_cast<size_t>(l.head);
            double nd = d + q[e];
            if (nd < sp.dist[h]) {
                sp.dist[h] = nd;
                sp.parent[h] = e;
                heap.push({nd, l.head});
            }
        }
    }
    return sp;
}

std::vector<NodeId> normalized_receivers(NodeId source, const std::vector<NodeId>& receivers) {
    std::vector<NodeId> recv = receivers;
    std::sort(recv.begin(), recv.end());
    recv.erase(std::unique(recv.begin(), recv.end()), recv.end());
    recv.erase(std::remove(recv.begin(), recv.end(), source), recv.end());
    return recv;
}

void require_reachable(const Network& net, NodeId source, const std::vector<NodeId>& recv) {
    std::vector<bool> seen = reachable_from(net, source);
    for (NodeId r : recv)
        if (!seen[static_cast<size_t>(r)])
            throw ValidationError("receiver " + std::to_string(net.label(r)) +
                                  " unreachable from source " + std::to_string(net.label(source)));
}

// Appends the links of the chosen shortest path root->v given that root's
// parent array.
void append_path(const ShortestPaths& sp, const Network& net, NodeId v, std::vector<LinkId>* out) {
    while (sp.parent[static_cast<size_t>(v)] >= 0) {
        LinkId e = sp.parent[static_cast<size_t>(v)];
        out->push_back(e);
        v = net.link(e).tail;
    }
}

// Walks up the unique in-edges from each receiver, keeping only edges on a
// root-to-receiver path.
Tree prune_to_receivers(const Network& net, NodeId source, const std::vector<NodeId>& recv,
                        const std::vector<LinkId>& in_edge) {
    std::set<LinkId> kept;
    for (NodeId r : recv) {
        NodeId v = r;
        while (v != source) {
            LinkId e = in_edge[static_cast<size_t>(v)];
            if (e < 0) throw ValidationError("candidate subgraph does not reach a receiver");
            if (!kept.insert(e).second) break;  // path above already walked
            v = net.link(e).tail;
        }
    }
    Tree t;
    t.source = source;
    t.edges.assign(kept.begin(), kept.end());
    return t;
}

// Turns an arbitrary edge multiset that connects the source to all receivers
// into a valid arborescence: min-cost in-paths within the subgraph, then
// pruned. Never costs more than the subgraph itself.
Tree extract_arborescence(const Network& net, NodeId source, const std::vector<NodeId>& recv,
                          const std::vector<LinkId>& edge_set, const CostVector& q) {
    const int n = net.num_nodes();
    std::vector<LinkId> uniq = edge_set;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    std::vector<std::vector<LinkId>> out(static_cast<size_t>(n));
    for (LinkId e : uniq) out[static_cast<size_t>(net.link(e).tail)].push_back(e);

    std::vector<double> dist(static_cast<size_t>(n), kInf);
    std::vector<LinkId> parent(static_cast<size_t>(n), -1);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<size_t>(source)] = 0.0;
    heap.push({0.0, source});
    std::vector<bool> done(static_cast<size_t>(n), false);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (done[static_cast<size_t>(v)]) continue;
        done[static_cast<size_t>(v)] = true;
        for (LinkId e : out[static_cast<size_t>(v)]) {
            const auto h = static_cast<size_t>(net.link(e).head);
            double nd = d + q[e];
            if (nd < dist[h]) {
                dist[h] = nd;
                parent[h] = e;
                heap.push({nd, net.link(e).head});
            }
        }
    }
    return prune_to_receivers(net, source, recv, parent);
}

}  // namespace

double tree_cost(const Tree& t, const CostVector& q) {
    double sum = 0.0;
    for (LinkId e : t.edges) sum += q[e];
    return sum;
}

bool valid_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                const Tree& t, std::string* why) {
    auto fail = [&](const char* m) {
        if (why) *why = m;
        return false;
    };
    const int n = net.num_nodes();
    if (source < 0 || source >= n) return fail("root not in network");
    if (t.source != source) return fail("tree rooted elsewhere");
    std::vector<LinkId> in_edge(static_cast<size_t>(n), -1);
    std::vector<std::vector<LinkId>> children(static_cast<size_t>(n));
    LinkId prev = -1;
    for (LinkId e : t.edges) {
        if (e <= prev) return fail("edge list not sorted unique");
        prev = e;
        if (e < 0 || e >= net.num_links()) return fail("edge id out of range");
        const Link& l = net.link(e);
        if (l.head == source) return fail("incoming edge at the root");
        if (in_edge[static_cast<size_t>(l.head)] != -1) return fail("node with two incoming tree edges");
        in_edge[static_cast<size_t>(l.head)] = e;
        children[static_cast<size_t>(l.tail)].push_back(e);
    }
    std::vector<bool> reached(static_cast<size_t>(n), false);
    reached[static_cast<size_t>(source)] = true;
    std::deque<NodeId> frontier{source};
    size_t reached_edges = 0;
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        for (LinkId e : children[static_cast<size_t>(v)]) {
            ++reached_edges;
            NodeId w = net.link(e).head;
            reached[static_cast<size_t>(w)] = true;  // unique in-edge, no revisit
            frontier.push_back(w);
        }
    }
    if (reached_edges != t.edges.size()) return fail("edge not on a root path (cycle or disconnected)");
    std::vector<bool> is_recv(static_cast<size_t>(n), false);
    for (NodeId r : receivers) {
        if (r < 0 || r >= n) return fail("receiver not in network");
        is_recv[static_cast<size_t>(r)] = true;
        if (!reached[static_cast<size_t>(r)]) return fail("receiver not covered");
    }
    for (NodeId v = 0; v < n; ++v) {
        if (!reached[static_cast<size_t>(v)] || v == source) continue;
        if (children[static_cast<size_t>(v)].empty() && !is_recv[static_cast<size_t>(v)])
            return fail("leaf is not a receiver");
    }
    return true;
}

std::vector<Tree> enumerate_trees(const Network& net, NodeId source,
                                  const std::vector<NodeId>& receivers, const SteinerLimits& lim) {
    const int n = net.num_nodes();
    if (n > lim.max_nodes_enumerate)
        throw SizeError("enumerate_trees: " + std::to_string(n) + " nodes exceeds bound " +
                        std::to_string(lim.max_nodes_enumerate));
    const std::vector<NodeId> recv = normalized_receivers(source, receivers);
    std::vector<bool> required(static_cast<size_t>(n), false);
    std::vector<bool> is_recv(static_cast<size_t>(n), false);
    required[static_cast<size_t>(source)] = true;
    for (NodeId r : recv) {
        required[static_cast<size_t>(r)] = true;
        is_recv[static_cast<size_t>(r)] = true;
    }
    std::vector<NodeId> optional;
    for (NodeId v = 0; v < n; ++v)
        if (!required[static_cast<size_t>(v)]) optional.push_back(v);

    std::vector<Tree> out;
    if (recv.empty()) return out;

    const unsigned num_masks = 1u << optional.size();
    std::vector<bool> in_set(static_cast<size_t>(n), false);
    for (unsigned mask = 0; mask < num_masks; ++mask) {
        std::fill(in_set.begin(), in_set.end(), false);
        for (NodeId v = 0; v < n; ++v) in_set[static_cast<size_t>(v)] = required[static_cast<size_t>(v)];
        for (size_t i = 0; i < optional.size(); ++i)
            if (mask & (1u << i)) in_set[static_cast<size_t>(optional[i])] = true;

        // Every non-source member picks one in-link whose tail is also a
        // member; an assignment is a tree iff it creates no cycle.
        std::vector<NodeId> members;
        for (NodeId v = 0; v < n; ++v)
            if (in_set[static_cast<size_t>(v)] && v != source) members.push_back(v);

        std::vector<std::vector<LinkId>> cands(members.size());
        bool feasible = true;
        for (size_t i = 0; i < members.size(); ++i) {
            for (LinkId e : net.in_links(members[i]))
                if (in_set[static_cast<size_t>(net.link(e).tail)]) cands[i].push_back(e);
            std::sort(cands[i].begin(), cands[i].end());
            if (cands[i].empty()) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;

        std::vector<NodeId> parent_node(static_cast<size_t>(n), -1);
        std::vector<LinkId> chosen(members.size(), -1);
        std::function<void(size_t)> assign = [&](size_t i) {
            if (i == members.size()) {
                // Acyclic by construction; keep only trees whose every leaf
                // is a receiver (members outside recv must be internal).
                std::vector<bool> has_child(static_cast<size_t>(n), false);
                for (LinkId e : chosen) has_child[static_cast<size_t>(net.link(e).tail)] = true;
                for (NodeId v : members)
                    if (!has_child[static_cast<size_t>(v)] && !is_recv[static_cast<size_t>(v)]) return;
                Tree t;
                t.source = source;
                t.edges = chosen;
                std::sort(t.edges.begin(), t.edges.end());
                out.push_back(std::move(t));
                return;
            }
            const NodeId v = members[i];
            for (LinkId e : cands[i]) {
                NodeId tail = net.link(e).tail;
                // reject early if tail's ancestor chain comes back to v
                NodeId w = tail;
                while (w >= 0 && w != v) w = parent_node[static_cast<size_t>(w)];
                if (w == v) continue;
                parent_node[static_cast<size_t>(v)] = tail;
                chosen[i] = e;
                assign(i + 1);
                parent_node[static_cast<size_t>(v)] = -1;
            }
        };
        assign(0);
    }
    return out;
}

Tree exact_min_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                    const CostVector& q, const SteinerLimits& lim) {
    const int n = net.num_nodes();
    if (q.size() != net.num_links()) throw ValidationError("cost vector size mismatch");
    const std::vector<NodeId> recv = normalized_receivers(source, receivers);
    if (recv.empty()) return Tree{source, -1, {}};
    if (static_cast<int>(recv.size()) > lim.max_receivers_exact)
        throw SizeError("exact_min_tree: " + std::to_string(recv.size()) +
                        " receivers exceeds bound " + std::to_string(lim.max_receivers_exact));
    require_reachable(net, source, recv);

    std::vector<ShortestPaths> sp;
    sp.reserve(static_cast<size_t>(n));
    for (NodeId u = 0; u < n; ++u) sp.push_back(dijkstra(net, u, q));

    const int r_count = static_cast<int>(recv.size());
    const unsigned full = (1u << r_count) - 1;
    const size_t width = full + 1;
    // cost[v][mask]: min cost of a tree rooted at v covering the masked
    // receivers; via/split record the anchor node and receiver partition.
    std::vector<double> cost(static_cast<size_t>(n) * width, kInf);
    std::vector<NodeId> via(static_cast<size_t>(n) * width, -1);
    std::vector<unsigned> split(static_cast<size_t>(n) * width, 0);
    auto at = [width](NodeId v, unsigned mask) { return static_cast<size_t>(v) * width + mask; };

    std::vector<double> merged(static_cast<size_t>(n));
    std::vector<unsigned> msplit(static_cast<size_t>(n));
    for (unsigned mask = 1; mask <= full; ++mask) {
        std::fill(merged.begin(), merged.end(), kInf);
        std::fill(msplit.begin(), msplit.end(), 0u);
        if (std::popcount(mask) == 1) {
            int bit = std::countr_zero(mask);
            merged[static_cast<size_t>(recv[static_cast<size_t>(bit)])] = 0.0;
        } else {
            for (NodeId u = 0; u < n; ++u) {
                for (unsigned sub = (mask - 1) & mask; sub; sub = (sub - 1) & mask) {
                    unsigned rest = mask ^ sub;
                    if (sub < rest) continue;  // each unordered partition once
                    double c = cost[at(u, sub)] + cost[at(u, rest)];
                    if (c < merged[static_cast<size_t>(u)]) {
                        merged[static_cast<size_t>(u)] = c;
                        msplit[static_cast<size_t>(u)] = sub;
                    }
                }
            }
        }
        for (NodeId v = 0; v < n; ++v) {
            double best = kInf;
            NodeId best_u = -1;
            const ShortestPaths& from_v = sp[static_cast<size_t>(v)];
            for (NodeId u = 0; u < n; ++u) {
                if (merged[static_cast<size_t>(u)] == kInf) continue;
                double d = from_v.dist[static_cast<size_t>(u)];
                if (d == kInf) continue;
                double c = d + merged[static_cast<size_t>(u)];
                if (c < best) {
                    best = c;
                    best_u = u;
                }
            }
            cost[at(v, mask)] = best;
            via[at(v, mask)] = best_u;
            split[at(v, mask)] = best_u >= 0 ? msplit[static_cast<size_t>(best_u)] : 0;
        }
    }

    std::vector<LinkId> edges;
    std::function<void(NodeId, unsigned)> expand = [&](NodeId v, unsigned mask) {
        NodeId u = via[at(v, mask)];
        append_path(sp[static_cast<size_t>(v)], net, u, &edges);
        unsigned sub = split[at(v, mask)];
        if (sub == 0) return;  // singleton: u is the receiver itself
        expand(u, sub);
        expand(u, mask ^ sub);
    };
    expand(source, full);
    return extract_arborescence(net, source, recv, edges, q);
}

namespace {

// One partial cover step of the recursive greedy: edges, their path-sum
// cost, and the receivers it connects.
struct Partial {
    double cost = kInf;
    std::vector<LinkId> edges;
    std::vector<NodeId> covered;
    double density() const { return covered.empty() ? kInf : cost / static_cast<double>(covered.size()); }
};

// Covers exactly k of the targets from root v with a depth-(level) greedy.
// Level 1 is the cheapest bundle of k shortest paths out of v; higher levels
// scan every intermediate node u and sub-cover size, minimizing density.
Partial cover_k(const Network& net, const std::vector<ShortestPaths>& sp, int level, size_t k,
                NodeId v, const std::vector<NodeId>& targets) {
    const ShortestPaths& from_v = sp[static_cast<size_t>(v)];
    Partial result;
    if (level <= 1) {
        std::vector<NodeId> order = targets;
        std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
            double da = from_v.dist[static_cast<size_t>(a)];
            double db = from_v.dist[static_cast<size_t>(b)];
            return da != db ? da < db : a < b;
        });
        if (k > order.size() || from_v.dist[static_cast<size_t>(order[k - 1])] == kInf) return result;
        result.cost = 0.0;
        for (size_t i = 0; i < k; ++i) {
            result.cost += from_v.dist[static_cast<size_t>(order[i])];
            result.covered.push_back(order[i]);
            append_path(from_v, net, order[i], &result.edges);
        }
        return result;
    }
    size_t need = k;
    std::vector<NodeId> rem = targets;
    result.cost = 0.0;
    while (need > 0) {
        Partial best;
        double best_density = kInf;
        NodeId best_u = -1;
        for (NodeId u = 0; u < net.num_nodes(); ++u) {
            double d = from_v.dist[static_cast<size_t>(u)];
            if (d == kInf) continue;
            for (size_t kk = 1; kk <= need; ++kk) {
                Partial sub = cover_k(net, sp, level - 1, kk, u, rem);
                if (sub.covered.empty()) break;  // larger kk cannot work either
                double density = (d + sub.cost) / static_cast<double>(sub.covered.size());
                if (density < best_density) {
                    best_density = density;
                    best = std::move(sub);
                    best.cost += d;
                    best_u = u;
                }
            }
        }
        if (best.covered.empty()) return Partial{};  // targets not coverable from v
        append_path(from_v, net, best_u, &best.edges);
        result.cost += best.cost;
        result.edges.insert(result.edges.end(), best.edges.begin(), best.edges.end());
        for (NodeId c : best.covered) {
            result.covered.push_back(c);
            rem.erase(std::remove(rem.begin(), rem.end(), c), rem.end());
        }
        need -= std::min(need, best.covered.size());
    }
    return result;
}

}  // namespace

Tree approx_min_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                     const CostVector& q, int level) {
    if (level < 1) throw ValidationError("approx_min_tree: level must be >= 1");
    if (q.size() != net.num_links()) throw ValidationError("cost vector size mismatch");
    const std::vector<NodeId> recv = normalized_receivers(source, receivers);
    if (recv.empty()) return Tree{source, -1, {}};
    require_reachable(net, source, recv);

    std::vector<ShortestPaths> sp;
    sp.reserve(static_cast<size_t>(net.num_nodes()));
    for (NodeId u = 0; u < net.num_nodes(); ++u) sp.push_back(dijkstra(net, u, q));

    Partial whole = cover_k(net, sp, level, recv.size(), source, recv);
    if (whole.covered.size() != recv.size())
        throw ValidationError("approx_min_tree: cover construction failed");
    return extract_arborescence(net, source, recv, whole.edges, q);
}

Tree sample_random_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers,
                        const CostVector& q, Rng& rng, double delta_injection,
                        const SteinerLimits& lim) {
    if (q.size() != net.num_links()) throw ValidationError("cost vector size mismatch");
    const std::vector<NodeId> recv = normalized_receivers(source, receivers);
    if (recv.empty()) return Tree{source, -1, {}};
    require_reachable(net, source, recv);

    if (delta_injection > 0.0 && rng.uniform() < delta_injection) {
        if (static_cast<int>(recv.size()) <= lim.max_receivers_exact)
            return exact_min_tree(net, source, recv, q, lim);
        return approx_min_tree(net, source, recv, q, 2);
    }

    const int n = net.num_nodes();
    std::vector<char> in_tree(static_cast<size_t>(n), 0);
    std::vector<int> depth(static_cast<size_t>(n), 0);
    std::vector<LinkId> in_edge(static_cast<size_t>(n), -1);
    in_tree[static_cast<size_t>(source)] = 1;
    size_t remaining = recv.size();

    std::vector<LinkId> cands;
    long passes = 0;
    while (remaining > 0) {
        if (++passes > 1000000) throw ValidationError("sample_random_tree: no progress");
        cands.clear();
        for (const Link& l : net.links())
            if (in_tree[static_cast<size_t>(l.tail)] && !in_tree[static_cast<size_t>(l.head)])
                cands.push_back(l.id);
        if (cands.empty()) throw ValidationError("sample_random_tree: frontier exhausted");
        // breadth-first order: shallower tails first
        std::sort(cands.begin(), cands.end(), [&](LinkId a, LinkId b) {
            int da = depth[static_cast<size_t>(net.link(a).tail)];
            int db = depth[static_cast<size_t>(net.link(b).tail)];
            return da != db ? da < db : a < b;
        });
        double weight_sum = 0.0;
        for (LinkId e : cands) weight_sum += 1.0 / (1.0 + q[e]);
        for (LinkId e : cands) {
            const Link& l = net.link(e);
            if (in_tree[static_cast<size_t>(l.head)]) continue;  // loop-forming since an earlier admission
            double w = 1.0 / (1.0 + q[e]);
            if (rng.uniform() * weight_sum < w) {
                in_tree[static_cast<size_t>(l.head)] = 1;
                in_edge[static_cast<size_t>(l.head)] = e;
                depth[static_cast<size_t>(l.head)] = depth[static_cast<size_t>(l.tail)] + 1;
                if (std::binary_search(recv.begin(), recv.end(), l.head)) --remaining;
            }
        }
    }
    return prune_to_receivers(net, source, recv, in_edge);
}

Tree breadth_first_tree(const Network& net, NodeId source, const std::vector<NodeId>& receivers) {
    const std::vector<NodeId> recv = normalized_receivers(source, receivers);
    if (recv.empty()) return Tree{source, -1, {}};
    require_reachable(net, source, recv);
    const int n = net.num_nodes();
    std::vector<LinkId> in_edge(static_cast<size_t>(n), -1);
    std::vector<bool> seen(static_cast<size_t>(n), false);
    seen[static_cast<size_t>(source)] = true;
    std::deque<NodeId> frontier{source};
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        for (LinkId e : net.out_links(v)) {
            NodeId w = net.link(e).head;
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = true;
                in_edge[static_cast<size_t>(w)] = e;
                frontier.push_back(w);
            }
        }
    }
    return prune_to_receivers(net, source, recv, in_edge);
}

}  // namespace treecast

#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "treecast/types.hpp"

namespace treecast {

struct Link {
    LinkId id = -1;
    NodeId tail = -1;
    NodeId head = -1;
    double capacity = 0.0;  // chunks per slot, > 0
};

// Directed capacitated graph. Immutable once built and shared read-only by
// every component of a run. Node ids are dense and assigned by order of
// first appearance in the input; the original integer labels are kept for
// all external I/O.
class Network {
public:
    // Returns the dense id, adding the node if the label is new.
    NodeId intern_node(long long label);
    LinkId add_link(NodeId tail, NodeId head, double capacity);

    int num_nodes() const { return static_cast<int>(labels_.size()); }
    int num_links() const { return static_cast<int>(links_.size()); }
    const Link& link(LinkId e) const { return links_[static_cast<size_t>(e)]; }
    const std::vector<Link>& links() const { return links_; }
    const std::vector<LinkId>& out_links(NodeId v) const { return out_[static_cast<size_t>(v)]; }
    const std::vector<LinkId>& in_links(NodeId v) const { return in_[static_cast<size_t>(v)]; }

    long long label(NodeId v) const { return labels_[static_cast<size_t>(v)]; }
    // -1 if the label was never seen.
    NodeId node_of_label(long long label) const;

    double total_capacity() const;

    bool operator==(const Network& other) const;

private:
    std::vector<long long> labels_;
    std::unordered_map<long long, NodeId> by_label_;
    std::vector<Link> links_;
    std::vector<std::vector<LinkId>> out_;
    std::vector<std::vector<LinkId>> in_;
};

enum class ArrivalKind { Deterministic, Poisson };

struct Session {
    int id = 0;
    NodeId source = -1;
    std::vector<NodeId> receivers;  // nonempty, never contains source
    double rate = 0.0;              // mean chunks per slot
    ArrivalKind arrivals = ArrivalKind::Poisson;
};

// Edge-list text: one "tail head capacity" triple per line, '#' comments,
// whitespace separated. Node labels are integers; ids follow appearance
// order. Malformed lines raise ParseError, capacity <= 0 or self-loops
// raise ValidationError.
Network load_topology(std::string_view text);
Network load_topology_file(const std::string& path);

// Inverse of load_topology up to comment stripping: reloading the output
// yields an identical Network.
std::string serialize_topology(const Network& net);

std::vector<bool> reachable_from(const Network& net, NodeId src);

// Receivers of sess with no directed path from its source; empty means ok.
std::vector<NodeId> unreachable_receivers(const Network& net, const Session& sess);

// Adds one virtual node plus one link from it to each given source. The new
// links get capacity sum of all c_e plus 1, which no feasible flow can
// saturate, so the transform never changes what is achievable. Original
// nodes and links keep their ids.
Network multi_source_transform(const Network& net, const std::vector<NodeId>& sources);

}  // namespace treecast

#include "treecast/topology.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

namespace treecast {

NodeId Network::intern_node(long long label) {
    auto it = by_label_.find(label);
    if (it != by_label_.end()) return it->second;
    NodeId id = num_nodes();
    labels_.push_back(label);
    by_label_.emplace(label, id);
    out_.emplace_back();
    in_.emplace_back();
    return id;
}

LinkId Network::add_link(NodeId tail, NodeId head, double capacity) {
    if (tail == head) throw ValidationError("self-loop on node " + std::to_string(label(tail)));
    if (!(capacity > 0.0)) throw ValidationError("capacity must be positive");
    LinkId id = num_links();
    links_.push_back(Link{id, tail, head, capacity});
    out_[static_cast<size_t>(tail)].push_back(id);
    in_[static_cast<size_t>(head)].push_back(id);
    return id;
}

NodeId Network::node_of_label(long long label) const {
    auto it = by_label_.find(label);
    return it == by_label_.end() ? -1 : it->second;
}

double Network::total_capacity() const {
    double sum = 0.0;
    for (const Link& l : links_) sum += l.capacity;
    return sum;
}

bool Network::operator==(const Network& other) const {
    if (labels_ != other.labels_) return false;
    if (links_.size() != other.links_.size()) return false;
    for (size_t i = 0; i < links_.size(); ++i) {
        const Link& a = links_[i];
        const Link& b = other.links_[i];
        if (a.tail != b.tail || a.head != b.head || a.capacity != b.capacity) return false;
    }
    return true;
}

Network load_topology(std::string_view text) {
    Network net;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream fields(line);
        long long tail_label, head_label;
        double capacity;
        if (!(fields >> tail_label)) continue;  // blank or comment-only line
        if (!(fields >> head_label >> capacity)) throw ParseError("expected \"tail head capacity\"", lineno);
        std::string extra;
        if (fields >> extra) throw ParseError("trailing token '" + extra + "'", lineno);
        if (!(capacity > 0.0)) throw ValidationError("line " + std::to_string(lineno) + ": capacity must be positive");
        NodeId t = net.intern_node(tail_label);
        NodeId h = net.intern_node(head_label);
        if (t == h) throw ValidationError("line " + std::to_string(lineno) + ": self-loop");
        net.add_link(t, h, capacity);
    }
    return net;
}

Network load_topology_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open topology file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_topology(buf.str());
}

std::string serialize_topology(const Network& net) {
    std::ostringstream out;
    char num[64];
    for (const Link& l : net.links()) {
        std::snprintf(num, sizeof num, "%.17g", l.capacity);
        out << net.label(l.tail) << ' ' << net.label(l.head) << ' ' << num << '\n';
    }
    return out.str();
}

std::vector<bool> reachable_from(const Network& net, NodeId src) {
    std::vector<bool> seen(static_cast<size_t>(net.num_nodes()), false);
    std::deque<NodeId> frontier{src};
    seen[static_cast<size_t>(src)] = true;
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        for (LinkId e : net.out_links(v)) {
            NodeId w = net.link(e).head;
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = true;
                frontier.push_back(w);
            }
        }
    }
    return seen;
}

std::vector<NodeId> unreachable_receivers(const Network& net, const Session& sess) {
    std::vector<bool> seen = reachable_from(net, sess.source);
    std::vector<NodeId> missing;
    for (NodeId r : sess.receivers)
        if (!seen[static_cast<size_t>(r)]) missing.push_back(r);
    return missing;
}

Network multi_source_transform(const Network& net, const std::vector<NodeId>& sources) {
    if (sources.empty()) throw ValidationError("multi_source_transform: empty source set");
    for (NodeId s : sources)
        if (s < 0 || s >= net.num_nodes()) throw ValidationError("multi_source_transform: unknown node");

    Network out;
    for (NodeId v = 0; v < net.num_nodes(); ++v) out.intern_node(net.label(v));
    for (const Link& l : net.links()) out.add_link(l.tail, l.head, l.capacity);

    long long max_label = net.label(0);
    for (NodeId v = 1; v < net.num_nodes(); ++v) max_label = std::max(max_label, net.label(v));
    NodeId virtual_node = out.intern_node(max_label + 1);

    const double big = net.total_capacity() + 1.0;
    for (NodeId s : sources) out.add_link(virtual_node, s, big);
    return out;
}

}  // namespace treecast

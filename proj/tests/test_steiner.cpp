#include <doctest.h>

#include "helpers.hpp"

using namespace treecast;
using testutil::k4;

namespace {

CostVector zero_costs(const Network& net) { return CostVector::Zero(net.num_links()); }

}  // namespace

TEST_CASE("tree cost") {
    Network net = load_topology("0 1 1\n1 2 1\n0 2 1");
    Tree chain{0, -1, {0, 1}};
    CHECK(tree_cost(chain, zero_costs(net)) == 0.0);
    CostVector q(3);
    q << 3.0, 4.0, 11.0;
    CHECK(tree_cost(chain, q) == 7.0);
}

TEST_CASE("tree validity") {
    Network net = k4();
    NodeId s = net.node_of_label(1);
    std::vector<NodeId> recv{net.node_of_label(2), net.node_of_label(3)};
    std::string why;

    // 1->2, 1->3 star (links 0 and 1 in file order)
    CHECK(valid_tree(net, s, recv, Tree{s, -1, {0, 1}}, &why));
    // dangling branch into the helper node
    CHECK_FALSE(valid_tree(net, s, recv, Tree{s, -1, {0, 1, 2}}, &why));
    CHECK(why == "leaf is not a receiver");
    // receiver 3 uncovered
    CHECK_FALSE(valid_tree(net, s, recv, Tree{s, -1, {0}}, &why));
    // two in-edges at node 3: links 1 (1->3) and 4 (2->3)
    CHECK_FALSE(valid_tree(net, s, recv, Tree{s, -1, {0, 1, 4}}, &why));
}

TEST_CASE("enumerate path") {
    Network net = load_topology("0 1 1\n1 2 1");
    auto trees = enumerate_trees(net, 0, {2});
    REQUIRE(trees.size() == 1);
    CHECK(trees[0].edges == std::vector<LinkId>{0, 1});
}

TEST_CASE("enumerate with helper node") {
    Network net = k4();
    NodeId s = net.node_of_label(1);
    NodeId helper = net.node_of_label(4);
    std::vector<NodeId> recv{net.node_of_label(2), net.node_of_label(3)};
    auto trees = enumerate_trees(net, s, recv);

    bool with_helper = false;
    bool without_helper = false;
    for (const Tree& t : trees) {
        std::string why;
        REQUIRE(valid_tree(net, s, recv, t, &why));
        bool touches = false;
        for (LinkId e : t.edges)
            if (net.link(e).head == helper || net.link(e).tail == helper) touches = true;
        (touches ? with_helper : without_helper) = true;
    }
    CHECK(with_helper);
    CHECK(without_helper);

    // no duplicates
    std::set<std::vector<LinkId>> uniq;
    for (const Tree& t : trees) uniq.insert(t.edges);
    CHECK(uniq.size() == trees.size());

    // cross-check the count with a fully independent enumerator
    long brute = testutil::count_trees_by_edge_subsets(net, s, recv);
    CHECK(static_cast<long>(trees.size()) == brute);
    CHECK(trees.size() == 10);
}

TEST_CASE("enumerate refuses large graphs") {
    Network net;
    for (int v = 0; v < 9; ++v) net.intern_node(v);
    for (int v = 0; v + 1 < 9; ++v) net.add_link(v, v + 1, 1.0);
    CHECK_THROWS_AS(enumerate_trees(net, 0, {8}), SizeError);
}

TEST_CASE("exact min tree basics") {
    Network net = k4();
    NodeId s = net.node_of_label(1);
    std::vector<NodeId> recv{net.node_of_label(2), net.node_of_label(3)};

    Tree zero = exact_min_tree(net, s, recv, zero_costs(net));
    CHECK(valid_tree(net, s, recv, zero));
    CHECK(tree_cost(zero, zero_costs(net)) == 0.0);

    // a single receiver degenerates to the shortest path
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = testutil::random_instance(rng, 7, 1);
        CostVector q = testutil::random_integer_costs(inst.net, rng);
        Tree t = exact_min_tree(inst.net, inst.source, inst.receivers, q);
        CHECK(tree_cost(t, q) ==
              testutil::shortest_path_cost(inst.net, inst.source, inst.receivers[0], q));
    }

    Network chain = load_topology("0 1 1");
    CHECK_THROWS_AS(exact_min_tree(chain, 0, {1, 1, 1}, CostVector::Zero(1),
                                   SteinerLimits{8, 0}),
                    SizeError);
    Network gap = load_topology("0 1 1\n2 0 1");
    CHECK_THROWS_AS(exact_min_tree(gap, 0, {2}, CostVector::Zero(2)), ValidationError);
}

TEST_CASE("exact matches enumeration oracle") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = testutil::random_instance(rng);
        CostVector q = testutil::random_integer_costs(inst.net, rng);
        Tree best = exact_min_tree(inst.net, inst.source, inst.receivers, q);
        REQUIRE(valid_tree(inst.net, inst.source, inst.receivers, best));

        auto all = enumerate_trees(inst.net, inst.source, inst.receivers);
        REQUIRE(!all.empty());
        double oracle = std::numeric_limits<double>::infinity();
        for (const Tree& t : all) oracle = std::min(oracle, tree_cost(t, q));
        CHECK(tree_cost(best, q) == oracle);
    }
}

TEST_CASE("exact argmin is scale invariant") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = testutil::random_instance(rng);
        CostVector q = testutil::random_integer_costs(inst.net, rng);
        Tree base = exact_min_tree(inst.net, inst.source, inst.receivers, q);
        for (double factor : {2.0, 3.0, 0.5, 10.0}) {
            Tree scaled = exact_min_tree(inst.net, inst.source, inst.receivers,
                                         (q * factor).eval());
            CHECK(scaled.edges == base.edges);
        }
    }
}

TEST_CASE("approximation basics") {
    Network net = k4();
    NodeId s = net.node_of_label(1);
    std::vector<NodeId> recv{net.node_of_label(2), net.node_of_label(3)};

    Tree zero = approx_min_tree(net, s, recv, zero_costs(net), 2);
    CHECK(valid_tree(net, s, recv, zero));
    CHECK(tree_cost(zero, zero_costs(net)) == 0.0);

    // one receiver at level 1 is exactly the shortest path
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = testutil::random_instance(rng, 7, 1);
        CostVector q = testutil::random_integer_costs(inst.net, rng);
        Tree t = approx_min_tree(inst.net, inst.source, inst.receivers, q, 1);
        CHECK(tree_cost(t, q) ==
              testutil::shortest_path_cost(inst.net, inst.source, inst.receivers[0], q));
    }
    CHECK_THROWS_AS(approx_min_tree(net, s, recv, zero_costs(net), 0), ValidationError);
}

TEST_CASE("approximation never beats the optimum") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = testutil::random_instance(rng);
        CostVector q = testutil::random_integer_costs(inst.net, rng);
        Tree approx = approx_min_tree(inst.net, inst.source, inst.receivers, q, 2);
        REQUIRE(valid_tree(inst.net, inst.source, inst.receivers, approx));
        Tree exact = exact_min_tree(inst.net, inst.source, inst.receivers, q);

        auto all = enumerate_trees(inst.net, inst.source, inst.receivers);
        double worst = 0.0;
        for (const Tree& t : all) worst = std::max(worst, tree_cost(t, q));
        CHECK(tree_cost(exact, q) <= tree_cost(approx, q));
        CHECK(tree_cost(approx, q) <= worst);
    }
}

TEST_CASE("random sampler") {
    Network net = k4();
    NodeId s = net.node_of_label(1);
    std::vector<NodeId> recv{net.node_of_label(2), net.node_of_label(3)};
    CostVector q(net.num_links());
    for (int e = 0; e < net.num_links(); ++e) q[e] = static_cast<double>((e * 7) % 5);

    SUBCASE("full injection always returns the exact tree") {
        Rng rng(1);
        Tree exact = exact_min_tree(net, s, recv, q);
        for (int i = 0; i < 50; ++i) {
            Tree t = sample_random_tree(net, s, recv, q, rng, 1.0);
            CHECK(t.edges == exact.edges);
        }
    }

    SUBCASE("zero costs still produce valid trees") {
        Rng rng(2);
        for (int i = 0; i < 50; ++i) {
            Tree t = sample_random_tree(net, s, recv, zero_costs(net), rng, 0.0);
            CHECK(valid_tree(net, s, recv, t));
        }
    }

    SUBCASE("min-cost frequency at least the injection probability") {
        Rng rng(3);
        const double delta = 0.1;
        const int samples = 10000;
        const double optimum = tree_cost(exact_min_tree(net, s, recv, q), q);
        int hits = 0;
        for (int i = 0; i < samples; ++i) {
            Tree t = sample_random_tree(net, s, recv, q, rng, delta);
            REQUIRE(valid_tree(net, s, recv, t));
            if (tree_cost(t, q) <= optimum + 1e-12) ++hits;
        }
        double sigma = std::sqrt(delta * (1.0 - delta) / samples);
        CHECK(static_cast<double>(hits) / samples >= delta - 3.0 * sigma);
    }
}

TEST_CASE("every producer yields valid trees") {
    Rng rng(321);
    for (int trial = 0; trial < 25; ++trial) {
        auto inst = testutil::random_instance(rng);
        CostVector q = testutil::random_integer_costs(inst.net, rng);
        std::string why;
        for (const Tree& t : {exact_min_tree(inst.net, inst.source, inst.receivers, q),
                              approx_min_tree(inst.net, inst.source, inst.receivers, q, 2),
                              sample_random_tree(inst.net, inst.source, inst.receivers, q, rng, 0.3),
                              breadth_first_tree(inst.net, inst.source, inst.receivers)}) {
            CHECK_MESSAGE(valid_tree(inst.net, inst.source, inst.receivers, t, &why), why);
        }
    }
}

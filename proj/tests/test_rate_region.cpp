#include <doctest.h>

#include "helpers.hpp"
#include "treecast/rate_region.hpp"

using namespace treecast;
using testutil::k4;
using testutil::make_session;

namespace {

struct K4Instance {
    Network net;
    std::vector<Session> sessions;
};

K4Instance k4_single() {
    Network net = k4();
    Session s = make_session(0, net.node_of_label(1),
                             {net.node_of_label(2), net.node_of_label(3)}, 1.0);
    return {std::move(net), {std::move(s)}};
}

}  // namespace

TEST_CASE("zero rates are inside with slack equal to the smallest capacity") {
    Network net = load_topology("0 1 5\n1 2 3\n2 3 4");
    std::vector<Session> sessions{make_session(0, 0, {3}, 0.0)};
    MembershipResult m = membership(net, sessions, {0.0});
    REQUIRE(m.inside);
    CHECK(m.allocation.eps0 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(verify_allocation(net, sessions, {0.0}, m.allocation));
}

TEST_CASE("overloaded single session is outside with a checkable certificate") {
    auto inst = k4_single();
    MembershipResult m = membership(inst.net, inst.sessions, {4.0});
    REQUIRE_FALSE(m.inside);
    // certificate: priced min load strictly exceeds priced capacity
    CHECK(m.certificate.min_priced_load > m.certificate.priced_capacity + 1e-9);
    CHECK(m.certificate.link_prices.minCoeff() >= 0.0);
    CHECK(m.certificate.link_prices.sum() == doctest::Approx(1.0).epsilon(1e-6));
    // re-derive the priced min load from the enumerated trees
    auto trees = enumerate_trees(inst.net, inst.sessions[0].source, inst.sessions[0].receivers);
    double best = std::numeric_limits<double>::infinity();
    for (const Tree& t : trees) best = std::min(best, tree_cost(t, m.certificate.link_prices));
    CHECK(m.certificate.min_priced_load == doctest::Approx(4.0 * best).epsilon(1e-9));
}

TEST_CASE("near-capacity rate is inside with the cut-bound slack") {
    auto inst = k4_single();
    MembershipResult m = membership(inst.net, inst.sessions, {2.9});
    REQUIRE(m.inside);
    // receiver in-cut: 2.9 + 3 eps0 <= 3
    CHECK(m.allocation.eps0 == doctest::Approx((3.0 - 2.9) / 3.0).epsilon(1e-6));
    CHECK(verify_allocation(inst.net, inst.sessions, {2.9}, m.allocation));
}

TEST_CASE("bottleneck path rate") {
    Network net = load_topology("0 1 5\n1 2 3\n2 3 4");
    std::vector<Session> sessions{make_session(0, 0, {3}, 1.0)};
    CHECK(max_uniform_rate(net, sessions) == 3.0);
}

TEST_CASE("toy complete digraph packs three trees") {
    auto inst = k4_single();
    double star = max_uniform_rate(inst.net, inst.sessions);
    CHECK(star == doctest::Approx(3.0).epsilon(1e-6 / 3.0));
}

TEST_CASE("two identical sessions share the only link") {
    Network net = load_topology("0 1 1");
    std::vector<Session> sessions{make_session(0, 0, {1}, 1.0), make_session(1, 0, {1}, 1.0)};
    CHECK(max_uniform_rate(net, sessions) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("membership flips across the maximum rate") {
    struct Case {
        Network net;
        std::vector<Session> sessions;
    };
    std::vector<Case> cases;
    {
        auto inst = k4_single();
        cases.push_back({std::move(inst.net), std::move(inst.sessions)});
    }
    cases.push_back({load_topology("0 1 5\n1 2 3\n2 3 4"), {make_session(0, 0, {3}, 1.0)}});
    cases.push_back({load_topology("0 1 1"),
                     {make_session(0, 0, {1}, 1.0), make_session(1, 0, {1}, 1.0)}});

    for (auto& c : cases) {
        double star = max_uniform_rate(c.net, c.sessions);
        REQUIRE(star > 0.0);
        std::vector<double> inside_rates(c.sessions.size(), star * (1.0 - 1e-6));
        std::vector<double> outside_rates(c.sessions.size(), star * (1.0 + 1e-3));
        MembershipResult in = membership(c.net, c.sessions, inside_rates);
        CHECK(in.inside);
        if (in.inside)
            CHECK(verify_allocation(c.net, c.sessions, inside_rates, in.allocation));
        CHECK_FALSE(membership(c.net, c.sessions, outside_rates).inside);
    }
}

TEST_CASE("sessions without trees are rejected") {
    Network net = load_topology("0 1 1\n2 0 1");
    std::vector<Session> sessions{make_session(0, 0, {2}, 1.0)};
    CHECK_THROWS_AS(max_uniform_rate(net, sessions), ValidationError);
}

TEST_CASE("enumeration bound propagates as a size error") {
    Network net;
    for (int v = 0; v < 10; ++v) net.intern_node(v);
    for (int v = 0; v + 1 < 10; ++v) net.add_link(v, v + 1, 1.0);
    std::vector<Session> sessions{make_session(0, 0, {9}, 1.0)};
    CHECK_THROWS_AS(max_uniform_rate(net, sessions), SizeError);
}

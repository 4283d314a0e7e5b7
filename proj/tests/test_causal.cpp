#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "daid/causal.hpp"
#include "daid/errors.hpp"
#include "daid/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace daid;

namespace {

std::set<int> to_ids(const Dag& g, const std::set<std::string>& names) {
    std::set<int> out;
    for (const auto& n : names) out.insert(g.node_id(n));
    return out;
}

// Every subset of the node ids excluding x and y.
std::vector<std::set<int>> all_z_subsets(const Dag& g, int x, int y) {
    std::vector<int> pool;
    for (int i = 0; i < static_cast<int>(g.names.size()); ++i)
        if (i != x && i != y) pool.push_back(i);
    std::vector<std::set<int>> subsets;
    const std::size_t total = std::size_t{1} << pool.size();
    for (std::size_t mask = 0; mask < total; ++mask) {
        std::set<int> z;
        for (std::size_t b = 0; b < pool.size(); ++b)
            if (mask & (std::size_t{1} << b)) z.insert(pool[b]);
        subsets.push_back(std::move(z));
    }
    return subsets;
}

// Back-door criterion recomputed from its definition with the oracle pieces:
// no member of z descends from x, and z d-separates x and y once every edge
// out of x is removed.
bool oracle_backdoor(const Dag& g, int x, int y, const std::set<int>& z) {
    const auto desc = testutil::oracle_descendants(g, x);
    for (int v : z)
        if (desc.count(v)) return false;

    std::vector<std::pair<std::string, std::string>> kept;
    for (auto [a, b] : g.edges)
        if (a != x) kept.emplace_back(g.names[a], g.names[b]);
    const Dag trimmed = Dag::from_edges(g.names, kept);
    return testutil::oracle_d_separated(trimmed, x, y, z);
}

}  // namespace

TEST_CASE("dag construction and text round-trip") {
    const Dag g = Dag::from_edges({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
    CHECK(g.size() == 3);
    CHECK(g.node_id("b") == 1);
    CHECK(g.children[0].size() == 2);
    CHECK(g.parents[2].size() == 2);
    CHECK_THROWS_AS(g.node_id("zz"), UnknownNode);

    const Dag back = Dag::parse(g.to_text());
    CHECK(back.names == g.names);
    CHECK(back.edges == g.edges);
}

TEST_CASE("dag rejects cycles, self-loops and duplicates") {
    CHECK_THROWS_AS(Dag::from_edges({"a", "b"}, {{"a", "b"}, {"b", "a"}}), ConfigError);
    CHECK_THROWS_AS(Dag::from_edges({"a"}, {{"a", "a"}}), ConfigError);
    CHECK_THROWS_AS(Dag::from_edges({"a", "b"}, {{"a", "b"}, {"a", "b"}}), ConfigError);
    CHECK_THROWS_AS(
        Dag::from_edges({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}}),
        ConfigError);
}

TEST_CASE("dag parse accepts comments and node lines, reports bad lines") {
    const std::string text =
        "# confounding structure\n"
        "node isolated\n"
        "\n"
        "edge x -> m\n"
        "edge m -> y\n";
    const Dag g = Dag::parse(text);
    CHECK(g.size() == 4);
    CHECK(g.edges.size() == 2);
    CHECK_NOTHROW(g.node_id("isolated"));

    try {
        Dag::parse("edge x ->\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
    }
    try {
        Dag::parse("edge a -> b\nfoo bar\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("descendants on a small fixture") {
    const Dag g =
        Dag::from_edges({"a", "b", "c", "d", "e"},
                        {{"a", "b"}, {"b", "c"}, {"b", "d"}, {"e", "d"}});
    CHECK(descendants(g, g.node_id("a")) ==
          std::set<int>{g.node_id("b"), g.node_id("c"), g.node_id("d")});
    CHECK(descendants(g, g.node_id("c")).empty());
    CHECK(descendants(g, g.node_id("e")) == std::set<int>{g.node_id("d")});
}

TEST_CASE("d-separation hand fixtures") {
    SUBCASE("direct edge is never blocked") {
        const Dag g = Dag::from_edges({"x", "y", "w"}, {{"x", "y"}, {"w", "x"}, {"w", "y"}});
        const int x = g.node_id("x");
        const int y = g.node_id("y");
        for (const auto& z : all_z_subsets(g, x, y)) CHECK(!d_separated_ids(g, x, y, z));
    }

    SUBCASE("collider blocks empty, opens when conditioned") {
        const Dag g = Dag::from_edges({"x", "c", "y"}, {{"x", "c"}, {"y", "c"}});
        CHECK(d_separated(g, "x", "y", {}));
        CHECK(!d_separated(g, "x", "y", {"c"}));
    }

    SUBCASE("conditioning a collider descendant also opens the path") {
        const Dag g =
            Dag::from_edges({"x", "c", "y", "d"}, {{"x", "c"}, {"y", "c"}, {"c", "d"}});
        CHECK(d_separated(g, "x", "y", {}));
        CHECK(!d_separated(g, "x", "y", {"d"}));
    }

    SUBCASE("chain blocks when the mediator is conditioned") {
        const Dag g = Dag::from_edges({"x", "m", "y"}, {{"x", "m"}, {"m", "y"}});
        CHECK(!d_separated(g, "x", "y", {}));
        CHECK(d_separated(g, "x", "y", {"m"}));
    }

    SUBCASE("input validation") {
        const Dag g = Dag::from_edges({"x", "y"}, {{"x", "y"}});
        CHECK_THROWS_AS(d_separated(g, "x", "x", {}), ConfigError);
        CHECK_THROWS_AS(d_separated(g, "x", "y", {"y"}), ConfigError);
        CHECK_THROWS_AS(d_separated(g, "x", "q", {}), UnknownNode);
    }
}

TEST_CASE("d-separation agrees with path enumeration on random dags") {
    auto rng = rng_stream(2718, stream::kInit);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Dag g = testutil::random_dag(rng, 6);
        const int n = static_cast<int>(g.size());
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                if (x == y) continue;
                for (const auto& z : all_z_subsets(g, x, y)) {
                    const bool lib = d_separated_ids(g, x, y, z);
                    const bool ref = testutil::oracle_d_separated(g, x, y, z);
                    if (lib != ref) {
                        const std::string gtext = g.to_text();
                        CAPTURE(gtext);
                        CAPTURE(x);
                        CAPTURE(y);
                        REQUIRE(lib == ref);
                    }
                    ++checked;
                }
            }
    }
    CHECK(checked > 10000);
}

TEST_CASE("backdoor criterion hand fixtures") {
    SUBCASE("confounder adjustment set satisfies the criterion") {
        const Dag g = fairness_generalization_dag();
        const BackdoorResult r = backdoor_criterion(g, "F", "A", {"DD", "MC"});
        CHECK(r.satisfied);
        CHECK(r.failed_condition == 0);

        const BackdoorResult partial = backdoor_criterion(g, "F", "A", {"DD"});
        CHECK(!partial.satisfied);
        CHECK(partial.failed_condition == 2);
    }

    SUBCASE("descendant in z fails condition 1") {
        const Dag g = Dag::from_edges({"x", "m", "y"}, {{"x", "m"}, {"m", "y"}});
        const BackdoorResult r = backdoor_criterion(g, "x", "y", {"m"});
        CHECK(!r.satisfied);
        CHECK(r.failed_condition == 1);
        CHECK(r.witness.find("m") != std::string::npos);
    }

    SUBCASE("unblocked back-door path fails condition 2 with a witness path") {
        const Dag g = Dag::from_edges({"x", "u", "y"}, {{"u", "x"}, {"u", "y"}});
        const BackdoorResult r = backdoor_criterion(g, "x", "y", {});
        CHECK(!r.satisfied);
        CHECK(r.failed_condition == 2);
        CHECK(r.witness.find("u") != std::string::npos);

        CHECK(backdoor_criterion(g, "x", "y", {"u"}).satisfied);
    }
}

TEST_CASE("backdoor criterion agrees with its definition on random dags") {
    auto rng = rng_stream(3141, stream::kInit);
    for (int trial = 0; trial < 120; ++trial) {
        const Dag g = testutil::random_dag(rng, 5);
        const int n = static_cast<int>(g.size());
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                if (x == y) continue;
                for (const auto& z : all_z_subsets(g, x, y)) {
                    std::set<std::string> zn;
                    for (int v : z) zn.insert(g.names[static_cast<std::size_t>(v)]);
                    const bool lib =
                        backdoor_criterion(g, g.names[static_cast<std::size_t>(x)],
                                           g.names[static_cast<std::size_t>(y)], zn)
                            .satisfied;
                    REQUIRE(lib == oracle_backdoor(g, x, y, z));
                }
            }
    }
}

TEST_CASE("descendants agree with the oracle on random dags") {
    auto rng = rng_stream(1618, stream::kInit);
    for (int trial = 0; trial < 100; ++trial) {
        const Dag g = testutil::random_dag(rng, 6);
        for (int v = 0; v < static_cast<int>(g.size()); ++v)
            CHECK(descendants(g, v) == testutil::oracle_descendants(g, v));
    }
}

namespace {

std::vector<Stratum> two_strata(double w0, double w1) {
    Stratum a;
    a.dd = SubgroupKey{0};
    a.mc = "small";
    a.weight = w0;
    Stratum b;
    b.dd = SubgroupKey{1};
    b.mc = "small";
    b.weight = w1;
    return {a, b};
}

StratumId id_of(const Stratum& s) {
    StratumId id;
    id.dd = s.dd;
    id.mc = s.mc;
    return id;
}

}  // namespace

TEST_CASE("backdoor_adjust fixtures") {
    const auto strata = two_strata(0.6, 0.4);
    OutcomeTable t;
    t[{0, id_of(strata[0])}] = 0.8;
    t[{0, id_of(strata[1])}] = 0.9;

    CHECK(backdoor_adjust(t, strata, 0) == doctest::Approx(0.84).epsilon(1e-15));

    SUBCASE("constant outcomes return the constant") {
        OutcomeTable c;
        c[{1, id_of(strata[0])}] = 0.7;
        c[{1, id_of(strata[1])}] = 0.7;
        CHECK(backdoor_adjust(c, strata, 1) == doctest::Approx(0.7).epsilon(1e-15));
    }

    SUBCASE("point mass returns that stratum's outcome") {
        const auto point = two_strata(1.0, 0.0);
        OutcomeTable c;
        c[{0, id_of(point[0])}] = 0.8;
        c[{0, id_of(point[1])}] = 0.9;
        CHECK(backdoor_adjust(c, point, 0) == 0.8);
    }

    SUBCASE("missing cell and weight errors") {
        CHECK_THROWS_AS(backdoor_adjust(t, strata, 1), MissingCell);
        CHECK_THROWS_AS(backdoor_adjust(t, two_strata(0.6, 0.6), 0), WeightSumError);
        CHECK_THROWS_AS(backdoor_adjust(t, two_strata(1.4, -0.4), 0), WeightSumError);
        CHECK_THROWS_AS(backdoor_adjust(t, {}, 0), EmptyInput);
    }
}

TEST_CASE("ace fixtures") {
    const auto strata = two_strata(0.6, 0.4);

    SUBCASE("identical outcome rows give a zero effect") {
        OutcomeTable t;
        for (int f : {0, 1}) {
            t[{f, id_of(strata[0])}] = 0.81;
            t[{f, id_of(strata[1])}] = 0.77;
        }
        const AceEstimate est = ace(t, strata);
        CHECK(est.ace == 0.0);
        CHECK(est.per_stratum.size() == 2);
        for (const auto& s : est.per_stratum) CHECK(s.diff == 0.0);
    }

    SUBCASE("hand-weighted difference") {
        OutcomeTable t;
        t[{0, id_of(strata[0])}] = 0.80;
        t[{1, id_of(strata[0])}] = 0.82;
        t[{0, id_of(strata[1])}] = 0.85;
        t[{1, id_of(strata[1])}] = 0.90;
        const AceEstimate est = ace(t, strata);
        CHECK(est.ace == doctest::Approx(0.032).epsilon(1e-12));
        CHECK(est.mu0 == doctest::Approx(0.82).epsilon(1e-15));
        // ace equals the weighted per-stratum differences.
        double acc = 0.0;
        for (std::size_t i = 0; i < est.per_stratum.size(); ++i)
            acc += est.per_stratum[i].diff * strata[i].weight;
        CHECK(est.ace == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("adjustment is exactly linear in the treatment level") {
    auto rng = rng_stream(5050, stream::kInit);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rint_below(rng, 5);
        std::vector<Stratum> strata;
        std::vector<double> raw;
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            raw.push_back(0.05 + runif01(rng));
            sum += raw.back();
        }
        OutcomeTable t;
        for (std::size_t i = 0; i < k; ++i) {
            Stratum s;
            s.dd = SubgroupKey{static_cast<int>(i)};
            s.mc = i % 2 == 0 ? "small" : "large";
            s.weight = raw[i] / sum;
            strata.push_back(s);
            // Outcomes inside [0.55, 0.95] keep both adjusted levels well
            // within a factor of two of each other, so the subtraction in
            // the effect estimate is exact and the identity below holds
            // bitwise, not approximately.
            t[{0, id_of(s)}] = 0.55 + 0.4 * runif01(rng);
            t[{1, id_of(s)}] = 0.55 + 0.4 * runif01(rng);
        }
        const AceEstimate est = ace(t, strata);
        for (int f : {0, 1}) {
            const double adjusted = backdoor_adjust(t, strata, f);
            const double linear = est.mu0 + static_cast<double>(f) * est.ace;
            CHECK(adjusted - linear == 0.0);
        }
    }
}

TEST_CASE("fairness-generalization graph shape") {
    const Dag g = fairness_generalization_dag();
    CHECK(g.size() == 4);
    CHECK(g.edges.size() == 5);
    const int f = g.node_id("F");
    const int a = g.node_id("A");
    const int dd = g.node_id("DD");
    const int mc = g.node_id("MC");
    CHECK(testutil::oracle_has_edge(g, f, a));
    CHECK(testutil::oracle_has_edge(g, dd, f));
    CHECK(testutil::oracle_has_edge(g, dd, a));
    CHECK(testutil::oracle_has_edge(g, mc, f));
    CHECK(testutil::oracle_has_edge(g, mc, a));
}

TEST_CASE("binarize_fairness uses a strict threshold") {
    CHECK(binarize_fairness(0.49, 0.5) == 1);
    CHECK(binarize_fairness(0.5, 0.5) == 0);
    CHECK(binarize_fairness(0.51, 0.5) == 0);
    CHECK(binarize_fairness(-0.49, 0.5) == 1);
    CHECK(binarize_fairness(-0.51, 0.5) == 0);
    CHECK(binarize_fairness(0.0, 0.5) == 1);
    CHECK_THROWS_AS(binarize_fairness(0.1, 0.0), ConfigError);
}

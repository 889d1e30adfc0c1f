#include <gtest/gtest.h>

#include <set>

#include "lexpr/catalog.hpp"
#include "lexpr/classes.hpp"
#include "lexpr/graph_io.hpp"
#include "lexpr/recognizers.hpp"
#include "support/oracles.hpp"

using namespace lexpr;

namespace {

std::set<std::string> keys(const std::vector<Structure>& v)
{
    std::set<std::string> out;
    for (const auto& s : v) out.insert(structure_key(canonical_form(s)));
    return out;
}

Structure two_k2() { return make_graph(4, {{0, 1}, {2, 3}}); }

LocalClass graph_class(std::vector<Structure> bounds, std::string name)
{
    auto g = LocalClass::simple_graphs();
    auto all = *g.bounds();
    all.insert(all.end(), bounds.begin(), bounds.end());
    return LocalClass::from_bounds(graph_signature(), all, std::move(name));
}

} // namespace

TEST(Mining, CompleteGraphs)
{
    const auto r = minimal_bounds_relative(recognizers::complete, LocalClass::simple_graphs(), 4);
    EXPECT_EQ(keys(r.bounds), keys({empty_graph(2)}));
    ASSERT_EQ(r.levels.size(), 5U);
    EXPECT_EQ(r.levels[4].examined, 11U);
}

TEST(Mining, SplitGraphs)
{
    const auto r = minimal_bounds_relative(recognizers::split, LocalClass::simple_graphs(), 5);
    EXPECT_EQ(keys(r.bounds), keys({two_k2(), cycle_graph(4), cycle_graph(5)}));
}

TEST(Mining, TriviallyPerfectGraphs)
{
    const auto r = minimal_bounds_relative(recognizers::trivially_perfect, LocalClass::simple_graphs(), 5);
    EXPECT_EQ(keys(r.bounds), keys({cycle_graph(4), path_graph(4)}));
}

TEST(Mining, ChordalGraphsUpToSix)
{
    const auto r = minimal_bounds_relative(recognizers::chordal, LocalClass::simple_graphs(), 6);
    EXPECT_EQ(keys(r.bounds), keys({cycle_graph(4), cycle_graph(5), cycle_graph(6)}));
}

TEST(Mining, OrientedGraphsInsideDigraphs)
{
    const auto& oriented = catalog::base_class("oriented");
    const Signature di = catalog::signature("DI");
    const auto r = minimal_bounds_relative(
        [&](const Structure& x) { return oriented.contains(x.with_signature(oriented.signature())); },
        LocalClass::everything(di), 3);
    Structure loop(di, 1), digon(di, 2);
    loop.set(0, {0, 0});
    digon.set(0, {0, 1});
    digon.set(0, {1, 0});
    EXPECT_EQ(keys(r.bounds), keys({loop, digon}));
}

TEST(Mining, NonHereditaryOracleIsLogicError)
{
    // Accepts exactly the graphs with an even number of vertices.
    EXPECT_THROW((void)minimal_bounds_relative([](const Structure& g) { return g.size() % 2 == 0; },
                                               LocalClass::simple_graphs(), 3),
                 LogicError);
}

TEST(Preimage, SymmetricClosureAndTriangle)
{
    const Signature di = catalog::signature("DI");
    const auto r = preimage_bounds(symmetric_definition(di), {complete_graph(3).with_signature(di)},
                                   catalog::base_class("digraphs"), 4);
    EXPECT_TRUE(r.agree);
    // Loopless digraphs on 3 vertices whose symmetric closure is K3.
    std::size_t expected = 0;
    for (const auto& x : enumerate_structures(di, 3, true)) {
        bool ok = true;
        for (int u = 0; u < 3; ++u) ok = ok && !x.has(0, {u, u});
        if (ok && reduct(symmetric_definition(di), x) == complete_graph(3).with_signature(di)) ++expected;
    }
    EXPECT_EQ(r.mined.size(), expected);
}

TEST(Preimage, WrongSignaturesAreInputErrors)
{
    const Signature di = catalog::signature("DI");
    const Signature other({{"F", 2}});
    EXPECT_THROW((void)preimage_bounds(symmetric_definition(di), {Structure(other, 2)}, catalog::base_class("digraphs"), 3),
                 InputError);
    EXPECT_THROW((void)preimage_bounds(symmetric_definition(di), {}, catalog::gk_class(1), 3), InputError);
}

TEST(Intersect, BoundsAreMergedAndMinimized)
{
    const auto a = graph_class({cycle_graph(4)}, "c4free");
    const auto b = graph_class({path_graph(4), cycle_graph(4)}, "p4c4free");
    const auto c = intersect(a, b);
    ASSERT_TRUE(c.bounds().has_value());
    EXPECT_TRUE(c.contains(path_graph(3)));
    EXPECT_FALSE(c.contains(path_graph(4)));
    EXPECT_FALSE(c.contains(cycle_graph(4)));
    EXPECT_EQ(keys(*c.bounds()), keys(*graph_class({path_graph(4), cycle_graph(4)}, "").bounds()));
}

TEST(Union, TriangleFreeOrEdgeless)
{
    // Union of K3-free and 2K1-free (complete) graphs inside simple graphs.
    const auto k3free = graph_class({complete_graph(3)}, "k3free");
    const auto complete = graph_class({empty_graph(2)}, "complete");
    MiningReport report;
    const auto u = union_classes(k3free, complete, 5, LocalClass::simple_graphs(), &report);
    for (const auto& g : enumerate_graphs_up_to(5)) {
        const bool expected = k3free.contains(g) || complete.contains(g);
        EXPECT_EQ(u.contains(g), expected) << to_graph6(g);
    }
    // Minimal graphs with a triangle and a non-edge: K3+K1, the paw and the diamond.
    EXPECT_EQ(keys(report.bounds), keys({make_graph(4, {{0, 1}, {1, 2}, {0, 2}}),
                                         make_graph(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}),
                                         make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}})}));
}

TEST(Union, WindowTooSmallIsInputError)
{
    const auto a = graph_class({complete_graph(3)}, "a");
    EXPECT_THROW((void)union_classes(a, a, 5, LocalClass::simple_graphs()), InputError);
}

TEST(Locality, ChordalIsNotLocalAtFour)
{
    std::optional<Structure> witness;
    EXPECT_FALSE(is_local_up_to(recognizers::chordal, 4, 5, LocalClass::simple_graphs(), &witness));
    ASSERT_TRUE(witness.has_value());
    EXPECT_TRUE(are_isomorphic(*witness, cycle_graph(5)));
    EXPECT_TRUE(is_local_up_to(recognizers::split, 5, 6, LocalClass::simple_graphs()));
    EXPECT_TRUE(is_local_up_to(recognizers::complete, 2, 5, LocalClass::simple_graphs()));
}

TEST(LocalClass, BothPresentationsAreCheckedForAgreement)
{
    const auto g = LocalClass::simple_graphs();
    EXPECT_TRUE(g.agreement_checked());
    auto e = [](int a, int b) { return Formula::atom("E", {a, b}); };
    Structure loop(graph_signature(), 1);
    loop.set(0, {0, 0});
    // The axioms forbid loops, the bounds forbid nothing.
    EXPECT_THROW((void)LocalClass::from_both(graph_signature(), {}, {{(!e(0, 0)).with_arity(1)}}, "bad"), LogicError);
    EXPECT_FALSE(LocalClass::from_both(graph_signature(), {loop}, {{(!e(0, 0)).with_arity(1)}}, "ok").contains(loop));
}

TEST(LocalClass, WindowAndSignatureChecks)
{
    EXPECT_EQ(graph_class({cycle_graph(5)}, "").window(), 5);
    EXPECT_THROW((void)LocalClass::simple_graphs().contains(Structure(Signature({{"F", 2}}), 1)), InputError);
    EXPECT_THROW((void)LocalClass::from_bounds(graph_signature(), {Structure(Signature({{"F", 2}}), 1)}), InputError);
}

TEST(MinimizeBounds, DropsDuplicatesAndSuperstructures)
{
    const auto m = minimize_bounds({cycle_graph(4), relabel(cycle_graph(4), std::vector<int>{1, 0, 2, 3}),
                                    empty_graph(2), empty_graph(3)});
    EXPECT_EQ(keys(m), keys({empty_graph(2)}));
}

TEST(Prelude, BaseClassesMatchTheirDescriptions)
{
    const auto& graphs = catalog::base_class("graphs");
    for (const auto& g : enumerate_graphs_up_to(4)) EXPECT_TRUE(graphs.contains(g));
    const auto& lor = catalog::base_class("lor");
    const Signature& s = lor.signature();
    Structure ordered(s, 3);
    ordered.set(1, {0, 1});
    ordered.set(1, {1, 2});
    EXPECT_FALSE(lor.contains(ordered)); // not transitive
    ordered.set(1, {0, 2});
    EXPECT_TRUE(lor.contains(ordered));
    EXPECT_EQ(enumerate_members(lor, 3).size(), 8U); // the order leaves no symmetry: 2^3 graphs
}

TEST(Prelude, AcyclicOrientationApproximation)
{
    const auto ao = catalog::ao_class(4);
    const auto& or_sig = catalog::signature("OR");
    auto orient = [&](int n, std::vector<Edge> arcs) { return make_digraph(n, arcs).with_signature(or_sig); };
    EXPECT_TRUE(ao.contains(orient(3, {{0, 1}, {1, 2}, {0, 2}})));
    EXPECT_FALSE(ao.contains(orient(3, {{0, 1}, {1, 2}, {2, 0}})));
    EXPECT_FALSE(ao.contains(orient(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})));
    // Exact on four vertices: every member is acyclic, so it has a topological order.
    for (const auto& x : enumerate_members(ao, 4)) {
        bool acyclic = false;
        std::vector<int> p{0, 1, 2, 3};
        do {
            bool ok = true;
            for (int i = 0; i < 4 && ok; ++i)
                for (int j = 0; j < i && ok; ++j) ok = !x.has(0, {p[i], p[j]});
            acyclic = acyclic || ok;
        } while (!acyclic && std::next_permutation(p.begin(), p.end()));
        EXPECT_TRUE(acyclic) << describe(x);
    }
    EXPECT_THROW((void)catalog::ao_class(2), InputError);
}

TEST(Prelude, ColouredGraphsCarryExactlyOneColour)
{
    const auto g2 = catalog::gk_class(2);
    EXPECT_EQ(g2.signature().size(), 3U);
    Structure x(g2.signature(), 1);
    EXPECT_FALSE(g2.contains(x));
    x.set(1, {0});
    EXPECT_TRUE(g2.contains(x));
    x.set(2, {0});
    EXPECT_FALSE(g2.contains(x));
    // Colour pairs 11, 22, 12, each with or without the edge.
    EXPECT_EQ(enumerate_members(g2, 2).size(), 6U);
}

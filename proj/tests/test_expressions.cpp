#include <gtest/gtest.h>

#include "lexpr/catalog.hpp"
#include "lexpr/dsl.hpp"
#include "lexpr/expressions.hpp"
#include "lexpr/graph_io.hpp"
#include "lexpr/recognizers.hpp"
#include "support/oracles.hpp"

using namespace lexpr;

namespace {

const LocalExpression& entry(const std::string& name)
{
    static std::map<std::string, LocalExpression> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, catalog::builtin(name).expression).first;
    return it->second;
}

bool member(const LocalExpression& e, const Structure& g) { return decide(e, g).member(); }

/// Expressions over a one-symbol target F, so targets differ from graphs.
LocalExpression f_identity()
{
    const Signature f({{"F", 2}}, "F");
    return LocalExpression("fid", identity_definition(f), LocalClass::everything(f), {});
}

QfDefinition lor_complement()
{
    const Signature& lor = catalog::signature("LOR");
    const Formula e = Formula::atom("E", {0, 1});
    return {lor, lor, {(!e) & !Formula::eq(0, 1), Formula::atom("LT", {0, 1})}, "coE"};
}

QfDefinition lor_reverse()
{
    const Signature& lor = catalog::signature("LOR");
    return {lor, lor, {Formula::atom("E", {0, 1}), Formula::atom("LT", {1, 0})}, "rev"};
}

QfDefinition graph_complement_definition()
{
    const Formula e = Formula::atom("E", {0, 1});
    return {graph_signature(), graph_signature(), {(!e) & !Formula::eq(0, 1)}, "coG"};
}

} // namespace

TEST(Pullback, MembersOfBoth)
{
    const auto pb = pullback(entry("chordal_peo"), entry("bipartite_or"));
    for (const auto& g : enumerate_graphs_up_to(5)) {
        const auto r = decide(pb, g);
        EXPECT_EQ(r.member(), recognizers::chordal(g) && recognizers::bipartite(g)) << to_graph6(g);
        if (r.member()) EXPECT_TRUE(verify(pb, g, *r.certificate));
    }
}

TEST(Pullback, CarrierSymbolsAreRenamedApart)
{
    const auto pb = pullback(entry("chordal_peo"), entry("complete_lor"));
    EXPECT_EQ(pb.carrier().size(), 4U);
    EXPECT_EQ(pb.encodings().size(), 2U);
    std::set<std::string> names;
    for (const auto& s : pb.carrier().symbols()) names.insert(s.name);
    EXPECT_EQ(names.size(), 4U);
}

TEST(Pullback, DifferentTargetsAreInputError)
{
    EXPECT_THROW((void)pullback(entry("chordal_peo"), f_identity()), InputError);
    EXPECT_THROW((void)disjoint_union(entry("chordal_peo"), f_identity()), InputError);
}

TEST(DisjointUnion, MembersOfEither)
{
    const auto du = disjoint_union(entry("complete_lor"), entry("bipartite_or"));
    for (const auto& g : enumerate_graphs_up_to(5)) {
        const auto r = decide(du, g);
        EXPECT_EQ(r.member(), recognizers::complete(g) || recognizers::bipartite(g)) << to_graph6(g);
        if (r.member()) EXPECT_TRUE(verify(du, g, *r.certificate));
    }
}

TEST(Transform, ComplementGivesCoChordalGraphs)
{
    const auto co = transform(entry("chordal_peo"), lor_complement(), graph_complement_definition());
    EXPECT_EQ(co.encodings().size(), 1U);
    for (const auto& g : enumerate_graphs_up_to(5))
        EXPECT_EQ(member(co, g), recognizers::chordal(graph_complement(g))) << to_graph6(g);
}

TEST(Transform, ReversedOrderKeepsTheClassAndTheEncoding)
{
    const auto rev = transform(entry("chordal_peo"), lor_reverse(), identity_definition(graph_signature()));
    ASSERT_EQ(rev.encodings().size(), 1U);
    for (const auto& g : enumerate_graphs_up_to(5)) EXPECT_EQ(member(rev, g), recognizers::chordal(g)) << to_graph6(g);
}

TEST(Transform, MirrorKeepsIntervalMembership)
{
    const auto& e = entry("interval_lor");
    const auto mirror = transform(e, lor_reverse(), identity_definition(graph_signature()));
    for (const auto& g : enumerate_graphs_up_to(5)) EXPECT_EQ(member(mirror, g), member(e, g)) << to_graph6(g);
}

TEST(Transform, ArcReversalKeepsBipartiteMembership)
{
    const auto& e = entry("bipartite_or");
    const Signature& or_sig = catalog::signature("OR");
    const QfDefinition reverse(or_sig, or_sig, {Formula::atom("E", {1, 0})}, "rev");
    const auto t = transform(e, reverse, identity_definition(graph_signature()));
    for (const auto& g : enumerate_graphs_up_to(5)) EXPECT_EQ(member(t, g), member(e, g)) << to_graph6(g);
}

TEST(Transform, NonIntertwiningPairIsLogicError)
{
    // Complementing E on the carrier without complementing the input.
    EXPECT_THROW((void)transform(entry("chordal_peo"), lor_complement(), identity_definition(graph_signature())),
                 LogicError);
}

TEST(Transform, NonInvolutionIsLogicError)
{
    const Signature& lor = catalog::signature("LOR");
    const QfDefinition drop(lor, lor, {Formula::atom("E", {0, 1}), Formula::bottom(2)}, "drop");
    EXPECT_THROW((void)transform(entry("chordal_peo"), drop, identity_definition(graph_signature())), LogicError);
}

TEST(Verify, FailureReasons)
{
    const auto& e = entry("chordal_peo");
    const auto g = path_graph(3);
    const auto r = decide(e, g);
    ASSERT_TRUE(r.member());
    EXPECT_EQ(verification_failure(e, g, *r.certificate), "");

    Structure wrong_graph = *r.certificate;
    wrong_graph.set(0, {0, 2});
    wrong_graph.set(0, {2, 0});
    EXPECT_EQ(verification_failure(e, g, wrong_graph), "reduct differs from the input");

    Structure cyclic = *r.certificate; // LT no longer a strict order
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v) cyclic.set(1, {u, v}, u != v);
    EXPECT_EQ(verification_failure(e, g, cyclic), "certificate is outside the base class");

    // Middle vertex first: its two later neighbours are non-adjacent.
    Structure bad = r.certificate->with_signature(e.carrier());
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v) bad.set(1, {u, v}, false);
    bad.set(1, {1, 0});
    bad.set(1, {1, 2});
    bad.set(1, {0, 2});
    EXPECT_EQ(verification_failure(e, g, bad), "certificate contains a forbidden structure");

    EXPECT_THROW((void)verify(e, g, Structure(e.carrier(), 2)), InputError);
    EXPECT_THROW((void)verify(e, empty_graph(3), Structure(catalog::signature("COOR"), 3)), InputError);
}

TEST(Snp, ChordalSentenceShape)
{
    const auto s = snp_sentence(entry("chordal_peo"));
    // E is identified with the input; LT is the only existential relation.
    ASSERT_EQ(s.existential.size(), 1U);
    EXPECT_EQ(s.existential[0].name, "LT");
    EXPECT_EQ(s.arity, 3);
    const std::string text = render_snp(entry("chordal_peo"));
    EXPECT_NE(text.find("exists LT/2"), std::string::npos);
    EXPECT_EQ(to_text(parse_snp(text)), text);
}

TEST(Snp, CarrierNamesClashingWithTheTargetAreRenamed)
{
    const auto s = snp_sentence(entry("bipartite_or"));
    ASSERT_EQ(s.existential.size(), 1U);
    EXPECT_EQ(s.existential[0].name, "E_c");
    // The last conjunct ties the input E to the carrier's orientation.
    EXPECT_TRUE(symbols_of(s.conjuncts.back()).count("E"));
    EXPECT_TRUE(symbols_of(s.conjuncts.back()).count("E_c"));
}

TEST(Snp, BruteForceTruthMatchesDecide)
{
    for (const std::string name : {"chordal_peo", "bipartite_or", "complete_lor"}) {
        const auto s = parse_snp(render_snp(entry(name)));
        for (const auto& g : enumerate_graphs_up_to(4))
            EXPECT_EQ(oracle::snp_holds(s, g), member(entry(name), g)) << name << " " << to_graph6(g);
    }
}

TEST(LocalExpression, CoherenceChecks)
{
    const auto& lor = catalog::signature("LOR");
    const auto d = catalog::definition("forget_order");
    const auto& base = catalog::base_class("lor");
    EXPECT_THROW(LocalExpression("x", d, LocalClass::simple_graphs(), {}), InputError);
    EXPECT_THROW(LocalExpression("x", d, base, {Structure(catalog::signature("COOR"), 2)}), InputError);
    EXPECT_THROW(LocalExpression("x", d, base, {}, {{"Q", EncodingKind::LinearOrder}}), InputError);
    EXPECT_THROW(LocalExpression("x", d, base, {}, {{"LT", EncodingKind::CircularOrder}}), InputError);
    EXPECT_THROW(LocalExpression("x", d, base, {}, {{"LT", EncodingKind::LinearOrder}, {"LT", EncodingKind::LinearOrder}}),
                 InputError);
    EXPECT_NO_THROW(LocalExpression("x", d, base, {Structure(lor, 1)}, {{"LT", EncodingKind::LinearOrder}}));
}

TEST(LocalExpression, ValidateFlagsEncodingsTheBaseRejects)
{
    // A partial-order base admits relations a linear encoding never produces.
    const auto d = QfDefinition(graph_signature(), catalog::signature("PO"), {Formula::atom("E", {0, 1})}, "f");
    const LocalExpression e("po_lin", d, catalog::base_class("po"), {}, {{"LT", EncodingKind::LinearOrder}});
    EXPECT_THROW((void)validate(e), LogicError);
    for (const auto& name : catalog::list()) EXPECT_NO_THROW((void)validate(entry(name))) << name;
}

TEST(LocalExpression, ValidateWarnsAboutForbiddenStructuresOutsideTheBase)
{
    const auto& lor = catalog::signature("LOR");
    Structure loop(lor, 1);
    loop.set(0, {0, 0});
    const LocalExpression e("w", catalog::definition("forget_order"), catalog::base_class("lor"), {loop});
    EXPECT_EQ(validate(e).warnings.size(), 1U);
}

TEST(Encodings, RelationCounts)
{
    // n!, (n-1)! and Bell numbers.
    EXPECT_EQ(encoded_relations(EncodingKind::LinearOrder, 4).size(), 24U);
    EXPECT_EQ(encoded_relations(EncodingKind::CircularOrder, 5).size(), 24U);
    EXPECT_EQ(encoded_relations(EncodingKind::Equivalence, 5).size(), 52U);
    for (auto kind : {EncodingKind::LinearOrder, EncodingKind::CircularOrder, EncodingKind::Equivalence})
        for (int n = 1; n <= 4; ++n) {
            std::set<std::vector<std::uint8_t>> distinct;
            for (const auto& f : encoded_relations(kind, n)) distinct.insert(f);
            EXPECT_EQ(distinct.size(), oracle::encoded_candidates(kind, n).size());
        }
}

TEST(SubgraphClosure, DirectedPathInOrientedGraphs)
{
    const auto& base = catalog::base_class("oriented");
    const Structure p = make_digraph(3, {{0, 1}, {1, 2}}).with_signature(base.signature());
    const auto closure = subgraph_closure(p, base);
    // The path, the transitive triangle and the directed triangle.
    EXPECT_EQ(closure.size(), 3U);
    EXPECT_THROW((void)subgraph_closure(p, base, 2), ResourceError);
    EXPECT_THROW((void)subgraph_closure(Structure(catalog::signature("COOR"), 3), base), InputError);
}

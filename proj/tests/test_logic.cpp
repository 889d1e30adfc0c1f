#include <gtest/gtest.h>

#include <random>

#include "lexpr/graph_io.hpp"
#include "lexpr/logic.hpp"
#include "support/oracles.hpp"

using namespace lexpr;

namespace {

Signature di() { return Signature({{"E", 2}}, "DI"); }
Formula e(int a, int b) { return Formula::atom("E", {a, b}); }

Structure digraph(int n, const std::vector<Edge>& arcs)
{
    Structure s(di(), n);
    for (auto [u, v] : arcs) s.set(0, {u, v});
    return s;
}

Structure sym_closure(const Structure& a)
{
    Structure out(a.signature(), a.size());
    for (int u = 0; u < a.size(); ++u)
        for (int v = 0; v < a.size(); ++v)
            if (a.has(0, {u, v}) || a.has(0, {v, u})) out.set(0, {u, v});
    return out;
}

} // namespace

TEST(Reduct, SymmetricClosureOfDirectedPath)
{
    const auto r = reduct(symmetric_definition(di()), digraph(3, {{0, 1}, {1, 2}}));
    EXPECT_EQ(r, digraph(3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}}));
}

TEST(Reduct, ComplementKeepsLoopsOutOfTheEdgeRelation)
{
    // Complement of the empty digraph includes loops; simplification removes them.
    const auto co = reduct(complement_definition(di()), digraph(2, {}));
    EXPECT_EQ(co.tuples(0).size(), 4U);
    EXPECT_EQ(reduct(simplification_definition(di()), co), digraph(2, {{0, 1}, {1, 0}}));
}

TEST(Reduct, SignatureMismatchIsInputError)
{
    EXPECT_THROW((void)reduct(symmetric_definition(di()), Structure(Signature({{"F", 2}}), 2)), InputError);
}

TEST(QfDefinition, RejectsWrongFormulaCountAndArity)
{
    EXPECT_THROW(QfDefinition(di(), di(), {}), InputError);
    EXPECT_THROW(QfDefinition(di(), di(), {e(0, 2)}), InputError);
    EXPECT_THROW(QfDefinition(di(), di(), {Formula::atom("F", {0, 1})}), InputError);
}

TEST(Apply, TranslationIdentityOnRandomTriples)
{
    std::mt19937 rng(11);
    const Signature pi({{"R", 2}, {"P", 1}, {"T", 3}});
    const Signature sigma({{"E", 2}, {"U", 1}});
    for (int i = 0; i < 300; ++i) {
        const auto d = oracle::random_definition(sigma, pi, rng);
        const int k = 1 + i % 3;
        const auto phi = oracle::random_formula(sigma, k, 4, rng);
        const auto a = oracle::random_structure(pi, 1 + i % 4, rng);
        const auto translated = apply(d, phi);
        const auto sh = reduct(d, a);
        std::vector<int> t(static_cast<std::size_t>(k), 0);
        do {
            ASSERT_EQ(evaluate(translated, a, t), evaluate(phi, sh, t)) << "case " << i;
        } while (detail::next_tuple(t, a.size()));
    }
}

TEST(Compose, ReductOfCompositionOnRandomTriples)
{
    std::mt19937 rng(12);
    const Signature pi({{"R", 2}, {"P", 1}});
    const Signature sigma({{"E", 2}, {"U", 1}});
    const Signature tau({{"H", 3}});
    for (int i = 0; i < 300; ++i) {
        const auto g = oracle::random_definition(tau, sigma, rng);
        const auto d = oracle::random_definition(sigma, pi, rng);
        const auto a = oracle::random_structure(pi, 1 + i % 4, rng);
        ASSERT_EQ(reduct(compose(g, d), a), reduct(g, reduct(d, a))) << "case " << i;
    }
}

TEST(Compose, CarrierMismatchIsInputError)
{
    EXPECT_THROW((void)compose(symmetric_definition(di()), two_graph_definition()), InputError);
}

TEST(Equivalence, ComplementTwiceIsIdentity)
{
    const auto co = complement_definition(di());
    EXPECT_TRUE(logically_equivalent(compose(co, co)["E"], e(0, 1)));
    EXPECT_FALSE(logically_equivalent(co["E"], e(0, 1)));
}

TEST(Equivalence, SymmetrizedAsymmetricPairIsBottom)
{
    const Formula asym = e(0, 1) & !e(1, 0);
    EXPECT_TRUE(is_satisfiable(asym));
    EXPECT_FALSE(is_satisfiable(apply(symmetric_definition(di()), asym)));
}

TEST(Equivalence, DistinguishingModelSeparatesTheFormulas)
{
    const Formula a = e(0, 1), b = e(1, 0);
    const auto m = distinguishing_model(a, b);
    ASSERT_TRUE(m.has_value());
    EXPECT_NE(evaluate(a, m->structure, m->tuple), evaluate(b, m->structure, m->tuple));
}

TEST(Equivalence, EqualityPatternsAreConsidered)
{
    // E(x,y) & x = y is a loop, so it is not equivalent to bottom.
    EXPECT_FALSE(logically_equivalent(e(0, 1) & Formula::eq(0, 1), Formula::bottom(2)));
    EXPECT_TRUE(logically_equivalent(e(0, 1) & !e(0, 1), Formula::bottom(2)));
}

TEST(Equivalence, ArityMismatchIsInputError)
{
    EXPECT_THROW((void)logically_equivalent(e(0, 1), Formula::atom("E", {0, 0})), InputError);
}

TEST(Satisfiability, AtomGuardRaisesResourceError)
{
    std::vector<Formula> parts;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) parts.push_back(e(i, j));
    // dif(6) rules out the small equality patterns, so the large one is reached.
    SatOptions opts;
    opts.max_atoms = 10;
    EXPECT_THROW((void)is_satisfiable(Formula::conj(parts) & dif(6), opts), ResourceError);
}

TEST(TwoGraph, OddTrianglesOnly)
{
    const auto tg = two_graph_definition();
    EXPECT_EQ(reduct(tg, complete_graph(3)).tuples(0).size(), 6U);
    EXPECT_TRUE(reduct(tg, path_graph(3)).tuples(0).empty());
    EXPECT_EQ(reduct(tg, make_graph(3, {{0, 1}})).tuples(0).size(), 6U);
}

TEST(Injectivity, IdentityIsInjectiveSymmetricClosureIsNot)
{
    EXPECT_TRUE(is_logically_injective(identity_definition(di()), 3));
    EXPECT_FALSE(is_logically_injective(symmetric_definition(di()), 2));
    EXPECT_FALSE(is_logically_injective(two_graph_definition(), 3));
}

TEST(Synthesis, SymmetricClosureTable)
{
    const auto t = FunctorTable::tabulate(di(), di(), 2, sym_closure);
    const auto d = synthesize_definition(t);
    EXPECT_TRUE(logically_equivalent(d["E"], e(0, 1) | e(1, 0)));
    for (const auto& entry : t.entries()) EXPECT_EQ(reduct(d, entry.domain), entry.image);
    for (const auto& a : enumerate_structures(di(), 3, true)) {
        EXPECT_EQ(reduct(d, a), weak_extension(t, a));
        EXPECT_EQ(reduct(d, a), sym_closure(a));
    }
}

TEST(Synthesis, EmptyImageGivesBottom)
{
    const auto t = FunctorTable::tabulate(di(), di(), 2, [](const Structure& a) { return Structure(di(), a.size()); });
    EXPECT_TRUE(logically_equivalent(synthesize_definition(t)["E"], Formula::bottom(2)));
}

TEST(Synthesis, InconsistentTableIsRejected)
{
    // A loop on a single vertex that disappears once a second vertex is added.
    const auto t = FunctorTable::tabulate(di(), di(), 2, [](const Structure& a) {
        Structure out(di(), a.size());
        if (a.size() == 1) out.set(0, {0, 0});
        return out;
    });
    EXPECT_THROW(t.check_consistency(), InputError);
    EXPECT_THROW((void)synthesize_definition(t), InputError);
}

TEST(FunctorTable, DuplicateClassAndWrongSizeAreRejected)
{
    const auto a = digraph(2, {{0, 1}});
    const auto b = digraph(2, {{1, 0}});
    EXPECT_THROW(FunctorTable(di(), di(), 2, {{a, a}, {b, b}}), InputError);
    EXPECT_THROW(FunctorTable(di(), di(), 2, {{a, Structure(di(), 3)}}), InputError);
    EXPECT_THROW(FunctorTable(di(), di(), 1, {{a, a}}), InputError);
}

TEST(FunctorTable, ImageOfTransportsAlongIsomorphism)
{
    const auto t = FunctorTable::tabulate(di(), di(), 2, sym_closure);
    const auto img = t.image_of(digraph(2, {{1, 0}}));
    ASSERT_TRUE(img.has_value());
    EXPECT_EQ(*img, digraph(2, {{0, 1}, {1, 0}}));
    EXPECT_FALSE(t.image_of(digraph(3, {})).has_value());
}

TEST(WeakExtension, OutsideTheDomainTuplesAreDropped)
{
    // Domain: loopless digraphs only; tuples through a looped vertex never appear.
    const auto t = FunctorTable::tabulate(
        di(), di(), 2, sym_closure, [](const Structure& a) {
            for (int v = 0; v < a.size(); ++v)
                if (a.has(0, {v, v})) return false;
            return true;
        });
    EXPECT_TRUE(t.domain_is_hereditary());
    const auto out = weak_extension(t, digraph(3, {{0, 0}, {0, 1}, {1, 2}}));
    EXPECT_EQ(out, digraph(3, {{1, 2}, {2, 1}}));
}

TEST(WeakExtension, NonHereditaryDomainIsRejected)
{
    FunctorTable t(di(), di(), 2, {{digraph(2, {}), digraph(2, {})}});
    EXPECT_FALSE(t.domain_is_hereditary());
    EXPECT_THROW((void)weak_extension(t, digraph(2, {})), InputError);
}

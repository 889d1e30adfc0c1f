#include <gtest/gtest.h>

#include <cstdint>

#include "lexpr/catalog.hpp"
#include "lexpr/expressions.hpp"
#include "lexpr/recognizers.hpp"
#include "support/oracles.hpp"

using namespace lexpr;

namespace {

bool member(const LocalExpression& e, const Structure& g) { return decide(e, g).member(); }

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Structure two_k2() { return make_graph(4, {{0, 1}, {2, 3}}); }

} // namespace

// ---------------------------------------------------------------------------
// Reference recognizers

TEST(Recognizers, SmallKnownAnswers)
{
    using namespace recognizers;
    EXPECT_TRUE(bipartite(cycle_graph(6)));
    EXPECT_FALSE(bipartite(cycle_graph(5)));
    EXPECT_TRUE(cobipartite(graph_sum(complete_graph(3), complete_graph(1))));
    EXPECT_FALSE(chordal(cycle_graph(4)));
    EXPECT_TRUE(chordal(complete_graph(4)));
    EXPECT_TRUE(split(path_graph(4)));
    EXPECT_FALSE(split(cycle_graph(5)));
    EXPECT_FALSE(split(two_k2()));
    EXPECT_FALSE(trivially_perfect(path_graph(4)));
    EXPECT_TRUE(trivially_perfect(graph_sum(complete_graph(3), path_graph(3))));
    EXPECT_TRUE(comparability(cycle_graph(6)));
    EXPECT_FALSE(comparability(cycle_graph(5)));
    EXPECT_TRUE(tucker_circular_arc(cycle_graph(5)));
    EXPECT_FALSE(tucker_circular_arc(graph_sum(cycle_graph(4), complete_graph(1))));
    EXPECT_TRUE(k_colourable(cycle_graph(5), 3));
    EXPECT_FALSE(k_colourable(cycle_graph(5), 2));
    EXPECT_FALSE(k_colourable(complete_graph(4), 3));
    EXPECT_TRUE(comparability_height(path_graph(4), 2));
    EXPECT_FALSE(comparability_height(complete_graph(3), 2));
}

TEST(Recognizers, DispatchAndGuards)
{
    EXPECT_TRUE(recognizers::recognize("k_colourable(2)", cycle_graph(4)));
    EXPECT_FALSE(recognizers::recognize("edgeless", path_graph(2)));
    EXPECT_THROW((void)recognizers::recognize("perfect", path_graph(2)), InputError);
    EXPECT_THROW((void)recognizers::split(empty_graph(recognizers::kBruteForceLimit + 1)), ResourceError);
    EXPECT_THROW((void)recognizers::bipartite(Structure(catalog::signature("COOR"), 2)), InputError);
}

// ---------------------------------------------------------------------------
// Shipped files

TEST(Catalog, ShippedFilesAreUnchanged)
{
    const std::map<std::string, std::uint64_t> frozen = {
        {"b1_free_or", 0x16612ad9077ed567ULL},
        {"bases", 0xf9ff22c4da50fd11ULL},
        {"bipartite_or", 0x1abd3639cf8541e4ULL},
        {"chordal_gen", 0xce5e9111b0408bd5ULL},
        {"chordal_peo", 0xd27c3695c4d0eaf6ULL},
        {"circulararc_coor", 0x74046ab6777a3baaULL},
        {"cobipartite_2ec", 0x28a58f266def4ee7ULL},
        {"cobipartite_or", 0xa9e8781e609e6721ULL},
        {"comparability_so", 0xb8789213a9b22768ULL},
        {"complete_lor", 0x208bcb4b393a33a0ULL},
        {"interval_lor", 0x471e04ea16523fa0ULL},
        {"pca_cobip_t2", 0x5daf06588b3ebcf7ULL},
        {"pca_or", 0x509d9d8f5ad17760ULL},
        {"threecol_lo2ec", 0x87c2d5f647ee6a5aULL},
        {"threecol_loor", 0x10e6016fb150f4e1ULL},
        {"trivially_perfect_gen", 0xcbce545b53971956ULL},
    };
    const auto files = catalog::shipped_files();
    EXPECT_EQ(files.size(), frozen.size());
    for (const auto& f : files) {
        ASSERT_TRUE(frozen.count(f)) << f;
        EXPECT_EQ(fnv1a(catalog::source(f)), frozen.at(f)) << f;
    }
}

TEST(Catalog, EveryEntryValidatesAndHasProvenance)
{
    for (const auto& name : catalog::list()) {
        const auto entry = catalog::builtin(name);
        EXPECT_EQ(entry.name, entry.expression.name());
        EXPECT_FALSE(entry.provenance.empty()) << name;
        EXPECT_NO_THROW((void)validate(entry.expression)) << name;
    }
}

TEST(Catalog, EntriesMatchTheirRecognizersUpToFive)
{
    for (const auto& name : catalog::list()) {
        const auto entry = catalog::builtin(name);
        if (!entry.recognizer) continue;
        for (const auto& g : enumerate_graphs_up_to(5))
            EXPECT_EQ(member(entry.expression, g), recognizers::recognize(*entry.recognizer, g))
                << name << " on " << to_graph6(g);
    }
}

TEST(Catalog, MembershipIsHereditary)
{
    // Every induced subgraph of a member is a member.
    for (const auto& name : catalog::list()) {
        const auto& e = catalog::builtin(name).expression;
        for (const auto& g : enumerate_graphs(5)) {
            if (!member(e, g)) continue;
            for (int v = 0; v < 5; ++v) {
                std::vector<int> rest;
                for (int u = 0; u < 5; ++u)
                    if (u != v) rest.push_back(u);
                EXPECT_TRUE(member(e, induced_substructure(g, rest))) << name << " " << to_graph6(g);
            }
        }
    }
}

TEST(Catalog, UnknownNameListsTheAvailableEntries)
{
    try {
        (void)catalog::builtin("perfect_graphs");
        FAIL() << "expected an error";
    } catch (const InputError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("chordal_peo"), std::string::npos);
        EXPECT_NE(what.find("m_partition"), std::string::npos);
    }
    EXPECT_THROW((void)catalog::builtin("rghv(x)"), InputError);
    EXPECT_THROW((void)catalog::builtin("rghv(0)"), InputError);
}

TEST(Catalog, FigureReadingOfTheSecondCobipartitePattern)
{
    // The red edge plus isolated vertex would reject K3+K1, whose complement is a star.
    std::string text = catalog::source("cobipartite_2ec");
    const std::string blue = "B = sym { (1,2) };";
    const auto at = text.find(blue);
    ASSERT_NE(at, std::string::npos);
    text.replace(at, blue.size(), "R = sym { (1,2) };");
    const auto doc = parse(text, &catalog::prelude());
    const auto& red = doc.expression("cobipartite_2ec");
    const Structure g = graph_sum(complete_graph(3), complete_graph(1));
    EXPECT_TRUE(recognizers::cobipartite(g));
    EXPECT_FALSE(member(red, g));
    EXPECT_TRUE(member(catalog::builtin("cobipartite_2ec").expression, g));
}

// ---------------------------------------------------------------------------
// Families

TEST(SmallGraph, Names)
{
    EXPECT_EQ(catalog::small_graph("K3"), complete_graph(3));
    EXPECT_EQ(catalog::small_graph("2K2"), two_k2());
    EXPECT_EQ(catalog::small_graph("C4+K1"), graph_sum(cycle_graph(4), complete_graph(1)));
    for (const std::string bad : {"", "X3", "K", "C2", "K0", "K3x"})
        EXPECT_THROW((void)catalog::small_graph(bad), InputError) << bad;
}

TEST(MPartition, MatrixParsing)
{
    using enum catalog::MEntry;
    const auto m = catalog::parse_matrix("[[1, *], [*, 0]]");
    EXPECT_EQ(m, (std::vector<std::vector<catalog::MEntry>>{{One, Star}, {Star, Zero}}));
    EXPECT_EQ(catalog::matrix_text(m), "[[1,*],[*,0]]");
    EXPECT_EQ(catalog::parse_matrix("[[+]]")[0][0], Plus);
    EXPECT_THROW((void)catalog::parse_matrix("[[1,2]]"), InputError);
    EXPECT_THROW((void)catalog::parse_matrix("[[1,*]"), InputError);
    EXPECT_THROW((void)catalog::parse_matrix("[[1,,*]]"), InputError);
    EXPECT_THROW((void)catalog::m_partition_expression(catalog::parse_matrix("[[1,0],[*,0]]")), InputError);
    EXPECT_THROW((void)catalog::m_partition_expression(catalog::parse_matrix("[[1,0]]")), InputError);
}

TEST(MPartition, AllStarAcceptsEverything)
{
    const auto e = catalog::builtin("m_partition([[*]])").expression;
    for (const auto& g : enumerate_graphs_up_to(5)) EXPECT_TRUE(member(e, g));
}

TEST(MPartition, ColouringMatricesAreColourability)
{
    for (int k = 1; k <= 3; ++k) {
        std::string text = "[";
        for (int i = 0; i < k; ++i) {
            text += i ? ",[" : "[";
            for (int j = 0; j < k; ++j) text += std::string(j ? "," : "") + (i == j ? "0" : "*");
            text += "]";
        }
        text += "]";
        const auto entry = catalog::builtin("m_partition(" + text + ")");
        ASSERT_TRUE(entry.recognizer.has_value());
        for (const auto& g : enumerate_graphs_up_to(5))
            EXPECT_EQ(member(entry.expression, g), recognizers::k_colourable(g, k)) << text << " " << to_graph6(g);
    }
}

TEST(MPartition, PlusEntryForcesAHomogeneousPart)
{
    // [[+]]: one part that is both a clique and independent, so at most one vertex.
    const auto e = catalog::builtin("m_partition([[+]])").expression;
    EXPECT_TRUE(member(e, complete_graph(1)));
    EXPECT_FALSE(member(e, complete_graph(2)));
    EXPECT_FALSE(member(e, empty_graph(2)));
}

TEST(Csp, SmallTargets)
{
    const auto k1 = catalog::builtin("csp(K1)").expression;
    const auto k2 = catalog::builtin("csp(K2)").expression;
    const auto p3 = catalog::builtin("csp(P3)").expression;
    for (const auto& g : enumerate_graphs_up_to(5)) {
        EXPECT_EQ(member(k1, g), recognizers::edgeless(g)) << to_graph6(g);
        EXPECT_EQ(member(k2, g), recognizers::bipartite(g)) << to_graph6(g);
        // P3 is bipartite with an edge, so P3-colourable means bipartite.
        EXPECT_EQ(member(p3, g), recognizers::bipartite(g)) << to_graph6(g);
    }
    EXPECT_THROW((void)catalog::builtin("csp(K4)"), ResourceError);
}

TEST(Rghv, OneColourMeansNoEdges)
{
    const auto e = catalog::builtin("rghv(1)").expression;
    for (const auto& g : enumerate_graphs_up_to(4)) EXPECT_EQ(member(e, g), recognizers::edgeless(g));
}

TEST(Pmixed, TwoVertexBoundGivesComparabilityGraphs)
{
    const auto entry = catalog::builtin("pmixed(K2)");
    ASSERT_EQ(entry.recognizer, std::optional<std::string>("comparability"));
    for (const auto& g : enumerate_graphs_up_to(5))
        EXPECT_EQ(member(entry.expression, g), recognizers::comparability(g)) << to_graph6(g);
}

TEST(Coding, LoorAndLo2ecCorrespond)
{
    const auto& loor = catalog::base_class("loor");
    const auto& lo2ec = catalog::base_class("lo2ec");
    std::size_t count = 0;
    for (int n = 0; n <= 3; ++n)
        for (const auto& x : enumerate_structures(loor.signature(), n, false)) {
            if (!loor.contains(x)) continue;
            ++count;
            const Structure y = catalog::code_loor_to_lo2ec(x);
            EXPECT_TRUE(lo2ec.contains(y)) << describe(x);
            EXPECT_EQ(catalog::code_lo2ec_to_loor(y), x);
            // Same underlying graph.
            EXPECT_EQ(reduct(catalog::definition("forget_loor"), x),
                      reduct(catalog::definition("forget_order_colours"), y));
        }
    // Labelled: n! orders times 3^(n choose 2) orientations-or-non-edges.
    EXPECT_EQ(count, 1U + 1U + 2U * 3U + 6U * 27U);
    EXPECT_THROW((void)catalog::code_loor_to_lo2ec(Structure(catalog::signature("COOR"), 2)), InputError);
}

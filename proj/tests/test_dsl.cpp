#include <gtest/gtest.h>

#include "lexpr/catalog.hpp"
#include "lexpr/dsl.hpp"
#include "lexpr/expressions.hpp"
#include "lexpr/graph_io.hpp"

using namespace lexpr;

namespace {

Formula e(int a, int b) { return Formula::atom("E", {a, b}); }

ParseError parse_error(const std::string& text)
{
    try {
        (void)parse(text, &catalog::prelude());
    } catch (const ParseError& err) {
        return err;
    }
    ADD_FAILURE() << "no parse error for:\n" << text;
    return ParseError(0, 0, "");
}

const char* kSmall = R"(signature S { rel E: 2; }
structure edge over S {
  vertices 2;
  E = sym { (0,1) };
}
)";

} // namespace

TEST(RoundTrip, PreludePrintsAndParsesBack)
{
    const auto& prelude = catalog::prelude();
    EXPECT_EQ(parse(print(prelude)), prelude);
}

TEST(RoundTrip, EveryShippedFile)
{
    for (const auto& stem : catalog::shipped_files()) {
        if (stem == "bases") continue;
        const auto& doc = catalog::document(stem);
        const std::string text = print(doc);
        EXPECT_EQ(parse(text, &catalog::prelude()), doc) << stem << "\n" << text;
        EXPECT_EQ(print(parse(text, &catalog::prelude())), text) << stem;
    }
}

TEST(RoundTrip, SelfContainedExpressionText)
{
    for (const auto& name : catalog::list()) {
        const auto e = catalog::builtin(name).expression;
        const auto doc = parse(print_expression(e));
        const auto& back = doc.expression(detail::identifier(e.name()));
        EXPECT_EQ(back.forbidden().size(), e.forbidden().size()) << name;
        EXPECT_EQ(back.encodings().size(), e.encodings().size()) << name;
        for (const auto& g : enumerate_graphs_up_to(4))
            EXPECT_EQ(decide(back, g).member(), decide(e, g).member()) << name << " " << to_graph6(g);
    }
}

TEST(Document, DeclarationsAreKeptInSourceOrder)
{
    const auto& doc = catalog::document("chordal_peo");
    ASSERT_EQ(doc.entries().size(), 2U);
    EXPECT_EQ(doc.entries()[0].kind, DeclKind::Structure);
    EXPECT_EQ(doc.entries()[0].span.line, 6);
    EXPECT_EQ(doc.names(DeclKind::Expression), std::vector<std::string>{"chordal_peo"});
    const auto& d = doc.expression_decl("chordal_peo");
    EXPECT_EQ(d.base, "lor");
    ASSERT_EQ(d.encodings.size(), 1U);
    EXPECT_EQ(d.encodings[0].kind, EncodingKind::LinearOrder);
    EXPECT_THROW((void)doc.structure("nope"), InputError);
}

TEST(Document, SymmetricTuplesAreDoubled)
{
    const auto doc = parse(kSmall);
    const auto& s = doc.structure("edge");
    EXPECT_TRUE(s.has(0, {0, 1}));
    EXPECT_TRUE(s.has(0, {1, 0}));
    EXPECT_EQ(s.tuples(0).size(), 2U);
}

TEST(Document, NamesResolveAgainstThePrelude)
{
    const auto doc = parse(R"(structure loop over LOR {
  vertices 1;
  E = { (0,0) };
}
expression loops_only {
  target G; carrier LOR; definition forget_order; base lor;
  forbid { }
}
)",
                           &catalog::prelude());
    EXPECT_EQ(doc.structure_decl("loop").signature, "LOR");
    EXPECT_TRUE(decide(doc.expression("loops_only"), path_graph(3)).member());
}

TEST(Errors, PositionsPointAtTheOffendingToken)
{
    auto err = parse_error(std::string(kSmall) + "structure bad over S {\n  vertices 2;\n  E = { (0,5) };\n}\n");
    EXPECT_EQ(err.line(), 8);
    EXPECT_EQ(err.column(), 12);
    EXPECT_NE(std::string(err.what()).find("out of range"), std::string::npos);

    err = parse_error("signature A { rel E: 2; }\nsignature A { rel F: 1; }\n");
    EXPECT_EQ(err.line(), 2);
    EXPECT_NE(std::string(err.what()).find("duplicate"), std::string::npos);

    err = parse_error("\n  widget w;\n");
    EXPECT_EQ(err.line(), 2);
    EXPECT_EQ(err.column(), 3);

    err = parse_error("structure s over NOPE { vertices 1; }");
    EXPECT_NE(std::string(err.what()).find("unknown signature 'NOPE'"), std::string::npos);

    err = parse_error("formula f(x, y) over G := E(x);");
    EXPECT_NE(std::string(err.what()).find("arity"), std::string::npos);

    err = parse_error("formula f(x) over G := E(x, z);");
    EXPECT_NE(std::string(err.what()).find("undeclared variable 'z'"), std::string::npos);

    err = parse_error("structure s over G { vertices 1; } $");
    EXPECT_NE(std::string(err.what()).find("unexpected character"), std::string::npos);

    err = parse_error("expression x { target G; carrier LOR; definition forget_arcs; base lor; forbid { } }");
    EXPECT_NE(std::string(err.what()).find("forget_arcs"), std::string::npos);

    err = parse_error("definition d : G <- LOR { }");
    EXPECT_NE(std::string(err.what()).find("misses symbol 'E'"), std::string::npos);
}

TEST(Errors, ParseErrorIsAnInputError)
{
    EXPECT_THROW((void)parse("signature {"), InputError);
    EXPECT_THROW((void)parse("\"open"), ParseError);
}

TEST(Formulas, ParseFormula)
{
    const Signature di({{"E", 2}}, "DI");
    EXPECT_EQ(parse_formula("E(x1,x2) & !E(x2,x1)", di), e(0, 1) & !e(1, 0));
    const auto f = parse_formula("x1 = x2 -> E(x1, x2)", di);
    EXPECT_EQ(f.arity(), 2);
    EXPECT_TRUE(logically_equivalent(f, !Formula::eq(0, 1) | e(0, 1)));
    EXPECT_TRUE(logically_equivalent(parse_formula("E(x1,x2) <-> E(x2,x1)", di),
                                     (e(0, 1) & e(1, 0)) | (!e(0, 1) & !e(1, 0))));
    EXPECT_EQ(parse_formula("E(x1,x3)", di).arity(), 3);
    EXPECT_THROW((void)parse_formula("E(x1,x2) E", di), ParseError);
    EXPECT_THROW((void)parse_formula("F(x1)", di), ParseError);
    EXPECT_THROW((void)parse_formula("E(x1)", di), ParseError);
}

TEST(Formulas, PrintedFormulasParseBack)
{
    const Signature lor = catalog::signature("LOR");
    for (const auto& name : {"forget_order"}) {
        const auto& d = catalog::definition(name);
        const auto text = to_string(d[0]);
        EXPECT_EQ(parse_formula(text, lor), d[0]) << text;
    }
    const Formula g = (Formula::atom("LT", {0, 1}) | !e(1, 0)) & !Formula::eq(0, 1);
    EXPECT_TRUE(logically_equivalent(parse_formula(to_string(g), lor).with_arity(2), g));
}

TEST(Formulas, InferSignature)
{
    const auto s = infer_signature("E(x1,x2) | P(x1) & E(x2,x1) | T(x1,x2,x3)");
    ASSERT_EQ(s.size(), 3U);
    EXPECT_EQ(s[0].name, "E");
    EXPECT_EQ(s[0].arity, 2);
    EXPECT_EQ(s[1].name, "P");
    EXPECT_EQ(s[1].arity, 1);
    EXPECT_EQ(s[2].arity, 3);
}

TEST(Snp, SentencesParse)
{
    const auto s = parse_snp("snp two_col over E/2 exists R/1 forall x y : E(x,y) -> !(R(x) <-> R(y));");
    EXPECT_EQ(s.name, "two_col");
    EXPECT_EQ(s.arity, 2);
    ASSERT_EQ(s.existential.size(), 1U);
    EXPECT_EQ(s.conjuncts.size(), 1U);
    EXPECT_THROW((void)parse_snp("snp a over E/2 exists E/1 forall x : true;"), ParseError);
    EXPECT_THROW((void)parse_snp("snp a over E/2 forall x : E(x,x); extra"), ParseError);
}

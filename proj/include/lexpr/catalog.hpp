#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lexpr/catalog_data.hpp"
#include "lexpr/dsl.hpp"
#include "lexpr/graph_io.hpp"
#include "lexpr/local_expression.hpp"

namespace lexpr::catalog {

struct CatalogEntry {
    std::string name;
    LocalExpression expression;
    std::string provenance;
    std::optional<std::string> recognizer; // name understood by recognizers::recognize
};

namespace detail {

inline std::string_view file_text(std::string_view stem)
{
    for (const auto& [name, text] : catalog_data::files)
        if (name == stem) return text;
    throw InputError("catalog file '" + std::string(stem) + "' is not embedded");
}

struct Registry {
    DslDocument prelude;
    std::map<std::string, DslDocument, std::less<>> documents;
};

inline const Registry& registry()
{
    static const Registry r = [] {
        Registry out;
        out.prelude = parse(file_text("bases"));
        for (const auto& [name, text] : catalog_data::files) {
            if (name == "bases") continue;
            out.documents.emplace(std::string(name), parse(text, &out.prelude));
        }
        return out;
    }();
    return r;
}

} // namespace detail

/// Signatures, base classes and definitions shared by all entries.
inline const DslDocument& prelude() { return detail::registry().prelude; }

/// Parsed document for one shipped entry file.
inline const DslDocument& document(const std::string& stem)
{
    const auto& docs = detail::registry().documents;
    auto it = docs.find(stem);
    if (it == docs.end()) throw InputError("no catalog file '" + stem + "'");
    return it->second;
}

/// Source text of a shipped file (the stem "bases" is the prelude).
inline std::string source(const std::string& stem) { return std::string(detail::file_text(stem)); }

inline std::vector<std::string> shipped_files()
{
    std::vector<std::string> out;
    for (const auto& [name, text] : catalog_data::files) out.emplace_back(name);
    return out;
}

inline const Signature& signature(const std::string& name) { return prelude().signature(name); }
inline const LocalClass& base_class(const std::string& name) { return prelude().local_class(name); }
inline const QfDefinition& definition(const std::string& name) { return prelude().definition(name); }

// ---------------------------------------------------------------------------
// Small named graphs used in parameterized entry names.

/// Parses Kn, Pn, Cn, mKn (m disjoint copies) and A+B (disjoint union).
inline Structure small_graph(const std::string& name)
{
    if (auto plus = name.find('+'); plus != std::string::npos)
        return graph_sum(small_graph(name.substr(0, plus)), small_graph(name.substr(plus + 1)));
    std::size_t i = 0;
    int copies = 1;
    if (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) {
        copies = 0;
        while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) copies = copies * 10 + (name[i++] - '0');
    }
    if (i >= name.size() || name.size() - i < 2) throw InputError("unknown graph name '" + name + "'");
    const char kind = name[i++];
    int n = 0;
    for (; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) throw InputError("unknown graph name '" + name + "'");
        n = n * 10 + (name[i] - '0');
    }
    if (n < 1 || n > 12 || copies < 1 || copies > 12) throw InputError("graph name '" + name + "' out of range");
    Structure one;
    switch (kind) {
    case 'K': one = complete_graph(n); break;
    case 'P': one = path_graph(n); break;
    case 'C':
        if (n < 3) throw InputError("cycles need at least 3 vertices");
        one = cycle_graph(n);
        break;
    default: throw InputError("unknown graph name '" + name + "'");
    }
    Structure g = one;
    for (int c = 1; c < copies; ++c) g = graph_sum(g, one);
    return g;
}

// ---------------------------------------------------------------------------
// Extra base classes.

/// Acyclic orientations, approximated by forbidding loops, digons and
/// directed cycles up to `max_cycle`. Exact on inputs with at most
/// `max_cycle` vertices.
inline LocalClass ao_class(int max_cycle)
{
    if (max_cycle < 3) throw InputError("ao_class: cycle bound must be at least 3");
    const Signature& sig = signature("OR");
    std::vector<Structure> bounds;
    bounds.push_back(make_digraph(1, {{0, 0}}).with_signature(sig));
    bounds.push_back(make_digraph(2, {{0, 1}, {1, 0}}).with_signature(sig));
    for (int k = 3; k <= max_cycle; ++k) {
        std::vector<Edge> arcs;
        for (int i = 0; i < k; ++i) arcs.emplace_back(i, (i + 1) % k);
        bounds.push_back(make_digraph(k, arcs).with_signature(sig));
    }
    return LocalClass::from_bounds(sig, std::move(bounds), "ao" + std::to_string(max_cycle));
}

/// Graphs with k unary colours U1..Uk.
inline Signature gk_signature(int k)
{
    if (k < 1) throw InputError("gk_signature: need at least one colour");
    std::vector<Symbol> syms{{"E", 2}};
    for (int i = 1; i <= k; ++i) syms.push_back({"U" + std::to_string(i), 1});
    return Signature(std::move(syms), "G" + std::to_string(k));
}

/// Graphs in which every vertex carries exactly one of the k colours.
inline LocalClass gk_class(int k)
{
    const Signature sig = gk_signature(k);
    std::vector<UniversalSentence> axioms;
    const Formula exy = Formula::atom("E", {0, 1}), eyx = Formula::atom("E", {1, 0});
    axioms.push_back({implies(exy, eyx)});
    axioms.push_back({(!Formula::atom("E", {0, 0})).with_arity(1)});
    std::vector<Formula> some;
    for (int i = 1; i <= k; ++i) some.push_back(Formula::atom("U" + std::to_string(i), {0}));
    axioms.push_back({Formula::disj(some).with_arity(1)});
    for (int i = 1; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j)
            axioms.push_back({(!(Formula::atom("U" + std::to_string(i), {0}) & Formula::atom("U" + std::to_string(j), {0})))
                                  .with_arity(1)});
    return LocalClass::from_axioms(sig, std::move(axioms), "g" + std::to_string(k));
}

// ---------------------------------------------------------------------------
// Parameterized builders.

/// Orientations without a directed path on k+1 vertices as a subgraph; the
/// graphs admitting one are the k-colourable graphs.
inline LocalExpression rghv(int k)
{
    if (k < 1) throw InputError("rghv: k must be positive");
    const LocalClass& base = base_class("oriented");
    std::vector<Edge> arcs;
    for (int i = 0; i < k; ++i) arcs.emplace_back(i, i + 1);
    const Structure path = make_digraph(k + 1, arcs).with_signature(base.signature());
    return LocalExpression("rghv(" + std::to_string(k) + ")", definition("forget_arcs"), base,
                           subgraph_closure(path, base, 24), {},
                           "introduction: no directed path on k+1 vertices");
}

/// Comparability graphs of posets of height at most k.
inline LocalExpression comparability_height(int k)
{
    if (k < 1) throw InputError("comparability_height: k must be positive");
    const Signature& sig = signature("SO");
    Structure incomparable(sig, 2);
    incomparable.set(1, {0, 1});
    Structure chain(sig, k + 1);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j)
            if (i != j) chain.set(0, {i, j});
    for (int i = 0; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j) chain.set(1, {i, j});
    return LocalExpression("comparability_height(" + std::to_string(k) + ")", definition("forget_order"),
                           base_class("so"), {incomparable, chain}, {},
                           "example comparability: posets of bounded height");
}

enum class MEntry { Zero, One, Star, Plus };

inline MEntry parse_mentry(const std::string& s)
{
    if (s == "0") return MEntry::Zero;
    if (s == "1") return MEntry::One;
    if (s == "*") return MEntry::Star;
    if (s == "+" || s == "⊕") return MEntry::Plus;
    throw InputError("invalid matrix entry '" + s + "' (expected 0, 1, * or +)");
}

inline std::string mentry_text(MEntry e)
{
    switch (e) {
    case MEntry::Zero: return "0";
    case MEntry::One: return "1";
    case MEntry::Star: return "*";
    case MEntry::Plus: return "+";
    }
    return "?";
}

inline std::string matrix_text(const std::vector<std::vector<MEntry>>& m)
{
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += i ? ",[" : "[";
        for (std::size_t j = 0; j < m[i].size(); ++j) out += (j ? "," : "") + mentry_text(m[i][j]);
        out += "]";
    }
    return out + "]";
}

/// Parses "[[1,*],[*,0]]".
inline std::vector<std::vector<MEntry>> parse_matrix(const std::string& text)
{
    std::vector<std::vector<MEntry>> rows;
    std::string cell;
    int depth = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '[') {
            if (++depth == 2) rows.emplace_back();
            if (depth > 2) throw InputError("matrix nests too deeply");
        } else if (c == ']' || c == ',') {
            if (depth == 2 && !cell.empty()) {
                rows.back().push_back(parse_mentry(cell));
                cell.clear();
            } else if (depth == 2 && c == ',') {
                throw InputError("empty matrix entry");
            }
            if (c == ']') --depth;
        } else {
            if (depth != 2) throw InputError("matrix entries must sit inside rows");
            cell += c;
        }
    }
    if (depth != 0) throw InputError("unbalanced brackets in matrix");
    return rows;
}

/// Graphs admitting an M-partition, for a symmetric matrix over {0,1,*,+}.
inline LocalExpression m_partition_expression(const std::vector<std::vector<MEntry>>& m)
{
    const int k = static_cast<int>(m.size());
    if (k < 1) throw InputError("m_partition: empty matrix");
    for (const auto& row : m)
        if (static_cast<int>(row.size()) != k) throw InputError("m_partition: matrix must be square");
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
                throw InputError("m_partition: matrix must be symmetric");
    const Signature sig = gk_signature(k);
    auto pattern = [&](int i, int j, bool edge) {
        Structure s(sig, 2);
        s.set(static_cast<std::size_t>(i + 1), {0});
        s.set(static_cast<std::size_t>(j + 1), {1});
        if (edge) {
            s.set(0, {0, 1});
            s.set(0, {1, 0});
        }
        return canonical_form(s);
    };
    std::vector<Structure> forbidden;
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
            const MEntry e = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (e == MEntry::Zero || e == MEntry::Plus) forbidden.push_back(pattern(i, j, true));
            if (e == MEntry::One || e == MEntry::Plus) forbidden.push_back(pattern(i, j, false));
        }
    std::vector<Formula> edge{Formula::atom("E", {0, 1})};
    QfDefinition def(graph_signature(), sig, edge, "forget_partition");
    return LocalExpression("m_partition(" + matrix_text(m) + ")", def, gk_class(k), std::move(forbidden), {},
                           "example M-partition");
}

namespace detail {

inline bool injective_hom(const Structure& a, const Structure& b)
{
    const int n = a.size(), m = b.size();
    if (n > m) return false;
    std::vector<int> f(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    auto rec = [&](auto&& self, int v) -> bool {
        if (v == n) return true;
        for (int c = 0; c < m; ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            bool ok = true;
            for (int u = 0; u < v && ok; ++u)
                if (a.has(0, {u, v}) && !b.has(0, {f[static_cast<std::size_t>(u)], c})) ok = false;
            if (!ok) continue;
            f[static_cast<std::size_t>(v)] = c;
            used[static_cast<std::size_t>(c)] = true;
            if (self(self, v + 1)) return true;
            used[static_cast<std::size_t>(c)] = false;
        }
        return false;
    };
    return rec(rec, 0);
}

/// Equivalence graph with the given class of each vertex and edge list.
inline Structure equivalence_graph(const Signature& sig, const std::vector<int>& cls, const std::vector<Edge>& edges)
{
    const int n = static_cast<int>(cls.size());
    Structure s(sig, n);
    for (const auto& [u, v] : edges) {
        s.set(0, {u, v});
        s.set(0, {v, u});
    }
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (cls[static_cast<std::size_t>(u)] == cls[static_cast<std::size_t>(v)]) s.set(1, {u, v});
    return s;
}

/// Minimal equivalence graphs whose quotient is isomorphic to h.
inline std::vector<Structure> minimal_quotient_preimages(const Signature& sig, const Structure& h)
{
    const int m = h.size();
    const auto h_edges = edges_of(h);
    const int e = static_cast<int>(h_edges.size());
    int isolated = 0;
    for (int v = 0; v < m; ++v) {
        bool touched = false;
        for (const auto& [a, b] : h_edges) touched = touched || a == v || b == v;
        isolated += touched ? 0 : 1;
    }
    // Each vertex of a minimal preimage is a lone class member or the end of a
    // sole witness edge.
    const int max_n = std::max(m, 2 * e + isolated);
    std::set<std::string> seen;
    std::vector<Structure> out;
    std::vector<int> sizes(static_cast<std::size_t>(m), 1);
    auto by_sizes = [&]() {
        std::vector<int> cls;
        for (int c = 0; c < m; ++c)
            for (int i = 0; i < sizes[static_cast<std::size_t>(c)]; ++i) cls.push_back(c);
        const int n = static_cast<int>(cls.size());
        std::vector<Edge> allowed;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (h.has(0, {cls[static_cast<std::size_t>(u)], cls[static_cast<std::size_t>(v)]})) allowed.emplace_back(u, v);
        if (allowed.size() > 20) throw ResourceError("csp_expression: preimage enumeration exceeds the guard");
        for (std::uint32_t mask = 0; mask < (1U << allowed.size()); ++mask) {
            std::vector<Edge> chosen;
            for (std::size_t i = 0; i < allowed.size(); ++i)
                if (mask >> i & 1U) chosen.push_back(allowed[i]);
            // Edge count of the quotient after deleting vertex `skip` (-1: none).
            auto quotient_edges = [&](int skip) {
                std::set<std::pair<int, int>> q;
                for (const auto& [u, v] : chosen) {
                    if (u == skip || v == skip) continue;
                    int a = cls[static_cast<std::size_t>(u)], b = cls[static_cast<std::size_t>(v)];
                    q.emplace(std::min(a, b), std::max(a, b));
                }
                return static_cast<int>(q.size());
            };
            if (quotient_edges(-1) != e) continue;
            bool minimal = true;
            for (int v = 0; v < n && minimal; ++v) {
                if (sizes[static_cast<std::size_t>(cls[static_cast<std::size_t>(v)])] == 1) continue;
                if (quotient_edges(v) == e) minimal = false;
            }
            if (!minimal) continue;
            Structure s = canonical_form(equivalence_graph(sig, cls, chosen));
            if (seen.insert(structure_key(s)).second) out.push_back(std::move(s));
        }
    };
    auto rec = [&](auto&& self, int c, int total) -> void {
        if (c == m) {
            by_sizes();
            return;
        }
        for (int s = 1; total + s + (m - c - 1) <= max_n; ++s) {
            sizes[static_cast<std::size_t>(c)] = s;
            self(self, c + 1, total + s);
        }
    };
    rec(rec, 0, 0);
    return out;
}

} // namespace detail

inline constexpr int kCspMaxVertices = 3;

/// H-colourable graphs via equivalence graphs: the classes are the colour
/// classes, and the quotient must be a subgraph of H.
inline LocalExpression csp_expression(const Structure& h, std::string name = {})
{
    require_graph(h, "csp_expression");
    const int n = h.size();
    if (n < 1) throw InputError("csp_expression: H needs a vertex");
    if (n > kCspMaxVertices)
        throw ResourceError("csp_expression: H has " + std::to_string(n) + " vertices, the guard is " +
                            std::to_string(kCspMaxVertices));
    const Signature& sig = signature("EQ");
    std::vector<Structure> forbidden;
    // An edge inside a class.
    forbidden.push_back(detail::equivalence_graph(sig, {0, 0}, {{0, 1}}));
    // n+1 pairwise inequivalent vertices.
    for (const auto& g : enumerate_graphs(n + 1)) {
        std::vector<int> cls(static_cast<std::size_t>(n + 1));
        std::iota(cls.begin(), cls.end(), 0);
        forbidden.push_back(canonical_form(detail::equivalence_graph(sig, cls, edges_of(g))));
    }
    // Quotients that are not subgraphs of H.
    for (int m = 1; m <= n; ++m)
        for (const auto& hp : enumerate_graphs(m))
            if (!detail::injective_hom(hp, h))
                for (auto& s : detail::minimal_quotient_preimages(sig, hp)) forbidden.push_back(std::move(s));
    std::sort(forbidden.begin(), forbidden.end(), structure_less);
    forbidden.erase(std::unique(forbidden.begin(), forbidden.end()), forbidden.end());
    if (name.empty()) name = "csp(" + to_graph6(h) + ")";
    return LocalExpression(std::move(name), definition("forget_equivalence"), base_class("eq"), std::move(forbidden),
                           {{"EQV", EncodingKind::Equivalence}}, "example equivalence-CSP");
}

/// Digraph expression for P-mixed graphs, where `bounds` are the minimal
/// obstructions of the graph class P.
inline LocalExpression pmixed(const std::vector<Structure>& bounds, std::string name = {})
{
    const Signature& di = signature("DI");
    std::vector<Structure> forbidden;
    for (const auto& f : bounds) {
        require_graph(f, "pmixed");
        const int n = f.size();
        std::vector<Edge> non_edges;
        Structure lifted(di, n);
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) {
                if (f.has(0, {u, v})) {
                    lifted.set(0, {u, v});
                    lifted.set(0, {v, u});
                } else {
                    non_edges.emplace_back(u, v);
                }
            }
        if (non_edges.size() > 12) throw ResourceError("pmixed: bound has too many non-edges to lift");
        std::size_t variants = 1;
        for (std::size_t i = 0; i < non_edges.size(); ++i) variants *= 3;
        for (std::size_t code = 0; code < variants; ++code) {
            Structure s = lifted;
            std::size_t c = code;
            for (const auto& [u, v] : non_edges) {
                if (c % 3 == 1) s.set(0, {u, v});
                if (c % 3 == 2) s.set(0, {v, u});
                c /= 3;
            }
            forbidden.push_back(canonical_form(s));
        }
    }
    const std::vector<std::vector<Edge>> mixed = {
        {{0, 1}, {1, 2}},
        {{0, 1}, {1, 2}, {2, 1}},
        {{0, 1}, {1, 2}, {2, 1}, {0, 2}},
        {{0, 1}, {1, 2}, {2, 1}, {2, 0}},
    };
    for (const auto& arcs : mixed) forbidden.push_back(canonical_form(make_digraph(3, arcs).with_signature(di)));
    std::sort(forbidden.begin(), forbidden.end(), structure_less);
    forbidden.erase(std::unique(forbidden.begin(), forbidden.end()), forbidden.end());
    QfDefinition def(graph_signature(), di,
                     {Formula::atom("E", {0, 1}) | Formula::atom("E", {1, 0})}, "underlying");
    if (name.empty()) {
        name = "pmixed(";
        for (std::size_t i = 0; i < bounds.size(); ++i) name += (i ? "," : "") + to_graph6(bounds[i]);
        name += ")";
    }
    return LocalExpression(std::move(name), def, base_class("digraphs"), std::move(forbidden), {},
                           "example P-mixed graphs");
}

// ---------------------------------------------------------------------------
// Coding between LOOR and LO2EC structures.

/// Forward arcs (u -> v with u < v) become blue edges, backward arcs red edges.
inline Structure code_loor_to_lo2ec(const Structure& x)
{
    if (!(x.signature() == signature("LOOR"))) throw InputError("code_loor_to_lo2ec: expected a LOOR structure");
    const Signature& out_sig = signature("LO2EC");
    Structure y(out_sig, x.size());
    const int n = x.size();
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (x.has(1, {u, v})) y.set(2, {u, v});
            if (!x.has(0, {u, v})) continue;
            const std::size_t colour = x.has(1, {u, v}) ? 1 : 0; // B : R
            y.set(colour, {u, v});
            y.set(colour, {v, u});
        }
    return y;
}

/// Inverse of code_loor_to_lo2ec.
inline Structure code_lo2ec_to_loor(const Structure& y)
{
    if (!(y.signature() == signature("LO2EC"))) throw InputError("code_lo2ec_to_loor: expected a LO2EC structure");
    Structure x(signature("LOOR"), y.size());
    const int n = y.size();
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (y.has(2, {u, v})) x.set(1, {u, v});
            if (!y.has(2, {u, v})) continue;
            if (y.has(1, {u, v})) x.set(0, {u, v});
            if (y.has(0, {u, v})) x.set(0, {v, u});
        }
    return x;
}

// ---------------------------------------------------------------------------
// The registry.

inline const std::map<std::string, std::string>& recognizer_table()
{
    static const std::map<std::string, std::string> t = {
        {"chordal_peo", "chordal"},
        {"bipartite_or", "bipartite"},
        {"cobipartite_or", "cobipartite"},
        {"cobipartite_2ec", "cobipartite"},
        {"threecol_loor", "k_colourable(3)"},
        {"threecol_lo2ec", "k_colourable(3)"},
        {"circulararc_coor", "tucker_circular_arc"},
        {"chordal_gen", "chordal"},
        {"trivially_perfect_gen", "trivially_perfect"},
        {"complete_lor", "complete"},
        {"comparability_so", "comparability"},
    };
    return t;
}

/// Names accepted by builtin(): every shipped file plus one instance of each
/// parameterized family.
inline std::vector<std::string> list()
{
    std::vector<std::string> out;
    for (const auto& [name, doc] : detail::registry().documents) out.push_back(name);
    for (const char* p : {"rghv(2)", "rghv(3)", "comparability_height(2)", "pmixed(K2)", "m_partition([[1,*],[*,0]])",
                          "csp(K3)"})
        out.emplace_back(p);
    return out;
}

namespace detail {

inline std::optional<std::string> argument_of(const std::string& name, const std::string& family)
{
    if (name.size() < family.size() + 2 || name.compare(0, family.size() + 1, family + "(") != 0 || name.back() != ')')
        return std::nullopt;
    return name.substr(family.size() + 1, name.size() - family.size() - 2);
}

inline int int_argument(const std::string& arg, const std::string& family)
{
    std::size_t used = 0;
    int k = 0;
    try {
        k = std::stoi(arg, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != arg.size() || arg.empty()) throw InputError(family + ": expected an integer argument, got '" + arg + "'");
    return k;
}

inline std::vector<std::string> split_commas(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string available_text()
{
    std::string s;
    for (const auto& n : list()) s += (s.empty() ? "" : ", ") + n;
    return s + " (families: rghv(k), comparability_height(k), pmixed(F,...), m_partition([[..]]), csp(H))";
}

} // namespace detail

inline CatalogEntry builtin(const std::string& name)
{
    const auto& docs = detail::registry().documents;
    if (auto it = docs.find(name); it != docs.end()) {
        const LocalExpression& e = it->second.expression(name);
        std::optional<std::string> rec;
        if (auto r = recognizer_table().find(name); r != recognizer_table().end()) rec = r->second;
        return {name, e, e.provenance(), rec};
    }
    if (auto arg = detail::argument_of(name, "rghv")) {
        const int k = detail::int_argument(*arg, "rghv");
        auto e = rghv(k);
        return {e.name(), e, e.provenance(), "k_colourable(" + std::to_string(k) + ")"};
    }
    if (auto arg = detail::argument_of(name, "comparability_height")) {
        const int k = detail::int_argument(*arg, "comparability_height");
        auto e = comparability_height(k);
        return {e.name(), e, e.provenance(), "comparability_height(" + std::to_string(k) + ")"};
    }
    if (auto arg = detail::argument_of(name, "pmixed")) {
        std::vector<Structure> bounds;
        for (const auto& g : detail::split_commas(*arg)) bounds.push_back(small_graph(g));
        auto e = pmixed(bounds, name);
        std::optional<std::string> rec;
        if (bounds.size() == 1 && are_isomorphic(bounds[0], complete_graph(2))) rec = "comparability";
        return {name, e, e.provenance(), rec};
    }
    if (auto arg = detail::argument_of(name, "m_partition")) {
        const auto m = parse_matrix(*arg);
        auto e = m_partition_expression(m);
        std::optional<std::string> rec;
        using enum MEntry;
        if (m == std::vector<std::vector<MEntry>>{{One, Star}, {Star, Zero}} ||
            m == std::vector<std::vector<MEntry>>{{Zero, Star}, {Star, One}})
            rec = "split";
        bool colouring = true;
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) colouring = colouring && m[i][j] == (i == j ? Zero : Star);
        if (colouring) rec = "k_colourable(" + std::to_string(m.size()) + ")";
        return {e.name(), e, e.provenance(), rec};
    }
    if (auto arg = detail::argument_of(name, "csp")) {
        const Structure h = small_graph(*arg);
        auto e = csp_expression(h, name);
        std::optional<std::string> rec;
        if (edges_of(h).size() == static_cast<std::size_t>(h.size() * (h.size() - 1) / 2)) rec = "k_colourable(" + std::to_string(h.size()) + ")";
        return {name, e, e.provenance(), rec};
    }
    throw InputError("unknown catalog entry '" + name + "'; available: " + detail::available_text());
}

} // namespace lexpr::catalog

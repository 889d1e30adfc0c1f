#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexpr/classes.hpp"
#include "lexpr/local_expression.hpp"
#include "lexpr/logic.hpp"
#include "lexpr/solver.hpp"

namespace lexpr {

struct DecideOptions {
    SolverOptions solver;
    /// Return the structure_less-minimal certificate instead of the first one found.
    bool canonical = false;
    /// Upper bound on solutions enumerated for canonicalization.
    std::uint64_t canonical_cap = 1U << 20;
};

struct DecideResult {
    std::optional<Structure> certificate;
    SearchStats stats;
    [[nodiscard]] bool member() const { return certificate.has_value(); }
};

inline DecideResult decide(const LocalExpression& e, const Structure& g, const DecideOptions& opts = {})
{
    const SearchProblem p = compile(e, g);
    DecideResult r;
    if (!opts.canonical) {
        auto s = solve(p, opts.solver);
        r.certificate = std::move(s.solution);
        r.stats = s.stats;
        return r;
    }
    auto c = count_solutions(p, opts.canonical_cap, opts.solver, true);
    if (c.capped)
        throw ResourceError("decide: more than " + std::to_string(opts.canonical_cap) +
                            " certificates; canonicalization cap reached");
    r.stats = c.stats;
    for (auto& s : c.solutions)
        if (!r.certificate || structure_less(s, *r.certificate)) r.certificate = std::move(s);
    return r;
}

/// Why a certificate was rejected; empty when it verifies.
inline std::string verification_failure(const LocalExpression& e, const Structure& g, const Structure& x)
{
    if (x.size() != g.size())
        throw InputError("verify: certificate has " + std::to_string(x.size()) + " vertices, input has " +
                         std::to_string(g.size()));
    if (!(x.signature() == e.carrier())) throw InputError("verify: certificate is not over the carrier of " + e.name());
    if (!(g.signature() == e.target())) throw InputError("verify: input is not over the target of " + e.name());
    if (!(reduct(e.definition(), x) == g)) return "reduct differs from the input";
    if (!e.base().contains(x)) return "certificate is outside the base class";
    if (!is_free(x, e.forbidden())) return "certificate contains a forbidden structure";
    return {};
}

inline bool verify(const LocalExpression& e, const Structure& g, const Structure& x)
{
    return verification_failure(e, g, x).empty();
}

namespace detail {

/// Copies `s` into a structure over `target`, mapping symbol names through `rename`
/// (names missing from the map are kept). Relations absent from `s` stay empty.
inline Structure rebase(const Structure& s, const Signature& target, const std::map<std::string, std::string>& rename,
                        const std::vector<std::string>& unary_all = {})
{
    Structure out(target, s.size());
    for (std::size_t i = 0; i < s.signature().size(); ++i) {
        const auto& name = s.signature()[i].name;
        const auto it = rename.find(name);
        const std::size_t j = target.index_of(it == rename.end() ? name : it->second);
        for (std::size_t r = 0; r < s.table_size(i); ++r)
            if (s.has_rank(i, r)) out.set_rank(j, r, true);
    }
    for (const auto& u : unary_all)
        for (int v = 0; v < s.size(); ++v) out.set(target.index_of(u), {v}, true);
    return out;
}

inline std::string fresh_name(std::string base, const std::set<std::string>& taken)
{
    while (taken.count(base)) base += "'";
    return base;
}

/// Renames the symbols shared by two carriers apart with suffixes _1 and _2.
struct Apart {
    std::map<std::string, std::string> first, second;
    std::vector<Symbol> symbols;
    std::set<std::string> taken;
};

inline Apart rename_apart(const Signature& a, const Signature& b)
{
    Apart r;
    std::set<std::string> names;
    for (const auto& s : a.symbols()) names.insert(s.name);
    for (const auto& s : b.symbols()) names.insert(s.name);
    r.taken = names;
    auto add = [&](const Signature& sig, const Signature& other, std::map<std::string, std::string>& m, const char* suffix) {
        for (const auto& s : sig.symbols()) {
            std::string name = s.name;
            if (other.find(s.name)) {
                name = fresh_name(s.name + suffix, r.taken);
                r.taken.insert(name);
            }
            m[s.name] = name;
            r.symbols.push_back({name, s.arity});
        }
    };
    add(a, b, r.first, "_1");
    add(b, a, r.second, "_2");
    return r;
}

inline std::vector<int> identity_vars(int k)
{
    std::vector<int> v(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

inline std::vector<Encoding> renamed_encodings(const std::vector<Encoding>& encs, const std::map<std::string, std::string>& m)
{
    std::vector<Encoding> out;
    for (auto e : encs) {
        e.symbol = m.at(e.symbol);
        out.push_back(e);
    }
    return out;
}

} // namespace detail

/// Members of either expression, via a disjoint union of carriers tagged by two
/// fresh unary markers (every vertex carries exactly one, all the same).
inline LocalExpression disjoint_union(const LocalExpression& e1, const LocalExpression& e2, std::string name = {})
{
    if (!(e1.target() == e2.target())) throw InputError("disjoint_union: expressions have different targets");
    auto apart = detail::rename_apart(e1.carrier(), e2.carrier());
    const std::string ub = detail::fresh_name("U_B", apart.taken);
    apart.taken.insert(ub);
    const std::string uc = detail::fresh_name("U_C", apart.taken);
    apart.taken.insert(uc);
    auto symbols = apart.symbols;
    symbols.push_back({ub, 1});
    symbols.push_back({uc, 1});
    const Signature carrier(symbols, e1.carrier().name() + "+" + e2.carrier().name());
    const Formula in_b = Formula::atom(ub, {0});

    std::vector<UniversalSentence> axioms;
    axioms.push_back({(Formula::atom(ub, {0}) | Formula::atom(uc, {0})) & !(Formula::atom(ub, {0}) & Formula::atom(uc, {0}))});
    axioms.push_back({implies(Formula::atom(ub, {0}), Formula::atom(ub, {1}))});
    auto side = [&](const LocalExpression& e, const std::map<std::string, std::string>& m, bool first) {
        const Formula marker = first ? in_b : !in_b;
        for (const auto& ax : e.base().as_sentences()) {
            const int k = std::max(1, ax.body.arity());
            axioms.push_back({implies(marker, rename_symbols(ax.body, m)).with_arity(k)});
        }
        // The other side's relations are empty here.
        for (const auto& s : e.carrier().symbols())
            axioms.push_back({implies(first ? !in_b : in_b, !Formula::atom(m.at(s.name), detail::identity_vars(s.arity)))});
    };
    side(e1, apart.first, true);
    side(e2, apart.second, false);

    std::vector<Structure> forbidden;
    auto lift = [&](const LocalExpression& e, const std::map<std::string, std::string>& m, const std::string& marker) {
        for (const auto& f : e.forbidden()) {
            if (f.size() == 0) {
                // This side is empty apart from the empty structure.
                axioms.push_back({!Formula::atom(marker, {0})});
                continue;
            }
            std::vector<Symbol> sub;
            for (const auto& s : f.signature().symbols()) sub.push_back({m.at(s.name), s.arity});
            sub.push_back({marker, 1});
            forbidden.push_back(detail::rebase(f, Signature(sub), m, {marker}));
        }
    };
    lift(e1, apart.first, ub);
    lift(e2, apart.second, uc);

    std::vector<Formula> defs;
    for (std::size_t i = 0; i < e1.target().size(); ++i) {
        const int r = e1.target()[i].arity;
        defs.push_back(((in_b & rename_symbols(e1.definition()[i], apart.first)) |
                        ((!in_b) & rename_symbols(e2.definition()[i], apart.second)))
                           .with_arity(r));
    }
    if (name.empty()) name = e1.name() + "+" + e2.name();
    QfDefinition d(e1.target(), carrier, std::move(defs), name);
    return LocalExpression(name, std::move(d), LocalClass::from_axioms(carrier, std::move(axioms), name + "_base"),
                           std::move(forbidden), {}, "disjoint union of " + e1.name() + " and " + e2.name());
}

/// Members of both expressions: carriers side by side, bases conjoined with
/// reduct agreement sentences; the definition comes from the first side.
inline LocalExpression pullback(const LocalExpression& e1, const LocalExpression& e2, std::string name = {})
{
    if (!(e1.target() == e2.target())) throw InputError("pullback: expressions have different targets");
    const auto apart = detail::rename_apart(e1.carrier(), e2.carrier());
    const Signature carrier(apart.symbols, e1.carrier().name() + "x" + e2.carrier().name());
    std::vector<UniversalSentence> axioms;
    for (const auto& ax : e1.base().as_sentences()) axioms.push_back({rename_symbols(ax.body, apart.first)});
    for (const auto& ax : e2.base().as_sentences()) axioms.push_back({rename_symbols(ax.body, apart.second)});
    std::vector<Formula> defs;
    for (std::size_t i = 0; i < e1.target().size(); ++i) {
        const int r = e1.target()[i].arity;
        const Formula d1 = rename_symbols(e1.definition()[i], apart.first).with_arity(r);
        const Formula d2 = rename_symbols(e2.definition()[i], apart.second).with_arity(r);
        axioms.push_back({iff(d1, d2).with_arity(r)});
        defs.push_back(d1);
    }
    std::vector<Structure> forbidden;
    auto lift = [&](const LocalExpression& e, const std::map<std::string, std::string>& m) {
        for (const auto& f : e.forbidden()) {
            std::vector<Symbol> sub;
            for (const auto& s : f.signature().symbols()) sub.push_back({m.at(s.name), s.arity});
            forbidden.push_back(detail::rebase(f, Signature(sub), m));
        }
    };
    lift(e1, apart.first);
    lift(e2, apart.second);
    auto encodings = detail::renamed_encodings(e1.encodings(), apart.first);
    for (const auto& enc : detail::renamed_encodings(e2.encodings(), apart.second)) encodings.push_back(enc);
    if (name.empty()) name = e1.name() + "*" + e2.name();
    QfDefinition d(e1.target(), carrier, std::move(defs), name);
    return LocalExpression(name, std::move(d), LocalClass::from_axioms(carrier, std::move(axioms), name + "_base"),
                           std::move(forbidden), std::move(encodings), "pullback of " + e1.name() + " and " + e2.name());
}

namespace detail {

/// Checks reduct(f, A) == reduct(g, A) on all structures of `sig` up to n
/// vertices that satisfy `filter`; returns a witness on failure.
template <class Filter>
std::optional<Structure> first_disagreement(const QfDefinition& f, const QfDefinition& g, const Signature& sig, int n,
                                            Filter filter)
{
    for (const auto& level : enumerate_hereditary_levels(sig, n, true, [&](const Structure& a) { return filter(a); }))
        for (const auto& a : level)
            if (!(reduct(f, a) == reduct(g, a))) return a;
    return std::nullopt;
}

inline bool definitions_equivalent(const QfDefinition& f, const QfDefinition& g)
{
    for (std::size_t i = 0; i < f.source().size(); ++i)
        if (!logically_equivalent(f[i], g[i])) return false;
    return true;
}

} // namespace detail

/// Transports an expression along a symmetry pair: nu acts on carrier
/// structures, mu on inputs, with nu and mu involutive and the definition
/// intertwining them. Members of the result are the mu-images of members of e.
inline LocalExpression transform(const LocalExpression& e, const QfDefinition& nu, const QfDefinition& mu,
                                 std::string name = {})
{
    const Signature& sig = e.carrier();
    if (!(nu.source() == sig) || !(nu.carrier() == sig)) throw InputError("transform: nu must map the carrier to itself");
    if (!(mu.source() == e.target()) || !(mu.carrier() == e.target()))
        throw InputError("transform: mu must map the target to itself");
    const int window = e.window();
    auto in_base = [&](const Structure& a) { return e.base().contains(a); };

    // Involutions.
    auto check = [&](const QfDefinition& f, const QfDefinition& g, const Signature& over, const char* what, auto filter) {
        bool ok = false;
        try {
            ok = detail::definitions_equivalent(f, g);
        } catch (const ResourceError&) {
            ok = false;
        }
        if (ok) return;
        const auto w = detail::first_disagreement(f, g, over, window, filter);
        if (w) throw LogicError(std::string("transform: ") + what + " fails on " + describe(*w));
    };
    // Involutions are only required on base members and on their reducts.
    check(compose(nu, nu), identity_definition(sig), sig, "nu is not an involution; it", in_base);
    bool mu_ok = false;
    try {
        mu_ok = detail::definitions_equivalent(compose(mu, mu), identity_definition(e.target()));
    } catch (const ResourceError&) {
        mu_ok = false;
    }
    if (!mu_ok)
        for (const auto& level : enumerate_hereditary_levels(sig, window, true, in_base))
            for (const auto& a : level) {
                const Structure g = reduct(e.definition(), a);
                if (!(reduct(mu, reduct(mu, g)) == g))
                    throw LogicError("transform: mu is not an involution; it fails on " + describe(g));
            }
    check(compose(e.definition(), nu), compose(mu, e.definition()), sig, "the definition does not intertwine nu and mu; it",
          in_base);

    std::vector<UniversalSentence> axioms;
    for (const auto& ax : e.base().as_sentences()) axioms.push_back({apply(nu, ax.body).with_arity(ax.body.arity())});
    const LocalClass base = LocalClass::from_axioms(sig, axioms, e.base().name() + "^nu");

    std::vector<Structure> forbidden;
    std::unordered_set<std::string> seen;
    auto add = [&](const Structure& f) {
        Structure img = canonical_form(reduct(nu, f));
        if (seen.insert(structure_key(img)).second) forbidden.push_back(std::move(img));
    };
    for (const auto& f : e.forbidden()) {
        if (f.signature() == sig) {
            add(f);
            continue;
        }
        // Complete a sub-signature pattern over the full carrier.
        Structure lifted = detail::rebase(f, sig, {});
        std::vector<std::pair<std::size_t, std::size_t>> open;
        for (std::size_t s = 0; s < sig.size(); ++s)
            if (!f.signature().find(sig[s].name))
                for (std::size_t r = 0; r < lifted.table_size(s); ++r) open.emplace_back(s, r);
        if (open.size() > 20) throw ResourceError("transform: too many positions to complete a sub-signature pattern");
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << open.size()); ++mask) {
            Structure c = lifted;
            for (std::size_t i = 0; i < open.size(); ++i)
                if (mask >> i & 1U) c.set_rank(open[i].first, open[i].second, true);
            if (e.base().contains(c)) add(c);
        }
    }

    // Keep an encoding only where nu maps its symbol onto itself up to a variable permutation.
    std::vector<Encoding> encodings;
    for (const auto& enc : e.encodings()) {
        const Formula& img = nu[enc.symbol];
        if (img.kind() != Kind::Atom || img.symbol() != enc.symbol) continue;
        std::vector<int> vars = img.vars();
        std::sort(vars.begin(), vars.end());
        if (vars == detail::identity_vars(static_cast<int>(vars.size()))) encodings.push_back(enc);
    }
    if (name.empty()) name = e.name() + "^" + (nu.name().empty() ? std::string("nu") : nu.name());
    return LocalExpression(name, e.definition().renamed(name), base, std::move(forbidden), std::move(encodings),
                           "transform of " + e.name());
}

// ---------------------------------------------------------------------------
// SNP rendering

/// exists R1..Rk forall x1..xm : body, over the target signature.
struct SnpSentence {
    std::string name;
    Signature target;
    Signature existential;
    int arity = 0;
    std::vector<Formula> conjuncts;

    [[nodiscard]] Formula body() const
    {
        Formula f = Formula::top(arity);
        if (conjuncts.empty()) return f;
        std::vector<Formula> parts;
        for (const auto& c : conjuncts) parts.push_back(c.with_arity(arity));
        return Formula::conj(std::move(parts)).with_arity(arity);
    }

    friend bool operator==(const SnpSentence& a, const SnpSentence& b)
    {
        return a.name == b.name && a.target == b.target && a.existential == b.existential && a.arity == b.arity &&
               a.conjuncts == b.conjuncts;
    }
};

inline SnpSentence snp_sentence(const LocalExpression& e)
{
    SnpSentence s;
    s.name = e.name();
    s.target = e.target();
    std::set<std::string> target_names;
    for (const auto& t : e.target().symbols()) target_names.insert(t.name);
    std::set<std::string> taken = target_names;
    for (const auto& c : e.carrier().symbols()) taken.insert(c.name);

    // Carrier symbols identified with the target symbol of the same name.
    std::set<std::string> identified;
    for (std::size_t i = 0; i < e.target().size(); ++i) {
        const auto& t = e.target()[i];
        const Formula& d = e.definition()[i];
        if (d.kind() == Kind::Atom && d.symbol() == t.name && d.vars() == detail::identity_vars(t.arity) &&
            e.carrier().find(t.name))
            identified.insert(t.name);
    }
    std::map<std::string, std::string> rename;
    std::vector<Symbol> ex;
    for (const auto& c : e.carrier().symbols()) {
        std::string name = c.name;
        if (identified.count(name)) {
            rename[name] = name;
            continue;
        }
        if (target_names.count(name)) {
            name = detail::fresh_name(name + "_c", taken);
            taken.insert(name);
        }
        rename[c.name] = name;
        ex.push_back({name, c.arity});
    }
    s.existential = Signature(ex);

    // Conjuncts arrive already renamed: target atoms must keep their names.
    auto add = [&](const Formula& f) {
        s.conjuncts.push_back(f);
        s.arity = std::max(s.arity, f.arity());
    };
    for (const auto& ax : e.base().as_sentences()) add(rename_symbols(ax.body, rename));
    for (const auto& f : e.forbidden()) add(rename_symbols(!characteristic_formula(f), rename));
    for (std::size_t i = 0; i < e.target().size(); ++i) {
        const auto& t = e.target()[i];
        if (identified.count(t.name)) continue;
        add(iff(rename_symbols(e.definition()[i], rename), Formula::atom(t.name, detail::identity_vars(t.arity)))
                .with_arity(t.arity));
    }
    for (auto& c : s.conjuncts) c = c.with_arity(s.arity);
    return s;
}

inline std::string to_text(const SnpSentence& s)
{
    std::ostringstream out;
    out << "snp " << detail::identifier(s.name) << "\n  over";
    for (const auto& t : s.target.symbols()) out << ' ' << t.name << '/' << t.arity;
    out << '\n';
    if (!s.existential.empty()) {
        out << "  exists";
        for (const auto& t : s.existential.symbols()) out << ' ' << t.name << '/' << t.arity;
        out << '\n';
    }
    out << "  forall";
    for (int i = 0; i < s.arity; ++i) out << " x" << (i + 1);
    out << " :\n";
    if (s.conjuncts.empty()) out << "    true";
    for (std::size_t i = 0; i < s.conjuncts.size(); ++i) {
        std::string part;
        detail::print_formula(s.conjuncts[i], part, 2);
        out << "    " << part << (i + 1 < s.conjuncts.size() ? " &\n" : "");
    }
    out << " ;\n";
    return out.str();
}

inline std::string render_snp(const LocalExpression& e) { return to_text(snp_sentence(e)); }

} // namespace lexpr

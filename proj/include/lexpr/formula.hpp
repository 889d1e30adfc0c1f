#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexpr/error.hpp"
#include "lexpr/structures.hpp"

namespace lexpr {

enum class Kind { True, False, Eq, Atom, Not, And, Or };

class Formula;

namespace detail {
struct FormulaNode {
    Kind kind = Kind::True;
    int lhs = 0, rhs = 0;         // Eq
    std::string symbol;           // Atom
    std::vector<int> vars;        // Atom
    std::vector<Formula> kids;    // Not, And, Or
};
} // namespace detail

/// Quantifier-free formula with positional variables 0..arity-1 (printed x1..xk).
class Formula {
public:
    Formula() : Formula(make(Kind::True), 0) {}

    static Formula top(int arity = 0) { return {make(Kind::True), arity}; }
    static Formula bottom(int arity = 0) { return {make(Kind::False), arity}; }

    static Formula eq(int i, int j)
    {
        if (i < 0 || j < 0) throw InputError("negative variable index");
        auto n = make(Kind::Eq);
        n->lhs = i;
        n->rhs = j;
        return {std::move(n), std::max(i, j) + 1};
    }

    static Formula atom(std::string symbol, std::vector<int> vars)
    {
        if (vars.empty()) throw InputError("atom '" + symbol + "' needs at least one argument");
        int need = 0;
        for (int v : vars) {
            if (v < 0) throw InputError("negative variable index");
            need = std::max(need, v + 1);
        }
        auto n = make(Kind::Atom);
        n->symbol = std::move(symbol);
        n->vars = std::move(vars);
        return {std::move(n), need};
    }

    static Formula negate(Formula f)
    {
        const int k = f.arity_;
        auto n = make(Kind::Not);
        n->kids.push_back(std::move(f));
        return {std::move(n), k};
    }

    static Formula conj(std::vector<Formula> kids, int arity = 0) { return junction(Kind::And, std::move(kids), arity); }
    static Formula disj(std::vector<Formula> kids, int arity = 0) { return junction(Kind::Or, std::move(kids), arity); }

    [[nodiscard]] Kind kind() const { return node_->kind; }
    [[nodiscard]] int arity() const { return arity_; }
    [[nodiscard]] int lhs() const { return node_->lhs; }
    [[nodiscard]] int rhs() const { return node_->rhs; }
    [[nodiscard]] const std::string& symbol() const { return node_->symbol; }
    [[nodiscard]] const std::vector<int>& vars() const { return node_->vars; }
    [[nodiscard]] const std::vector<Formula>& children() const { return node_->kids; }

    /// Same formula with a larger declared variable count.
    [[nodiscard]] Formula with_arity(int k) const
    {
        if (k < min_arity())
            throw InputError("declared arity " + std::to_string(k) + " is below the largest variable index " +
                             std::to_string(min_arity()));
        return {node_, k};
    }

    /// One more than the largest variable index that occurs.
    [[nodiscard]] int min_arity() const
    {
        switch (kind()) {
        case Kind::True:
        case Kind::False: return 0;
        case Kind::Eq: return std::max(lhs(), rhs()) + 1;
        case Kind::Atom: return *std::max_element(vars().begin(), vars().end()) + 1;
        default: {
            int m = 0;
            for (const auto& k : children()) m = std::max(m, k.min_arity());
            return m;
        }
        }
    }

    /// Structural equality (not logical equivalence).
    friend bool operator==(const Formula& a, const Formula& b)
    {
        if (a.arity_ != b.arity_) return false;
        return same_tree(a, b);
    }

private:
    Formula(std::shared_ptr<const detail::FormulaNode> n, int arity) : node_(std::move(n)), arity_(arity) {}

    static std::shared_ptr<detail::FormulaNode> make(Kind k)
    {
        auto n = std::make_shared<detail::FormulaNode>();
        n->kind = k;
        return n;
    }

    static Formula junction(Kind k, std::vector<Formula> kids, int arity)
    {
        for (const auto& c : kids) arity = std::max(arity, c.arity_);
        auto n = make(k);
        n->kids = std::move(kids);
        return {std::move(n), arity};
    }

    static bool same_tree(const Formula& a, const Formula& b)
    {
        if (a.node_ == b.node_) return true;
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
        case Kind::True:
        case Kind::False: return true;
        case Kind::Eq: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
        case Kind::Atom: return a.symbol() == b.symbol() && a.vars() == b.vars();
        default:
            if (a.children().size() != b.children().size()) return false;
            for (std::size_t i = 0; i < a.children().size(); ++i)
                if (!same_tree(a.children()[i], b.children()[i])) return false;
            return true;
        }
    }

    std::shared_ptr<const detail::FormulaNode> node_;
    int arity_ = 0;
};

inline Formula operator!(const Formula& f) { return Formula::negate(f); }
inline Formula operator&(const Formula& a, const Formula& b) { return Formula::conj({a, b}); }
inline Formula operator|(const Formula& a, const Formula& b) { return Formula::disj({a, b}); }
inline Formula implies(const Formula& a, const Formula& b) { return (!a) | b; }
inline Formula iff(const Formula& a, const Formula& b) { return (a & b) | ((!a) & (!b)); }

/// Pairwise distinct x1..xn.
inline Formula dif(int n)
{
    std::vector<Formula> parts;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) parts.push_back(!Formula::eq(i, j));
    return Formula::conj(std::move(parts), n);
}

/// Contradiction of explicit arity r.
inline Formula bottom_r(int r)
{
    std::vector<Formula> parts;
    for (int i = 0; i < r; ++i) parts.push_back(!Formula::eq(i, i));
    if (parts.empty()) return Formula::bottom(0);
    return Formula::conj(std::move(parts), r);
}

/// Symbols used by a formula, with their arities. Conflicting arities are an input error.
inline void collect_symbols(const Formula& f, std::map<std::string, int>& out)
{
    if (f.kind() == Kind::Atom) {
        auto [it, fresh] = out.emplace(f.symbol(), static_cast<int>(f.vars().size()));
        if (!fresh && it->second != static_cast<int>(f.vars().size()))
            throw InputError("symbol '" + f.symbol() + "' used with arities " + std::to_string(it->second) +
                             " and " + std::to_string(f.vars().size()));
        return;
    }
    for (const auto& k : f.children()) collect_symbols(k, out);
}

inline std::map<std::string, int> symbols_of(const Formula& f)
{
    std::map<std::string, int> out;
    collect_symbols(f, out);
    return out;
}

/// Smallest signature covering the formula's atoms (symbols in name order).
inline Signature signature_of(const Formula& f)
{
    std::vector<Symbol> syms;
    for (const auto& [name, ar] : symbols_of(f)) syms.push_back({name, ar});
    return Signature(std::move(syms));
}

/// Throws unless every atom of `f` names a symbol of `sig` with matching arity.
inline void check_formula(const Formula& f, const Signature& sig)
{
    for (const auto& [name, ar] : symbols_of(f)) {
        auto i = sig.find(name);
        if (!i) throw InputError("formula uses symbol '" + name + "' outside the signature");
        if (sig[*i].arity != ar)
            throw InputError("formula uses '" + name + "' with arity " + std::to_string(ar) + ", expected " +
                             std::to_string(sig[*i].arity));
    }
}

/// Renames variables: variable i becomes map[i]; the result has arity `arity`.
inline Formula substitute(const Formula& f, std::span<const int> map, int arity)
{
    switch (f.kind()) {
    case Kind::True: return Formula::top(arity);
    case Kind::False: return Formula::bottom(arity);
    case Kind::Eq: return Formula::eq(map[static_cast<std::size_t>(f.lhs())], map[static_cast<std::size_t>(f.rhs())]).with_arity(arity);
    case Kind::Atom: {
        std::vector<int> vs;
        vs.reserve(f.vars().size());
        for (int v : f.vars()) vs.push_back(map[static_cast<std::size_t>(v)]);
        return Formula::atom(f.symbol(), std::move(vs)).with_arity(arity);
    }
    case Kind::Not: return Formula::negate(substitute(f.children()[0], map, arity));
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> kids;
        for (const auto& k : f.children()) kids.push_back(substitute(k, map, arity));
        return f.kind() == Kind::And ? Formula::conj(std::move(kids), arity) : Formula::disj(std::move(kids), arity);
    }
    }
    return f;
}

/// Renames symbols through `rename` (names absent from the map are kept).
inline Formula rename_symbols(const Formula& f, const std::map<std::string, std::string>& rename)
{
    switch (f.kind()) {
    case Kind::Atom: {
        auto it = rename.find(f.symbol());
        if (it == rename.end()) return f;
        return Formula::atom(it->second, f.vars()).with_arity(f.arity());
    }
    case Kind::Not: return Formula::negate(rename_symbols(f.children()[0], rename));
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> kids;
        for (const auto& k : f.children()) kids.push_back(rename_symbols(k, rename));
        return f.kind() == Kind::And ? Formula::conj(std::move(kids), f.arity()) : Formula::disj(std::move(kids), f.arity());
    }
    default: return f;
    }
}

namespace detail {

inline bool eval_node(const Formula& f, const Structure& a, std::span<const int> asg, std::vector<int>& scratch)
{
    switch (f.kind()) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Eq: return asg[static_cast<std::size_t>(f.lhs())] == asg[static_cast<std::size_t>(f.rhs())];
    case Kind::Atom: {
        const auto& sig = a.signature();
        auto s = sig.find(f.symbol());
        if (!s) throw InputError("symbol '" + f.symbol() + "' is not in the structure's signature");
        if (sig[*s].arity != static_cast<int>(f.vars().size()))
            throw InputError("atom '" + f.symbol() + "' has the wrong number of arguments");
        scratch.resize(f.vars().size());
        for (std::size_t i = 0; i < f.vars().size(); ++i) scratch[i] = asg[static_cast<std::size_t>(f.vars()[i])];
        return a.has(*s, scratch);
    }
    case Kind::Not: return !eval_node(f.children()[0], a, asg, scratch);
    case Kind::And:
        for (const auto& k : f.children())
            if (!eval_node(k, a, asg, scratch)) return false;
        return true;
    case Kind::Or:
        for (const auto& k : f.children())
            if (eval_node(k, a, asg, scratch)) return true;
        return false;
    }
    return false;
}

} // namespace detail

/// Truth of phi in A under the assignment x_{i+1} -> a[i].
inline bool evaluate(const Formula& phi, const Structure& a, std::span<const int> assignment)
{
    if (static_cast<int>(assignment.size()) != phi.arity())
        throw InputError("assignment has " + std::to_string(assignment.size()) + " entries, formula arity is " +
                         std::to_string(phi.arity()));
    for (int v : assignment)
        if (v < 0 || v >= a.size()) throw InputError("assignment vertex " + std::to_string(v) + " out of range");
    std::vector<int> scratch;
    return detail::eval_node(phi, a, assignment, scratch);
}

inline bool evaluate(const Formula& phi, const Structure& a, std::initializer_list<int> assignment)
{
    return evaluate(phi, a, std::span<const int>(assignment.begin(), assignment.size()));
}

/// Conjunction of every atomic and negated atomic fact true of the spanning
/// tuple `a` in A: equalities for i<j first, then each symbol's atoms over
/// [k]^arity in lexicographic order.
inline Formula characteristic_formula(const Structure& a, std::span<const int> tuple)
{
    const int k = static_cast<int>(tuple.size());
    std::vector<char> seen(static_cast<std::size_t>(a.size()), 0);
    for (int v : tuple) {
        if (v < 0 || v >= a.size()) throw InputError("characteristic_formula: vertex out of range");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw InputError("characteristic_formula: tuple is not spanning");
    std::vector<Formula> parts;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            auto e = Formula::eq(i, j);
            parts.push_back(tuple[static_cast<std::size_t>(i)] == tuple[static_cast<std::size_t>(j)] ? e : !e);
        }
    const auto& sig = a.signature();
    for (std::size_t s = 0; s < sig.size(); ++s) {
        if (k == 0) break;
        const int ar = sig[s].arity;
        std::vector<int> vars(static_cast<std::size_t>(ar), 0), image(static_cast<std::size_t>(ar));
        do {
            for (int i = 0; i < ar; ++i) image[static_cast<std::size_t>(i)] = tuple[static_cast<std::size_t>(vars[static_cast<std::size_t>(i)])];
            auto at = Formula::atom(sig[s].name, vars);
            parts.push_back(a.has(s, image) ? at : !at);
        } while (detail::next_tuple(vars, k));
    }
    return Formula::conj(std::move(parts), k);
}

inline Formula characteristic_formula(const Structure& a, std::initializer_list<int> tuple)
{
    return characteristic_formula(a, std::span<const int>(tuple.begin(), tuple.size()));
}

/// chi(A, (0,1,..,n-1)).
inline Formula characteristic_formula(const Structure& a)
{
    std::vector<int> id(static_cast<std::size_t>(a.size()));
    for (int i = 0; i < a.size(); ++i) id[static_cast<std::size_t>(i)] = i;
    return characteristic_formula(a, id);
}

// ---------------------------------------------------------------------------
// Printing (formula DSL)

namespace detail {

/// `s` with every character outside [A-Za-z0-9_] replaced by '_'.
inline std::string identifier(const std::string& s)
{
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    while (out.size() > 1 && out.back() == '_') out.pop_back();
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "e_" + out;
    return out;
}

inline void print_formula(const Formula& f, std::string& out, int prec)
{
    // prec: 0 = or-context, 1 = and-context, 2 = unary-context
    auto var = [](int v) { return "x" + std::to_string(v + 1); };
    switch (f.kind()) {
    case Kind::True: out += "true"; return;
    case Kind::False: out += "false"; return;
    case Kind::Eq:
        if (prec >= 2) out += "(";
        out += var(f.lhs()) + " = " + var(f.rhs());
        if (prec >= 2) out += ")";
        return;
    case Kind::Atom:
        out += f.symbol() + "(";
        for (std::size_t i = 0; i < f.vars().size(); ++i) {
            if (i) out += ",";
            out += var(f.vars()[i]);
        }
        out += ")";
        return;
    case Kind::Not:
        out += "!";
        print_formula(f.children()[0], out, 2);
        return;
    case Kind::And:
    case Kind::Or: {
        const bool is_and = f.kind() == Kind::And;
        if (f.children().empty()) {
            out += is_and ? "true" : "false";
            return;
        }
        if (f.children().size() == 1) {
            print_formula(f.children()[0], out, prec);
            return;
        }
        const int mine = is_and ? 1 : 0;
        const bool paren = prec > mine;
        if (paren) out += "(";
        for (std::size_t i = 0; i < f.children().size(); ++i) {
            if (i) out += is_and ? " & " : " | ";
            print_formula(f.children()[i], out, mine + 1 > 1 ? 2 : 1);
        }
        if (paren) out += ")";
        return;
    }
    }
}

} // namespace detail

inline std::string to_string(const Formula& f)
{
    std::string out;
    detail::print_formula(f, out, 0);
    return out;
}

} // namespace lexpr

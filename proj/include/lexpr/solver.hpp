#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lexpr/error.hpp"
#include "lexpr/local_expression.hpp"

namespace lexpr {

enum class ConstraintKind : std::uint8_t { Reduct = 0, Base = 1, Forbidden = 2 };
inline constexpr std::size_t kConstraintKinds = 3;

inline const char* constraint_kind_name(ConstraintKind k)
{
    switch (k) {
    case ConstraintKind::Reduct: return "reduct";
    case ConstraintKind::Base: return "base";
    case ConstraintKind::Forbidden: return "forbidden";
    }
    return "?";
}

struct SearchStats {
    std::uint64_t nodes = 0;
    std::array<std::uint64_t, kConstraintKinds> failures{};
    double seconds = 0;
    // Filled by compile.
    std::size_t constraints = 0;
    std::size_t atoms = 0;
    std::size_t fixed_atoms = 0;
    std::size_t levels = 0;

    /// Key-value block, one "key value" pair per line.
    [[nodiscard]] std::string to_text() const
    {
        std::ostringstream out;
        out << "nodes " << nodes << '\n';
        for (std::size_t k = 0; k < kConstraintKinds; ++k)
            out << "failures." << constraint_kind_name(static_cast<ConstraintKind>(k)) << ' ' << failures[k] << '\n';
        out << "constraints " << constraints << '\n'
            << "atoms " << atoms << '\n'
            << "fixed_atoms " << fixed_atoms << '\n'
            << "levels " << levels << '\n'
            << "seconds " << seconds << '\n';
        return out.str();
    }
};

struct SolverOptions {
    std::uint64_t max_nodes = 0; // 0: unlimited
    double max_seconds = 0;      // 0: unlimited
    unsigned threads = 1;
    /// Re-check every fully assigned constraint at every node (slow; tests only).
    bool audit = false;
};

namespace detail {

enum : std::uint8_t { kLit = 0, kAnd = 1, kOr = 2 };
inline constexpr int kFalse = -1;
inline constexpr int kTrue = -2;

struct GNode {
    std::uint8_t op = kLit;
    int a = 0; // literal: atom; junction: first kid
    int b = 0; // literal: negated flag; junction: one past last kid
};

/// Scratch arena in which ground formulas are built and simplified.
struct Arena {
    std::vector<GNode> nodes;
    std::vector<int> kids;
    std::vector<int> stack;

    void clear()
    {
        nodes.clear();
        kids.clear();
        stack.clear();
    }

    int lit(int atom, bool neg)
    {
        nodes.push_back({kLit, atom, neg ? 1 : 0});
        return static_cast<int>(nodes.size()) - 1;
    }

    /// Closes a junction whose simplified children sit on the stack from `mark`.
    int junction(std::uint8_t op, std::size_t mark)
    {
        const std::size_t count = stack.size() - mark;
        if (count == 0) {
            stack.resize(mark);
            return op == kAnd ? kTrue : kFalse;
        }
        if (count == 1) {
            const int only = stack[mark];
            stack.resize(mark);
            return only;
        }
        const int first = static_cast<int>(kids.size());
        kids.insert(kids.end(), stack.begin() + static_cast<std::ptrdiff_t>(mark), stack.end());
        stack.resize(mark);
        nodes.push_back({op, first, static_cast<int>(kids.size())});
        return static_cast<int>(nodes.size()) - 1;
    }

    /// Pushes a child into the junction under construction; flattens
    /// same-operator children. Returns true when the junction is decided.
    bool push_child(std::uint8_t op, int child)
    {
        const int absorbing = op == kAnd ? kFalse : kTrue;
        const int neutral = op == kAnd ? kTrue : kFalse;
        if (child == absorbing) return true;
        if (child == neutral) return false;
        const GNode& g = nodes[static_cast<std::size_t>(child)];
        if (g.op == op) {
            for (int k = g.a; k < g.b; ++k) stack.push_back(kids[static_cast<std::size_t>(k)]);
        } else {
            stack.push_back(child);
        }
        return false;
    }
};

} // namespace detail

/// A LocalExpression instance compiled against one input structure: ground
/// constraints over the atoms of the carrier on the input's vertex set.
class SearchProblem {
public:
    struct Level {
        bool encoding = false;
        int vertex = 0;
        int index = 0; // encoding index, or the representative atom
    };

    [[nodiscard]] const Signature& carrier() const { return carrier_; }
    [[nodiscard]] int vertex_count() const { return n_; }
    [[nodiscard]] bool infeasible() const { return infeasible_; }
    [[nodiscard]] std::size_t atom_count() const { return atom_symbol_.size(); }
    [[nodiscard]] std::size_t constraint_count() const { return roots_.size(); }
    [[nodiscard]] const std::vector<Level>& levels() const { return levels_; }
    [[nodiscard]] std::size_t unconstrained_count() const { return unconstrained_.size(); }
    [[nodiscard]] int window() const { return window_; }
    [[nodiscard]] std::size_t fixed_count() const { return fixed_count_; }
    [[nodiscard]] const std::vector<int>& unconstrained() const { return unconstrained_; }
    /// Atoms aliased to a representative, with their parity.
    [[nodiscard]] const std::vector<std::pair<int, std::uint8_t>>& group(int rep) const
    {
        return group_[static_cast<std::size_t>(rep)];
    }
    [[nodiscard]] std::size_t symbol_of_atom(int atom) const { return atom_symbol_[static_cast<std::size_t>(atom)]; }
    [[nodiscard]] std::size_t rank_of_atom(int atom) const
    {
        return static_cast<std::size_t>(atom) - offsets_[atom_symbol_[static_cast<std::size_t>(atom)]];
    }

    /// Atoms of `symbol` whose value is still open after static fixing:
    /// encoded atoms on pairwise distinct vertices, and free representatives.
    [[nodiscard]] std::size_t open_atoms(std::string_view symbol) const
    {
        const std::size_t s = carrier_.index_of(symbol);
        std::size_t count = 0;
        for (std::size_t a = offsets_[s]; a < offsets_[s + 1]; ++a) {
            if (encoding_of_symbol_[s] >= 0) {
                const auto t = tuple_of(static_cast<int>(a));
                std::set<int> distinct(t.begin(), t.end());
                if (distinct.size() == t.size()) ++count;
            } else if (rep_[a] == static_cast<int>(a) && fixed_[a] < 0) {
                ++count;
            }
        }
        return count;
    }

    [[nodiscard]] Tuple tuple_of(int atom) const
    {
        const std::size_t s = atom_symbol_[static_cast<std::size_t>(atom)];
        std::size_t r = static_cast<std::size_t>(atom) - offsets_[s];
        Tuple t(static_cast<std::size_t>(carrier_[s].arity), 0);
        for (std::size_t i = t.size(); i-- > 0;) {
            t[i] = static_cast<int>(r % static_cast<std::size_t>(n_));
            r /= static_cast<std::size_t>(n_);
        }
        return t;
    }

private:
    friend SearchProblem compile(const LocalExpression& e, const Structure& g);
    friend class Searcher;

    Signature carrier_;
    int n_ = 0;
    int window_ = 0;
    bool infeasible_ = false;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> atom_symbol_;
    std::vector<int> atom_vertex_; // largest entry of the tuple
    std::vector<int> encoding_of_symbol_;
    std::vector<Encoding> encodings_;
    // Free atoms: representative and parity after aliasing; fixed value of the representative.
    std::vector<int> rep_;
    std::vector<std::uint8_t> parity_;
    std::vector<std::int8_t> fixed_;
    std::vector<std::vector<std::pair<int, std::uint8_t>>> group_; // per representative
    std::vector<int> unconstrained_;
    // Constraints.
    std::vector<detail::GNode> nodes_;
    std::vector<int> kids_;
    std::vector<int> roots_;
    std::vector<ConstraintKind> kinds_;
    std::vector<int> catom_start_, catoms_;
    std::vector<int> watch_start_, watches_;
    // Encoded atoms by (encoding, vertex).
    std::vector<std::vector<std::vector<int>>> encoded_atoms_;
    std::vector<Level> levels_;
    std::size_t fixed_count_ = 0;
};

namespace detail {

/// Builds simplified ground constraints for one compile run.
class Grounder {
public:
    Grounder(const Signature& carrier, int n, const std::vector<std::size_t>& offsets,
             const std::vector<int>& encoding_of_symbol)
        : carrier_(carrier), n_(n), offsets_(offsets), enc_(encoding_of_symbol)
    {
    }

    std::vector<int>* rep = nullptr;
    std::vector<std::uint8_t>* parity = nullptr;
    std::vector<std::int8_t>* fixed = nullptr;
    Arena arena;

    int atom_index(std::size_t sym, std::span<const int> t) const
    {
        std::size_t r = 0;
        for (int v : t) r = r * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v);
        return static_cast<int>(offsets_[sym] + r);
    }

    /// Literal on an atom after aliasing and fixing.
    int literal(int atom, bool neg)
    {
        const std::size_t s = symbol_of(atom);
        if (enc_[s] < 0) {
            const std::size_t a = static_cast<std::size_t>(atom);
            const int r = (*rep)[a];
            neg = neg != ((*parity)[a] != 0);
            atom = r;
            const std::int8_t f = (*fixed)[static_cast<std::size_t>(r)];
            if (f >= 0) return ((f != 0) != neg) ? kTrue : kFalse;
        }
        return arena.lit(atom, neg);
    }

    int ground(const Formula& f, std::span<const int> asg, bool neg)
    {
        switch (f.kind()) {
        case Kind::True: return neg ? kFalse : kTrue;
        case Kind::False: return neg ? kTrue : kFalse;
        case Kind::Eq: {
            const bool v = asg[static_cast<std::size_t>(f.lhs())] == asg[static_cast<std::size_t>(f.rhs())];
            return v != neg ? kTrue : kFalse;
        }
        case Kind::Atom: {
            const std::size_t s = carrier_.index_of(f.symbol());
            scratch_.clear();
            for (int v : f.vars()) scratch_.push_back(asg[static_cast<std::size_t>(v)]);
            return literal(atom_index(s, scratch_), neg);
        }
        case Kind::Not: return ground(f.children()[0], asg, !neg);
        case Kind::And:
        case Kind::Or: {
            const std::uint8_t op = ((f.kind() == Kind::And) != neg) ? kAnd : kOr;
            const std::size_t mark = arena.stack.size();
            for (const auto& c : f.children()) {
                const int r = ground(c, asg, neg);
                if (arena.push_child(op, r)) {
                    arena.stack.resize(mark);
                    return op == kAnd ? kFalse : kTrue;
                }
            }
            return arena.junction(op, mark);
        }
        }
        return kTrue;
    }

    /// Re-simplifies a stored ground formula under the current fixing/aliasing.
    int rebuild(const std::vector<GNode>& nodes, const std::vector<int>& kids, int node)
    {
        const GNode& g = nodes[static_cast<std::size_t>(node)];
        if (g.op == kLit) return literal(g.a, g.b != 0);
        const std::size_t mark = arena.stack.size();
        for (int k = g.a; k < g.b; ++k) {
            const int r = rebuild(nodes, kids, kids[static_cast<std::size_t>(k)]);
            if (arena.push_child(g.op, r)) {
                arena.stack.resize(mark);
                return g.op == kAnd ? kFalse : kTrue;
            }
        }
        return arena.junction(g.op, mark);
    }

    std::size_t symbol_of(int atom) const
    {
        std::size_t s = 0;
        while (offsets_[s + 1] <= static_cast<std::size_t>(atom)) ++s;
        return s;
    }

private:
    const Signature& carrier_;
    int n_;
    const std::vector<std::size_t>& offsets_;
    const std::vector<int>& enc_;
    std::vector<int> scratch_;
};

/// A stored constraint while compiling: nodes in local numbering, root last.
struct PendingConstraint {
    ConstraintKind kind = ConstraintKind::Base;
    std::vector<GNode> nodes;
    std::vector<int> kids;
    int root = 0;
};

} // namespace detail

inline SearchProblem compile(const LocalExpression& e, const Structure& g)
{
    using namespace detail;
    if (!(g.signature() == e.target()))
        throw InputError("compile: input structure is not over the target signature of " + e.name());
    SearchProblem p;
    p.carrier_ = e.carrier();
    p.n_ = g.size();
    p.window_ = e.window();
    p.encodings_ = e.encodings();
    const int n = p.n_;
    const Signature& sig = p.carrier_;

    p.offsets_.push_back(0);
    for (std::size_t s = 0; s < sig.size(); ++s) {
        const std::size_t size = n == 0 ? 0 : checked_power(n, sig[s].arity);
        for (std::size_t r = 0; r < size; ++r) p.atom_symbol_.push_back(s);
        p.offsets_.push_back(p.offsets_.back() + size);
    }
    const std::size_t atoms = p.atom_symbol_.size();
    p.atom_vertex_.assign(atoms, 0);
    for (std::size_t a = 0; a < atoms; ++a) {
        const auto t = p.tuple_of(static_cast<int>(a));
        p.atom_vertex_[a] = *std::max_element(t.begin(), t.end());
    }
    p.encoding_of_symbol_.assign(sig.size(), -1);
    std::set<std::string> encoded;
    for (std::size_t i = 0; i < p.encodings_.size(); ++i) {
        p.encoding_of_symbol_[sig.index_of(p.encodings_[i].symbol)] = static_cast<int>(i);
        encoded.insert(p.encodings_[i].symbol);
    }
    p.rep_.resize(atoms);
    std::iota(p.rep_.begin(), p.rep_.end(), 0);
    p.parity_.assign(atoms, 0);
    p.fixed_.assign(atoms, -1);

    Grounder gr(sig, n, p.offsets_, p.encoding_of_symbol_);
    gr.rep = &p.rep_;
    gr.parity = &p.parity_;
    gr.fixed = &p.fixed_;

    std::vector<PendingConstraint> pending;
    bool infeasible = false;

    // Splits a built root into stored constraints; top-level conjunctions become separate constraints.
    auto store = [&](ConstraintKind kind, int root) {
        if (root == kTrue) return;
        if (root == kFalse) {
            infeasible = true;
            return;
        }
        std::vector<int> tops;
        if (gr.arena.nodes[static_cast<std::size_t>(root)].op == kAnd) {
            const auto& r = gr.arena.nodes[static_cast<std::size_t>(root)];
            for (int k = r.a; k < r.b; ++k) tops.push_back(gr.arena.kids[static_cast<std::size_t>(k)]);
        } else {
            tops.push_back(root);
        }
        for (int top : tops) {
            PendingConstraint c;
            c.kind = kind;
            std::unordered_map<int, int> remap;
            auto copy = [&](auto&& self, int node) -> int {
                const GNode src = gr.arena.nodes[static_cast<std::size_t>(node)];
                if (src.op == kLit) {
                    c.nodes.push_back(src);
                    return static_cast<int>(c.nodes.size()) - 1;
                }
                std::vector<int> ks;
                for (int k = src.a; k < src.b; ++k) ks.push_back(self(self, gr.arena.kids[static_cast<std::size_t>(k)]));
                const int first = static_cast<int>(c.kids.size());
                c.kids.insert(c.kids.end(), ks.begin(), ks.end());
                c.nodes.push_back({src.op, first, static_cast<int>(c.kids.size())});
                return static_cast<int>(c.nodes.size()) - 1;
            };
            c.root = copy(copy, top);
            pending.push_back(std::move(c));
        }
    };

    // Reduct agreement.
    const QfDefinition& d = e.definition();
    for (std::size_t i = 0; i < e.target().size() && n > 0; ++i) {
        const int r = e.target()[i].arity;
        Tuple t(static_cast<std::size_t>(r), 0);
        std::size_t rank = 0;
        do {
            gr.arena.clear();
            store(ConstraintKind::Reduct, gr.ground(d[i], t, !g.has_rank(i, rank)));
            ++rank;
        } while (next_tuple(t, n));
    }
    // Base sentences, minus those an encoding already guarantees.
    for (const auto& s : e.base().as_sentences()) {
        const auto used = symbols_of(s.body);
        if (!used.empty() && std::all_of(used.begin(), used.end(), [&](const auto& kv) { return encoded.count(kv.first) > 0; }))
            continue;
        const int k = s.body.arity();
        if (k == 0) {
            gr.arena.clear();
            store(ConstraintKind::Base, gr.ground(s.body, {}, false));
            continue;
        }
        if (n == 0) continue;
        Tuple t(static_cast<std::size_t>(k), 0);
        do {
            gr.arena.clear();
            store(ConstraintKind::Base, gr.ground(s.body, t, false));
        } while (next_tuple(t, n));
    }
    // Forbidden structures, over injective tuples only.
    for (const auto& f : e.forbidden()) {
        if (f.size() == 0) {
            infeasible = true;
            continue;
        }
        if (f.size() > n) continue;
        const Formula chi = characteristic_formula(f);
        Tuple t(static_cast<std::size_t>(f.size()), 0);
        do {
            std::vector<int> sorted = t;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
            gr.arena.clear();
            store(ConstraintKind::Forbidden, gr.ground(chi, t, true));
        } while (next_tuple(t, n));
    }

    auto order_less = [&](int a, int b) {
        const auto va = p.atom_vertex_[static_cast<std::size_t>(a)], vb = p.atom_vertex_[static_cast<std::size_t>(b)];
        return va != vb ? va < vb : a < b;
    };
    auto find_rep = [&](int a) {
        // Representatives are kept flat, so one lookup suffices.
        return std::pair<int, std::uint8_t>{p.rep_[static_cast<std::size_t>(a)], p.parity_[static_cast<std::size_t>(a)]};
    };
    auto is_free = [&](int atom) { return p.encoding_of_symbol_[p.atom_symbol_[static_cast<std::size_t>(atom)]] < 0; };

    // Fixpoint: unit fixing, then equivalence aliasing from binary clauses.
    while (!infeasible) {
        bool changed = false;
        for (const auto& c : pending) {
            if (c.nodes[static_cast<std::size_t>(c.root)].op != kLit) continue;
            const auto& l = c.nodes[static_cast<std::size_t>(c.root)];
            if (!is_free(l.a)) continue;
            auto& f = p.fixed_[static_cast<std::size_t>(l.a)];
            const std::int8_t want = l.b != 0 ? 0 : 1;
            if (f < 0) {
                f = want;
                changed = true;
            } else if (f != want) {
                infeasible = true;
            }
        }
        if (!changed) {
            // Binary clauses over free representatives: (a|b)&(!a|!b) or (a|!b)&(!a|b).
            std::map<std::pair<int, int>, unsigned> patterns;
            for (const auto& c : pending) {
                const auto& r = c.nodes[static_cast<std::size_t>(c.root)];
                if (r.op != kOr || r.b - r.a != 2) continue;
                const auto& x = c.nodes[static_cast<std::size_t>(c.kids[static_cast<std::size_t>(r.a)])];
                const auto& y = c.nodes[static_cast<std::size_t>(c.kids[static_cast<std::size_t>(r.a + 1)])];
                if (x.op != kLit || y.op != kLit || x.a == y.a || !is_free(x.a) || !is_free(y.a)) continue;
                const bool swap = y.a < x.a;
                const int lo = swap ? y.a : x.a, hi = swap ? x.a : y.a;
                const int nlo = swap ? y.b : x.b, nhi = swap ? x.b : y.b;
                patterns[{lo, hi}] |= 1U << (nlo * 2 + nhi);
            }
            for (const auto& [key, mask] : patterns) {
                const bool anti = (mask & 0b1001U) == 0b1001U;  // ++ and --
                const bool same = (mask & 0b0110U) == 0b0110U;  // +- and -+
                if (!anti && !same) continue;
                if (anti && same) {
                    infeasible = true;
                    break;
                }
                auto [ra, pa] = find_rep(key.first);
                auto [rb, pb] = find_rep(key.second);
                const std::uint8_t rel = anti ? 1 : 0; // b = a xor rel
                if (ra == rb) {
                    if ((pa ^ pb) != rel) infeasible = true;
                    continue;
                }
                // Merge the later representative into the earlier one.
                int keep = ra, drop = rb;
                std::uint8_t flip = static_cast<std::uint8_t>(pa ^ pb ^ rel);
                if (order_less(rb, ra)) std::swap(keep, drop);
                const std::int8_t fd = p.fixed_[static_cast<std::size_t>(drop)];
                for (std::size_t a = 0; a < atoms; ++a)
                    if (p.rep_[a] == drop) {
                        p.rep_[a] = keep;
                        p.parity_[a] = static_cast<std::uint8_t>(p.parity_[a] ^ flip);
                    }
                if (fd >= 0) {
                    const std::int8_t want = static_cast<std::int8_t>(fd ^ flip);
                    auto& fk = p.fixed_[static_cast<std::size_t>(keep)];
                    if (fk < 0) fk = want;
                    else if (fk != want) infeasible = true;
                }
                changed = true;
            }
        }
        if (!changed || infeasible) break;
        std::vector<PendingConstraint> old;
        old.swap(pending);
        for (const auto& c : old) {
            gr.arena.clear();
            store(c.kind, gr.rebuild(c.nodes, c.kids, c.root));
            if (infeasible) break;
        }
    }

    p.infeasible_ = infeasible;
    if (infeasible) return p;

    // Canonical clause order inside disjunctions of literals, then deduplicate.
    std::unordered_set<std::string> seen;
    std::vector<bool> constrained(atoms, false);
    for (auto& c : pending) {
        auto& r = c.nodes[static_cast<std::size_t>(c.root)];
        if (r.op == kOr) {
            bool flat = true;
            for (int k = r.a; k < r.b; ++k)
                flat = flat && c.nodes[static_cast<std::size_t>(c.kids[static_cast<std::size_t>(k)])].op == kLit;
            if (flat) {
                std::vector<std::pair<int, int>> lits;
                for (int k = r.a; k < r.b; ++k) {
                    const auto& l = c.nodes[static_cast<std::size_t>(c.kids[static_cast<std::size_t>(k)])];
                    lits.emplace_back(l.a, l.b);
                }
                std::sort(lits.begin(), lits.end());
                lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
                bool tautology = false;
                for (std::size_t i = 0; i + 1 < lits.size(); ++i) tautology = tautology || lits[i].first == lits[i + 1].first;
                if (tautology) continue;
                PendingConstraint flatc;
                flatc.kind = c.kind;
                for (auto [a, neg] : lits) flatc.nodes.push_back({kLit, a, neg});
                if (lits.size() == 1) {
                    flatc.root = 0;
                } else {
                    for (std::size_t i = 0; i < lits.size(); ++i) flatc.kids.push_back(static_cast<int>(i));
                    flatc.nodes.push_back({kOr, 0, static_cast<int>(lits.size())});
                    flatc.root = static_cast<int>(flatc.nodes.size()) - 1;
                }
                c = std::move(flatc);
            }
        }
        std::string key;
        key.reserve(c.nodes.size() * 12 + 8);
        key.push_back(static_cast<char>('0' + static_cast<int>(c.kind)));
        for (const auto& nd : c.nodes) {
            key += std::to_string(nd.op) + ":" + std::to_string(nd.a) + ":" + std::to_string(nd.b) + ";";
        }
        for (int k : c.kids) key += std::to_string(k) + ",";
        key += "r" + std::to_string(c.root);
        if (!seen.insert(key).second) continue;

        const int base_node = static_cast<int>(p.nodes_.size());
        const int base_kid = static_cast<int>(p.kids_.size());
        for (auto nd : c.nodes) {
            if (nd.op != kLit) {
                nd.a += base_kid;
                nd.b += base_kid;
            }
            p.nodes_.push_back(nd);
        }
        for (int k : c.kids) p.kids_.push_back(k + base_node);
        p.roots_.push_back(c.root + base_node);
        p.kinds_.push_back(c.kind);
        p.catom_start_.push_back(static_cast<int>(p.catoms_.size()));
        std::set<int> used;
        for (const auto& nd : c.nodes)
            if (nd.op == kLit) used.insert(nd.a);
        for (int a : used) {
            p.catoms_.push_back(a);
            constrained[static_cast<std::size_t>(a)] = true;
        }
    }
    p.catom_start_.push_back(static_cast<int>(p.catoms_.size()));

    // Watch lists.
    std::vector<int> counts(atoms + 1, 0);
    for (int a : p.catoms_) ++counts[static_cast<std::size_t>(a)];
    p.watch_start_.assign(atoms + 1, 0);
    for (std::size_t a = 0; a < atoms; ++a) p.watch_start_[a + 1] = p.watch_start_[a] + counts[a];
    p.watches_.assign(p.catoms_.size(), 0);
    std::vector<int> fill(p.watch_start_.begin(), p.watch_start_.end() - 1);
    for (std::size_t c = 0; c + 1 < p.catom_start_.size(); ++c)
        for (int k = p.catom_start_[c]; k < p.catom_start_[c + 1]; ++k)
            p.watches_[static_cast<std::size_t>(fill[static_cast<std::size_t>(p.catoms_[static_cast<std::size_t>(k)])]++)] =
                static_cast<int>(c);

    // Alias groups, fixed count, decision levels.
    p.group_.assign(atoms, {});
    for (std::size_t a = 0; a < atoms; ++a)
        if (is_free(static_cast<int>(a))) p.group_[static_cast<std::size_t>(p.rep_[a])].emplace_back(static_cast<int>(a), p.parity_[a]);
    for (std::size_t a = 0; a < atoms; ++a)
        if (is_free(static_cast<int>(a)) && p.fixed_[static_cast<std::size_t>(p.rep_[a])] >= 0) ++p.fixed_count_;
    p.encoded_atoms_.assign(p.encodings_.size(), std::vector<std::vector<int>>(static_cast<std::size_t>(n)));
    for (std::size_t a = 0; a < atoms; ++a) {
        const int enc = p.encoding_of_symbol_[p.atom_symbol_[a]];
        if (enc >= 0) p.encoded_atoms_[static_cast<std::size_t>(enc)][static_cast<std::size_t>(p.atom_vertex_[a])].push_back(static_cast<int>(a));
    }
    for (int v = 0; v < n; ++v) {
        for (std::size_t i = 0; i < p.encodings_.size(); ++i) p.levels_.push_back({true, v, static_cast<int>(i)});
        for (std::size_t a = 0; a < atoms; ++a) {
            if (!is_free(static_cast<int>(a)) || p.atom_vertex_[a] != v) continue;
            if (p.rep_[a] != static_cast<int>(a) || p.fixed_[a] >= 0) continue;
            if (constrained[a]) p.levels_.push_back({false, v, static_cast<int>(a)});
            else p.unconstrained_.push_back(static_cast<int>(a));
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Search

/// Depth-first search over the decision levels of one problem.
class Searcher {
public:
    struct Counters {
        std::uint64_t nodes = 0;
        std::array<std::uint64_t, kConstraintKinds> failures{};
        Counters& operator+=(const Counters& o)
        {
            nodes += o.nodes;
            for (std::size_t k = 0; k < kConstraintKinds; ++k) failures[k] += o.failures[k];
            return *this;
        }
    };

    enum class Mode { First, Count, Prefix };

    Searcher(const SearchProblem& p, const SolverOptions& opts,
             std::chrono::steady_clock::time_point deadline, bool has_deadline)
        : p_(p), opts_(opts), deadline_(deadline), has_deadline_(has_deadline)
    {
        val_.assign(p.atom_count(), -1);
        for (std::size_t a = 0; a < p.atom_count(); ++a) {
            if (p.encoding_of_symbol_[p.atom_symbol_[a]] >= 0) continue;
            const std::int8_t f = p.fixed_[static_cast<std::size_t>(p.rep_[a])];
            if (f >= 0) val_[a] = static_cast<std::int8_t>(f ^ p.parity_[a]);
        }
        for (int r : p.unconstrained_)
            for (auto [a, par] : p.group_[static_cast<std::size_t>(r)]) val_[static_cast<std::size_t>(a)] = static_cast<std::int8_t>(par);
        enc_.resize(p.encodings_.size());
        for (std::size_t i = 0; i < enc_.size(); ++i) enc_[i].kind = p.encodings_[i].kind;
        stamp_.assign(p.constraint_count(), 0);
        choice_.assign(p.levels_.size(), 0);
    }

    Counters counters;
    std::uint64_t node_limit = 0; // 0: unlimited
    std::uint64_t solution_cap = 1;
    std::vector<std::uint64_t> solution_nodes;            // node counter at each solution
    std::vector<Counters> solution_counters;
    std::vector<std::vector<std::int8_t>> solutions;      // atom values at each solution (when kept)
    bool keep_solutions = false;
    const std::atomic<std::size_t>* abort_above = nullptr; // stop when a lower task already won
    std::size_t task_index = 0;
    bool aborted = false;
    bool exhausted = false;

    // Prefix mode output.
    struct Task {
        std::vector<int> choices;
        Counters before;
    };
    std::vector<Task> tasks;
    std::size_t prefix_depth = 0;

    [[nodiscard]] static int choices_at(const SearchProblem& p, const SearchProblem::Level& l,
                                        const std::vector<detail::EncodingState>& enc)
    {
        if (!l.encoding) return 2;
        return detail::encoding_choices(p.encodings_[static_cast<std::size_t>(l.index)].kind, l.vertex,
                                        enc[static_cast<std::size_t>(l.index)].classes);
    }

    /// Applies a choice without counting; used to replay a prefix.
    bool replay(std::span<const int> choices)
    {
        for (std::size_t i = 0; i < choices.size(); ++i) {
            choice_[i] = choices[i];
            if (!apply(i, choices[i])) return false;
        }
        return true;
    }

    /// Returns false when the search must stop (cap reached, aborted).
    bool run(std::size_t level, Mode mode)
    {
        if (mode == Mode::Prefix && level == prefix_depth) {
            tasks.push_back({std::vector<int>(choice_.begin(), choice_.begin() + static_cast<std::ptrdiff_t>(level)), counters});
            return true;
        }
        if (level == p_.levels_.size()) {
            solution_nodes.push_back(counters.nodes);
            solution_counters.push_back(counters);
            if (keep_solutions) solutions.push_back(val_);
            return solution_nodes.size() < solution_cap;
        }
        const auto& lv = p_.levels_[level];
        const int choices = choices_at(p_, lv, enc_);
        for (int c = 0; c < choices; ++c) {
            ++counters.nodes;
            if (node_limit && counters.nodes > node_limit) {
                exhausted = true;
                return false;
            }
            if ((counters.nodes & 1023U) == 0) {
                if (has_deadline_ && std::chrono::steady_clock::now() > deadline_)
                    throw TimeoutError("search exceeded the time budget", counters.nodes);
                if (abort_above && abort_above->load(std::memory_order_relaxed) < task_index) {
                    aborted = true;
                    return false;
                }
            }
            choice_[level] = c;
            const bool ok = apply(level, c);
            if (ok && opts_.audit) audit();
            const bool go_on = ok ? run(level + 1, mode) : true;
            undo(level, c);
            if (!go_on) return false;
        }
        return true;
    }

    [[nodiscard]] Structure structure_from(const std::vector<std::int8_t>& values) const
    {
        Structure s(p_.carrier_, p_.n_);
        for (std::size_t a = 0; a < values.size(); ++a) {
            const std::size_t sym = p_.atom_symbol_[a];
            if (values[a] > 0) s.set_rank(sym, a - p_.offsets_[sym], true);
        }
        return s;
    }

    [[nodiscard]] const std::vector<std::int8_t>& values() const { return val_; }

private:
    bool apply(std::size_t level, int choice)
    {
        const auto& lv = p_.levels_[level];
        changed_.clear();
        if (lv.encoding) {
            auto& st = enc_[static_cast<std::size_t>(lv.index)];
            st.place(lv.vertex, choice);
            const auto pos = st.positions(lv.vertex + 1);
            for (int a : p_.encoded_atoms_[static_cast<std::size_t>(lv.index)][static_cast<std::size_t>(lv.vertex)]) {
                const auto t = p_.tuple_of(a);
                val_[static_cast<std::size_t>(a)] = st.holds(t, pos) ? 1 : 0;
                changed_.push_back(a);
            }
        } else {
            for (auto [a, par] : p_.group_[static_cast<std::size_t>(lv.index)]) {
                val_[static_cast<std::size_t>(a)] = static_cast<std::int8_t>(choice ^ par);
                changed_.push_back(a);
            }
        }
        ++epoch_;
        for (int a : changed_) {
            for (int w = p_.watch_start_[static_cast<std::size_t>(a)]; w < p_.watch_start_[static_cast<std::size_t>(a) + 1]; ++w) {
                const int c = p_.watches_[static_cast<std::size_t>(w)];
                if (stamp_[static_cast<std::size_t>(c)] == epoch_) continue;
                stamp_[static_cast<std::size_t>(c)] = epoch_;
                if (eval(p_.roots_[static_cast<std::size_t>(c)]) == 0) {
                    ++counters.failures[static_cast<std::size_t>(p_.kinds_[static_cast<std::size_t>(c)])];
                    return false;
                }
            }
        }
        return true;
    }

    void undo(std::size_t level, int)
    {
        const auto& lv = p_.levels_[level];
        if (lv.encoding) {
            enc_[static_cast<std::size_t>(lv.index)].unplace(lv.vertex);
            for (int a : p_.encoded_atoms_[static_cast<std::size_t>(lv.index)][static_cast<std::size_t>(lv.vertex)])
                val_[static_cast<std::size_t>(a)] = -1;
        } else {
            for (auto [a, par] : p_.group_[static_cast<std::size_t>(lv.index)]) val_[static_cast<std::size_t>(a)] = -1;
        }
    }

    /// Kleene evaluation: 0 false, 1 true, 2 unknown.
    int eval(int node) const
    {
        const auto& g = p_.nodes_[static_cast<std::size_t>(node)];
        if (g.op == detail::kLit) {
            const std::int8_t v = val_[static_cast<std::size_t>(g.a)];
            return v < 0 ? 2 : (v ^ g.b);
        }
        int res = g.op == detail::kAnd ? 1 : 0;
        const int absorbing = g.op == detail::kAnd ? 0 : 1;
        for (int k = g.a; k < g.b; ++k) {
            const int r = eval(p_.kids_[static_cast<std::size_t>(k)]);
            if (r == absorbing) return absorbing;
            if (r == 2) res = 2;
        }
        return res;
    }

    void audit() const
    {
        for (std::size_t c = 0; c < p_.constraint_count(); ++c) {
            bool assigned = true;
            for (int k = p_.catom_start_[c]; k < p_.catom_start_[c + 1]; ++k)
                assigned = assigned && val_[static_cast<std::size_t>(p_.catoms_[static_cast<std::size_t>(k)])] >= 0;
            if (assigned && eval(p_.roots_[c]) == 0)
                throw LogicError("solver audit: a fully assigned constraint is violated inside the prefix");
        }
    }

    const SearchProblem& p_;
    const SolverOptions& opts_;
    std::chrono::steady_clock::time_point deadline_;
    bool has_deadline_;
    std::vector<std::int8_t> val_;
    std::vector<detail::EncodingState> enc_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    std::vector<int> changed_;
    std::vector<int> choice_;
};

struct SolveResult {
    std::optional<Structure> solution;
    SearchStats stats;
};

struct CountResult {
    std::uint64_t count = 0;
    bool capped = false;
    std::vector<Structure> solutions; // when requested
    SearchStats stats;
};

namespace detail {

inline void fill_static_stats(const SearchProblem& p, SearchStats& s)
{
    s.constraints = p.constraint_count();
    s.atoms = p.atom_count();
    s.levels = p.levels().size();
    s.fixed_atoms = p.fixed_count();
}

struct RunOutcome {
    Searcher::Counters counters;                 // sequential-equivalent counters
    std::vector<std::vector<std::int8_t>> values; // solutions in sequential order
    std::uint64_t found = 0;
};

/// Runs the search, splitting on a prefix when threads > 1; the returned
/// counters equal those of a purely sequential run.
inline RunOutcome run_search(const SearchProblem& p, const SolverOptions& opts, std::uint64_t cap, bool keep)
{
    using Clock = std::chrono::steady_clock;
    const bool has_deadline = opts.max_seconds > 0;
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts.max_seconds));
    RunOutcome out;
    const std::size_t L = p.levels().size();

    auto finish_exhausted = [&](std::uint64_t nodes) {
        throw TimeoutError("search exceeded the node budget of " + std::to_string(opts.max_nodes), nodes);
    };

    if (opts.threads <= 1 || L < 2) {
        Searcher s(p, opts, deadline, has_deadline);
        s.node_limit = opts.max_nodes;
        s.solution_cap = cap;
        s.keep_solutions = keep;
        s.run(0, Searcher::Mode::First);
        if (s.exhausted) finish_exhausted(s.counters.nodes);
        out.counters = s.counters;
        if (!s.solution_nodes.empty() && s.solution_nodes.size() >= cap) out.counters = s.solution_counters.back();
        out.found = s.solution_nodes.size();
        out.values = std::move(s.solutions);
        return out;
    }

    // Prefix split: the shallowest depth giving enough tasks.
    std::unique_ptr<Searcher> prefix;
    const std::size_t want = 8U * opts.threads;
    for (std::size_t depth = 1; depth < L; ++depth) {
        prefix = std::make_unique<Searcher>(p, opts, deadline, has_deadline);
        prefix->prefix_depth = depth;
        prefix->run(0, Searcher::Mode::Prefix);
        if (prefix->tasks.size() >= want) break;
    }
    const auto& tasks = prefix->tasks;
    struct TaskResult {
        Searcher::Counters total;
        std::vector<Searcher::Counters> at_solution;
        std::vector<std::vector<std::int8_t>> values;
        bool exhausted = false;
        bool done = false;
    };
    std::vector<TaskResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> winner{std::numeric_limits<std::size_t>::max()};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            if (cap == 1 && winner.load() < i) continue;
            try {
                Searcher s(p, opts, deadline, has_deadline);
                s.node_limit = opts.max_nodes;
                s.solution_cap = cap;
                s.keep_solutions = keep;
                s.task_index = i;
                if (cap == 1) s.abort_above = &winner;
                s.replay(tasks[i].choices);
                s.run(tasks[i].choices.size(), Searcher::Mode::First);
                auto& r = results[i];
                r.total = s.counters;
                r.at_solution = s.solution_counters;
                r.values = std::move(s.solutions);
                r.exhausted = s.exhausted;
                r.done = !s.aborted;
                if (cap == 1 && !s.solution_nodes.empty()) {
                    std::size_t cur = winner.load();
                    while (i < cur && !winner.compare_exchange_weak(cur, i)) {
                    }
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < opts.threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    // Merge in sequential order.
    Searcher::Counters acc;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& r = results[i];
        if (!r.done) break; // only tasks past the winner are skipped or aborted
        if (r.exhausted) finish_exhausted(opts.max_nodes + 1);
        const std::uint64_t need = cap - out.found;
        if (r.at_solution.size() >= need && need > 0) {
            Searcher::Counters c = tasks[i].before;
            c += acc;
            c += r.at_solution[need - 1];
            out.counters = c;
            out.found = cap;
            for (std::size_t k = 0; k < need && k < r.values.size(); ++k) out.values.push_back(r.values[k]);
            if (opts.max_nodes && out.counters.nodes > opts.max_nodes) finish_exhausted(out.counters.nodes);
            return out;
        }
        out.found += r.at_solution.size();
        for (const auto& v : r.values) out.values.push_back(v);
        acc += r.total;
    }
    Searcher::Counters c = prefix->counters;
    c += acc;
    out.counters = c;
    if (opts.max_nodes && out.counters.nodes > opts.max_nodes) finish_exhausted(out.counters.nodes);
    return out;
}

} // namespace detail

/// First solution in search order (vertices ascending; encodings before free
/// atoms; false before true), or none.
inline SolveResult solve(const SearchProblem& p, const SolverOptions& opts = {})
{
    const auto start = std::chrono::steady_clock::now();
    SolveResult res;
    detail::fill_static_stats(p, res.stats);
    if (!p.infeasible()) {
        auto out = detail::run_search(p, opts, 1, true);
        res.stats.nodes = out.counters.nodes;
        res.stats.failures = out.counters.failures;
        if (!out.values.empty()) {
            Searcher view(p, opts, {}, false);
            res.solution = view.structure_from(out.values.front());
        }
    }
    res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

/// Number of satisfying expansions, up to `cap`.
inline CountResult count_solutions(const SearchProblem& p, std::uint64_t cap, const SolverOptions& opts = {},
                                   bool keep_solutions = false)
{
    if (cap < 1) throw InputError("count_solutions: cap must be at least 1");
    const auto start = std::chrono::steady_clock::now();
    CountResult res;
    detail::fill_static_stats(p, res.stats);
    if (!p.infeasible()) {
        // Unconstrained atoms multiply the count; enumerate them only when solutions are kept.
        const std::size_t u = p.unconstrained_count();
        auto out = detail::run_search(p, opts, cap, keep_solutions);
        res.stats.nodes = out.counters.nodes;
        res.stats.failures = out.counters.failures;
        const std::uint64_t mult = u >= 63 ? cap : std::min<std::uint64_t>(cap, std::uint64_t{1} << u);
        std::uint64_t total = 0;
        for (std::uint64_t k = 0; k < out.found; ++k) total = std::min<std::uint64_t>(cap, total + mult);
        res.count = total;
        res.capped = total >= cap;
        if (keep_solutions) {
            Searcher view(p, opts, {}, false);
            const auto& free = p.unconstrained();
            for (const auto& v : out.values) {
                for (std::uint64_t mask = 0; mask < mult && res.solutions.size() < cap; ++mask) {
                    auto vals = v;
                    for (std::size_t i = 0; i < free.size() && i < 63; ++i)
                        for (auto [a, par] : p.group(free[i]))
                            vals[static_cast<std::size_t>(a)] = static_cast<std::int8_t>(((mask >> i) & 1U) ^ par);
                    res.solutions.push_back(view.structure_from(vals));
                }
            }
        }
    }
    res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace lexpr

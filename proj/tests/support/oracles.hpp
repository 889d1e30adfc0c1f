#pragma once
// Brute-force reference implementations used only by tests.

#include <algorithm>
#include <numeric>
#include <functional>
#include <random>
#include <vector>

#include <set>

#include "lexpr/expressions.hpp"
#include "lexpr/graph_io.hpp"
#include "lexpr/structures.hpp"

namespace oracle {

using lexpr::Signature;
using lexpr::Structure;

/// All injective maps checked tuple by tuple, in lexicographic order.
inline std::vector<std::vector<int>> embeddings(const Structure& a, const Structure& b)
{
    std::vector<std::vector<int>> out;
    const int m = a.size(), n = b.size();
    if (m > n) return out;
    std::vector<int> map(static_cast<std::size_t>(m), 0);
    auto rec = [&](auto&& self, int i) -> void {
        if (i == m) {
            if (lexpr::is_embedding(a, b, map)) out.push_back(map);
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (std::find(map.begin(), map.begin() + i, v) != map.begin() + i) continue;
            map[static_cast<std::size_t>(i)] = v;
            self(self, i + 1);
        }
    };
    rec(rec, 0);
    return out;
}

/// Lexicographically smallest flag vector over all relabellings.
inline std::vector<std::uint8_t> min_relabelling(const Structure& a)
{
    std::vector<int> perm(static_cast<std::size_t>(a.size()));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::uint8_t> best;
    bool first = true;
    do {
        auto f = lexpr::relabel(a, perm).flags();
        if (first || f < best) best = f;
        first = false;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline bool isomorphic(const Structure& a, const Structure& b)
{
    if (a.size() != b.size()) return false;
    return min_relabelling(a) == min_relabelling(b);
}

inline Structure from_mask(const Signature& sig, int n, std::uint64_t mask)
{
    Structure s(sig, n);
    std::size_t bit = 0;
    for (std::size_t sym = 0; sym < sig.size(); ++sym)
        for (std::size_t r = 0; r < s.table_size(sym); ++r, ++bit) s.set_rank(sym, r, (mask >> bit & 1U) != 0);
    return s;
}

inline Structure random_structure(const Signature& sig, int n, std::mt19937& rng, double p = 0.5)
{
    Structure s(sig, n);
    std::bernoulli_distribution coin(p);
    for (std::size_t sym = 0; sym < sig.size(); ++sym)
        for (std::size_t r = 0; r < s.table_size(sym); ++r) s.set_rank(sym, r, coin(rng));
    return s;
}

inline Structure random_graph(int n, std::mt19937& rng, double p = 0.5)
{
    std::bernoulli_distribution coin(p);
    std::vector<lexpr::Edge> e;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (coin(rng)) e.emplace_back(u, v);
    return lexpr::make_graph(n, e);
}

inline std::vector<int> random_permutation(int n, std::mt19937& rng)
{
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

/// Random quantifier-free formula over sig in variables 0..arity-1.
inline lexpr::Formula random_formula(const Signature& sig, int arity, int depth, std::mt19937& rng)
{
    using lexpr::Formula;
    std::uniform_int_distribution<int> var(0, arity - 1);
    auto leaf = [&]() {
        const int pick = std::uniform_int_distribution<int>(0, 9)(rng);
        if (pick == 0) return Formula::top(arity);
        if (pick == 1) return Formula::bottom(arity);
        if (pick <= 3) return Formula::eq(var(rng), var(rng)).with_arity(arity);
        const auto& s = sig[std::uniform_int_distribution<std::size_t>(0, sig.size() - 1)(rng)];
        std::vector<int> v;
        for (int i = 0; i < s.arity; ++i) v.push_back(var(rng));
        return Formula::atom(s.name, v).with_arity(arity);
    };
    if (depth <= 0) return leaf();
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return leaf();
    case 1: return Formula::negate(random_formula(sig, arity, depth - 1, rng));
    case 2:
        return Formula::conj({random_formula(sig, arity, depth - 1, rng), random_formula(sig, arity, depth - 1, rng)},
                             arity);
    default:
        return Formula::disj({random_formula(sig, arity, depth - 1, rng), random_formula(sig, arity, depth - 1, rng)},
                             arity);
    }
}

/// One random formula per source symbol.
inline lexpr::QfDefinition random_definition(const Signature& source, const Signature& carrier, std::mt19937& rng,
                                             int depth = 3)
{
    std::vector<lexpr::Formula> fs;
    for (const auto& s : source.symbols()) fs.push_back(random_formula(carrier, s.arity, depth, rng));
    return {source, carrier, std::move(fs), "rnd"};
}

/// True when no forbidden structure embeds, by brute-force injective maps.
inline bool free_of(const Structure& x, const std::vector<Structure>& forbidden)
{
    for (const auto& f : forbidden) {
        const Structure view = f.signature() == x.signature() ? x : lexpr::restrict_to(x, f.signature());
        if (!embeddings(f.with_signature(view.signature()), view).empty()) return false;
    }
    return true;
}

/// Every relation a linear, circular or equivalence encoding can take on n
/// vertices, built from permutations and set partitions.
inline std::vector<std::vector<lexpr::Tuple>> encoded_candidates(lexpr::EncodingKind kind, int n)
{
    std::set<std::vector<lexpr::Tuple>> out;
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    if (kind == lexpr::EncodingKind::Equivalence) {
        // Restricted growth strings.
        std::vector<int> cls(static_cast<std::size_t>(n), 0);
        auto rec = [&](auto&& self, int v, int used) -> void {
            if (v == n) {
                std::vector<lexpr::Tuple> rel;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        if (cls[static_cast<std::size_t>(a)] == cls[static_cast<std::size_t>(b)]) rel.push_back({a, b});
                out.insert(rel);
                return;
            }
            for (int c = 0; c <= used; ++c) {
                cls[static_cast<std::size_t>(v)] = c;
                self(self, v + 1, std::max(used, c + 1));
            }
        };
        rec(rec, 0, 0);
        return {out.begin(), out.end()};
    }
    do {
        std::vector<int> pos(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(p[static_cast<std::size_t>(i)])] = i;
        std::vector<lexpr::Tuple> rel;
        if (kind == lexpr::EncodingKind::LinearOrder) {
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    if (pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)]) rel.push_back({a, b});
        } else {
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) {
                        const int x = pos[static_cast<std::size_t>(a)], y = pos[static_cast<std::size_t>(b)],
                                  z = pos[static_cast<std::size_t>(c)];
                        if ((x < y && y < z) || (y < z && z < x) || (z < x && x < y)) rel.push_back({a, b, c});
                    }
        }
        out.insert(rel);
    } while (std::next_permutation(p.begin(), p.end()));
    return {out.begin(), out.end()};
}

/// Positions (symbol, tuple) over {0..i} and k that use k, and i when i >= 0.
inline std::vector<std::pair<std::size_t, lexpr::Tuple>> batch_positions(const Signature& sig,
                                                                        const std::vector<bool>& skip, int i, int k)
{
    std::vector<std::pair<std::size_t, lexpr::Tuple>> out;
    std::vector<int> verts;
    for (int v = 0; v <= i; ++v) verts.push_back(v);
    verts.push_back(k);
    const int m = static_cast<int>(verts.size());
    for (std::size_t s = 0; s < sig.size(); ++s) {
        if (skip[s]) continue;
        const int r = sig[s].arity;
        std::vector<int> idx(static_cast<std::size_t>(r), 0);
        do {
            lexpr::Tuple t;
            bool has_k = false, has_i = i < 0;
            for (int j : idx) {
                const int v = verts[static_cast<std::size_t>(j)];
                t.push_back(v);
                has_k = has_k || v == k;
                has_i = has_i || v == i;
            }
            if (has_k && has_i) out.emplace_back(s, t);
        } while (lexpr::detail::next_tuple(idx, m));
    }
    return out;
}

/// Generate-and-test over all carrier structures, one vertex and then one
/// earlier vertex at a time; each batch is checked on the induced subset.
/// `accept(subset, x)` must be hereditary. Returns the number of complete
/// structures accepted, stopping after `limit`.
inline std::uint64_t incremental_search(Structure x, const std::vector<bool>& fixed,
                                        const std::function<bool(const std::vector<int>&, const Structure&)>& accept,
                                        std::uint64_t limit, std::vector<Structure>* found = nullptr)
{
    const int n = x.size();
    const Signature sig = x.signature();
    std::uint64_t count = 0;
    // Steps: (k, i) for k = 0..n-1, i = -1..k-1.
    std::vector<std::pair<int, int>> steps;
    for (int k = 0; k < n; ++k)
        for (int i = -1; i < k; ++i) steps.emplace_back(k, i);
    auto rec = [&](auto&& self, std::size_t step) -> void {
        if (count >= limit) return;
        if (step == steps.size()) {
            std::vector<int> all(static_cast<std::size_t>(n));
            std::iota(all.begin(), all.end(), 0);
            if (accept(all, x)) {
                ++count;
                if (found) found->push_back(x);
            }
            return;
        }
        const auto [k, i] = steps[step];
        const auto pos = batch_positions(sig, fixed, i, k);
        std::vector<int> subset;
        for (int v = 0; v <= i; ++v) subset.push_back(v);
        subset.push_back(k);
        const bool last_of_vertex = i == k - 1;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pos.size()); ++mask) {
            for (std::size_t j = 0; j < pos.size(); ++j) x.set(pos[j].first, pos[j].second, (mask >> j & 1U) != 0);
            // The final step is judged on the whole structure.
            if (!(last_of_vertex && k == n - 1) && !accept(subset, x)) continue;
            self(self, step + 1);
            if (count >= limit) break;
        }
        for (const auto& [s, t] : pos) x.set(s, t, false);
    };
    rec(rec, 0);
    return count;
}

/// Number of expansions of g for e (up to `limit`), by exhaustive search
/// that shares nothing with the solver.
inline std::uint64_t naive_expansions(const lexpr::LocalExpression& e, const Structure& g,
                                      std::uint64_t limit = ~std::uint64_t{0}, std::vector<Structure>* found = nullptr)
{
    const Signature& sig = e.carrier();
    const int n = g.size();
    std::vector<bool> fixed(sig.size(), false);
    std::vector<std::size_t> enc_syms;
    std::vector<std::vector<std::vector<lexpr::Tuple>>> enc_choices;
    for (const auto& enc : e.encodings()) {
        const auto s = sig.index_of(enc.symbol);
        fixed[s] = true;
        enc_syms.push_back(s);
        enc_choices.push_back(encoded_candidates(enc.kind, n));
    }
    auto accept = [&](const std::vector<int>& subset, const Structure& x) {
        const Structure sub = lexpr::induced_substructure(x, subset);
        if (!(lexpr::reduct(e.definition(), sub) == lexpr::induced_substructure(g, subset))) return false;
        if (!e.base().contains(sub)) return false;
        return free_of(sub, e.forbidden());
    };
    std::uint64_t total = 0;
    std::vector<std::size_t> pick(enc_syms.size(), 0);
    auto rec = [&](auto&& self, std::size_t j) -> void {
        if (total >= limit) return;
        if (j == enc_syms.size()) {
            Structure x(sig, n);
            for (std::size_t a = 0; a < enc_syms.size(); ++a)
                for (const auto& t : enc_choices[a][pick[a]]) x.set(enc_syms[a], t);
            total += incremental_search(x, fixed, accept, limit - total, found);
            return;
        }
        for (pick[j] = 0; pick[j] < enc_choices[j].size(); ++pick[j]) self(self, j + 1);
    };
    rec(rec, 0);
    return total;
}

/// Brute-force truth of an SNP sentence on g: existential relations are
/// searched incrementally, and every conjunct must hold on every tuple.
inline bool snp_holds(const lexpr::SnpSentence& s, const Structure& g)
{
    std::vector<lexpr::Symbol> all = s.target.symbols();
    for (const auto& sym : s.existential.symbols()) all.push_back(sym);
    const Signature sig(all);
    Structure x(sig, g.size());
    std::vector<bool> fixed(sig.size(), false);
    for (std::size_t i = 0; i < s.target.size(); ++i) {
        fixed[i] = true;
        for (const auto& t : g.tuples(g.signature().index_of(s.target[i].name))) x.set(i, t);
    }
    auto accept = [&](const std::vector<int>& subset, const Structure& xx) {
        const Structure sub = lexpr::induced_substructure(xx, subset);
        const int m = sub.size();
        if (m == 0 || s.arity == 0) return true;
        std::vector<int> t(static_cast<std::size_t>(s.arity), 0);
        do {
            for (const auto& c : s.conjuncts)
                if (!lexpr::evaluate(c.with_arity(s.arity), sub, t)) return false;
        } while (lexpr::detail::next_tuple(t, m));
        return true;
    };
    if (g.size() == 0) return true;
    return incremental_search(x, fixed, accept, 1) > 0;
}

} // namespace oracle

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lexpr/error.hpp"

namespace lexpr {

struct Symbol {
    std::string name;
    int arity = 1;

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// Ordered list of relation symbols. Copies share storage; equality compares
/// symbols only (the display name is metadata).
class Signature {
public:
    Signature() : symbols_(std::make_shared<const std::vector<Symbol>>()) {}

    explicit Signature(std::vector<Symbol> symbols, std::string name = {})
        : name_(std::move(name))
    {
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (symbols[i].arity < 1)
                throw InputError("symbol '" + symbols[i].name + "' must have positive arity");
            if (symbols[i].name.empty())
                throw InputError("symbol names must be non-empty");
            for (std::size_t j = 0; j < i; ++j)
                if (symbols[j].name == symbols[i].name)
                    throw InputError("duplicate symbol '" + symbols[i].name + "' in signature");
        }
        symbols_ = std::make_shared<const std::vector<Symbol>>(std::move(symbols));
    }

    [[nodiscard]] std::size_t size() const { return symbols_->size(); }
    [[nodiscard]] bool empty() const { return symbols_->empty(); }
    [[nodiscard]] const Symbol& operator[](std::size_t i) const { return (*symbols_)[i]; }
    [[nodiscard]] const std::vector<Symbol>& symbols() const { return *symbols_; }
    [[nodiscard]] const std::string& name() const { return name_; }

    [[nodiscard]] Signature renamed(std::string name) const
    {
        Signature s = *this;
        s.name_ = std::move(name);
        return s;
    }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view symbol) const
    {
        for (std::size_t i = 0; i < symbols_->size(); ++i)
            if ((*symbols_)[i].name == symbol) return i;
        return std::nullopt;
    }

    [[nodiscard]] std::size_t index_of(std::string_view symbol) const
    {
        if (auto i = find(symbol)) return *i;
        throw InputError("unknown symbol '" + std::string(symbol) + "'" +
                         (name_.empty() ? std::string{} : " in signature " + name_));
    }

    [[nodiscard]] int max_arity() const
    {
        int m = 0;
        for (const auto& s : *symbols_) m = std::max(m, s.arity);
        return m;
    }

    /// True when every symbol of `sub` occurs here with the same arity.
    [[nodiscard]] bool contains_all(const Signature& sub) const
    {
        return std::all_of(sub.symbols().begin(), sub.symbols().end(), [&](const Symbol& s) {
            auto i = find(s.name);
            return i && (*this)[*i].arity == s.arity;
        });
    }

    friend bool operator==(const Signature& a, const Signature& b)
    {
        return a.symbols_ == b.symbols_ || *a.symbols_ == *b.symbols_;
    }

private:
    std::shared_ptr<const std::vector<Symbol>> symbols_;
    std::string name_;
};

using Tuple = std::vector<int>;

namespace detail {

inline std::size_t checked_power(int n, int arity)
{
    std::size_t r = 1;
    for (int i = 0; i < arity; ++i) {
        r *= static_cast<std::size_t>(n);
        if (r > (std::size_t{1} << 28)) throw ResourceError("relation table too large");
    }
    return r;
}

/// Advances `t` to the next tuple of [n]^k in lexicographic order.
inline bool next_tuple(std::vector<int>& t, int n)
{
    for (std::size_t i = t.size(); i-- > 0;) {
        if (++t[i] < n) return true;
        t[i] = 0;
    }
    return false;
}

} // namespace detail

/// Finite relational structure on vertices 0..n-1. Relations are dense flag
/// tables indexed by the lexicographic rank of the tuple, so iteration order is
/// canonical.
class Structure {
public:
    Structure() = default;

    Structure(Signature sig, int n) : sig_(std::move(sig)), n_(n)
    {
        if (n < 0) throw InputError("vertex count must be non-negative");
        offsets_.clear();
        offsets_.reserve(sig_.size() + 1);
        std::size_t total = 0;
        for (const auto& s : sig_.symbols()) {
            offsets_.push_back(total);
            total += detail::checked_power(n_, s.arity);
        }
        offsets_.push_back(total);
        flags_.assign(total, 0);
    }

    Structure(Signature sig, int n, const std::vector<std::vector<Tuple>>& relations)
        : Structure(std::move(sig), n)
    {
        if (relations.size() != sig_.size())
            throw InputError("expected one tuple set per symbol");
        for (std::size_t s = 0; s < relations.size(); ++s)
            for (const auto& t : relations[s]) set(s, t, true);
    }

    [[nodiscard]] const Signature& signature() const { return sig_; }
    [[nodiscard]] int size() const { return n_; }

    [[nodiscard]] std::size_t table_size(std::size_t sym) const
    {
        return offsets_[sym + 1] - offsets_[sym];
    }

    [[nodiscard]] std::size_t rank(std::size_t sym, std::span<const int> t) const
    {
        const auto& s = sig_[sym];
        if (static_cast<int>(t.size()) != s.arity)
            throw InputError("tuple length " + std::to_string(t.size()) + " does not match arity of '" +
                             s.name + "'");
        std::size_t r = 0;
        for (int v : t) {
            if (v < 0 || v >= n_)
                throw InputError("vertex " + std::to_string(v) + " out of range for structure on " +
                                 std::to_string(n_) + " vertices");
            r = r * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v);
        }
        return r;
    }

    [[nodiscard]] bool has(std::size_t sym, std::span<const int> t) const
    {
        return flags_[offsets_[sym] + rank(sym, t)] != 0;
    }
    [[nodiscard]] bool has(std::size_t sym, std::initializer_list<int> t) const
    {
        return has(sym, std::span<const int>(t.begin(), t.size()));
    }
    [[nodiscard]] bool has_rank(std::size_t sym, std::size_t r) const { return flags_[offsets_[sym] + r] != 0; }

    void set(std::size_t sym, std::span<const int> t, bool value = true)
    {
        flags_[offsets_[sym] + rank(sym, t)] = value ? 1 : 0;
    }
    void set(std::size_t sym, std::initializer_list<int> t, bool value = true)
    {
        set(sym, std::span<const int>(t.begin(), t.size()), value);
    }
    void set_rank(std::size_t sym, std::size_t r, bool value) { flags_[offsets_[sym] + r] = value ? 1 : 0; }

    /// Tuples of one symbol in lexicographic order.
    [[nodiscard]] std::vector<Tuple> tuples(std::size_t sym) const
    {
        std::vector<Tuple> out;
        const int k = sig_[sym].arity;
        if (n_ == 0) return out;
        Tuple t(static_cast<std::size_t>(k), 0);
        std::size_t r = 0;
        do {
            if (flags_[offsets_[sym] + r]) out.push_back(t);
            ++r;
        } while (detail::next_tuple(t, n_));
        return out;
    }

    [[nodiscard]] std::size_t tuple_count(std::size_t sym) const
    {
        return static_cast<std::size_t>(
            std::count(flags_.begin() + static_cast<std::ptrdiff_t>(offsets_[sym]),
                       flags_.begin() + static_cast<std::ptrdiff_t>(offsets_[sym + 1]), 1));
    }

    [[nodiscard]] const std::vector<std::uint8_t>& flags() const { return flags_; }

    /// Same vertices and tuples, viewed over an equal signature with another display name.
    [[nodiscard]] Structure with_signature(Signature sig) const
    {
        if (!(sig == sig_)) throw InputError("with_signature requires an equal signature");
        Structure s = *this;
        s.sig_ = std::move(sig);
        return s;
    }

    friend bool operator==(const Structure& a, const Structure& b)
    {
        return a.n_ == b.n_ && a.sig_ == b.sig_ && a.flags_ == b.flags_;
    }

private:
    Signature sig_;
    int n_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint8_t> flags_;
};

/// Compact one-line rendering, e.g. "n=2 E={(0,1),(1,0)}".
inline std::string describe(const Structure& a)
{
    std::string out = "n=" + std::to_string(a.size());
    for (std::size_t s = 0; s < a.signature().size(); ++s) {
        out += " " + a.signature()[s].name + "={";
        bool first = true;
        for (const auto& t : a.tuples(s)) {
            if (!first) out += ",";
            first = false;
            out += "(";
            for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + std::to_string(t[i]);
            out += ")";
        }
        out += "}";
    }
    return out;
}

struct Embedding {
    std::vector<int> map;
    friend bool operator==(const Embedding&, const Embedding&) = default;
    friend auto operator<=>(const Embedding&, const Embedding&) = default;
};

inline void require_same_signature(const Structure& a, const Structure& b, std::string_view what)
{
    if (!(a.signature() == b.signature()))
        throw InputError(std::string(what) + ": structures have different signatures");
}

/// Substructure induced by `subset`, re-indexed 0..|S|-1 in ascending original order.
inline Structure induced_substructure(const Structure& a, std::span<const int> subset)
{
    std::vector<int> verts(subset.begin(), subset.end());
    std::sort(verts.begin(), verts.end());
    if (std::adjacent_find(verts.begin(), verts.end()) != verts.end())
        throw InputError("induced_substructure: repeated vertex");
    for (int v : verts)
        if (v < 0 || v >= a.size())
            throw InputError("induced_substructure: vertex " + std::to_string(v) + " out of range");
    const int m = static_cast<int>(verts.size());
    Structure out(a.signature(), m);
    if (m == 0) return out;
    for (std::size_t s = 0; s < a.signature().size(); ++s) {
        const int k = a.signature()[s].arity;
        Tuple t(static_cast<std::size_t>(k), 0), image(static_cast<std::size_t>(k));
        std::size_t r = 0;
        do {
            for (int i = 0; i < k; ++i) image[static_cast<std::size_t>(i)] = verts[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
            if (a.has(s, image)) out.set_rank(s, r, true);
            ++r;
        } while (detail::next_tuple(t, m));
    }
    return out;
}

inline Structure induced_substructure(const Structure& a, std::initializer_list<int> subset)
{
    return induced_substructure(a, std::span<const int>(subset.begin(), subset.size()));
}

/// Relabels vertices: vertex v of `a` becomes perm[v].
inline Structure relabel(const Structure& a, std::span<const int> perm)
{
    const int n = a.size();
    if (static_cast<int>(perm.size()) != n) throw InputError("relabel: permutation has wrong length");
    Structure out(a.signature(), n);
    if (n == 0) return out;
    for (std::size_t s = 0; s < a.signature().size(); ++s) {
        const int k = a.signature()[s].arity;
        Tuple t(static_cast<std::size_t>(k), 0), image(static_cast<std::size_t>(k));
        std::size_t r = 0;
        do {
            if (a.has_rank(s, r)) {
                for (int i = 0; i < k; ++i) image[static_cast<std::size_t>(i)] = perm[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
                out.set(s, image, true);
            }
            ++r;
        } while (detail::next_tuple(t, n));
    }
    return out;
}

namespace detail {

/// Backtracking search for injective maps source -> target preserving and
/// reflecting every relation. `visit` returns false to stop.
class EmbeddingSearch {
public:
    EmbeddingSearch(const Structure& src, const Structure& dst, std::span<const int> fixed_prefix = {})
        : src_(src), dst_(dst), fixed_(fixed_prefix.begin(), fixed_prefix.end())
    {
        const int m = src.size();
        checks_.resize(static_cast<std::size_t>(m));
        // For each source vertex i, all tuples over 0..i that mention i.
        for (int i = 0; i < m; ++i) {
            for (std::size_t s = 0; s < src.signature().size(); ++s) {
                const int k = src.signature()[s].arity;
                Tuple t(static_cast<std::size_t>(k), 0);
                do {
                    if (std::find(t.begin(), t.end(), i) != t.end())
                        checks_[static_cast<std::size_t>(i)].push_back({s, t, src.has(s, t)});
                } while (next_tuple(t, i + 1));
            }
        }
        map_.assign(static_cast<std::size_t>(m), -1);
        used_.assign(static_cast<std::size_t>(dst.size()), 0);
    }

    void run(const std::function<bool(const std::vector<int>&)>& visit)
    {
        visit_ = &visit;
        if (src_.size() > dst_.size()) return;
        stopped_ = false;
        extend(0);
    }

private:
    struct Check {
        std::size_t sym;
        Tuple tuple;
        bool expected;
    };

    bool consistent(int i)
    {
        Tuple image;
        for (const auto& c : checks_[static_cast<std::size_t>(i)]) {
            image.resize(c.tuple.size());
            for (std::size_t j = 0; j < c.tuple.size(); ++j) image[j] = map_[static_cast<std::size_t>(c.tuple[j])];
            if (dst_.has(c.sym, image) != c.expected) return false;
        }
        return true;
    }

    void extend(int i)
    {
        if (stopped_) return;
        if (i == src_.size()) {
            if (!(*visit_)(map_)) stopped_ = true;
            return;
        }
        int lo = 0, hi = dst_.size() - 1;
        if (static_cast<std::size_t>(i) < fixed_.size()) lo = hi = fixed_[static_cast<std::size_t>(i)];
        for (int v = lo; v <= hi && !stopped_; ++v) {
            if (used_[static_cast<std::size_t>(v)]) continue;
            map_[static_cast<std::size_t>(i)] = v;
            used_[static_cast<std::size_t>(v)] = 1;
            if (consistent(i)) extend(i + 1);
            used_[static_cast<std::size_t>(v)] = 0;
        }
        map_[static_cast<std::size_t>(i)] = -1;
    }

    const Structure& src_;
    const Structure& dst_;
    std::vector<int> fixed_;
    std::vector<std::vector<Check>> checks_;
    std::vector<int> map_;
    std::vector<std::uint8_t> used_;
    const std::function<bool(const std::vector<int>&)>* visit_ = nullptr;
    bool stopped_ = false;
};

} // namespace detail

/// Calls `visit` for every embedding a -> b in lexicographic order of the map;
/// stops early when `visit` returns false.
inline void for_each_embedding(const Structure& a, const Structure& b,
                               const std::function<bool(const std::vector<int>&)>& visit)
{
    require_same_signature(a, b, "enumerate_embeddings");
    detail::EmbeddingSearch search(a, b);
    search.run(visit);
}

inline std::vector<Embedding> enumerate_embeddings(const Structure& a, const Structure& b)
{
    std::vector<Embedding> out;
    for_each_embedding(a, b, [&](const std::vector<int>& m) {
        out.push_back(Embedding{m});
        return true;
    });
    return out;
}

inline bool embeds(const Structure& a, const Structure& b)
{
    bool found = false;
    for_each_embedding(a, b, [&](const std::vector<int>&) {
        found = true;
        return false;
    });
    return found;
}

inline bool is_embedding(const Structure& a, const Structure& b, std::span<const int> map)
{
    require_same_signature(a, b, "is_embedding");
    if (static_cast<int>(map.size()) != a.size()) return false;
    std::vector<int> seen(map.begin(), map.end());
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return false;
    for (int v : map)
        if (v < 0 || v >= b.size()) return false;
    if (a.size() == 0) return true;
    for (std::size_t s = 0; s < a.signature().size(); ++s) {
        const int k = a.signature()[s].arity;
        Tuple t(static_cast<std::size_t>(k), 0), image(static_cast<std::size_t>(k));
        std::size_t r = 0;
        do {
            for (int i = 0; i < k; ++i) image[static_cast<std::size_t>(i)] = map[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
            if (a.has_rank(s, r) != b.has(s, image)) return false;
            ++r;
        } while (detail::next_tuple(t, a.size()));
    }
    return true;
}

/// Restricts `b` to the symbols of `sub` (matched by name); `sub` must be
/// contained in b's signature.
inline Structure restrict_to(const Structure& b, const Signature& sub)
{
    if (b.signature() == sub) return b;
    if (!b.signature().contains_all(sub))
        throw InputError("restrict_to: signature is not a sub-signature");
    Structure out(sub, b.size());
    for (std::size_t s = 0; s < sub.size(); ++s) {
        const std::size_t src = b.signature().index_of(sub[s].name);
        for (std::size_t r = 0; r < out.table_size(s); ++r) out.set_rank(s, r, b.has_rank(src, r));
    }
    return out;
}

/// True iff no member of `forbidden` embeds into `b`. Members may live over a
/// sub-signature of b's signature, in which case they are matched against the
/// corresponding restriction of `b`.
inline bool is_free(const Structure& b, std::span<const Structure> forbidden)
{
    for (const auto& f : forbidden) {
        if (!b.signature().contains_all(f.signature()))
            throw InputError("is_free: forbidden structure uses symbols outside the signature");
        if (f.signature() == b.signature()) {
            if (embeds(f, b)) return false;
        } else if (embeds(f, restrict_to(b, f.signature()))) {
            return false;
        }
    }
    return true;
}

inline bool is_free(const Structure& b, std::initializer_list<Structure> forbidden)
{
    return is_free(b, std::span<const Structure>(forbidden.begin(), forbidden.size()));
}

// ---------------------------------------------------------------------------
// Canonical form

struct CanonicalForm {
    Structure form;
    /// labelling[v] = position of original vertex v in `form`.
    std::vector<int> labelling;
};

namespace detail {

class Canonizer {
public:
    explicit Canonizer(const Structure& a) : a_(a), n_(a.size())
    {
        compute_colours();
        compute_twins();
    }

    CanonicalForm run()
    {
        if (n_ == 0) return {a_, {}};
        // Cell boundaries: vertices must be placed in nondecreasing colour order.
        std::vector<int> order(static_cast<std::size_t>(n_));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int x, int y) { return colour_[static_cast<std::size_t>(x)] < colour_[static_cast<std::size_t>(y)]; });
        slot_colour_.resize(static_cast<std::size_t>(n_));
        for (int p = 0; p < n_; ++p) slot_colour_[static_cast<std::size_t>(p)] = colour_[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];
        placed_.assign(static_cast<std::size_t>(n_), -1);
        used_.assign(static_cast<std::size_t>(n_), 0);
        code_.clear();
        search(0);
        std::vector<int> labelling(static_cast<std::size_t>(n_));
        for (int p = 0; p < n_; ++p) labelling[static_cast<std::size_t>(best_placed_[static_cast<std::size_t>(p)])] = p;
        return {relabel(a_, labelling), labelling};
    }

private:
    void compute_colours()
    {
        const auto& sig = a_.signature();
        colour_.assign(static_cast<std::size_t>(n_), 0);
        if (n_ == 0) return;
        std::size_t classes = 1;
        for (int round = 0; round <= n_; ++round) {
            std::vector<std::vector<long>> sigs(static_cast<std::size_t>(n_));
            for (int v = 0; v < n_; ++v) sigs[static_cast<std::size_t>(v)].push_back(colour_[static_cast<std::size_t>(v)]);
            for (std::size_t s = 0; s < sig.size(); ++s) {
                const int k = sig[s].arity;
                Tuple t(static_cast<std::size_t>(k), 0);
                std::size_t r = 0;
                do {
                    if (a_.has_rank(s, r)) {
                        for (int v : unique_entries(t)) {
                            // Encode the tuple seen from v: symbol, then per entry
                            // either "self" or the entry's colour.
                            long code = static_cast<long>(s) + 1;
                            for (int e : t) code = code * 1000003L + (e == v ? 1 : 2 + colour_[static_cast<std::size_t>(e)]);
                            sigs[static_cast<std::size_t>(v)].push_back(code);
                        }
                    }
                    ++r;
                } while (next_tuple(t, n_));
            }
            for (auto& x : sigs) std::sort(x.begin() + 1, x.end());
            auto distinct = sigs;
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            for (int v = 0; v < n_; ++v)
                colour_[static_cast<std::size_t>(v)] = static_cast<int>(
                    std::lower_bound(distinct.begin(), distinct.end(), sigs[static_cast<std::size_t>(v)]) - distinct.begin());
            if (distinct.size() == classes) break;
            classes = distinct.size();
        }
    }

    static std::vector<int> unique_entries(const Tuple& t)
    {
        std::vector<int> u(t.begin(), t.end());
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        return u;
    }

    void compute_twins()
    {
        twin_rep_.resize(static_cast<std::size_t>(n_));
        std::iota(twin_rep_.begin(), twin_rep_.end(), 0);
        std::vector<int> perm(static_cast<std::size_t>(n_));
        for (int u = 0; u < n_; ++u) {
            if (twin_rep_[static_cast<std::size_t>(u)] != u) continue;
            for (int w = u + 1; w < n_; ++w) {
                if (twin_rep_[static_cast<std::size_t>(w)] != w || colour_[static_cast<std::size_t>(u)] != colour_[static_cast<std::size_t>(w)]) continue;
                std::iota(perm.begin(), perm.end(), 0);
                std::swap(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(w)]);
                if (relabel(a_, perm) == a_) twin_rep_[static_cast<std::size_t>(w)] = u;
            }
        }
    }

    // Bits contributed by position p: all tuples over positions 0..p mentioning p.
    void append_code(int p)
    {
        const auto& sig = a_.signature();
        for (std::size_t s = 0; s < sig.size(); ++s) {
            const int k = sig[s].arity;
            Tuple t(static_cast<std::size_t>(k), 0), image(static_cast<std::size_t>(k));
            do {
                if (std::find(t.begin(), t.end(), p) == t.end()) continue;
                for (int i = 0; i < k; ++i) image[static_cast<std::size_t>(i)] = placed_[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
                code_.push_back(a_.has(s, image) ? 1 : 0);
            } while (next_tuple(t, p + 1));
        }
    }

    void search(int p)
    {
        if (p == n_) {
            if (!have_best_ || code_ < best_code_) {
                best_code_ = code_;
                best_placed_ = placed_;
                have_best_ = true;
            }
            return;
        }
        const int want = slot_colour_[static_cast<std::size_t>(p)];
        std::vector<int> tried_reps;
        for (int v = 0; v < n_; ++v) {
            if (used_[static_cast<std::size_t>(v)] || colour_[static_cast<std::size_t>(v)] != want) continue;
            const int rep = twin_rep_[static_cast<std::size_t>(v)];
            if (std::find(tried_reps.begin(), tried_reps.end(), rep) != tried_reps.end()) continue;
            tried_reps.push_back(rep);
            const std::size_t mark = code_.size();
            placed_[static_cast<std::size_t>(p)] = v;
            used_[static_cast<std::size_t>(v)] = 1;
            append_code(p);
            // Prefix lengths depend only on p, so prefixes are comparable.
            const bool prune = have_best_ &&
                std::lexicographical_compare(best_code_.begin(),
                                             best_code_.begin() + static_cast<std::ptrdiff_t>(code_.size()),
                                             code_.begin(), code_.end());
            if (!prune) search(p + 1);
            code_.resize(mark);
            used_[static_cast<std::size_t>(v)] = 0;
            placed_[static_cast<std::size_t>(p)] = -1;
        }
    }

    const Structure& a_;
    int n_;
    std::vector<int> colour_;
    std::vector<int> twin_rep_;
    std::vector<int> slot_colour_;
    std::vector<int> placed_;
    std::vector<std::uint8_t> used_;
    std::vector<std::uint8_t> code_;
    std::vector<std::uint8_t> best_code_;
    std::vector<int> best_placed_;
    bool have_best_ = false;
};

} // namespace detail

/// Canonical representative of the isomorphism class of `a` together with the
/// labelling that produces it. Exact: colour refinement only restricts the
/// search to labellings compatible with an isomorphism-invariant vertex order.
inline CanonicalForm canonical_labelling(const Structure& a)
{
    return detail::Canonizer(a).run();
}

inline Structure canonical_form(const Structure& a) { return canonical_labelling(a).form; }

inline bool are_isomorphic(const Structure& a, const Structure& b)
{
    require_same_signature(a, b, "are_isomorphic");
    if (a.size() != b.size()) return false;
    for (std::size_t s = 0; s < a.signature().size(); ++s)
        if (a.tuple_count(s) != b.tuple_count(s)) return false;
    return canonical_form(a) == canonical_form(b);
}

/// Byte key of a canonical form, usable in hash sets.
inline std::string structure_key(const Structure& s)
{
    std::string key;
    key.reserve(s.flags().size() + 4);
    key.push_back(static_cast<char>(s.size()));
    for (auto f : s.flags()) key.push_back(static_cast<char>('0' + f));
    return key;
}

/// Orders structures by size, then by relation flags. Used as the canonical
/// order for enumeration output.
inline bool structure_less(const Structure& a, const Structure& b)
{
    if (a.size() != b.size()) return a.size() < b.size();
    return a.flags() < b.flags();
}

// ---------------------------------------------------------------------------
// Enumeration

struct EnumerationGuard {
    /// Refuse when the number of free tuple positions exceeds this.
    std::size_t max_positions = 24;
    bool force = false;
};

inline std::size_t tuple_positions(const Signature& sig, int n)
{
    std::size_t total = 0;
    for (const auto& s : sig.symbols()) total += detail::checked_power(n, s.arity);
    return total;
}

namespace detail {

inline void check_guard(std::size_t positions, const EnumerationGuard& guard, std::string_view what)
{
    if (!guard.force && positions > guard.max_positions)
        throw ResourceError(std::string(what) + ": " + std::to_string(positions) +
                            " tuple positions exceed the enumeration guard of " +
                            std::to_string(guard.max_positions) + " (force to override)");
}

/// (symbol, rank) of every tuple of [n]^arity that mentions vertex n-1.
inline std::vector<std::pair<std::size_t, std::size_t>> new_positions(const Signature& sig, int n)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (n == 0) return out;
    for (std::size_t s = 0; s < sig.size(); ++s) {
        const int k = sig[s].arity;
        Tuple t(static_cast<std::size_t>(k), 0);
        std::size_t r = 0;
        do {
            if (std::find(t.begin(), t.end(), n - 1) != t.end()) out.emplace_back(s, r);
            ++r;
        } while (next_tuple(t, n));
    }
    return out;
}

/// Copies `small` (on n-1 vertices) into a fresh structure on n vertices.
inline Structure grow(const Structure& small, int n)
{
    Structure out(small.signature(), n);
    const int m = small.size();
    if (m == 0) return out;
    for (std::size_t s = 0; s < small.signature().size(); ++s) {
        const int k = small.signature()[s].arity;
        Tuple t(static_cast<std::size_t>(k), 0);
        std::size_t r = 0;
        do {
            if (small.has_rank(s, r)) out.set(s, t, true);
            ++r;
        } while (next_tuple(t, m));
    }
    return out;
}

} // namespace detail

/// Hereditary augmentation: level m holds the structures on m vertices
/// accepted by `keep` (which must be closed under induced substructures), one
/// per isomorphism class when `up_to_iso`. Levels are sorted canonically.
inline std::vector<std::vector<Structure>> enumerate_hereditary_levels(
    const Signature& sig, int max_n, bool up_to_iso, const std::function<bool(const Structure&)>& keep,
    const EnumerationGuard& guard = {})
{
    if (max_n < 0) throw InputError("enumerate: n must be non-negative");
    std::vector<std::vector<Structure>> levels;
    levels.push_back({});
    if (keep(Structure(sig, 0))) levels.back().push_back(Structure(sig, 0));
    for (int m = 1; m <= max_n; ++m) {
        const auto positions = detail::new_positions(sig, m);
        detail::check_guard(positions.size(), guard, "enumerate");
        std::vector<Structure> next;
        std::unordered_set<std::string> seen;
        for (const auto& base : levels.back()) {
            // Labelled enumeration extends every labelled structure; the
            // iso-free variant extends one representative per class.
            Structure grown = detail::grow(base, m);
            const std::uint64_t combos = std::uint64_t{1} << positions.size();
            for (std::uint64_t mask = 0; mask < combos; ++mask) {
                Structure cand = grown;
                for (std::size_t i = 0; i < positions.size(); ++i)
                    if (mask >> i & 1U) cand.set_rank(positions[i].first, positions[i].second, true);
                if (!keep(cand)) continue;
                if (up_to_iso) {
                    Structure canon = canonical_form(cand);
                    if (seen.insert(structure_key(canon)).second) next.push_back(std::move(canon));
                } else {
                    next.push_back(std::move(cand));
                }
            }
        }
        std::sort(next.begin(), next.end(), structure_less);
        levels.push_back(std::move(next));
    }
    return levels;
}

inline std::vector<Structure> enumerate_hereditary(const Signature& sig, int n, bool up_to_iso,
                                                   const std::function<bool(const Structure&)>& keep,
                                                   const EnumerationGuard& guard = {})
{
    return std::move(enumerate_hereditary_levels(sig, n, up_to_iso, keep, guard).back());
}

/// Every sig-structure on n vertices (one per iso class when up_to_iso).
/// Guarded by the total number of tuple positions.
inline std::vector<Structure> enumerate_structures(const Signature& sig, int n, bool up_to_iso,
                                                   const EnumerationGuard& guard = {})
{
    if (n < 0) throw InputError("enumerate_structures: n must be non-negative");
    detail::check_guard(tuple_positions(sig, n), guard, "enumerate_structures");
    EnumerationGuard inner = guard;
    inner.force = true;
    return enumerate_hereditary(sig, n, up_to_iso, [](const Structure&) { return true; }, inner);
}

} // namespace lexpr

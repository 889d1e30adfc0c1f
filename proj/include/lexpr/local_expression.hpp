#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "lexpr/classes.hpp"
#include "lexpr/error.hpp"
#include "lexpr/logic.hpp"
#include "lexpr/structures.hpp"

namespace lexpr {

/// Solver hint: the base already forces `symbol` to be a relation of this
/// kind, so the search may enumerate those relations directly.
enum class EncodingKind { LinearOrder, CircularOrder, Equivalence };

struct Encoding {
    std::string symbol;
    EncodingKind kind = EncodingKind::LinearOrder;
    friend bool operator==(const Encoding&, const Encoding&) = default;
};

inline std::string encoding_keyword(EncodingKind k)
{
    switch (k) {
    case EncodingKind::LinearOrder: return "linear";
    case EncodingKind::CircularOrder: return "circular";
    case EncodingKind::Equivalence: return "equivalence";
    }
    return "?";
}

inline EncodingKind parse_encoding_keyword(std::string_view word)
{
    if (word == "linear") return EncodingKind::LinearOrder;
    if (word == "circular") return EncodingKind::CircularOrder;
    if (word == "equivalence") return EncodingKind::Equivalence;
    throw InputError("unknown encoding '" + std::string(word) + "' (expected linear, circular or equivalence)");
}

inline int encoding_arity(EncodingKind k) { return k == EncodingKind::CircularOrder ? 3 : 2; }

namespace detail {

/// Number of values the encoding offers when vertex v joins vertices 0..v-1.
inline int encoding_choices(EncodingKind k, int v, int classes)
{
    switch (k) {
    case EncodingKind::LinearOrder: return v + 1;
    case EncodingKind::CircularOrder: return v == 0 ? 1 : v;
    case EncodingKind::Equivalence: return classes + 1;
    }
    return 1;
}

/// Incremental state of one encoded relation: a sequence for orders, class
/// ids for equivalences.
struct EncodingState {
    EncodingKind kind = EncodingKind::LinearOrder;
    std::vector<int> seq;     // vertices in order (linear, circular)
    std::vector<int> cls;     // class id per vertex (equivalence)
    int classes = 0;

    /// Places vertex v (== current size) with the given choice.
    void place(int v, int choice)
    {
        switch (kind) {
        case EncodingKind::LinearOrder: seq.insert(seq.begin() + choice, v); break;
        case EncodingKind::CircularOrder:
            if (v == 0) seq.push_back(0);
            else seq.insert(seq.begin() + choice + 1, v);
            break;
        case EncodingKind::Equivalence:
            cls.push_back(choice);
            if (choice == classes) ++classes;
            break;
        }
    }

    void unplace(int v)
    {
        switch (kind) {
        case EncodingKind::LinearOrder:
        case EncodingKind::CircularOrder: seq.erase(std::find(seq.begin(), seq.end(), v)); break;
        case EncodingKind::Equivalence:
            if (cls.back() == classes - 1 && std::count(cls.begin(), cls.end(), classes - 1) == 1) --classes;
            cls.pop_back();
            break;
        }
    }

    /// Positions of each placed vertex in the sequence.
    [[nodiscard]] std::vector<int> positions(int placed) const
    {
        std::vector<int> pos(static_cast<std::size_t>(placed), -1);
        for (std::size_t i = 0; i < seq.size(); ++i) pos[static_cast<std::size_t>(seq[i])] = static_cast<int>(i);
        return pos;
    }

    /// Truth of the relation on a tuple of placed vertices.
    [[nodiscard]] bool holds(std::span<const int> t, const std::vector<int>& pos) const
    {
        switch (kind) {
        case EncodingKind::LinearOrder: return pos[static_cast<std::size_t>(t[0])] < pos[static_cast<std::size_t>(t[1])];
        case EncodingKind::CircularOrder: {
            const int a = pos[static_cast<std::size_t>(t[0])], b = pos[static_cast<std::size_t>(t[1])],
                      c = pos[static_cast<std::size_t>(t[2])];
            if (a == b || b == c || a == c) return false;
            return (a < b && b < c) || (b < c && c < a) || (c < a && a < b);
        }
        case EncodingKind::Equivalence: return cls[static_cast<std::size_t>(t[0])] == cls[static_cast<std::size_t>(t[1])];
        }
        return false;
    }
};

} // namespace detail

/// Every relation of the given kind on n vertices as a flag table indexed by
/// tuple rank, in the order the solver tries them.
inline std::vector<std::vector<std::uint8_t>> encoded_relations(EncodingKind kind, int n)
{
    std::vector<std::vector<std::uint8_t>> out;
    const int k = encoding_arity(kind);
    detail::EncodingState st;
    st.kind = kind;
    auto rec = [&](auto&& self, int v) -> void {
        if (v == n) {
            const auto pos = st.positions(n);
            std::vector<std::uint8_t> flags;
            if (n > 0) {
                Tuple t(static_cast<std::size_t>(k), 0);
                do flags.push_back(st.holds(t, pos) ? 1 : 0);
                while (detail::next_tuple(t, n));
            }
            out.push_back(std::move(flags));
            return;
        }
        const int choices = detail::encoding_choices(kind, v, st.classes);
        for (int c = 0; c < choices; ++c) {
            st.place(v, c);
            self(self, v + 1);
            st.unplace(v);
        }
    };
    rec(rec, 0);
    return out;
}

struct ValidationReport {
    int window = 0;
    std::vector<std::string> warnings;
};

/// A local expression: graphs (or tau-structures) that are Delta-reducts of
/// base members avoiding every forbidden structure. Forbidden structures may
/// live over a sub-signature of the carrier.
class LocalExpression {
public:
    LocalExpression() = default;

    LocalExpression(std::string name, QfDefinition definition, LocalClass base, std::vector<Structure> forbidden,
                    std::vector<Encoding> encodings = {}, std::string provenance = {})
        : name_(std::move(name)), definition_(std::move(definition)), base_(std::move(base)),
          forbidden_(std::move(forbidden)), encodings_(std::move(encodings)), provenance_(std::move(provenance))
    {
        check_coherence();
    }

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const Signature& target() const { return definition_.source(); }
    [[nodiscard]] const Signature& carrier() const { return definition_.carrier(); }
    [[nodiscard]] const QfDefinition& definition() const { return definition_; }
    [[nodiscard]] const LocalClass& base() const { return base_; }
    [[nodiscard]] const std::vector<Structure>& forbidden() const { return forbidden_; }
    [[nodiscard]] const std::vector<Encoding>& encodings() const { return encodings_; }
    [[nodiscard]] const std::string& provenance() const { return provenance_; }

    [[nodiscard]] LocalExpression renamed(std::string name) const
    {
        LocalExpression e = *this;
        e.name_ = std::move(name);
        return e;
    }

    [[nodiscard]] LocalExpression with_provenance(std::string note) const
    {
        LocalExpression e = *this;
        e.provenance_ = std::move(note);
        return e;
    }

    [[nodiscard]] LocalExpression without_encodings() const
    {
        LocalExpression e = *this;
        e.encodings_.clear();
        return e;
    }

    /// Max of the base window, forbidden sizes and definition arities.
    [[nodiscard]] int window() const
    {
        int n = base_.window();
        for (const auto& f : forbidden_) n = std::max(n, f.size());
        for (const auto& s : target().symbols()) n = std::max(n, s.arity);
        return n;
    }

    [[nodiscard]] const Encoding* encoding_of(std::string_view symbol) const
    {
        for (const auto& e : encodings_)
            if (e.symbol == symbol) return &e;
        return nullptr;
    }

    friend bool operator==(const LocalExpression& a, const LocalExpression& b)
    {
        return a.name_ == b.name_ && a.definition_ == b.definition_ && a.base_ == b.base_ &&
               a.forbidden_ == b.forbidden_ && a.encodings_ == b.encodings_;
    }

private:
    void check_coherence() const
    {
        const std::string who = "expression " + name_;
        if (!(base_.signature() == carrier()))
            throw InputError(who + ": base class signature does not match the definition's carrier");
        for (std::size_t i = 0; i < forbidden_.size(); ++i)
            if (!carrier().contains_all(forbidden_[i].signature()))
                throw InputError(who + ": forbidden structure " + std::to_string(i + 1) +
                                 " uses symbols outside the carrier");
        std::set<std::string> seen;
        for (const auto& e : encodings_) {
            auto idx = carrier().find(e.symbol);
            if (!idx) throw InputError(who + ": encoded symbol '" + e.symbol + "' is not in the carrier");
            if (carrier()[*idx].arity != encoding_arity(e.kind))
                throw InputError(who + ": " + encoding_keyword(e.kind) + " encoding needs arity " +
                                 std::to_string(encoding_arity(e.kind)) + " for '" + e.symbol + "'");
            if (!seen.insert(e.symbol).second)
                throw InputError(who + ": symbol '" + e.symbol + "' encoded twice");
        }
    }

    std::string name_;
    QfDefinition definition_;
    LocalClass base_;
    std::vector<Structure> forbidden_;
    std::vector<Encoding> encodings_;
    std::string provenance_;
};

namespace detail {

/// Base sentences that mention only the given symbols (and at least one of them).
inline std::vector<UniversalSentence> sentences_within(const LocalClass& base, const std::set<std::string>& symbols)
{
    std::vector<UniversalSentence> out;
    for (const auto& s : base.as_sentences()) {
        const auto used = symbols_of(s.body);
        if (used.empty()) continue;
        if (std::all_of(used.begin(), used.end(), [&](const auto& kv) { return symbols.count(kv.first) > 0; }))
            out.push_back(s);
    }
    return out;
}

} // namespace detail

/// Coherence has been checked at construction; this adds the softer checks:
/// forbidden members outside the base, and that every encoding enumerates
/// relations allowed by the base (all of them, for binary encodings on up to
/// three vertices).
inline ValidationReport validate(const LocalExpression& e)
{
    ValidationReport r;
    r.window = e.window();
    for (std::size_t i = 0; i < e.forbidden().size(); ++i) {
        const auto& f = e.forbidden()[i];
        if (f.signature() == e.carrier() && !e.base().contains(f))
            r.warnings.push_back("forbidden structure " + std::to_string(i + 1) + " (" + describe(f) +
                                 ") violates the base and is redundant");
    }
    for (const auto& enc : e.encodings()) {
        const auto axioms = detail::sentences_within(e.base(), {enc.symbol});
        const std::size_t sym = e.carrier().index_of(enc.symbol);
        for (int n = 0; n <= 4; ++n) {
            std::set<std::vector<std::uint8_t>> produced;
            for (const auto& flags : encoded_relations(enc.kind, n)) {
                Structure a(e.carrier(), n);
                for (std::size_t k = 0; k < flags.size(); ++k) a.set_rank(sym, k, flags[k] != 0);
                for (const auto& ax : axioms)
                    if (!holds(ax, a))
                        throw LogicError("expression " + e.name() + ": " + encoding_keyword(enc.kind) +
                                         " encoding of '" + enc.symbol + "' produces " + describe(a) +
                                         ", which the base rejects");
                produced.insert(flags);
            }
            if (encoding_arity(enc.kind) != 2 || n > 3) continue;
            const std::size_t positions = static_cast<std::size_t>(n * n);
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << positions); ++mask) {
                Structure a(e.carrier(), n);
                std::vector<std::uint8_t> flags(positions);
                for (std::size_t k = 0; k < positions; ++k) {
                    flags[k] = (mask >> k & 1U) != 0 ? 1 : 0;
                    a.set_rank(sym, k, flags[k] != 0);
                }
                const bool ok = std::all_of(axioms.begin(), axioms.end(), [&](const auto& ax) { return holds(ax, a); });
                if (ok && !produced.count(flags))
                    throw LogicError("expression " + e.name() + ": base allows " + describe(a) + " but the " +
                                     encoding_keyword(enc.kind) + " encoding of '" + enc.symbol + "' never produces it");
            }
        }
    }
    return r;
}

/// Forbidding `pattern` as a subgraph: every base member on the same vertex
/// set that contains all of the pattern's tuples, one per isomorphism class.
inline std::vector<Structure> subgraph_closure(const Structure& pattern, const LocalClass& base,
                                               std::size_t max_free_positions = 24)
{
    if (!(pattern.signature() == base.signature()))
        throw InputError("subgraph_closure: pattern must be over the base signature");
    std::vector<std::pair<std::size_t, std::size_t>> free;
    for (std::size_t s = 0; s < pattern.signature().size(); ++s)
        for (std::size_t r = 0; r < pattern.table_size(s); ++r)
            if (!pattern.has_rank(s, r)) free.emplace_back(s, r);
    if (free.size() > max_free_positions)
        throw ResourceError("subgraph_closure: " + std::to_string(free.size()) + " free positions exceed the guard of " +
                            std::to_string(max_free_positions));
    std::vector<Structure> out;
    std::unordered_set<std::string> seen;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
        Structure c = pattern;
        for (std::size_t i = 0; i < free.size(); ++i)
            if (mask >> i & 1U) c.set_rank(free[i].first, free[i].second, true);
        if (!base.contains(c)) continue;
        Structure canon = canonical_form(c);
        if (seen.insert(structure_key(canon)).second) out.push_back(std::move(canon));
    }
    std::sort(out.begin(), out.end(), structure_less);
    return out;
}

} // namespace lexpr

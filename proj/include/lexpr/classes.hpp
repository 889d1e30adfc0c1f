#pragma once

#include <algorithm>
#include <bit>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexpr/error.hpp"
#include "lexpr/formula.hpp"
#include "lexpr/graph_io.hpp"
#include "lexpr/logic.hpp"
#include "lexpr/structures.hpp"

namespace lexpr {

/// forall x1..xk body, with k = body.arity().
struct UniversalSentence {
    Formula body;
    friend bool operator==(const UniversalSentence&, const UniversalSentence&) = default;
};

inline bool holds(const UniversalSentence& s, const Structure& a)
{
    const int k = s.body.arity();
    std::vector<int> t(static_cast<std::size_t>(k), 0);
    std::vector<int> scratch;
    if (k == 0) return detail::eval_node(s.body, a, t, scratch);
    if (a.size() == 0) return true;
    do {
        if (!detail::eval_node(s.body, a, t, scratch)) return false;
    } while (detail::next_tuple(t, a.size()));
    return true;
}

/// forall x1..xn !chi(B): B does not embed.
inline UniversalSentence forbidding_sentence(const Structure& b) { return {!characteristic_formula(b)}; }

/// Hereditary class given by minimal bounds, by universal sentences, or both.
class LocalClass {
public:
    LocalClass() = default;

    static LocalClass everything(const Signature& sig, std::string name = "all")
    {
        LocalClass c;
        c.sig_ = sig;
        c.bounds_ = std::vector<Structure>{};
        c.name_ = std::move(name);
        return c;
    }

    static LocalClass from_bounds(const Signature& sig, std::vector<Structure> bounds, std::string name = {})
    {
        LocalClass c;
        c.sig_ = sig;
        for (const auto& b : bounds)
            if (!sig.contains_all(b.signature()))
                throw InputError("class " + name + ": bound " + describe(b) + " uses symbols outside the signature");
        c.bounds_ = std::move(bounds);
        c.name_ = std::move(name);
        return c;
    }

    static LocalClass from_axioms(const Signature& sig, std::vector<UniversalSentence> axioms, std::string name = {})
    {
        LocalClass c;
        c.sig_ = sig;
        for (const auto& ax : axioms) check_formula(ax.body, sig);
        c.axioms_ = std::move(axioms);
        c.name_ = std::move(name);
        return c;
    }

    /// Both presentations; when feasible their agreement is verified on every
    /// structure with at most window()+1 vertices.
    static LocalClass from_both(const Signature& sig, std::vector<Structure> bounds,
                                std::vector<UniversalSentence> axioms, std::string name = {}, bool check = true)
    {
        LocalClass c = from_bounds(sig, std::move(bounds), name);
        for (const auto& ax : axioms) check_formula(ax.body, sig);
        c.axioms_ = std::move(axioms);
        if (check) c.check_agreement();
        return c;
    }

    [[nodiscard]] const Signature& signature() const { return sig_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::optional<std::vector<Structure>>& bounds() const { return bounds_; }
    [[nodiscard]] const std::optional<std::vector<UniversalSentence>>& axioms() const { return axioms_; }
    [[nodiscard]] bool agreement_checked() const { return agreement_checked_; }

    [[nodiscard]] LocalClass renamed(std::string name) const
    {
        LocalClass c = *this;
        c.name_ = std::move(name);
        return c;
    }

    /// Largest bound size or axiom arity.
    [[nodiscard]] int window() const
    {
        int n = 0;
        if (bounds_)
            for (const auto& b : *bounds_) n = std::max(n, b.size());
        if (axioms_)
            for (const auto& a : *axioms_) n = std::max(n, a.body.arity());
        return n;
    }

    [[nodiscard]] bool contains(const Structure& a) const
    {
        if (!(a.signature() == sig_))
            throw InputError("class " + name_ + ": structure signature does not match");
        if (axioms_) {
            for (const auto& ax : *axioms_)
                if (!holds(ax, a)) return false;
            return true;
        }
        return is_free(a, *bounds_);
    }

    [[nodiscard]] bool contains_by_bounds(const Structure& a) const
    {
        if (!bounds_) throw InputError("class " + name_ + " has no bound presentation");
        return is_free(a, *bounds_);
    }

    [[nodiscard]] bool contains_by_axioms(const Structure& a) const
    {
        if (!axioms_) throw InputError("class " + name_ + " has no axiom presentation");
        return std::all_of(axioms_->begin(), axioms_->end(), [&](const auto& ax) { return holds(ax, a); });
    }

    /// Axioms, or one forbidding sentence per bound.
    [[nodiscard]] std::vector<UniversalSentence> as_sentences() const
    {
        if (axioms_) return *axioms_;
        std::vector<UniversalSentence> out;
        for (const auto& b : *bounds_) out.push_back(forbidding_sentence(b));
        return out;
    }

    /// True for the built-in class of simple graphs (enumerated by a faster path).
    [[nodiscard]] bool is_simple_graphs() const { return simple_graphs_; }

    static LocalClass simple_graphs();

    /// Same signature and presentations (the display name is ignored).
    friend bool operator==(const LocalClass& a, const LocalClass& b)
    {
        return a.sig_ == b.sig_ && a.bounds_ == b.bounds_ && a.axioms_ == b.axioms_;
    }

private:
    void check_agreement()
    {
        const int limit = window() + 1;
        try {
            for (int n = 0; n <= limit; ++n)
                for (const auto& a : enumerate_structures(sig_, n, true))
                    if (contains_by_bounds(a) != contains_by_axioms(a))
                        throw LogicError("class " + name_ + ": bounds and axioms disagree on " + describe(a));
            agreement_checked_ = true;
        } catch (const ResourceError&) {
            agreement_checked_ = false;
        }
    }

    Signature sig_;
    std::optional<std::vector<Structure>> bounds_;
    std::optional<std::vector<UniversalSentence>> axioms_;
    std::string name_;
    bool agreement_checked_ = false;
    bool simple_graphs_ = false;
};

inline LocalClass LocalClass::simple_graphs()
{
    const Signature g = graph_signature();
    Structure loop(g, 1);
    loop.set(0, {0, 0});
    Structure arc(g, 2);
    arc.set(0, {0, 1});
    auto e = [](int a, int b) { return Formula::atom("E", {a, b}); };
    LocalClass c = from_both(g, {loop, arc}, {{!e(0, 0)}, {implies(e(0, 1), e(1, 0))}}, "G");
    c.simple_graphs_ = true;
    return c;
}

/// Members of C on 0..max_n vertices up to isomorphism, level by level.
inline std::vector<std::vector<Structure>> enumerate_members_levels(const LocalClass& c, int max_n,
                                                                    const EnumerationGuard& guard = {})
{
    if (c.is_simple_graphs()) {
        std::vector<std::vector<Structure>> levels;
        for (int n = 0; n <= max_n; ++n) levels.push_back(enumerate_graphs(n));
        return levels;
    }
    return enumerate_hereditary_levels(c.signature(), max_n, true, [&](const Structure& a) { return c.contains(a); },
                                       guard);
}

inline std::vector<Structure> enumerate_members(const LocalClass& c, int n, const EnumerationGuard& guard = {})
{
    return std::move(enumerate_members_levels(c, n, guard).back());
}

/// Removes bounds that contain another bound and isomorphic duplicates.
inline std::vector<Structure> minimize_bounds(std::vector<Structure> bounds)
{
    for (auto& b : bounds) b = canonical_form(b);
    std::sort(bounds.begin(), bounds.end(), structure_less);
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    std::vector<Structure> out;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        bool redundant = false;
        for (std::size_t j = 0; j < bounds.size() && !redundant; ++j) {
            if (i == j || bounds[j].size() > bounds[i].size()) continue;
            if (!bounds[i].signature().contains_all(bounds[j].signature())) continue;
            if (bounds[j].size() == bounds[i].size() && j > i) continue;
            redundant = bounds[j].signature() == bounds[i].signature()
                            ? embeds(bounds[j], bounds[i])
                            : embeds(bounds[j], restrict_to(bounds[i], bounds[j].signature()));
        }
        if (!redundant) out.push_back(bounds[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mining

struct MiningLevel {
    int n = 0;
    std::size_t examined = 0;
    std::size_t members = 0;
    std::size_t bounds = 0;
};

struct MiningReport {
    std::vector<Structure> bounds;
    std::vector<MiningLevel> levels;
};

using MembershipOracle = std::function<bool(const Structure&)>;

/// Minimal bounds, up to isomorphism and with at most max_n vertices, of
/// {X in ambient : pred(X)} inside ambient. pred must be hereditary on the
/// enumerated range; a violation raises LogicError naming the pair.
inline MiningReport minimal_bounds_relative(const MembershipOracle& pred, const LocalClass& ambient, int max_n,
                                            const EnumerationGuard& guard = {})
{
    MiningReport report;
    const auto levels = enumerate_members_levels(ambient, max_n, guard);
    std::unordered_map<std::string, bool> verdict;
    for (int n = 0; n <= max_n; ++n) {
        MiningLevel lvl;
        lvl.n = n;
        for (const auto& x : levels[static_cast<std::size_t>(n)]) {
            ++lvl.examined;
            const bool in = pred(x);
            verdict.emplace(structure_key(x), in);
            if (in) ++lvl.members;
            bool subs_in = true;
            std::optional<Structure> outside_sub;
            for (int v = 0; v < n && subs_in; ++v) {
                std::vector<int> rest;
                for (int u = 0; u < n; ++u)
                    if (u != v) rest.push_back(u);
                Structure sub = canonical_form(induced_substructure(x, rest));
                auto it = verdict.find(structure_key(sub));
                const bool sub_in = it != verdict.end() ? it->second : pred(sub);
                if (!sub_in) {
                    subs_in = false;
                    outside_sub = sub;
                }
            }
            if (in && !subs_in)
                throw LogicError("membership oracle is not hereditary: " + describe(x) +
                                 " is accepted but its substructure " + describe(*outside_sub) + " is not");
            if (!in && subs_in) {
                report.bounds.push_back(x);
                ++lvl.bounds;
            }
        }
        report.levels.push_back(lvl);
    }
    return report;
}

inline LocalClass intersect(const LocalClass& c1, const LocalClass& c2)
{
    if (!(c1.signature() == c2.signature())) throw InputError("intersect: signatures differ");
    const std::string name = c1.name() + "&" + c2.name();
    if (c1.bounds() && c2.bounds() && !c1.axioms() && !c2.axioms()) {
        auto all = *c1.bounds();
        all.insert(all.end(), c2.bounds()->begin(), c2.bounds()->end());
        return LocalClass::from_bounds(c1.signature(), minimize_bounds(std::move(all)), name);
    }
    auto ax = c1.as_sentences();
    auto ax2 = c2.as_sentences();
    ax.insert(ax.end(), ax2.begin(), ax2.end());
    if (c1.bounds() && c2.bounds()) {
        auto all = *c1.bounds();
        all.insert(all.end(), c2.bounds()->begin(), c2.bounds()->end());
        return LocalClass::from_both(c1.signature(), minimize_bounds(std::move(all)), std::move(ax), name, false);
    }
    return LocalClass::from_axioms(c1.signature(), std::move(ax), name);
}

/// Union of two local classes inside `ambient`: its bounds relative to
/// ambient are mined up to max_n, which must reach the sum of the two windows.
/// The returned class carries the mined bounds together with ambient's own.
inline LocalClass union_classes(const LocalClass& c1, const LocalClass& c2, int max_n, const LocalClass& ambient,
                                MiningReport* report = nullptr)
{
    if (!(c1.signature() == c2.signature()) || !(c1.signature() == ambient.signature()))
        throw InputError("union_classes: signatures differ");
    const int required = c1.window() + c2.window();
    if (max_n < required)
        throw InputError("union_classes: max_n must be at least " + std::to_string(required));
    auto mined = minimal_bounds_relative([&](const Structure& a) { return c1.contains(a) || c2.contains(a); },
                                         ambient, max_n);
    if (report) *report = mined;
    auto all = mined.bounds;
    std::string name = c1.name() + "|" + c2.name();
    if (ambient.bounds()) {
        all.insert(all.end(), ambient.bounds()->begin(), ambient.bounds()->end());
        return LocalClass::from_bounds(ambient.signature(), minimize_bounds(std::move(all)), name);
    }
    auto ax = ambient.as_sentences();
    for (const auto& b : all) ax.push_back(forbidding_sentence(b));
    return LocalClass::from_axioms(ambient.signature(), std::move(ax), name);
}

struct PreimageReport {
    /// Mined bounds of {X in ambient : reduct(D,X) is target-bound free}.
    std::vector<Structure> mined;
    /// Ambient members whose reduct is isomorphic to a target bound.
    std::vector<Structure> direct;
    bool agree = false;
};

inline PreimageReport preimage_bounds(const QfDefinition& d, const std::vector<Structure>& target_bounds,
                                      const LocalClass& ambient, int max_n)
{
    if (!(ambient.signature() == d.carrier())) throw InputError("preimage_bounds: ambient is not over the carrier");
    for (const auto& b : target_bounds)
        if (!(b.signature() == d.source())) throw InputError("preimage_bounds: target bound not over the source");
    PreimageReport r;
    r.mined = minimal_bounds_relative([&](const Structure& x) { return is_free(reduct(d, x), target_bounds); },
                                      ambient, max_n)
                  .bounds;
    for (const auto& level : enumerate_members_levels(ambient, max_n))
        for (const auto& x : level) {
            const Structure img = reduct(d, x);
            for (const auto& b : target_bounds)
                if (b.size() == img.size() && are_isomorphic(img, b)) {
                    r.direct.push_back(x);
                    break;
                }
        }
    auto key_set = [](std::vector<Structure> v) {
        std::vector<std::string> keys;
        for (auto& s : v) keys.push_back(structure_key(canonical_form(s)));
        std::sort(keys.begin(), keys.end());
        return keys;
    };
    r.agree = key_set(r.mined) == key_set(r.direct);
    return r;
}

/// For every ambient member A with N < |A| <= max_n: pred(A) holds exactly
/// when pred holds on all induced substructures with at most N vertices.
inline bool is_local_up_to(const MembershipOracle& pred, int window, int max_n, const LocalClass& ambient,
                           std::optional<Structure>* witness = nullptr)
{
    if (max_n < window) throw InputError("is_local_up_to: max_n must be at least N");
    const auto levels = enumerate_members_levels(ambient, max_n);
    for (int n = window + 1; n <= max_n; ++n)
        for (const auto& a : levels[static_cast<std::size_t>(n)]) {
            bool small_ok = true;
            for (unsigned mask = 0; mask < (1U << n) && small_ok; ++mask) {
                if (std::popcount(mask) > window) continue;
                std::vector<int> s;
                for (int v = 0; v < n; ++v)
                    if (mask >> v & 1U) s.push_back(v);
                small_ok = pred(induced_substructure(a, s));
            }
            if (pred(a) != small_ok) {
                if (witness) *witness = a;
                return false;
            }
        }
    return true;
}

} // namespace lexpr

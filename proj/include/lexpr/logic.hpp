#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexpr/error.hpp"
#include "lexpr/formula.hpp"
#include "lexpr/structures.hpp"

namespace lexpr {

/// One carrier formula per source symbol. `source` is the signature being
/// defined, `carrier` the signature the formulas speak about.
class QfDefinition {
public:
    QfDefinition() = default;

    QfDefinition(Signature source, Signature carrier, std::vector<Formula> formulas, std::string name = {})
        : source_(std::move(source)), carrier_(std::move(carrier)), formulas_(std::move(formulas)), name_(std::move(name))
    {
        if (formulas_.size() != source_.size())
            throw InputError("definition " + name_ + ": expected " + std::to_string(source_.size()) +
                             " formulas, got " + std::to_string(formulas_.size()));
        for (std::size_t i = 0; i < formulas_.size(); ++i) {
            if (formulas_[i].arity() != source_[i].arity)
                throw InputError("definition " + name_ + ": formula for '" + source_[i].name + "' has arity " +
                                 std::to_string(formulas_[i].arity()) + ", expected " +
                                 std::to_string(source_[i].arity));
            check_formula(formulas_[i], carrier_);
        }
    }

    [[nodiscard]] const Signature& source() const { return source_; }
    [[nodiscard]] const Signature& carrier() const { return carrier_; }
    [[nodiscard]] const std::vector<Formula>& formulas() const { return formulas_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const Formula& operator[](std::size_t i) const { return formulas_[i]; }
    [[nodiscard]] const Formula& operator[](std::string_view symbol) const { return formulas_[source_.index_of(symbol)]; }

    [[nodiscard]] QfDefinition renamed(std::string name) const
    {
        QfDefinition d = *this;
        d.name_ = std::move(name);
        return d;
    }

    friend bool operator==(const QfDefinition& a, const QfDefinition& b)
    {
        return a.source_ == b.source_ && a.carrier_ == b.carrier_ && a.formulas_ == b.formulas_;
    }

private:
    Signature source_;
    Signature carrier_;
    std::vector<Formula> formulas_;
    std::string name_;
};

/// The Delta-reduct: same vertices, R holds on exactly the tuples satisfying Delta(R).
inline Structure reduct(const QfDefinition& d, const Structure& a)
{
    if (!(a.signature() == d.carrier()))
        throw InputError("reduct: structure signature does not match the carrier of " +
                         (d.name().empty() ? std::string("the definition") : d.name()));
    Structure out(d.source(), a.size());
    if (a.size() == 0) return out;
    for (std::size_t s = 0; s < d.source().size(); ++s) {
        const int r = d.source()[s].arity;
        std::vector<int> t(static_cast<std::size_t>(r), 0);
        std::vector<int> scratch;
        std::size_t rank = 0;
        do {
            if (detail::eval_node(d[s], a, t, scratch)) out.set_rank(s, rank, true);
            ++rank;
        } while (detail::next_tuple(t, a.size()));
    }
    return out;
}

/// Replaces every source atom R(v) of phi by Delta(R)(v). The result speaks
/// about the carrier and satisfies evaluate(apply(D,phi),A,a) == evaluate(phi,reduct(D,A),a).
inline Formula apply(const QfDefinition& d, const Formula& phi)
{
    switch (phi.kind()) {
    case Kind::True:
    case Kind::False:
    case Kind::Eq: return phi;
    case Kind::Atom: {
        const auto s = d.source().index_of(phi.symbol());
        if (static_cast<int>(phi.vars().size()) != d.source()[s].arity)
            throw InputError("apply: atom '" + phi.symbol() + "' has the wrong arity");
        return substitute(d[s], phi.vars(), phi.arity());
    }
    case Kind::Not: return Formula::negate(apply(d, phi.children()[0]));
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> kids;
        for (const auto& k : phi.children()) kids.push_back(apply(d, k));
        return phi.kind() == Kind::And ? Formula::conj(std::move(kids), phi.arity())
                                       : Formula::disj(std::move(kids), phi.arity());
    }
    }
    return phi;
}

/// g : tau <- sigma, d : sigma <- pi. Result tau <- pi with
/// reduct(compose(g,d), A) == reduct(g, reduct(d, A)).
inline QfDefinition compose(const QfDefinition& g, const QfDefinition& d)
{
    if (!(g.carrier() == d.source()))
        throw InputError("compose: carrier of " + g.name() + " differs from the source of " + d.name());
    std::vector<Formula> fs;
    for (const auto& f : g.formulas()) fs.push_back(apply(d, f));
    return {g.source(), d.carrier(), std::move(fs), g.name() + "." + d.name()};
}

// ---------------------------------------------------------------------------
// Built-in definitions

inline QfDefinition identity_definition(const Signature& sig)
{
    std::vector<Formula> fs;
    for (const auto& s : sig.symbols()) {
        std::vector<int> v(static_cast<std::size_t>(s.arity));
        for (int i = 0; i < s.arity; ++i) v[static_cast<std::size_t>(i)] = i;
        fs.push_back(Formula::atom(s.name, v));
    }
    return {sig, sig, std::move(fs), "Id"};
}

/// R -> join of R over all permutations of its arguments.
inline QfDefinition symmetric_definition(const Signature& sig)
{
    std::vector<Formula> fs;
    for (const auto& s : sig.symbols()) {
        std::vector<int> v(static_cast<std::size_t>(s.arity));
        for (int i = 0; i < s.arity; ++i) v[static_cast<std::size_t>(i)] = i;
        std::vector<Formula> parts;
        do {
            parts.push_back(Formula::atom(s.name, v));
        } while (std::next_permutation(v.begin(), v.end()));
        fs.push_back(parts.size() == 1 ? parts.front() : Formula::disj(std::move(parts)));
    }
    return {sig, sig, std::move(fs), "S"};
}

inline QfDefinition complement_definition(const Signature& sig)
{
    auto id = identity_definition(sig);
    std::vector<Formula> fs;
    for (const auto& f : id.formulas()) fs.push_back(!f);
    return {sig, sig, std::move(fs), "CO"};
}

/// R -> R & dif: drops tuples with repeated entries (loops for digraphs).
inline QfDefinition simplification_definition(const Signature& sig)
{
    auto id = identity_definition(sig);
    std::vector<Formula> fs;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (sig[i].arity == 1)
            fs.push_back(id[i]);
        else
            fs.push_back(id[i] & dif(sig[i].arity));
    }
    return {sig, sig, std::move(fs), "SP"};
}

inline Signature graph_signature() { return Signature({{"E", 2}}, "G"); }

/// H(x,y,z) iff x,y,z are distinct and induce an odd number of edges.
inline QfDefinition two_graph_definition()
{
    auto e = [](int a, int b) { return Formula::atom("E", {a, b}); };
    const Formula a = e(0, 1), b = e(1, 2), c = e(0, 2);
    Formula odd = Formula::disj({a & (!b) & (!c), (!a) & b & (!c), (!a) & (!b) & c, a & b & c});
    return {Signature({{"H", 3}}, "H3"), graph_signature(), {dif(3) & odd}, "TG"};
}

// ---------------------------------------------------------------------------
// Satisfiability by locality: truth of a qf formula depends only on the
// substructure induced by the tuple, so it suffices to try every equality
// pattern of the variables and every truth assignment to the ground atoms.

struct SatOptions {
    /// Refuse when one equality pattern yields more ground atoms than this.
    std::size_t max_atoms = 24;
};

struct Model {
    Structure structure;
    std::vector<int> tuple;
};

namespace detail {

class SatSearch {
public:
    SatSearch(const Formula& phi, const Signature& sig, const SatOptions& opts) : phi_(phi), sig_(sig), opts_(opts)
    {
        check_formula(phi, sig);
    }

    std::optional<Model> run()
    {
        const int k = phi_.arity();
        std::vector<int> block(static_cast<std::size_t>(k), 0);
        // Restricted growth strings enumerate the set partitions of the variables.
        while (true) {
            if (auto m = try_pattern(block)) return m;
            if (!next_rgs(block)) break;
        }
        return std::nullopt;
    }

private:
    static bool next_rgs(std::vector<int>& b)
    {
        const int k = static_cast<int>(b.size());
        for (int i = k - 1; i >= 1; --i) {
            int mx = 0;
            for (int j = 0; j < i; ++j) mx = std::max(mx, b[static_cast<std::size_t>(j)]);
            if (b[static_cast<std::size_t>(i)] <= mx) {
                ++b[static_cast<std::size_t>(i)];
                for (int j = i + 1; j < k; ++j) b[static_cast<std::size_t>(j)] = 0;
                return true;
            }
        }
        return false;
    }

    struct Ground {
        std::size_t sym;
        std::vector<int> tuple;
    };

    // 0 false, 1 true, 2 unknown
    int eval3(const Formula& f) const
    {
        switch (f.kind()) {
        case Kind::True: return 1;
        case Kind::False: return 0;
        case Kind::Eq: return (*block_)[static_cast<std::size_t>(f.lhs())] == (*block_)[static_cast<std::size_t>(f.rhs())] ? 1 : 0;
        case Kind::Atom: return values_[atom_index(f)];
        case Kind::Not: {
            int v = eval3(f.children()[0]);
            return v == 2 ? 2 : 1 - v;
        }
        case Kind::And: {
            int r = 1;
            for (const auto& c : f.children()) {
                int v = eval3(c);
                if (v == 0) return 0;
                if (v == 2) r = 2;
            }
            return r;
        }
        case Kind::Or: {
            int r = 0;
            for (const auto& c : f.children()) {
                int v = eval3(c);
                if (v == 1) return 1;
                if (v == 2) r = 2;
            }
            return r;
        }
        }
        return 2;
    }

    std::size_t atom_index(const Formula& f) const
    {
        std::vector<int> t;
        t.reserve(f.vars().size());
        for (int v : f.vars()) t.push_back((*block_)[static_cast<std::size_t>(v)]);
        const auto s = sig_.index_of(f.symbol());
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i].sym == s && atoms_[i].tuple == t) return i;
        return 0; // unreachable: every atom was collected
    }

    void collect(const Formula& f)
    {
        if (f.kind() == Kind::Atom) {
            std::vector<int> t;
            for (int v : f.vars()) t.push_back((*block_)[static_cast<std::size_t>(v)]);
            const auto s = sig_.index_of(f.symbol());
            for (const auto& g : atoms_)
                if (g.sym == s && g.tuple == t) return;
            atoms_.push_back({s, std::move(t)});
            return;
        }
        for (const auto& c : f.children()) collect(c);
    }

    std::optional<Model> try_pattern(const std::vector<int>& block)
    {
        block_ = &block;
        atoms_.clear();
        collect(phi_);
        if (atoms_.size() > opts_.max_atoms)
            throw ResourceError("satisfiability check: " + std::to_string(atoms_.size()) +
                                " ground atoms exceed the guard of " + std::to_string(opts_.max_atoms));
        values_.assign(atoms_.size(), 2);
        if (!assign(0)) return std::nullopt;
        int m = 0;
        for (int b : block) m = std::max(m, b + 1);
        Structure s(sig_, m);
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (values_[i] == 1) s.set(atoms_[i].sym, atoms_[i].tuple, true);
        return Model{std::move(s), block};
    }

    bool assign(std::size_t i)
    {
        const int v = eval3(phi_);
        if (v == 0) return false;
        if (v == 1) {
            for (std::size_t j = i; j < values_.size(); ++j) values_[j] = 0;
            return true;
        }
        if (i == values_.size()) return false;
        for (int val : {0, 1}) {
            values_[i] = val;
            if (assign(i + 1)) return true;
        }
        values_[i] = 2;
        return false;
    }

    const Formula& phi_;
    const Signature& sig_;
    SatOptions opts_;
    const std::vector<int>* block_ = nullptr;
    std::vector<Ground> atoms_;
    std::vector<int> values_;
};

} // namespace detail

/// A structure on at most arity(phi) vertices and a spanning tuple satisfying phi.
inline std::optional<Model> find_model(const Formula& phi, const Signature& sig, const SatOptions& opts = {})
{
    return detail::SatSearch(phi, sig, opts).run();
}

inline std::optional<Model> find_model(const Formula& phi, const SatOptions& opts = {})
{
    return find_model(phi, signature_of(phi), opts);
}

inline bool is_satisfiable(const Formula& phi, const SatOptions& opts = {})
{
    return find_model(phi, opts).has_value();
}

inline Signature merged_signature(const Formula& a, const Formula& b)
{
    auto syms = symbols_of(a);
    for (const auto& [name, ar] : symbols_of(b)) {
        auto [it, fresh] = syms.emplace(name, ar);
        if (!fresh && it->second != ar)
            throw InputError("formulas use symbol '" + name + "' with different arities");
    }
    std::vector<Symbol> out;
    for (const auto& [name, ar] : syms) out.push_back({name, ar});
    return Signature(std::move(out));
}

/// A model and tuple on which phi and psi differ, if any.
inline std::optional<Model> distinguishing_model(const Formula& phi, const Formula& psi, const SatOptions& opts = {})
{
    if (phi.arity() != psi.arity())
        throw InputError("logically_equivalent: arities " + std::to_string(phi.arity()) + " and " +
                         std::to_string(psi.arity()) + " differ");
    const Signature sig = merged_signature(phi, psi);
    return find_model((phi & (!psi)) | ((!phi) & psi), sig, opts);
}

inline bool logically_equivalent(const Formula& phi, const Formula& psi, const SatOptions& opts = {})
{
    return !distinguishing_model(phi, psi, opts).has_value();
}

/// Every source structure with at most max_n vertices is a reduct, i.e.
/// Delta(chi(A)) is satisfiable for each of them.
inline bool is_logically_injective(const QfDefinition& d, int max_n, const SatOptions& opts = {},
                                   const EnumerationGuard& guard = {})
{
    if (max_n < d.source().max_arity())
        throw InputError("is_logically_injective: max_n must be at least the largest source arity");
    for (int n = 0; n <= max_n; ++n)
        for (const auto& a : enumerate_structures(d.source(), n, true, guard))
            if (!find_model(apply(d, characteristic_formula(a)), d.carrier(), opts)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Functor tables

/// Explicit action of a concrete functor on carrier structures with at most
/// `bound` vertices, one canonical representative per isomorphism class.
class FunctorTable {
public:
    struct Entry {
        Structure domain;
        Structure image;
    };

    FunctorTable(Signature carrier, Signature target, int bound, std::vector<Entry> entries)
        : carrier_(std::move(carrier)), target_(std::move(target)), bound_(bound), entries_(std::move(entries))
    {
        for (auto& e : entries_) {
            if (!(e.domain.signature() == carrier_) || !(e.image.signature() == target_))
                throw InputError("functor table entry has the wrong signature");
            if (e.domain.size() != e.image.size())
                throw InputError("functor table entry changes the vertex set");
            if (e.domain.size() > bound_) throw InputError("functor table entry exceeds the domain bound");
            auto canon = canonical_labelling(e.domain);
            if (!(canon.form == e.domain)) {
                e.image = relabel(e.image, canon.labelling);
                e.domain = canon.form;
            }
            if (!index_.emplace(structure_key(e.domain), index_.size()).second)
                throw InputError("functor table lists an isomorphism class twice");
        }
    }

    /// Applies `f` to one representative of every member of `domain` with at
    /// most `bound` vertices (domain must be hereditary).
    static FunctorTable tabulate(const Signature& carrier, const Signature& target, int bound,
                                 const std::function<Structure(const Structure&)>& f,
                                 const std::function<bool(const Structure&)>& domain = {},
                                 const EnumerationGuard& guard = {})
    {
        std::vector<Entry> entries;
        auto keep = domain ? domain : [](const Structure&) { return true; };
        for (int n = 0; n <= bound; ++n)
            for (auto& a : enumerate_hereditary(carrier, n, true, keep, guard)) {
                Structure img = f(a);
                entries.push_back({std::move(a), std::move(img)});
            }
        return {carrier, target, bound, std::move(entries)};
    }

    [[nodiscard]] const Signature& carrier() const { return carrier_; }
    [[nodiscard]] const Signature& target() const { return target_; }
    [[nodiscard]] int bound() const { return bound_; }
    [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }

    /// Image of A transported along its canonical labelling; empty when A is
    /// outside the tabulated domain.
    [[nodiscard]] std::optional<Structure> image_of(const Structure& a) const
    {
        if (!(a.signature() == carrier_)) throw InputError("image_of: signature mismatch");
        if (a.size() > bound_) return std::nullopt;
        auto canon = canonical_labelling(a);
        auto it = index_.find(structure_key(canon.form));
        if (it == index_.end()) return std::nullopt;
        std::vector<int> inverse(static_cast<std::size_t>(a.size()));
        for (int v = 0; v < a.size(); ++v) inverse[static_cast<std::size_t>(canon.labelling[static_cast<std::size_t>(v)])] = v;
        return relabel(entries_[it->second].image, inverse);
    }

    /// Every embedding between domain entries must be an embedding between
    /// their images. Throws InputError naming the first violating pair.
    void check_consistency() const
    {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            for (std::size_t j = 0; j < entries_.size(); ++j) {
                const auto& x = entries_[i];
                const auto& y = entries_[j];
                if (x.domain.size() > y.domain.size()) continue;
                std::optional<std::vector<int>> bad;
                for_each_embedding(x.domain, y.domain, [&](const std::vector<int>& m) {
                    if (!is_embedding(x.image, y.image, m)) {
                        bad = m;
                        return false;
                    }
                    return true;
                });
                if (bad)
                    throw InputError("functor table is not embedding-consistent: entries " + std::to_string(i) +
                                     " and " + std::to_string(j) + " (" + describe(x.domain) + " -> " +
                                     describe(y.domain) + ")");
            }
    }

    /// Every vertex-deleted substructure of an entry is itself tabulated.
    [[nodiscard]] bool domain_is_hereditary() const
    {
        for (const auto& e : entries_)
            for (int v = 0; v < e.domain.size(); ++v) {
                std::vector<int> rest;
                for (int u = 0; u < e.domain.size(); ++u)
                    if (u != v) rest.push_back(u);
                if (!index_.count(structure_key(canonical_form(induced_substructure(e.domain, rest))))) return false;
            }
        return true;
    }

private:
    Signature carrier_;
    Signature target_;
    int bound_;
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Delta(R) is the join, over tabulated B and spanning R-tuples b of B lying
/// in R(F(B)), of chi(B, b). An empty join is bottom_r.
inline QfDefinition synthesize_definition(const FunctorTable& t)
{
    t.check_consistency();
    std::vector<Formula> fs;
    for (std::size_t s = 0; s < t.target().size(); ++s) {
        const int r = t.target()[s].arity;
        std::vector<Formula> parts;
        for (const auto& e : t.entries()) {
            const int m = e.domain.size();
            if (m == 0 || m > r) continue;
            std::vector<int> b(static_cast<std::size_t>(r), 0);
            do {
                std::vector<char> hit(static_cast<std::size_t>(m), 0);
                for (int v : b) hit[static_cast<std::size_t>(v)] = 1;
                if (std::find(hit.begin(), hit.end(), 0) != hit.end()) continue;
                if (!e.image.has(s, b)) continue;
                // Automorphic tuples give the same disjunct.
                Formula chi = characteristic_formula(e.domain, b);
                if (std::find(parts.begin(), parts.end(), chi) == parts.end()) parts.push_back(std::move(chi));
            } while (detail::next_tuple(b, m));
        }
        if (parts.empty())
            fs.push_back(bottom_r(r));
        else if (parts.size() == 1)
            fs.push_back(parts.front());
        else
            fs.push_back(Formula::disj(std::move(parts), r));
    }
    return {t.target(), t.carrier(), std::move(fs), "synth"};
}

/// a in R(F*(A)) iff the substructure induced by the entries of a is in the
/// tabulated domain and the corresponding tuple lies in R of its image.
inline Structure weak_extension(const FunctorTable& t, const Structure& a)
{
    if (!(a.signature() == t.carrier())) throw InputError("weak_extension: signature mismatch");
    if (!t.domain_is_hereditary()) throw InputError("weak_extension: tabulated domain is not hereditary");
    Structure out(t.target(), a.size());
    if (a.size() == 0) return out;
    std::map<std::vector<int>, std::optional<Structure>> cache;
    for (std::size_t s = 0; s < t.target().size(); ++s) {
        const int r = t.target()[s].arity;
        std::vector<int> tup(static_cast<std::size_t>(r), 0);
        std::size_t rank = 0;
        do {
            std::vector<int> support(tup);
            std::sort(support.begin(), support.end());
            support.erase(std::unique(support.begin(), support.end()), support.end());
            auto it = cache.find(support);
            if (it == cache.end()) it = cache.emplace(support, t.image_of(induced_substructure(a, support))).first;
            if (it->second) {
                std::vector<int> local(tup.size());
                for (std::size_t i = 0; i < tup.size(); ++i)
                    local[i] = static_cast<int>(std::lower_bound(support.begin(), support.end(), tup[i]) - support.begin());
                if (it->second->has(s, local)) out.set_rank(s, rank, true);
            }
            ++rank;
        } while (detail::next_tuple(tup, a.size()));
    }
    return out;
}

} // namespace lexpr

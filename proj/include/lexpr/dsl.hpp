#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lexpr/classes.hpp"
#include "lexpr/error.hpp"
#include "lexpr/expressions.hpp"
#include "lexpr/formula.hpp"
#include "lexpr/local_expression.hpp"
#include "lexpr/logic.hpp"

namespace lexpr {

/// Parse or resolution error at a source position (1-based).
class ParseError : public InputError {
public:
    ParseError(int line, int column, const std::string& message)
        : InputError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line), column_(column)
    {
    }
    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct SourceSpan {
    int line = 0;
    int column = 0;
};

enum class DeclKind { Signature, Structure, Formula, Definition, Class, Expression };

inline const char* decl_keyword(DeclKind k)
{
    switch (k) {
    case DeclKind::Signature: return "signature";
    case DeclKind::Structure: return "structure";
    case DeclKind::Formula: return "formula";
    case DeclKind::Definition: return "definition";
    case DeclKind::Class: return "class";
    case DeclKind::Expression: return "expression";
    }
    return "?";
}

struct StructureDecl {
    std::string signature;
    Structure value;
    friend bool operator==(const StructureDecl&, const StructureDecl&) = default;
};

struct FormulaDecl {
    std::string signature;
    Formula value;
    friend bool operator==(const FormulaDecl&, const FormulaDecl&) = default;
};

struct DefinitionDecl {
    std::string target;
    std::string carrier;
    QfDefinition value;
    friend bool operator==(const DefinitionDecl& a, const DefinitionDecl& b)
    {
        return a.target == b.target && a.carrier == b.carrier && a.value == b.value;
    }
};

struct ClassDecl {
    std::string signature;
    std::vector<std::string> bounds;
    std::vector<Formula> axioms;
    friend bool operator==(const ClassDecl&, const ClassDecl&) = default;
};

struct ForbidRef {
    std::string structure;
    bool subgraph = false;
    friend bool operator==(const ForbidRef&, const ForbidRef&) = default;
};

struct ExpressionDecl {
    std::string target, carrier, definition, base;
    std::vector<ForbidRef> forbid;
    std::vector<Encoding> encodings;
    std::string provenance;
    friend bool operator==(const ExpressionDecl&, const ExpressionDecl&) = default;
};

/// Parsed declarations in source order. Names resolve against this document
/// first and then against the prelude it was parsed with.
class DslDocument {
public:
    struct Entry {
        DeclKind kind;
        std::string name;
        SourceSpan span;
    };

    [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }

    [[nodiscard]] bool has(DeclKind k, const std::string& name) const { return find_entry(k, name) != nullptr; }

    [[nodiscard]] const Signature& signature(const std::string& name) const { return lookup(signatures_, name, "signature"); }
    [[nodiscard]] const StructureDecl& structure_decl(const std::string& name) const
    {
        return lookup(structures_, name, "structure");
    }
    [[nodiscard]] const Structure& structure(const std::string& name) const { return structure_decl(name).value; }
    [[nodiscard]] const FormulaDecl& formula_decl(const std::string& name) const { return lookup(formulas_, name, "formula"); }
    [[nodiscard]] const Formula& formula(const std::string& name) const { return formula_decl(name).value; }
    [[nodiscard]] const DefinitionDecl& definition_decl(const std::string& name) const
    {
        return lookup(definitions_, name, "definition");
    }
    [[nodiscard]] const QfDefinition& definition(const std::string& name) const { return definition_decl(name).value; }
    [[nodiscard]] const ClassDecl& class_decl(const std::string& name) const { return lookup(class_decls_, name, "class"); }
    [[nodiscard]] const LocalClass& local_class(const std::string& name) const { return lookup(classes_, name, "class"); }
    [[nodiscard]] const ExpressionDecl& expression_decl(const std::string& name) const
    {
        return lookup(expression_decls_, name, "expression");
    }
    [[nodiscard]] const LocalExpression& expression(const std::string& name) const
    {
        return lookup(expressions_, name, "expression");
    }

    /// Names of own declarations of one kind, in source order.
    [[nodiscard]] std::vector<std::string> names(DeclKind k) const
    {
        std::vector<std::string> out;
        for (const auto& e : entries_)
            if (e.kind == k) out.push_back(e.name);
        return out;
    }

    /// Equality of own declarations (kinds, names, order and content); spans ignored.
    friend bool operator==(const DslDocument& a, const DslDocument& b)
    {
        if (a.entries_.size() != b.entries_.size()) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i) {
            const auto& x = a.entries_[i];
            const auto& y = b.entries_[i];
            if (x.kind != y.kind || x.name != y.name) return false;
            bool same = true;
            switch (x.kind) {
            case DeclKind::Signature: {
                const auto& s = a.signature(x.name);
                const auto& t = b.signature(y.name);
                same = s == t;
                break;
            }
            case DeclKind::Structure: same = a.structure_decl(x.name) == b.structure_decl(y.name); break;
            case DeclKind::Formula: same = a.formula_decl(x.name) == b.formula_decl(y.name); break;
            case DeclKind::Definition: same = a.definition_decl(x.name) == b.definition_decl(y.name); break;
            case DeclKind::Class: same = a.class_decl(x.name) == b.class_decl(y.name); break;
            case DeclKind::Expression:
                same = a.expression_decl(x.name) == b.expression_decl(y.name) && a.expression(x.name) == b.expression(y.name);
                break;
            }
            if (!same) return false;
        }
        return true;
    }

private:
    friend class DslParser;

    const Entry* find_entry(DeclKind k, const std::string& name) const
    {
        for (const auto& e : entries_)
            if (e.kind == k && e.name == name) return &e;
        return nullptr;
    }

    template <class M>
    static const typename M::mapped_type& lookup(const M& m, const std::string& name, const char* what)
    {
        auto it = m.find(name);
        if (it == m.end()) throw InputError(std::string("unknown ") + what + " '" + name + "'");
        return it->second;
    }

    std::vector<Entry> entries_;
    std::map<std::string, Signature> signatures_;
    std::map<std::string, StructureDecl> structures_;
    std::map<std::string, FormulaDecl> formulas_;
    std::map<std::string, DefinitionDecl> definitions_;
    std::map<std::string, ClassDecl> class_decls_;
    std::map<std::string, LocalClass> classes_;
    std::map<std::string, ExpressionDecl> expression_decls_;
    std::map<std::string, LocalExpression> expressions_;
};

namespace detail {

enum class Tok { Ident, Int, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int column = 1;
};

inline std::vector<Token> tokenize(std::string_view src)
{
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    static const char* puncts[] = {"<->", ":=", "<-", "->", "{", "}", "(", ")", "[", "]", ";", ":", ",", "=", "!", "&", "|", "/"};
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
                ++j;
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Int;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (c == '"') {
            advance(1);
            t.kind = Tok::String;
            while (true) {
                if (i >= src.size()) throw ParseError(t.line, t.column, "unterminated string");
                if (src[i] == '"') {
                    advance(1);
                    break;
                }
                if (src[i] == '\\' && i + 1 < src.size()) {
                    advance(1);
                    const char e = src[i];
                    t.text.push_back(e == 'n' ? '\n' : e);
                    advance(1);
                    continue;
                }
                t.text.push_back(src[i]);
                advance(1);
            }
        } else {
            bool matched = false;
            for (const char* p : puncts) {
                const std::string_view pv(p);
                if (src.substr(i, pv.size()) == pv) {
                    t.kind = Tok::Punct;
                    t.text = std::string(pv);
                    advance(pv.size());
                    matched = true;
                    break;
                }
            }
            if (!matched) throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

inline std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace detail

class DslParser {
public:
    DslParser(std::string_view text, const DslDocument* prelude) : toks_(detail::tokenize(text)), prelude_(prelude) {}

    DslDocument document()
    {
        while (peek().kind != detail::Tok::End) declaration();
        return std::move(doc_);
    }

    /// A lone formula in the variables x1, x2, ...; the arity is the largest index used.
    Formula bare_formula(const Signature& sig)
    {
        std::vector<std::string> vars;
        int used = 0;
        for (const auto& t : toks_)
            if (t.kind == detail::Tok::Ident && t.text.size() > 1 && t.text[0] == 'x' &&
                std::all_of(t.text.begin() + 1, t.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
                t.text.size() < 5)
                used = std::max(used, std::stoi(t.text.substr(1)));
        for (int i = 1; i <= used; ++i) vars.push_back("x" + std::to_string(i));
        Formula f = formula(vars, sig);
        if (peek().kind != detail::Tok::End) fail(peek(), "trailing input after the formula");
        return f.with_arity(std::max(used, 1));
    }

    SnpSentence snp()
    {
        SnpSentence s;
        expect_word("snp");
        s.name = ident("sentence name");
        expect_word("over");
        s.target = symbol_list();
        if (is_word("exists")) {
            next();
            s.existential = symbol_list();
        }
        expect_word("forall");
        const auto vars = var_list_until(":");
        expect(":");
        s.arity = static_cast<int>(vars.size());
        std::vector<Symbol> all = s.target.symbols();
        for (const auto& sym : s.existential.symbols()) all.push_back(sym);
        const detail::Token& at = peek();
        Signature sig;
        try {
            sig = Signature(all);
        } catch (const InputError& e) {
            throw ParseError(at.line, at.column, e.what());
        }
        Formula body = formula(vars, sig).with_arity(s.arity);
        expect(";");
        if (peek().kind != detail::Tok::End) fail(peek(), "trailing input after the sentence");
        if (body.kind() == Kind::And) {
            for (const auto& c : body.children()) s.conjuncts.push_back(c.with_arity(s.arity));
        } else if (body.kind() != Kind::True) {
            s.conjuncts.push_back(body);
        }
        return s;
    }

private:
    // --- token helpers ---
    const detail::Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const detail::Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    [[noreturn]] static void fail(const detail::Token& t, const std::string& msg) { throw ParseError(t.line, t.column, msg); }

    bool is(const char* punct) const { return peek().kind == detail::Tok::Punct && peek().text == punct; }
    bool is_word(const char* w) const { return peek().kind == detail::Tok::Ident && peek().text == w; }

    void expect(const char* punct)
    {
        if (!is(punct)) fail(peek(), std::string("expected '") + punct + "'" + found());
        next();
    }

    void expect_word(const char* w)
    {
        if (!is_word(w)) fail(peek(), std::string("expected '") + w + "'" + found());
        next();
    }

    std::string found() const
    {
        const auto& t = peek();
        if (t.kind == detail::Tok::End) return ", found end of input";
        return ", found '" + t.text + "'";
    }

    std::string ident(const char* what)
    {
        if (peek().kind != detail::Tok::Ident) fail(peek(), std::string("expected ") + what + found());
        return next().text;
    }

    int integer(const char* what)
    {
        if (peek().kind != detail::Tok::Int) fail(peek(), std::string("expected ") + what + found());
        const auto& t = next();
        try {
            return std::stoi(t.text);
        } catch (const std::exception&) {
            fail(t, "integer out of range");
        }
    }

    // --- resolution through the prelude ---
    template <class Getter>
    decltype(auto) resolve(const detail::Token& at, const std::string& name, DeclKind kind, Getter get)
    {
        if (doc_.has(kind, name)) return get(doc_);
        if (prelude_ && prelude_->has(kind, name)) return get(*prelude_);
        fail(at, std::string("unknown ") + decl_keyword(kind) + " '" + name + "'");
    }

    const Signature& signature_ref(const detail::Token& at, const std::string& name)
    {
        return resolve(at, name, DeclKind::Signature, [&](const DslDocument& d) -> const Signature& { return d.signature(name); });
    }

    void declare(DeclKind kind, const std::string& name, const detail::Token& at)
    {
        if (doc_.has(kind, name)) fail(at, std::string("duplicate ") + decl_keyword(kind) + " '" + name + "'");
        doc_.entries_.push_back({kind, name, {at.line, at.column}});
    }

    // --- declarations ---
    void declaration()
    {
        const auto& t = peek();
        if (t.kind != detail::Tok::Ident) fail(t, "expected a declaration" + found());
        if (t.text == "signature") return signature_decl();
        if (t.text == "structure") return structure_decl();
        if (t.text == "formula") return formula_decl();
        if (t.text == "definition") return definition_decl();
        if (t.text == "class") return class_decl();
        if (t.text == "expression") return expression_decl();
        fail(t, "unknown declaration '" + t.text + "'");
    }

    void signature_decl()
    {
        next();
        const auto& at = peek();
        const std::string name = ident("signature name");
        expect("{");
        std::vector<Symbol> syms;
        while (!is("}")) {
            expect_word("rel");
            const auto& st = peek();
            std::string s = ident("symbol name");
            expect(":");
            const auto& ar = peek();
            const int k = integer("arity");
            if (k < 1) fail(ar, "arity must be positive");
            for (const auto& other : syms)
                if (other.name == s) fail(st, "duplicate symbol '" + s + "'");
            syms.push_back({s, k});
            expect(";");
        }
        expect("}");
        declare(DeclKind::Signature, name, at);
        doc_.signatures_[name] = Signature(syms, name);
    }

    Tuple tuple(int arity, int n)
    {
        const auto& at = peek();
        expect("(");
        Tuple t;
        while (true) {
            const auto& vt = peek();
            const int v = integer("vertex");
            if (v >= n) fail(vt, "vertex " + std::to_string(v) + " out of range 0.." + std::to_string(n - 1));
            t.push_back(v);
            if (is(",")) {
                next();
                continue;
            }
            break;
        }
        expect(")");
        if (static_cast<int>(t.size()) != arity)
            fail(at, "tuple has " + std::to_string(t.size()) + " entries, symbol has arity " + std::to_string(arity));
        return t;
    }

    void structure_decl()
    {
        next();
        const auto& at = peek();
        const std::string name = ident("structure name");
        expect_word("over");
        const auto& st = peek();
        const std::string signame = ident("signature name");
        const Signature sig = signature_ref(st, signame);
        expect("{");
        expect_word("vertices");
        const int n = integer("vertex count");
        expect(";");
        Structure s(sig, n);
        std::set<std::string> seen;
        while (!is("}")) {
            const auto& rt = peek();
            const std::string rel = ident("relation name");
            const auto idx = sig.find(rel);
            if (!idx) fail(rt, "symbol '" + rel + "' is not in signature " + signame);
            if (!seen.insert(rel).second) fail(rt, "relation '" + rel + "' given twice");
            expect("=");
            bool sym = false;
            if (is_word("sym")) {
                next();
                sym = true;
            }
            expect("{");
            while (!is("}")) {
                Tuple t = tuple(sig[*idx].arity, n);
                s.set(*idx, t, true);
                if (sym) {
                    std::reverse(t.begin(), t.end());
                    s.set(*idx, t, true);
                }
            }
            expect("}");
            expect(";");
        }
        expect("}");
        declare(DeclKind::Structure, name, at);
        doc_.structures_[name] = {signame, s};
    }

    std::vector<std::string> var_list_until(const char* stop)
    {
        std::vector<std::string> vars;
        while (!is(stop)) {
            const auto& vt = peek();
            std::string v = ident("variable");
            if (std::find(vars.begin(), vars.end(), v) != vars.end()) fail(vt, "duplicate variable '" + v + "'");
            vars.push_back(v);
            if (is(",")) next();
        }
        return vars;
    }

    void formula_decl()
    {
        next();
        const auto& at = peek();
        const std::string name = ident("formula name");
        expect("(");
        const auto vars = var_list_until(")");
        expect(")");
        expect_word("over");
        const auto& st = peek();
        const std::string signame = ident("signature name");
        const Signature sig = signature_ref(st, signame);
        expect(":=");
        Formula f = formula(vars, sig).with_arity(static_cast<int>(vars.size()));
        expect(";");
        declare(DeclKind::Formula, name, at);
        doc_.formulas_[name] = {signame, f};
    }

    void definition_decl()
    {
        next();
        const auto& at = peek();
        const std::string name = ident("definition name");
        expect(":");
        const auto& tt = peek();
        const std::string target = ident("target signature");
        expect("<-");
        const auto& ct = peek();
        const std::string carrier = ident("carrier signature");
        const Signature tsig = signature_ref(tt, target);
        const Signature csig = signature_ref(ct, carrier);
        expect("{");
        std::map<std::string, Formula> parts;
        while (!is("}")) {
            const auto& rt = peek();
            const std::string rel = ident("target symbol");
            const auto idx = tsig.find(rel);
            if (!idx) fail(rt, "symbol '" + rel + "' is not in signature " + target);
            if (parts.count(rel)) fail(rt, "symbol '" + rel + "' defined twice");
            expect("(");
            const auto vars = var_list_until(")");
            expect(")");
            if (static_cast<int>(vars.size()) != tsig[*idx].arity)
                fail(rt, "symbol '" + rel + "' has arity " + std::to_string(tsig[*idx].arity));
            expect(":=");
            parts[rel] = formula(vars, csig).with_arity(tsig[*idx].arity);
            expect(";");
        }
        const auto& close = peek();
        expect("}");
        std::vector<Formula> formulas;
        for (const auto& s : tsig.symbols()) {
            auto it = parts.find(s.name);
            if (it == parts.end()) fail(close, "definition " + name + " misses symbol '" + s.name + "'");
            formulas.push_back(it->second);
        }
        declare(DeclKind::Definition, name, at);
        doc_.definitions_[name] = {target, carrier, QfDefinition(tsig, csig, formulas, name)};
    }

    void class_decl()
    {
        next();
        const auto& at = peek();
        const std::string name = ident("class name");
        expect_word("over");
        const auto& st = peek();
        const std::string signame = ident("signature name");
        const Signature sig = signature_ref(st, signame);
        expect("{");
        ClassDecl decl;
        decl.signature = signame;
        std::vector<Structure> bounds;
        while (!is("}")) {
            if (is_word("bound")) {
                next();
                const auto& bt = peek();
                const std::string b = ident("structure name");
                const Structure& s = structure_ref(bt, b);
                if (!sig.contains_all(s.signature())) fail(bt, "bound '" + b + "' uses symbols outside " + signame);
                decl.bounds.push_back(b);
                bounds.push_back(s);
                expect(";");
            } else if (is_word("axiom")) {
                next();
                expect_word("forall");
                const auto vars = var_list_until(":");
                expect(":");
                decl.axioms.push_back(formula(vars, sig).with_arity(static_cast<int>(vars.size())));
                expect(";");
            } else {
                fail(peek(), "expected 'bound' or 'axiom'" + found());
            }
        }
        expect("}");
        std::vector<UniversalSentence> axioms;
        for (const auto& f : decl.axioms) axioms.push_back({f});
        LocalClass c;
        if (decl.axioms.empty()) c = LocalClass::from_bounds(sig, bounds, name);
        else if (decl.bounds.empty()) c = LocalClass::from_axioms(sig, axioms, name);
        else c = LocalClass::from_both(sig, bounds, axioms, name, false);
        declare(DeclKind::Class, name, at);
        doc_.class_decls_[name] = decl;
        doc_.classes_[name] = c;
    }

    const Structure& structure_ref(const detail::Token& at, const std::string& name)
    {
        return resolve(at, name, DeclKind::Structure, [&](const DslDocument& d) -> const Structure& { return d.structure(name); });
    }

    void expression_decl()
    {
        next();
        const auto& at = peek();
        const std::string name = ident("expression name");
        expect("{");
        ExpressionDecl d;
        auto field = [&](const char* key, std::string& out) -> const detail::Token& {
            expect_word(key);
            const auto& t = peek();
            out = ident("name");
            expect(";");
            return t;
        };
        const auto& tt = field("target", d.target);
        const auto& ct = field("carrier", d.carrier);
        const auto& dt = field("definition", d.definition);
        const auto& bt = field("base", d.base);
        const Signature tsig = signature_ref(tt, d.target);
        const Signature csig = signature_ref(ct, d.carrier);
        const QfDefinition def = resolve(dt, d.definition, DeclKind::Definition,
                                         [&](const DslDocument& doc) -> const QfDefinition& { return doc.definition(d.definition); });
        const LocalClass base = resolve(bt, d.base, DeclKind::Class,
                                        [&](const DslDocument& doc) -> const LocalClass& { return doc.local_class(d.base); });
        if (!(def.source() == tsig)) fail(dt, "definition " + d.definition + " is not over target " + d.target);
        if (!(def.carrier() == csig)) fail(dt, "definition " + d.definition + " does not define from carrier " + d.carrier);
        if (!(base.signature() == csig)) fail(bt, "class " + d.base + " is not over carrier " + d.carrier);
        expect_word("forbid");
        expect("{");
        std::vector<Structure> forbidden;
        while (!is("}")) {
            ForbidRef ref;
            if (is_word("subgraph")) {
                next();
                ref.subgraph = true;
            }
            const auto& st = peek();
            ref.structure = ident("structure name");
            const Structure& s = structure_ref(st, ref.structure);
            if (!csig.contains_all(s.signature())) fail(st, "structure '" + ref.structure + "' uses symbols outside " + d.carrier);
            if (ref.subgraph) {
                if (!(s.signature() == csig)) fail(st, "a subgraph pattern must be over the full carrier");
                try {
                    for (auto& c : subgraph_closure(s, base)) forbidden.push_back(std::move(c));
                } catch (const ResourceError& e) {
                    fail(st, e.what());
                }
            } else {
                forbidden.push_back(s);
            }
            d.forbid.push_back(ref);
        }
        expect("}");
        while (!is("}")) {
            if (is_word("encode")) {
                next();
                const auto& st = peek();
                Encoding enc;
                enc.symbol = ident("symbol");
                const auto& kt = peek();
                const std::string kind = ident("encoding kind");
                try {
                    enc.kind = parse_encoding_keyword(kind);
                } catch (const InputError& e) {
                    fail(kt, e.what());
                }
                if (!csig.find(enc.symbol)) fail(st, "encoded symbol '" + enc.symbol + "' is not in " + d.carrier);
                d.encodings.push_back(enc);
                expect(";");
            } else if (is_word("provenance")) {
                next();
                if (peek().kind != detail::Tok::String) fail(peek(), "expected a string" + found());
                d.provenance = next().text;
                expect(";");
            } else {
                fail(peek(), "expected 'encode', 'provenance' or '}'" + found());
            }
        }
        expect("}");
        declare(DeclKind::Expression, name, at);
        try {
            doc_.expressions_[name] = LocalExpression(name, def, base, std::move(forbidden), d.encodings, d.provenance);
        } catch (const InputError& e) {
            fail(at, e.what());
        }
        doc_.expression_decls_[name] = d;
    }

    // --- formulas: <-> < -> < | < & < ! ---
    Formula formula(const std::vector<std::string>& vars, const Signature& sig) { return parse_iff(vars, sig); }

    Formula parse_iff(const std::vector<std::string>& vars, const Signature& sig)
    {
        Formula a = parse_implies(vars, sig);
        while (is("<->")) {
            next();
            Formula b = parse_implies(vars, sig);
            a = iff(a, b);
        }
        return a;
    }

    Formula parse_implies(const std::vector<std::string>& vars, const Signature& sig)
    {
        Formula a = parse_or(vars, sig);
        if (is("->")) {
            next();
            Formula b = parse_implies(vars, sig);
            return implies(a, b);
        }
        return a;
    }

    Formula parse_or(const std::vector<std::string>& vars, const Signature& sig)
    {
        std::vector<Formula> parts{parse_and(vars, sig)};
        while (is("|")) {
            next();
            parts.push_back(parse_and(vars, sig));
        }
        return parts.size() == 1 ? parts[0] : Formula::disj(std::move(parts));
    }

    Formula parse_and(const std::vector<std::string>& vars, const Signature& sig)
    {
        std::vector<Formula> parts{parse_unary(vars, sig)};
        while (is("&")) {
            next();
            parts.push_back(parse_unary(vars, sig));
        }
        return parts.size() == 1 ? parts[0] : Formula::conj(std::move(parts));
    }

    int var_index(const std::vector<std::string>& vars, const detail::Token& t)
    {
        auto it = std::find(vars.begin(), vars.end(), t.text);
        if (it == vars.end()) fail(t, "undeclared variable '" + t.text + "'");
        return static_cast<int>(it - vars.begin());
    }

    Formula parse_unary(const std::vector<std::string>& vars, const Signature& sig)
    {
        if (is("!")) {
            next();
            return !parse_unary(vars, sig);
        }
        if (is("(")) {
            next();
            Formula f = formula(vars, sig);
            expect(")");
            return f;
        }
        const auto& t = peek();
        if (t.kind != detail::Tok::Ident) fail(t, "expected a formula" + found());
        if (t.text == "true" && !(peek(1).kind == detail::Tok::Punct && peek(1).text == "(")) {
            next();
            return Formula::top();
        }
        if (t.text == "false" && !(peek(1).kind == detail::Tok::Punct && peek(1).text == "(")) {
            next();
            return Formula::bottom();
        }
        next();
        if (is("=")) {
            next();
            const auto& r = peek();
            ident("variable");
            return Formula::eq(var_index(vars, t), var_index(vars, r));
        }
        if (!is("(")) fail(t, "expected '(' or '=' after '" + t.text + "'");
        next();
        std::vector<int> args;
        while (!is(")")) {
            const auto& vt = peek();
            ident("variable");
            args.push_back(var_index(vars, vt));
            if (is(",")) next();
            else if (!is(")")) fail(peek(), "expected ',' or ')'" + found());
        }
        expect(")");
        const auto idx = sig.find(t.text);
        if (!idx) fail(t, "unknown symbol '" + t.text + "'" + (sig.name().empty() ? "" : " in signature " + sig.name()));
        if (static_cast<int>(args.size()) != sig[*idx].arity)
            fail(t, "symbol '" + t.text + "' has arity " + std::to_string(sig[*idx].arity) + ", used with " +
                        std::to_string(args.size()) + " arguments");
        return Formula::atom(t.text, args);
    }

    Signature symbol_list()
    {
        std::vector<Symbol> syms;
        while (peek().kind == detail::Tok::Ident && peek(1).kind == detail::Tok::Punct && peek(1).text == "/") {
            const auto& st = peek();
            std::string s = next().text;
            next();
            const int k = integer("arity");
            for (const auto& o : syms)
                if (o.name == s) fail(st, "duplicate symbol '" + s + "'");
            if (k < 1) fail(st, "arity must be positive");
            syms.push_back({s, k});
        }
        return Signature(syms);
    }

    std::vector<detail::Token> toks_;
    std::size_t pos_ = 0;
    const DslDocument* prelude_ = nullptr;
    DslDocument doc_;
};

/// Parses a document; names missing from it resolve against `prelude`.
inline DslDocument parse(std::string_view text, const DslDocument* prelude = nullptr)
{
    return DslParser(text, prelude).document();
}

/// Parses a formula over `sig` written with the variables x1, x2, ...
inline Formula parse_formula(std::string_view text, const Signature& sig) { return DslParser(text, nullptr).bare_formula(sig); }

/// Signature of the relation symbols applied in a formula text, arities read
/// from the first use.
inline Signature infer_signature(std::string_view text)
{
    const auto toks = detail::tokenize(text);
    std::vector<Symbol> syms;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].kind != detail::Tok::Ident || toks[i + 1].kind != detail::Tok::Punct || toks[i + 1].text != "(") continue;
        int arity = 0;
        for (std::size_t j = i + 2; j < toks.size() && !(toks[j].kind == detail::Tok::Punct && toks[j].text == ")"); ++j)
            if (toks[j].kind == detail::Tok::Ident) ++arity;
        if (std::none_of(syms.begin(), syms.end(), [&](const Symbol& s) { return s.name == toks[i].text; }))
            syms.push_back({toks[i].text, std::max(arity, 1)});
    }
    return Signature(syms);
}

inline SnpSentence parse_snp(std::string_view text)
{
    DslParser p(text, nullptr);
    return p.snp();
}

namespace detail {

inline std::string var_names(int k)
{
    std::string out;
    for (int i = 0; i < k; ++i) out += (i ? ", x" : "x") + std::to_string(i + 1);
    return out;
}

inline void print_structure_body(std::ostream& out, const Structure& s)
{
    out << "  vertices " << s.size() << ";\n";
    for (std::size_t i = 0; i < s.signature().size(); ++i) {
        const auto tuples = s.tuples(i);
        if (tuples.empty()) continue;
        out << "  " << s.signature()[i].name << " = {";
        for (const auto& t : tuples) {
            out << " (";
            for (std::size_t j = 0; j < t.size(); ++j) out << (j ? "," : "") << t[j];
            out << ")";
        }
        out << " };\n";
    }
}

} // namespace detail

inline std::string print_structure(const std::string& name, const std::string& signature, const Structure& s)
{
    std::ostringstream out;
    out << "structure " << name << " over " << signature << " {\n";
    detail::print_structure_body(out, s);
    out << "}\n";
    return out.str();
}

/// Canonical text of a document's own declarations; parse(print(d)) == d.
inline std::string print(const DslDocument& doc)
{
    std::ostringstream out;
    bool first = true;
    for (const auto& e : doc.entries()) {
        if (!first) out << '\n';
        first = false;
        switch (e.kind) {
        case DeclKind::Signature: {
            out << "signature " << e.name << " {";
            for (const auto& s : doc.signature(e.name).symbols()) out << " rel " << s.name << ": " << s.arity << ";";
            out << " }\n";
            break;
        }
        case DeclKind::Structure: {
            const auto& d = doc.structure_decl(e.name);
            out << print_structure(e.name, d.signature, d.value);
            break;
        }
        case DeclKind::Formula: {
            const auto& d = doc.formula_decl(e.name);
            out << "formula " << e.name << "(" << detail::var_names(d.value.arity()) << ") over " << d.signature
                << " := " << to_string(d.value) << ";\n";
            break;
        }
        case DeclKind::Definition: {
            const auto& d = doc.definition_decl(e.name);
            out << "definition " << e.name << ": " << d.target << " <- " << d.carrier << " {\n";
            for (std::size_t i = 0; i < d.value.source().size(); ++i) {
                const auto& s = d.value.source()[i];
                out << "  " << s.name << "(" << detail::var_names(s.arity) << ") := " << to_string(d.value[i]) << ";\n";
            }
            out << "}\n";
            break;
        }
        case DeclKind::Class: {
            const auto& d = doc.class_decl(e.name);
            out << "class " << e.name << " over " << d.signature << " {\n";
            for (const auto& b : d.bounds) out << "  bound " << b << ";\n";
            for (const auto& a : d.axioms) {
                std::string vars;
                for (int i = 0; i < a.arity(); ++i) vars += " x" + std::to_string(i + 1);
                out << "  axiom forall" << vars << " : " << to_string(a) << ";\n";
            }
            out << "}\n";
            break;
        }
        case DeclKind::Expression: {
            const auto& d = doc.expression_decl(e.name);
            out << "expression " << e.name << " {\n"
                << "  target " << d.target << ";\n"
                << "  carrier " << d.carrier << ";\n"
                << "  definition " << d.definition << ";\n"
                << "  base " << d.base << ";\n"
                << "  forbid {";
            for (const auto& f : d.forbid) out << (f.subgraph ? " subgraph " : " ") << f.structure;
            out << " }\n";
            for (const auto& enc : d.encodings) out << "  encode " << enc.symbol << " " << encoding_keyword(enc.kind) << ";\n";
            if (!d.provenance.empty()) out << "  provenance " << detail::quote(d.provenance) << ";\n";
            out << "}\n";
            break;
        }
        }
    }
    return out.str();
}

/// A self-contained document for one expression: signatures, definition,
/// base class, bounds and forbidden structures, with generated names.
inline std::string print_expression(const LocalExpression& e)
{
    std::ostringstream out;
    auto sig_text = [&](const std::string& name, const Signature& s) {
        out << "signature " << name << " {";
        for (const auto& sym : s.symbols()) out << " rel " << sym.name << ": " << sym.arity << ";";
        out << " }\n";
    };
    const std::string name = detail::identifier(e.name());
    const std::string p = name + "_";
    sig_text(p + "target", e.target());
    sig_text(p + "carrier", e.carrier());
    std::map<std::string, std::string> sub_names; // key(signature) -> name
    auto sub_signature = [&](const Signature& s) -> std::string {
        if (s == e.carrier()) return p + "carrier";
        std::string key;
        for (const auto& sym : s.symbols()) key += sym.name + "/" + std::to_string(sym.arity) + ";";
        auto it = sub_names.find(key);
        if (it != sub_names.end()) return it->second;
        const std::string name = p + "sub" + std::to_string(sub_names.size() + 1);
        sub_names[key] = name;
        sig_text(name, s);
        return name;
    };
    out << "definition " << p << "def: " << p << "target <- " << p << "carrier {\n";
    for (std::size_t i = 0; i < e.target().size(); ++i) {
        const auto& s = e.target()[i];
        out << "  " << s.name << "(" << detail::var_names(s.arity) << ") := " << to_string(e.definition()[i]) << ";\n";
    }
    out << "}\n";
    std::vector<std::string> bound_names;
    if (e.base().bounds()) {
        for (std::size_t i = 0; i < e.base().bounds()->size(); ++i) {
            const auto& b = (*e.base().bounds())[i];
            const std::string n = p + "bound" + std::to_string(i + 1);
            out << print_structure(n, sub_signature(b.signature()), b);
            bound_names.push_back(n);
        }
    }
    out << "class " << p << "base over " << p << "carrier {\n";
    for (const auto& b : bound_names) out << "  bound " << b << ";\n";
    if (e.base().axioms())
        for (const auto& a : *e.base().axioms()) {
            std::string vars;
            for (int i = 0; i < a.body.arity(); ++i) vars += " x" + std::to_string(i + 1);
            out << "  axiom forall" << vars << " : " << to_string(a.body) << ";\n";
        }
    out << "}\n";
    std::vector<std::string> forbid_names;
    for (std::size_t i = 0; i < e.forbidden().size(); ++i) {
        const auto& f = e.forbidden()[i];
        const std::string n = p + "f" + std::to_string(i + 1);
        out << print_structure(n, sub_signature(f.signature()), f);
        forbid_names.push_back(n);
    }
    out << "expression " << name << " {\n  target " << p << "target;\n  carrier " << p << "carrier;\n  definition " << p
        << "def;\n  base " << p << "base;\n  forbid {";
    for (const auto& n : forbid_names) out << " " << n;
    out << " }\n";
    for (const auto& enc : e.encodings()) out << "  encode " << enc.symbol << " " << encoding_keyword(enc.kind) << ";\n";
    if (!e.provenance().empty()) out << "  provenance " << detail::quote(e.provenance()) << ";\n";
    out << "}\n";
    return out.str();
}

} // namespace lexpr

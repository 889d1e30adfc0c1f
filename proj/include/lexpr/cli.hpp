#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lexpr/catalog.hpp"
#include "lexpr/classes.hpp"
#include "lexpr/dsl.hpp"
#include "lexpr/expressions.hpp"
#include "lexpr/graph_io.hpp"

// Command-line front end. Exit codes: 0 member/true, 1 non-member/false,
// 2 unknown (budget or guard), 3 input error.
namespace lexpr::cli {

enum Exit : int { kTrue = 0, kFalse = 1, kUnknown = 2, kInputError = 3 };

struct RunConfig {
    std::string command;    // decide verify bounds equiv synth snp enumerate catalog
    std::string subcommand; // catalog: list | show
    std::string expr;
    std::string graph;
    std::string g6;
    std::string cert;
    std::string f, g, over;
    std::string table, carrier, target, builtin;
    std::string klass;
    std::string name;
    int max_n = 5;
    std::uint64_t max_nodes = 0;
    double max_seconds = 0;
    unsigned threads = 0; // 0: one thread, or all cores when not deterministic
    bool stats = false;
    bool machine = false;
    bool deterministic = true;
    bool all = false;
};

namespace detail {

inline bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// A catalog name, or FILE.lex / FILE.lex:NAME parsed against the catalog prelude.
inline LocalExpression load_expression(const std::string& spec)
{
    if (spec.empty()) throw InputError("missing --expr");
    const auto lex = spec.find(".lex");
    if (lex == std::string::npos) return catalog::builtin(spec).expression;
    const std::string path = spec.substr(0, lex + 4);
    std::string name = lex + 4 < spec.size() && spec[lex + 4] == ':' ? spec.substr(lex + 5) : "";
    const DslDocument doc = parse(read_file(path), &catalog::prelude());
    const auto names = doc.names(DeclKind::Expression);
    if (name.empty()) {
        if (names.size() != 1)
            throw InputError(path + " declares " + std::to_string(names.size()) + " expressions; use " + path + ":NAME");
        name = names.front();
    }
    return doc.expression(name);
}

/// Graphs from a .g6/.graph6 or .edgelist/.el file, or from an inline graph6 string.
inline std::vector<Structure> load_graphs(const RunConfig& cfg)
{
    if (!cfg.g6.empty() && !cfg.graph.empty()) throw InputError("give either --graph or --g6, not both");
    if (!cfg.g6.empty()) return {from_graph6(cfg.g6)};
    if (cfg.graph.empty()) throw InputError("missing --graph");
    const std::string& p = cfg.graph;
    const bool g6 = ends_with(p, ".g6") || ends_with(p, ".graph6");
    const bool el = ends_with(p, ".edgelist") || ends_with(p, ".el");
    if (g6 == el) throw InputError("cannot tell the format of '" + p + "'; use a .g6 or .edgelist extension");
    std::ifstream in(p);
    if (!in) throw InputError("cannot open '" + p + "'");
    if (el) return {read_edgelist(in)};
    auto gs = read_graph6(in);
    if (gs.empty()) throw InputError("'" + p + "' contains no graph");
    return gs;
}

inline SolverOptions solver_options(const RunConfig& cfg)
{
    SolverOptions o;
    o.max_nodes = cfg.max_nodes;
    o.max_seconds = cfg.max_seconds;
    o.threads = cfg.threads;
    if (o.threads == 0) o.threads = cfg.deterministic ? 1U : std::max(1U, std::thread::hardware_concurrency());
    return o;
}

/// Certificate file: a carrier signature plus one structure.
inline std::string certificate_text(const Structure& x)
{
    std::ostringstream out;
    out << "signature cert_carrier {";
    for (const auto& s : x.signature().symbols()) out << " rel " << s.name << ": " << s.arity << ";";
    out << " }\n" << print_structure("certificate", "cert_carrier", x);
    return out.str();
}

inline Structure read_certificate(const std::string& path)
{
    const DslDocument doc = parse(read_file(path));
    const auto names = doc.names(DeclKind::Structure);
    if (names.size() != 1) throw InputError(path + ": expected exactly one structure");
    return doc.structure(names.front());
}

class Printer {
public:
    Printer(std::ostream& out, bool machine) : out_(out), machine_(machine) {}

    void field(const std::string& key, const std::string& value)
    {
        if (machine_) out_ << key << '=' << value << '\n';
        else out_ << key << ": " << value << '\n';
    }

    void verdict(const std::string& v)
    {
        if (machine_) out_ << "result=" << v << '\n';
        else out_ << v << '\n';
    }

    void stats(const SearchStats& s)
    {
        std::istringstream in(s.to_text());
        std::string key, value;
        if (!machine_) out_ << "stats:\n";
        while (in >> key >> value) {
            if (machine_) out_ << "stats." << key << '=' << value << '\n';
            else out_ << "  " << key << ' ' << value << '\n';
        }
    }

    void block(const std::string& text)
    {
        if (!machine_) out_ << text;
    }

private:
    std::ostream& out_;
    bool machine_;
};

inline int cmd_decide(const RunConfig& cfg, std::ostream& out)
{
    const LocalExpression e = load_expression(cfg.expr);
    const auto graphs = load_graphs(cfg);
    if (graphs.size() > 1 && !cfg.all)
        throw InputError("'" + cfg.graph + "' holds " + std::to_string(graphs.size()) + " graphs; pass --all");
    if (graphs.size() > 1 && !cfg.cert.empty()) throw InputError("--cert needs a single input graph");
    Printer p(out, cfg.machine);
    DecideOptions opts;
    opts.solver = solver_options(cfg);
    int worst = kTrue;
    for (const auto& g : graphs) {
        std::string verdict;
        std::optional<DecideResult> r;
        std::string reason;
        try {
            r = decide(e, g, opts);
            verdict = r->member() ? "member" : "non-member";
        } catch (const ResourceError& ex) {
            verdict = "unknown";
            reason = ex.what();
        }
        if (graphs.size() > 1) {
            if (cfg.machine) out << "graph=" << to_graph6(g) << " result=" << verdict << '\n';
            else out << to_graph6(g) << ' ' << verdict << '\n';
        } else {
            p.verdict(verdict);
            if (!reason.empty()) p.field("reason", reason);
            if (r && r->member()) {
                if (!cfg.cert.empty()) {
                    std::ofstream c(cfg.cert);
                    if (!c) throw InputError("cannot write '" + cfg.cert + "'");
                    c << certificate_text(*r->certificate);
                    p.field("certificate", cfg.cert);
                } else {
                    p.block(certificate_text(*r->certificate));
                }
            }
            if (cfg.stats && r) p.stats(r->stats);
        }
        const int code = verdict == "member" ? kTrue : verdict == "non-member" ? kFalse : kUnknown;
        if (code == kFalse || (code == kUnknown && worst == kTrue)) worst = code;
    }
    return worst;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out)
{
    const LocalExpression e = load_expression(cfg.expr);
    const auto graphs = load_graphs(cfg);
    if (graphs.size() != 1) throw InputError("verify needs a single input graph");
    if (cfg.cert.empty()) throw InputError("missing --cert");
    const Structure x = read_certificate(cfg.cert).with_signature(e.carrier());
    const std::string why = verification_failure(e, graphs.front(), x);
    Printer p(out, cfg.machine);
    p.verdict(why.empty() ? "valid" : "invalid");
    if (!why.empty()) p.field("reason", why);
    return why.empty() ? kTrue : kFalse;
}

inline int cmd_bounds(const RunConfig& cfg, std::ostream& out)
{
    MiningReport r;
    if (!cfg.klass.empty()) {
        const LocalClass& c = catalog::base_class(cfg.klass);
        r = minimal_bounds_relative([&](const Structure& a) { return c.contains(a); },
                                    LocalClass::everything(c.signature()), cfg.max_n);
    } else {
        const LocalExpression e = load_expression(cfg.expr);
        if (!(e.target() == graph_signature())) throw InputError("bounds: the expression must describe graphs");
        DecideOptions opts;
        opts.solver = solver_options(cfg);
        r = minimal_bounds_relative([&](const Structure& g) { return decide(e, g, opts).member(); },
                                    LocalClass::simple_graphs(), cfg.max_n);
    }
    for (const auto& b : r.bounds) {
        if (cfg.machine) {
            out << "bound=" << (cfg.klass.empty() ? to_graph6(b) : describe(b)) << '\n';
        } else if (cfg.klass.empty()) {
            out << to_graph6(b) << "  n=" << b.size() << "  edges:";
            for (auto [u, v] : edges_of(b)) out << ' ' << u << '-' << v;
            out << '\n';
        } else {
            out << describe(b) << '\n';
        }
    }
    for (const auto& l : r.levels)
        if (cfg.machine) out << "level=" << l.n << " examined=" << l.examined << " members=" << l.members << " bounds=" << l.bounds << '\n';
        else out << "# n=" << l.n << " examined " << l.examined << ", members " << l.members << ", bounds " << l.bounds << '\n';
    return kTrue;
}

/// Equivalence of two formulas on every member of a class, by enumerating
/// members with at most as many vertices as variables.
inline std::optional<Model> class_disagreement(const Formula& a, const Formula& b, const LocalClass& c)
{
    const int k = std::max(a.arity(), b.arity());
    for (int n = 1; n <= k; ++n)
        for (const auto& s : enumerate_members(c, n)) {
            std::vector<int> t(static_cast<std::size_t>(k), 0);
            do {
                if (evaluate(a.with_arity(k), s, t) != evaluate(b.with_arity(k), s, t)) return Model{s, t};
            } while (lexpr::detail::next_tuple(t, n));
        }
    return std::nullopt;
}

inline int cmd_equiv(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.f.empty() || cfg.g.empty()) throw InputError("equiv needs --f and --g");
    std::string over = cfg.over;
    if (over == "digraph") over = "DI";
    if (over == "graph") over = "graphs";
    const DslDocument& pre = catalog::prelude();
    std::optional<LocalClass> cls;
    Signature sig;
    if (over.empty()) {
        std::vector<Symbol> syms = infer_signature(cfg.f).symbols();
        const Signature second = infer_signature(cfg.g);
        for (const auto& s : second.symbols())
            if (std::none_of(syms.begin(), syms.end(), [&](const Symbol& t) { return t.name == s.name; })) syms.push_back(s);
        sig = Signature(syms);
    } else if (pre.has(DeclKind::Class, over)) {
        cls = pre.local_class(over);
        sig = cls->signature();
    } else {
        sig = pre.signature(over);
    }
    const int k = std::max(parse_formula(cfg.f, sig).arity(), parse_formula(cfg.g, sig).arity());
    const Formula a = parse_formula(cfg.f, sig).with_arity(k), b = parse_formula(cfg.g, sig).with_arity(k);
    const auto witness = cls ? class_disagreement(a, b, *cls) : distinguishing_model(a, b);
    Printer p(out, cfg.machine);
    p.verdict(witness ? "different" : "equivalent");
    if (witness) {
        std::string tuple;
        for (std::size_t i = 0; i < witness->tuple.size(); ++i)
            tuple += (i ? "," : "") + std::to_string(witness->tuple[i]);
        p.field("witness", describe(witness->structure));
        p.field("tuple", "(" + tuple + ")");
    }
    return witness ? kFalse : kTrue;
}

inline std::string definition_text(const std::string& name, const std::string& target, const std::string& carrier,
                                   const QfDefinition& d)
{
    std::ostringstream out;
    out << "definition " << name << ": " << target << " <- " << carrier << " {\n";
    for (std::size_t i = 0; i < d.source().size(); ++i) {
        const auto& s = d.source()[i];
        out << "  " << s.name << "(" << lexpr::detail::var_names(s.arity) << ") := " << to_string(d[i]) << ";\n";
    }
    out << "}\n";
    return out.str();
}

inline int cmd_synth(const RunConfig& cfg, std::ostream& out)
{
    std::optional<FunctorTable> table;
    std::string carrier_name, target_name;
    if (!cfg.builtin.empty()) {
        const Signature di = catalog::signature("DI");
        const int bound = cfg.max_n;
        QfDefinition d;
        if (cfg.builtin == "symmetric") d = symmetric_definition(di);
        else if (cfg.builtin == "complement") d = complement_definition(di);
        else if (cfg.builtin == "identity") d = identity_definition(di);
        else if (cfg.builtin == "two-graph") d = two_graph_definition();
        else throw InputError("unknown builtin functor '" + cfg.builtin + "' (symmetric, complement, identity, two-graph)");
        table = FunctorTable::tabulate(d.carrier(), d.source(), bound, [&](const Structure& a) { return reduct(d, a); });
        carrier_name = "C";
        target_name = "T";
    } else {
        if (cfg.table.empty() || cfg.carrier.empty() || cfg.target.empty())
            throw InputError("synth needs --builtin, or --table with --carrier and --target");
        const DslDocument doc = parse(read_file(cfg.table), &catalog::prelude());
        const Signature& csig = doc.has(DeclKind::Signature, cfg.carrier) ? doc.signature(cfg.carrier)
                                                                          : catalog::signature(cfg.carrier);
        const Signature& tsig = doc.has(DeclKind::Signature, cfg.target) ? doc.signature(cfg.target)
                                                                         : catalog::signature(cfg.target);
        std::vector<FunctorTable::Entry> entries;
        int bound = 0;
        for (const auto& n : doc.names(DeclKind::Structure)) {
            if (!ends_with(n, "_in")) continue;
            const std::string stem = n.substr(0, n.size() - 3);
            if (!doc.has(DeclKind::Structure, stem + "_out")) throw InputError("table: " + n + " has no " + stem + "_out");
            entries.push_back({doc.structure(n).with_signature(csig), doc.structure(stem + "_out").with_signature(tsig)});
            bound = std::max(bound, doc.structure(n).size());
        }
        if (entries.empty()) throw InputError("table: no NAME_in / NAME_out structure pairs");
        table.emplace(csig, tsig, bound, std::move(entries));
        carrier_name = cfg.carrier;
        target_name = cfg.target;
    }
    const QfDefinition d = synthesize_definition(*table);
    out << definition_text(cfg.name.empty() ? "synthesized" : cfg.name, target_name, carrier_name, d);
    return kTrue;
}

inline int cmd_snp(const RunConfig& cfg, std::ostream& out)
{
    out << render_snp(load_expression(cfg.expr));
    return kTrue;
}

inline int cmd_enumerate(const RunConfig& cfg, std::ostream& out)
{
    if (!cfg.klass.empty()) {
        const LocalClass& c = catalog::base_class(cfg.klass);
        for (int n = 0; n <= cfg.max_n; ++n) {
            const auto members = enumerate_members(c, n);
            if (cfg.machine) out << "n=" << n << " members=" << members.size() << '\n';
            else out << "# n=" << n << ": " << members.size() << " members up to isomorphism\n";
            if (cfg.all)
                for (const auto& m : members) out << describe(m) << '\n';
        }
        return kTrue;
    }
    const LocalExpression e = load_expression(cfg.expr);
    DecideOptions opts;
    opts.solver = solver_options(cfg);
    for (int n = 1; n <= cfg.max_n; ++n) {
        const auto graphs = enumerate_graphs(n);
        std::size_t members = 0;
        std::vector<std::pair<std::string, bool>> lines;
        for (const auto& g : graphs) {
            const bool in = decide(e, g, opts).member();
            members += in ? 1 : 0;
            if (in || cfg.all) lines.emplace_back(to_graph6(g), in);
        }
        if (cfg.machine) out << "n=" << n << " graphs=" << graphs.size() << " members=" << members << '\n';
        else out << "# n=" << n << ": " << members << " of " << graphs.size() << " graphs\n";
        for (const auto& [g6, in] : lines) {
            if (cfg.all) out << g6 << ' ' << (in ? "member" : "non-member") << '\n';
            else out << g6 << '\n';
        }
    }
    return kTrue;
}

inline int cmd_catalog(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.subcommand == "list") {
        for (const auto& n : catalog::list()) {
            const auto entry = catalog::builtin(n);
            if (cfg.machine)
                out << "name=" << n << " recognizer=" << entry.recognizer.value_or("-") << " provenance=" << lexpr::detail::quote(entry.provenance)
                    << '\n';
            else
                out << n << "  [" << entry.provenance << "]" << (entry.recognizer ? "  recognizer: " + *entry.recognizer : "")
                    << '\n';
        }
        return kTrue;
    }
    if (cfg.subcommand == "show") {
        const auto files = catalog::shipped_files();
        if (std::find(files.begin(), files.end(), cfg.name) != files.end()) {
            out << catalog::source(cfg.name);
            return kTrue;
        }
        const auto entry = catalog::builtin(cfg.name);
        out << "# provenance: " << entry.provenance << '\n' << print_expression(entry.expression);
        return kTrue;
    }
    throw InputError("catalog needs 'list' or 'show NAME'");
}

} // namespace detail

/// Runs a parsed configuration, mapping errors to exit codes.
inline int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        if (cfg.max_seconds < 0) throw InputError("--max-seconds must be positive");
        if (cfg.max_n < 0) throw InputError("--max-n must be non-negative");
        if (cfg.command == "decide") return detail::cmd_decide(cfg, out);
        if (cfg.command == "verify") return detail::cmd_verify(cfg, out);
        if (cfg.command == "bounds") return detail::cmd_bounds(cfg, out);
        if (cfg.command == "equiv") return detail::cmd_equiv(cfg, out);
        if (cfg.command == "synth") return detail::cmd_synth(cfg, out);
        if (cfg.command == "snp") return detail::cmd_snp(cfg, out);
        if (cfg.command == "enumerate") return detail::cmd_enumerate(cfg, out);
        if (cfg.command == "catalog") return detail::cmd_catalog(cfg, out);
        throw InputError("unknown command '" + cfg.command + "'");
    } catch (const ResourceError& e) {
        err << "unknown: " << e.what() << '\n';
        return kUnknown;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    RunConfig cfg;
    CLI::App app{"Decide graph classes given by local expressions over ordered, coloured or oriented carriers."};
    app.name("lexpr");
    app.require_subcommand(1);

    auto budgets = [&](CLI::App* s) {
        s->add_option("--max-nodes", cfg.max_nodes, "search node budget (0: none)");
        s->add_option("--max-seconds", cfg.max_seconds, "time budget in seconds (0: none)");
        s->add_option("--threads", cfg.threads, "worker threads");
        s->add_flag("--deterministic,!--no-deterministic", cfg.deterministic,
                    "default on; when off and --threads is absent, use every core");
    };
    auto inputs = [&](CLI::App* s) {
        s->add_option("--expr", cfg.expr, "catalog name, FILE.lex or FILE.lex:NAME");
        s->add_option("--graph", cfg.graph, "graph file (.g6 or .edgelist)");
        s->add_option("--g6", cfg.g6, "graph as an inline graph6 string");
    };
    auto output = [&](CLI::App* s) { s->add_flag("--machine", cfg.machine, "key=value output"); };

    auto* decide = app.add_subcommand("decide", "decide membership and print a certificate");
    inputs(decide);
    budgets(decide);
    output(decide);
    decide->add_option("--cert", cfg.cert, "write the certificate to this file");
    decide->add_flag("--stats", cfg.stats, "append search statistics");
    decide->add_flag("--all", cfg.all, "decide every graph of a graph6 file");

    auto* verify = app.add_subcommand("verify", "check a certificate");
    inputs(verify);
    output(verify);
    verify->add_option("--cert", cfg.cert, "certificate file")->required();

    auto* bounds = app.add_subcommand("bounds", "mine minimal non-members");
    bounds->add_option("--expr", cfg.expr, "expression whose graph class is mined");
    bounds->add_option("--class", cfg.klass, "catalog base class to mine instead");
    bounds->add_option("--max-n", cfg.max_n, "largest size examined");
    budgets(bounds);
    output(bounds);

    auto* equiv = app.add_subcommand("equiv", "logical equivalence of two quantifier-free formulas");
    equiv->add_option("--f", cfg.f, "first formula in x1, x2, ...")->required();
    equiv->add_option("--g", cfg.g, "second formula")->required();
    equiv->add_option("--over", cfg.over, "signature or class name (digraph, graph, or a catalog name)");
    output(equiv);

    auto* synth = app.add_subcommand("synth", "synthesize a definition from a functor table");
    synth->add_option("--builtin", cfg.builtin, "symmetric, complement, identity or two-graph");
    synth->add_option("--table", cfg.table, "DSL file with NAME_in / NAME_out structure pairs");
    synth->add_option("--carrier", cfg.carrier, "carrier signature of the table");
    synth->add_option("--target", cfg.target, "target signature of the table");
    synth->add_option("--max-n", cfg.max_n, "table bound for --builtin");
    synth->add_option("--name", cfg.name, "name of the printed definition");

    auto* snp = app.add_subcommand("snp", "print the SNP sentence of an expression");
    snp->add_option("--expr", cfg.expr, "expression")->required();

    auto* enumerate = app.add_subcommand("enumerate", "list members up to a size");
    enumerate->add_option("--expr", cfg.expr, "expression");
    enumerate->add_option("--class", cfg.klass, "catalog base class instead of an expression");
    enumerate->add_option("--max-n", cfg.max_n, "largest size");
    enumerate->add_flag("--all", cfg.all, "list non-members too, with verdicts");
    budgets(enumerate);
    output(enumerate);

    auto* cat = app.add_subcommand("catalog", "list or show catalog entries");
    cat->require_subcommand(1);
    auto* list = cat->add_subcommand("list", "list entries");
    output(list);
    auto* show = cat->add_subcommand("show", "print an entry in DSL form");
    show->add_option("name", cfg.name, "entry name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kInputError;
    }
    for (auto* s : app.get_subcommands()) {
        cfg.command = s->get_name();
        for (auto* t : s->get_subcommands()) cfg.subcommand = t->get_name();
    }
    return execute(cfg, out, err);
}

} // namespace lexpr::cli

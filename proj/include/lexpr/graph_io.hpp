#pragma once

#include <istream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lexpr/error.hpp"
#include "lexpr/logic.hpp"
#include "lexpr/structures.hpp"

namespace lexpr {

using Edge = std::pair<int, int>;

/// Simple graph over {E}; each edge is stored in both orientations.
inline Structure make_graph(int n, const std::vector<Edge>& edges)
{
    Structure g(graph_signature(), n);
    for (auto [u, v] : edges) {
        if (u == v) throw InputError("graph edge " + std::to_string(u) + "-" + std::to_string(v) + " is a loop");
        g.set(0, {u, v});
        g.set(0, {v, u});
    }
    return g;
}

/// Digraph over {E}; arcs are stored as given.
inline Structure make_digraph(int n, const std::vector<Edge>& arcs)
{
    Structure g(graph_signature(), n);
    for (auto [u, v] : arcs) g.set(0, {u, v});
    return g;
}

inline Structure complete_graph(int n)
{
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return make_graph(n, e);
}

inline Structure empty_graph(int n) { return make_graph(n, {}); }

inline Structure path_graph(int n)
{
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return make_graph(n, e);
}

inline Structure cycle_graph(int n)
{
    if (n < 3) throw InputError("cycle_graph needs at least 3 vertices");
    auto e = std::vector<Edge>{};
    for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return make_graph(n, e);
}

inline bool is_graph(const Structure& g)
{
    if (!(g.signature() == graph_signature())) return false;
    for (int u = 0; u < g.size(); ++u) {
        if (g.has(0, {u, u})) return false;
        for (int v = u + 1; v < g.size(); ++v)
            if (g.has(0, {u, v}) != g.has(0, {v, u})) return false;
    }
    return true;
}

inline void require_graph(const Structure& g, std::string_view what)
{
    if (!is_graph(g)) throw InputError(std::string(what) + ": input is not a simple graph over {E}");
}

inline bool adjacent(const Structure& g, int u, int v) { return g.has(0, {u, v}); }

inline std::vector<Edge> edges_of(const Structure& g)
{
    std::vector<Edge> out;
    for (int u = 0; u < g.size(); ++u)
        for (int v = u + 1; v < g.size(); ++v)
            if (g.has(0, {u, v})) out.emplace_back(u, v);
    return out;
}

inline Structure graph_complement(const Structure& g)
{
    require_graph(g, "graph_complement");
    std::vector<Edge> e;
    for (int u = 0; u < g.size(); ++u)
        for (int v = u + 1; v < g.size(); ++v)
            if (!g.has(0, {u, v})) e.emplace_back(u, v);
    return make_graph(g.size(), e);
}

/// Disjoint union of graphs, second operand shifted.
inline Structure graph_sum(const Structure& a, const Structure& b)
{
    auto e = edges_of(a);
    for (auto [u, v] : edges_of(b)) e.emplace_back(u + a.size(), v + a.size());
    return make_graph(a.size() + b.size(), e);
}

/// All simple graphs on n vertices up to isomorphism, in canonical order.
/// Vertex-by-vertex augmentation with canonical deduplication.
inline std::vector<Structure> enumerate_graphs(int n)
{
    if (n < 0) throw InputError("enumerate_graphs: n must be non-negative");
    if (n > 10) throw ResourceError("enumerate_graphs: n > 10 is outside the supported range");
    std::vector<Structure> level{empty_graph(0)};
    for (int m = 1; m <= n; ++m) {
        std::vector<Structure> next;
        std::unordered_set<std::string> seen;
        for (const auto& base : level) {
            const auto old_edges = edges_of(base);
            for (unsigned mask = 0; mask < (1U << (m - 1)); ++mask) {
                auto e = old_edges;
                for (int u = 0; u < m - 1; ++u)
                    if (mask >> u & 1U) e.emplace_back(u, m - 1);
                Structure canon = canonical_form(make_graph(m, e));
                if (seen.insert(structure_key(canon)).second) next.push_back(std::move(canon));
            }
        }
        level = std::move(next);
    }
    std::sort(level.begin(), level.end(), structure_less);
    return level;
}

/// Every graph on 1..max_n vertices up to isomorphism.
inline std::vector<Structure> enumerate_graphs_up_to(int max_n, int min_n = 1)
{
    std::vector<Structure> out;
    for (int n = min_n; n <= max_n; ++n)
        for (auto& g : enumerate_graphs(n)) out.push_back(std::move(g));
    return out;
}

// ---------------------------------------------------------------------------
// graph6

inline std::string to_graph6(const Structure& g)
{
    require_graph(g, "to_graph6");
    const int n = g.size();
    std::string out;
    if (n <= 62) {
        out.push_back(static_cast<char>(n + 63));
    } else if (n <= 258047) {
        out.push_back(126);
        for (int shift : {12, 6, 0}) out.push_back(static_cast<char>(((n >> shift) & 63) + 63));
    } else {
        throw InputError("to_graph6: graph too large");
    }
    int bits = 0, acc = 0;
    for (int v = 1; v < n; ++v)
        for (int u = 0; u < v; ++u) {
            acc = (acc << 1) | (g.has(0, {u, v}) ? 1 : 0);
            if (++bits == 6) {
                out.push_back(static_cast<char>(acc + 63));
                bits = acc = 0;
            }
        }
    if (bits) out.push_back(static_cast<char>((acc << (6 - bits)) + 63));
    return out;
}

inline Structure from_graph6(std::string_view line)
{
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.starts_with(">>graph6<<")) line.remove_prefix(10);
    if (line.empty()) throw InputError("graph6: empty line");
    for (char c : line)
        if (c < 63 || c > 126) throw InputError("graph6: invalid character");
    std::size_t pos = 0;
    int n = 0;
    if (line[0] != 126) {
        n = line[0] - 63;
        pos = 1;
    } else {
        if (line.size() < 4 || line[1] == 126) throw InputError("graph6: unsupported size header");
        n = ((line[1] - 63) << 12) | ((line[2] - 63) << 6) | (line[3] - 63);
        pos = 4;
    }
    const std::size_t nbits = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1 < 0 ? 0 : n - 1) / 2;
    const std::size_t need = (nbits + 5) / 6;
    if (line.size() - pos != need)
        throw InputError("graph6: expected " + std::to_string(need) + " data bytes for n=" + std::to_string(n) +
                         ", got " + std::to_string(line.size() - pos));
    std::vector<Edge> edges;
    std::size_t k = 0;
    for (int v = 1; v < n; ++v)
        for (int u = 0; u < v; ++u, ++k) {
            const int byte = line[pos + k / 6] - 63;
            if (byte >> (5 - static_cast<int>(k % 6)) & 1) edges.emplace_back(u, v);
        }
    return make_graph(n, edges);
}

/// One graph per non-empty line.
inline std::vector<Structure> read_graph6(std::istream& in)
{
    std::vector<Structure> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(from_graph6(line));
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Edge lists: "n m" then m lines "u v", 0-based.

inline Structure read_edgelist(std::istream& in)
{
    long n = -1, m = -1;
    if (!(in >> n >> m) || n < 0 || m < 0) throw InputError("edge list: expected header 'n m'");
    std::vector<Edge> edges;
    for (long i = 0; i < m; ++i) {
        long u = 0, v = 0;
        if (!(in >> u >> v)) throw InputError("edge list: expected " + std::to_string(m) + " edges, got " + std::to_string(i));
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw InputError("edge list: edge " + std::to_string(i + 1) + " has an endpoint out of range");
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
    std::string rest;
    if (in >> rest) throw InputError("edge list: trailing data after " + std::to_string(m) + " edges");
    return make_graph(static_cast<int>(n), edges);
}

inline std::string to_edgelist(const Structure& g)
{
    require_graph(g, "to_edgelist");
    const auto e = edges_of(g);
    std::ostringstream out;
    out << g.size() << ' ' << e.size() << '\n';
    for (auto [u, v] : e) out << u << ' ' << v << '\n';
    return out.str();
}

} // namespace lexpr

#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "lexpr/error.hpp"
#include "lexpr/graph_io.hpp"

// Independent graph recognizers used as test oracles. They work on adjacency
// matrices and share no code with the expression machinery.
namespace lexpr::recognizers {

using Matrix = std::vector<std::vector<bool>>;

inline constexpr int kBruteForceLimit = 8;

inline Matrix adjacency(const Structure& g)
{
    require_graph(g, "recognizer");
    const int n = g.size();
    Matrix m(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) m[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = g.has(0, {u, v});
    return m;
}

inline void guard(const Structure& g, const char* what)
{
    if (g.size() > kBruteForceLimit)
        throw ResourceError(std::string(what) + ": brute force is limited to " + std::to_string(kBruteForceLimit) +
                            " vertices");
}

inline bool bipartite(const Structure& g)
{
    const Matrix a = adjacency(g);
    const int n = g.size();
    std::vector<int> side(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s) {
        if (side[static_cast<std::size_t>(s)] >= 0) continue;
        side[static_cast<std::size_t>(s)] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v) {
                if (!a[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) continue;
                if (side[static_cast<std::size_t>(v)] < 0) {
                    side[static_cast<std::size_t>(v)] = 1 - side[static_cast<std::size_t>(u)];
                    q.push(v);
                } else if (side[static_cast<std::size_t>(v)] == side[static_cast<std::size_t>(u)]) {
                    return false;
                }
            }
        }
    }
    return true;
}

/// Some map V(G) -> V(H) sending edges to edges.
inline bool homomorphic(const Structure& g, const Structure& h)
{
    guard(g, "homomorphic");
    const Matrix a = adjacency(g), b = adjacency(h);
    const int n = g.size(), m = h.size();
    std::vector<int> f(static_cast<std::size_t>(n), -1);
    std::function<bool(int)> rec = [&](int v) {
        if (v == n) return true;
        for (int c = 0; c < m; ++c) {
            bool ok = true;
            for (int u = 0; u < v && ok; ++u)
                if (a[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] &&
                    !b[static_cast<std::size_t>(f[static_cast<std::size_t>(u)])][static_cast<std::size_t>(c)])
                    ok = false;
            if (!ok) continue;
            f[static_cast<std::size_t>(v)] = c;
            if (rec(v + 1)) return true;
        }
        return false;
    };
    return rec(0);
}

inline bool k_colourable(const Structure& g, int k) { return homomorphic(g, complete_graph(k)); }

inline bool complete(const Structure& g)
{
    const auto e = edges_of(g).size();
    const auto n = static_cast<std::size_t>(g.size());
    return e == n * (n - 1) / 2;
}

inline bool edgeless(const Structure& g) { return edges_of(g).empty(); }

inline bool cobipartite(const Structure& g) { return bipartite(graph_complement(g)); }

/// Some vertex subset of size >= 4 induces a cycle.
inline bool has_long_induced_cycle(const Matrix& a, int n)
{
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        std::vector<int> s;
        for (int v = 0; v < n; ++v)
            if (mask >> v & 1U) s.push_back(v);
        if (s.size() < 4) continue;
        bool degrees_ok = true;
        for (int u : s) {
            int d = 0;
            for (int v : s) d += a[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] ? 1 : 0;
            if (d != 2) degrees_ok = false;
        }
        if (!degrees_ok) continue;
        // 2-regular: a cycle iff connected.
        std::vector<int> seen{s[0]};
        std::vector<bool> in(static_cast<std::size_t>(n), false);
        in[static_cast<std::size_t>(s[0])] = true;
        for (std::size_t i = 0; i < seen.size(); ++i)
            for (int v : s)
                if (!in[static_cast<std::size_t>(v)] && a[static_cast<std::size_t>(seen[i])][static_cast<std::size_t>(v)]) {
                    in[static_cast<std::size_t>(v)] = true;
                    seen.push_back(v);
                }
        if (seen.size() == s.size()) return true;
    }
    return false;
}

inline bool chordal(const Structure& g)
{
    guard(g, "chordal");
    return !has_long_induced_cycle(adjacency(g), g.size());
}

/// No induced C4 and no induced P4.
inline bool trivially_perfect(const Structure& g)
{
    guard(g, "trivially_perfect");
    const Matrix a = adjacency(g);
    const int n = g.size();
    std::vector<int> s(4);
    for (s[0] = 0; s[0] < n; ++s[0])
        for (s[1] = s[0] + 1; s[1] < n; ++s[1])
            for (s[2] = s[1] + 1; s[2] < n; ++s[2])
                for (s[3] = s[2] + 1; s[3] < n; ++s[3]) {
                    int edges = 0;
                    std::vector<int> deg(4, 0);
                    for (int i = 0; i < 4; ++i)
                        for (int j = i + 1; j < 4; ++j)
                            if (a[static_cast<std::size_t>(s[i])][static_cast<std::size_t>(s[j])]) {
                                ++edges;
                                ++deg[static_cast<std::size_t>(i)];
                                ++deg[static_cast<std::size_t>(j)];
                            }
                    std::sort(deg.begin(), deg.end());
                    if (edges == 4 && deg == std::vector<int>{2, 2, 2, 2}) return false; // C4
                    if (edges == 3 && deg == std::vector<int>{1, 1, 2, 2}) return false; // P4
                }
    return true;
}

/// Vertex set splits into a clique and an independent set.
inline bool split(const Structure& g)
{
    guard(g, "split");
    const Matrix a = adjacency(g);
    const int n = g.size();
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        bool ok = true;
        for (int u = 0; u < n && ok; ++u)
            for (int v = u + 1; v < n && ok; ++v) {
                const bool in_k = (mask >> u & 1U) && (mask >> v & 1U);
                const bool in_i = !(mask >> u & 1U) && !(mask >> v & 1U);
                const bool adj = a[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
                if ((in_k && !adj) || (in_i && adj)) ok = false;
            }
        if (ok) return true;
    }
    return false;
}

/// Calls `visit` with every transitive orientation (as an arc matrix) until it returns true.
inline bool for_each_transitive_orientation(const Structure& g, const std::function<bool(const Matrix&)>& visit)
{
    guard(g, "comparability");
    const Matrix a = adjacency(g);
    const int n = g.size();
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (a[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) edges.emplace_back(u, v);
    Matrix arc(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
    Matrix set(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
    auto violates = [&](int x, int y) {
        // A decided arc x->y fails with any decided y->z or w->x lacking the shortcut.
        for (int z = 0; z < n; ++z) {
            if (set[static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] && arc[static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] && z != x) {
                if (!a[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)]) return true;
                if (set[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)] && !arc[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)]) return true;
            }
            if (set[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)] && arc[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)] && z != y) {
                if (!a[static_cast<std::size_t>(z)][static_cast<std::size_t>(y)]) return true;
                if (set[static_cast<std::size_t>(z)][static_cast<std::size_t>(y)] && !arc[static_cast<std::size_t>(z)][static_cast<std::size_t>(y)]) return true;
            }
        }
        return false;
    };
    std::function<bool(std::size_t)> rec = [&](std::size_t i) {
        if (i == edges.size()) {
            // Full check, independent of the pruning above.
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    for (int z = 0; z < n; ++z)
                        if (arc[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] &&
                            arc[static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] &&
                            !arc[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)])
                            return false;
            return visit(arc);
        }
        const auto [u, v] = edges[i];
        for (int dir = 0; dir < 2; ++dir) {
            const int x = dir == 0 ? u : v, y = dir == 0 ? v : u;
            arc[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = true;
            set[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = set[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = true;
            const bool bad = violates(x, y);
            if (!bad && rec(i + 1)) return true;
            arc[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = false;
            set[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = set[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = false;
        }
        return false;
    };
    return rec(0);
}

inline bool comparability(const Structure& g)
{
    return for_each_transitive_orientation(g, [](const Matrix&) { return true; });
}

/// Comparability graph of a poset whose chains have at most k elements.
inline bool comparability_height(const Structure& g, int k)
{
    const int n = g.size();
    return for_each_transitive_orientation(g, [&](const Matrix& arc) {
        // Longest chain by dynamic programming over a topological order.
        std::vector<int> longest(static_cast<std::size_t>(n), 1);
        for (int round = 0; round < n; ++round)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    if (arc[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)])
                        longest[static_cast<std::size_t>(y)] =
                            std::max(longest[static_cast<std::size_t>(y)], longest[static_cast<std::size_t>(x)] + 1);
        return n == 0 || *std::max_element(longest.begin(), longest.end()) <= k;
    });
}

/// Some circular order of the vertices in which, for every edge xy, x is
/// adjacent to every vertex strictly between x and y clockwise, or y is
/// adjacent to every vertex strictly between y and x clockwise.
inline bool tucker_circular_arc(const Structure& g)
{
    guard(g, "tucker_circular_arc");
    const Matrix a = adjacency(g);
    const int n = g.size();
    if (n <= 2) return true;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto ok_side = [&](const std::vector<int>& pos, int x, int y) {
        for (int k = (pos[static_cast<std::size_t>(x)] + 1) % n; k != pos[static_cast<std::size_t>(y)]; k = (k + 1) % n)
            if (!a[static_cast<std::size_t>(x)][static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]) return false;
        return true;
    };
    do {
        std::vector<int> pos(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
        bool good = true;
        for (int x = 0; x < n && good; ++x)
            for (int y = x + 1; y < n && good; ++y)
                if (a[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] && !ok_side(pos, x, y) && !ok_side(pos, y, x))
                    good = false;
        if (good) return true;
    } while (std::next_permutation(order.begin() + 1, order.end()));
    return false;
}

/// Dispatch by name: bipartite, cobipartite, chordal, trivially_perfect,
/// complete, edgeless, split, comparability, tucker_circular_arc,
/// k_colourable(K), comparability_height(K).
inline bool recognize(const std::string& name, const Structure& g)
{
    auto param = [&](const std::string& prefix) -> std::optional<int> {
        if (name.rfind(prefix + "(", 0) != 0 || name.back() != ')') return std::nullopt;
        return std::stoi(name.substr(prefix.size() + 1, name.size() - prefix.size() - 2));
    };
    if (name == "bipartite") return bipartite(g);
    if (name == "cobipartite") return cobipartite(g);
    if (name == "chordal") return chordal(g);
    if (name == "trivially_perfect") return trivially_perfect(g);
    if (name == "complete") return complete(g);
    if (name == "edgeless") return edgeless(g);
    if (name == "split") return split(g);
    if (name == "comparability") return comparability(g);
    if (name == "tucker_circular_arc") return tucker_circular_arc(g);
    if (auto k = param("k_colourable")) return k_colourable(g, *k);
    if (auto k = param("comparability_height")) return comparability_height(g, *k);
    throw InputError("unknown recognizer '" + name + "'");
}

} // namespace lexpr::recognizers

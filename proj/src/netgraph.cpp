#include "mtdc/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <string>

namespace mtdc {

WeightedGraph make_graph(std::size_t n, GraphKind kind, std::vector<GraphEdge> edges) {
    if (n == 0) throw InvalidGraph("graph must have at least one node");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto& e : edges) {
        if (e.i == e.j)
            throw InvalidGraph("self-loop at node " + std::to_string(e.i + 1));
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.j >= n)
            throw InvalidGraph("edge endpoint " + std::to_string(e.j + 1) + " out of range");
        if (!(e.weight > 0.0) || !std::isfinite(e.weight))
            throw InvalidGraph("edge (" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) +
                               ") must have a positive finite weight");
        if (!seen.insert({e.i, e.j}).second)
            throw InvalidGraph("duplicate edge (" + std::to_string(e.i + 1) + "," +
                               std::to_string(e.j + 1) + ")");
    }
    WeightedGraph g{n, kind, std::move(edges)};
    if (kind == GraphKind::DcGrid && !connectivity_check(g))
        throw DisconnectedGraph("DC grid graph is not connected");
    return g;
}

Matrix laplacian(const WeightedGraph& g) {
    Matrix l(g.n, g.n);
    for (const auto& e : g.edges) {
        l(e.i, e.i) += e.weight;
        l(e.j, e.j) += e.weight;
        l(e.i, e.j) -= e.weight;
        l(e.j, e.i) -= e.weight;
    }
    return l;
}

Matrix incidence(const WeightedGraph& g) {
    Matrix b(g.n, g.edges.size());
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        b(g.edges[k].i, k) = 1.0;
        b(g.edges[k].j, k) = -1.0;
    }
    return b;
}

bool connectivity_check(const WeightedGraph& g) {
    if (g.n == 0) return false;
    std::vector<std::vector<std::size_t>> adj(g.n);
    for (const auto& e : g.edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<bool> visited(g.n, false);
    std::queue<std::size_t> q;
    q.push(0);
    visited[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v : adj[u]) {
            if (!visited[v]) {
                visited[v] = true;
                ++count;
                q.push(v);
            }
        }
    }
    return count == g.n;
}

WeightedGraph complete_comm_graph(std::size_t n, double weight) {
    std::vector<GraphEdge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, weight});
    return make_graph(n, GraphKind::Comm, std::move(edges));
}

} // namespace mtdc

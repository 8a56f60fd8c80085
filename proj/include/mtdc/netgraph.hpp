#pragma once

#include <cstddef>
#include <vector>

#include "mtdc/densela.hpp"

namespace mtdc {

enum class GraphKind {
    DcGrid, // edge weight = 1/R_ij (per-unit conductance); must be connected
    Comm,   // edge weight = c_ij (dimensionless consensus weight)
};

struct GraphEdge {
    std::size_t i = 0; // 0-based, i < j
    std::size_t j = 0;
    double weight = 0.0;
};

// Undirected weighted graph for either the DC resistance network or the
// controller communication network. Immutable after construction.
struct WeightedGraph {
    std::size_t n = 0;
    GraphKind kind = GraphKind::Comm;
    std::vector<GraphEdge> edges;
};

// Validates and normalizes (i<j ordering) a graph. Throws InvalidGraph on
// self-loops, duplicates or nonpositive weights; DisconnectedGraph when a
// DcGrid is not connected.
WeightedGraph make_graph(std::size_t n, GraphKind kind, std::vector<GraphEdge> edges);

// Weighted Laplacian: symmetric, zero row sums, off-diagonal (i,j) = -w_ij.
Matrix laplacian(const WeightedGraph& g);

// Vertex-edge incidence matrix B (n x m, one +1 and one -1 per column),
// satisfying B W B^T = laplacian(g).
Matrix incidence(const WeightedGraph& g);

// True iff the graph has a single connected component (BFS).
bool connectivity_check(const WeightedGraph& g);

// All-to-all communication graph with uniform edge weight.
WeightedGraph complete_comm_graph(std::size_t n, double weight);

} // namespace mtdc

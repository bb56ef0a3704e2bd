#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sglab/geometry.hpp"

namespace sglab {

// Descriptor of the functional H:
//   count        cardinality of the cloud
//   euler        Euler characteristic of the Vietoris-Rips complex at scale r
//   components   number of connected components of the r-neighborhood graph
//   knn_length   total edge length of the (undirected) k-nearest-neighbor graph
struct FunctionalSpec {
    enum class Kind { count, euler, components, knn_length };
    Kind kind = Kind::count;
    double radius = 0.0;
    int k = 0;
    int clique_cap = 16;

    static FunctionalSpec count() { return {}; }
    static FunctionalSpec euler(double r, int cap = 16) { return {Kind::euler, r, 0, cap}; }
    static FunctionalSpec components(double r) { return {Kind::components, r, 0, 16}; }
    static FunctionalSpec knn(int k) { return {Kind::knn_length, 0.0, k, 16}; }

    std::string to_string() const;
    // Accepts count, euler(r=..[,cap=..]), components(r=..), knn(k=..).
    static FunctionalSpec parse(const std::string& text);

    bool operator==(const FunctionalSpec&) const = default;
};

// r-neighborhood graph. Edge {i,j} present iff the Euclidean distance is <= r
// (closed threshold); each edge stored once with i < j.
struct GeometricGraph {
    long n = 0;
    double radius = 0.0;
    std::vector<std::pair<int, int>> edges;

    std::vector<std::vector<int>> adjacency() const;
};

// S[k] = number of k-dimensional simplices (cliques of size k+1) in the Rips
// complex; complete means no higher-dimensional simplex exists.
struct SimplexCounts {
    std::vector<long long> counts;
    bool complete = true;

    long long euler_characteristic() const {
        long long chi = 0;
        for (size_t k = 0; k < counts.size(); ++k) chi += (k % 2 == 0) ? counts[k] : -counts[k];
        return chi;
    }
};

// Exact r-graph via a cell list; identical to the all-pairs scan on every input.
GeometricGraph build_geometric_graph(const PointCloud& P, double r);

// Full clique enumeration by neighbor-intersection expansion. Throws
// CliqueCapExceeded as soon as a clique of size cap+2 (dimension cap+1)
// appears; a silently truncated alternating sum would be wrong.
SimplexCounts rips_simplex_counts(const PointCloud& P, double r, int cap);

double evaluate(const FunctionalSpec& F, const PointCloud& P);

// H(P ∪ {x}) − H(P). The Euler branch recomputes locally inside the
// r-neighborhood of x, which equals the global difference exactly; the other
// branches take the global difference.
double add_one_cost(const FunctionalSpec& F, const PointCloud& P, std::span<const double> x);

// Edge set of the kNN graph (j among the k nearest of i or vice versa), each
// edge once, ties broken by point index. Exposed for tests.
std::vector<std::pair<int, int>> knn_edges(const PointCloud& P, int k);

long long count_components(const PointCloud& P, double r);

}  // namespace sglab

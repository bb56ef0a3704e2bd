#pragma once

// Brute-force and analytic reference implementations. Everything here is
// deliberately independent of the library's accelerated code paths: all-pairs
// scans, exhaustive subset enumeration, textbook formulas, and the standard
// library RNG where an outside randomness source is wanted.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "sglab/functionals.hpp"
#include "sglab/geometry.hpp"
#include "sglab/stats.hpp"

namespace oracle {

// All-pairs r-graph.
inline std::vector<std::pair<int, int>> edges_brute(const sglab::PointCloud& P, double r) {
    std::vector<std::pair<int, int>> out;
    const double r2 = r * r;
    for (long i = 0; i < P.size(); ++i)
        for (long j = i + 1; j < P.size(); ++j)
            if (P.dist2(i, j) <= r2) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return out;
}

// Exhaustive subset enumeration: every subset tested for pairwise adjacency.
// Only sane for |P| <= ~20.
inline sglab::SimplexCounts simplex_counts_exhaustive(const sglab::PointCloud& P, double r) {
    const int n = static_cast<int>(P.size());
    const double r2 = r * r;
    sglab::SimplexCounts sc;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> v;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) v.push_back(i);
        bool clique = true;
        for (size_t a = 0; a < v.size() && clique; ++a)
            for (size_t b = a + 1; b < v.size() && clique; ++b)
                if (P.dist2(v[a], v[b]) > r2) clique = false;
        if (clique) {
            if (sc.counts.size() < v.size()) sc.counts.resize(v.size(), 0);
            sc.counts[v.size() - 1]++;
        }
    }
    return sc;
}

// kNN by full sort, ties broken by index.
inline std::vector<std::pair<int, int>> knn_edges_brute(const sglab::PointCloud& P, int k) {
    const long n = P.size();
    std::set<std::pair<int, int>> edges;
    for (long i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> ds;
        for (long j = 0; j < n; ++j)
            if (j != i) ds.emplace_back(P.dist2(i, j), static_cast<int>(j));
        std::sort(ds.begin(), ds.end());
        for (int t = 0; t < k && t < static_cast<int>(ds.size()); ++t) {
            const int j = ds[t].second;
            edges.emplace(std::min<long>(i, j), std::max<long>(i, j));
        }
    }
    return {edges.begin(), edges.end()};
}

inline double knn_length_brute(const sglab::PointCloud& P, int k) {
    double s = 0.0;
    for (auto [i, j] : knn_edges_brute(P, k)) s += std::sqrt(P.dist2(i, j));
    return s;
}

// Components by BFS on the all-pairs graph.
inline long components_brute(const sglab::PointCloud& P, double r) {
    const long n = P.size();
    const auto es = edges_brute(P, r);
    std::vector<std::vector<int>> adj(n);
    for (auto [i, j] : es) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<char> seen(n, 0);
    long comps = 0;
    for (long s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++comps;
        std::vector<int> stack{static_cast<int>(s)};
        seen[s] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
    }
    return comps;
}

// Uniform cloud in [lo,hi]^d from the standard library generator.
inline sglab::PointCloud uniform_cloud(std::mt19937_64& gen, int n, int d, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    sglab::PointCloud P(d);
    std::vector<double> x(d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) x[k] = u(gen);
        P.push(x);
    }
    return P;
}

// d=1 closed form for the expected add-one cost of the component count at
// unit intensity: gaps to the nearest point on each side are Exp(1); the cost
// is 1 - 1{L<=r} - 1{R<=r} + 1{L+R<=r}, whose mean is (1-r)e^{-r}.
inline double components_alpha_d1(double r) { return (1.0 - r) * std::exp(-r); }

// The same quantity by dense-grid quadrature of the cost model against the
// exponential gap density; validates the closed form independently.
inline double components_alpha_d1_quadrature(double r, int grid = 4000, double support = 30.0) {
    const double h = support / grid;
    double acc = 0.0;
    for (int a = 0; a < grid; ++a) {
        const double l = (a + 0.5) * h;
        const double wl = std::exp(-l) * h;
        for (int b = 0; b < grid; ++b) {
            const double s = (b + 0.5) * h;
            const double ws = std::exp(-s) * h;
            double cost = 1.0;
            if (l <= r) cost -= 1.0;
            if (s <= r) cost -= 1.0;
            if (l + s <= r) cost += 1.0;
            acc += cost * wl * ws;
        }
    }
    return acc;
}

// Exact KS distance between the standardized Poisson(lambda) law and the
// standard normal, by direct pmf summation.
inline double poisson_normal_ks(double lambda) {
    const double sd = std::sqrt(lambda);
    const long lo = std::max<long>(0, static_cast<long>(lambda - 12 * sd));
    const long hi = static_cast<long>(lambda + 12 * sd);
    double cdf = 0.0, d = 0.0;
    for (long k = 0; k <= hi; ++k) {
        const double logp = k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
        const double p = std::exp(logp);
        const double prev = cdf;
        cdf += p;
        if (k < lo) continue;
        const double z = (static_cast<double>(k) - lambda) / sd;
        // the empirical CDF of the lattice law jumps at z
        d = std::max(d, std::abs(prev - sglab::normal_cdf(z)));
        d = std::max(d, std::abs(cdf - sglab::normal_cdf(z)));
    }
    return d;
}

}  // namespace oracle

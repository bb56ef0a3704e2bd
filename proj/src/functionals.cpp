#include "sglab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "sglab/errors.hpp"

namespace sglab {

std::string FunctionalSpec::to_string() const {
    char buf[64];
    switch (kind) {
        case Kind::count: return "count";
        case Kind::euler:
            std::snprintf(buf, sizeof buf, "euler(r=%g)", radius);
            return buf;
        case Kind::components:
            std::snprintf(buf, sizeof buf, "components(r=%g)", radius);
            return buf;
        case Kind::knn_length:
            std::snprintf(buf, sizeof buf, "knn(k=%d)", k);
            return buf;
    }
    return "?";
}

namespace {

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

// key=value[,key=value...] between parentheses
std::map<std::string, std::string> parse_args(const std::string& inner) {
    std::map<std::string, std::string> out;
    size_t pos = 0;
    while (pos < inner.size()) {
        size_t comma = inner.find(',', pos);
        std::string item = inner.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        size_t eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected key=value in functional args: " + item);
        out[strip(item.substr(0, eq))] = strip(item.substr(eq + 1));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

FunctionalSpec FunctionalSpec::parse(const std::string& text) {
    const std::string t = strip(text);
    if (t == "count") return FunctionalSpec::count();
    size_t open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw std::invalid_argument("cannot parse functional: " + text);
    const std::string name = strip(t.substr(0, open));
    auto args = parse_args(t.substr(open + 1, t.size() - open - 2));
    if (name == "euler") {
        if (!args.count("r")) throw std::invalid_argument("euler requires r");
        const double r = std::stod(args.at("r"));
        const int cap = args.count("cap") ? std::stoi(args.at("cap")) : 16;
        return FunctionalSpec::euler(r, cap);
    }
    if (name == "components") {
        if (!args.count("r")) throw std::invalid_argument("components requires r");
        return FunctionalSpec::components(std::stod(args.at("r")));
    }
    if (name == "knn") {
        if (!args.count("k")) throw std::invalid_argument("knn requires k");
        return FunctionalSpec::knn(std::stoi(args.at("k")));
    }
    throw std::invalid_argument("unknown functional: " + name);
}

std::vector<std::vector<int>> GeometricGraph::adjacency() const {
    std::vector<std::vector<int>> adj(n);
    for (auto [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

namespace {

// Cell list with cell edge = r: neighbors live within one cell in each axis.
class CellList {
  public:
    CellList(const PointCloud& P, double cell) : P_(P), cell_(cell), dim_(P.dim()) {
        for (long i = 0; i < P.size(); ++i) cells_[key_of(P.pt(i))].push_back(static_cast<int>(i));
    }

    template <typename Fn>
    void for_neighbor_cells(std::span<const double> x, Fn&& fn) const {
        std::vector<long long> base = cell_coords(x), cur(dim_);
        std::vector<int> off(dim_, -1);
        for (;;) {
            for (int k = 0; k < dim_; ++k) cur[k] = base[k] + off[k];
            auto it = cells_.find(pack(cur));
            if (it != cells_.end())
                for (int j : it->second) fn(j);
            int k = dim_ - 1;
            while (k >= 0) {
                if (++off[k] <= 1) break;
                off[k] = -1;
                --k;
            }
            if (k < 0) break;
        }
    }

  private:
    std::vector<long long> cell_coords(std::span<const double> x) const {
        std::vector<long long> c(dim_);
        for (int k = 0; k < dim_; ++k) c[k] = static_cast<long long>(std::floor(x[k] / cell_));
        return c;
    }
    std::uint64_t key_of(std::span<const double> x) const { return pack(cell_coords(x)); }
    static std::uint64_t pack(const std::vector<long long>& c) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (long long v : c) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 0x100000001b3ull;
            h ^= h >> 29;
        }
        return h;
    }

    const PointCloud& P_;
    double cell_;
    int dim_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace

GeometricGraph build_geometric_graph(const PointCloud& P, double r) {
    if (r <= 0.0) throw std::invalid_argument("graph radius must be positive");
    GeometricGraph g;
    g.n = P.size();
    g.radius = r;
    const double r2 = r * r;
    if (P.size() <= 1) return g;

    CellList cl(P, r);
    for (long i = 0; i < P.size(); ++i) {
        cl.for_neighbor_cells(P.pt(i), [&](int j) {
            if (j > i && P.dist2(i, j) <= r2) g.edges.emplace_back(static_cast<int>(i), j);
        });
    }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

namespace {

// Counts cliques of every size; neighbor lists must be sorted ascending.
// cand holds vertices adjacent to every clique member, all larger than the
// last member. Reaching size cap+2 aborts the whole enumeration.
struct CliqueCounter {
    const std::vector<std::vector<int>>& adj;
    int cap;
    std::vector<long long> cnt;  // cnt[s] = cliques of size s+1

    void run() {
        const int n = static_cast<int>(adj.size());
        if (n == 0) return;
        bump(1);
        cnt[0] = n;
        std::vector<int> cand;
        for (int v = 0; v < n; ++v) {
            auto it = std::upper_bound(adj[v].begin(), adj[v].end(), v);
            cand.assign(it, adj[v].end());
            extend(2, cand);
        }
    }

    void extend(int size, const std::vector<int>& cand) {
        if (cand.empty()) return;
        bump(size);
        if (size == cap + 2)
            throw CliqueCapExceeded("clique of size " + std::to_string(size) +
                                    " exceeds cap " + std::to_string(cap) + "; raise the cap");
        std::vector<int> next;
        for (size_t a = 0; a < cand.size(); ++a) {
            cnt[size - 1]++;
            const int u = cand[a];
            next.clear();
            // candidates after u that are adjacent to u
            std::set_intersection(cand.begin() + a + 1, cand.end(),
                                  std::upper_bound(adj[u].begin(), adj[u].end(), u), adj[u].end(),
                                  std::back_inserter(next));
            extend(size + 1, next);
        }
    }

    void bump(int size) {
        if (static_cast<int>(cnt.size()) < size) cnt.resize(size, 0);
    }
};

}  // namespace

SimplexCounts rips_simplex_counts(const PointCloud& P, double r, int cap) {
    if (cap < 1) throw std::invalid_argument("clique cap must be >= 1");
    SimplexCounts sc;
    if (P.size() == 0) return sc;
    const GeometricGraph g = build_geometric_graph(P, r);
    const auto adj = g.adjacency();
    CliqueCounter cc{adj, cap, {}};
    cc.run();
    while (!cc.cnt.empty() && cc.cnt.back() == 0) cc.cnt.pop_back();
    sc.counts = std::move(cc.cnt);
    sc.complete = true;  // enumeration is exhaustive below the cap
    return sc;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(long n) : parent(n) {
        for (long i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

// Exact kNN via expanding cell rings; ordering key is (squared distance,
// index), matching the brute-force oracle.
std::vector<std::vector<int>> knn_neighbors(const PointCloud& P, int k) {
    const long n = P.size();
    const int d = P.dim();

    // Cell edge targeting a few points per cell.
    std::vector<double> lo(d, std::numeric_limits<double>::infinity()),
        hi(d, -std::numeric_limits<double>::infinity());
    for (long i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) {
            lo[c] = std::min(lo[c], P.pt(i)[c]);
            hi[c] = std::max(hi[c], P.pt(i)[c]);
        }
    double vol = 1.0;
    for (int c = 0; c < d; ++c) vol *= std::max(hi[c] - lo[c], 1e-12);
    double cell = std::pow(vol * (k + 1) / std::max<long>(n, 1), 1.0 / d);
    if (!(cell > 0) || !std::isfinite(cell)) cell = 1.0;

    std::unordered_map<std::uint64_t, std::vector<int>> cells;
    auto coords = [&](long i) {
        std::vector<long long> c(d);
        for (int t = 0; t < d; ++t) c[t] = static_cast<long long>(std::floor(P.pt(i)[t] / cell));
        return c;
    };
    auto pack = [](const std::vector<long long>& c) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (long long v : c) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 0x100000001b3ull;
            h ^= h >> 29;
        }
        return h;
    };
    std::vector<std::vector<long long>> cc(n);
    for (long i = 0; i < n; ++i) {
        cc[i] = coords(i);
        cells[pack(cc[i])].push_back(static_cast<int>(i));
    }

    std::vector<std::vector<int>> result(n);
    using Entry = std::pair<double, int>;  // (dist2, index), max-heap on this key
    std::vector<Entry> heap;
    for (long i = 0; i < n; ++i) {
        heap.clear();
        auto consider = [&](int j) {
            if (j == static_cast<int>(i)) return;
            Entry e{P.dist2(i, j), j};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(e);
                std::push_heap(heap.begin(), heap.end());
            } else if (e < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = e;
                std::push_heap(heap.begin(), heap.end());
            }
        };
        // ring s visits cells at Chebyshev distance exactly s
        std::vector<long long> cur(d);
        for (int s = 0;; ++s) {
            bool any_cell = false;
            std::vector<int> off(d, -s);
            for (;;) {
                bool on_ring = false;
                for (int t = 0; t < d; ++t)
                    if (std::abs(off[t]) == s) { on_ring = true; break; }
                if (on_ring || s == 0) {
                    for (int t = 0; t < d; ++t) cur[t] = cc[i][t] + off[t];
                    auto it = cells.find(pack(cur));
                    if (it != cells.end()) {
                        any_cell = true;
                        for (int j : it->second) consider(j);
                    }
                }
                int t = d - 1;
                while (t >= 0) {
                    if (++off[t] <= s) break;
                    off[t] = -s;
                    --t;
                }
                if (t < 0) break;
            }
            // Unvisited points lie at distance > s*cell; a strict comparison
            // keeps equal-distance ties (broken by index) exact.
            const double guard = static_cast<double>(s) * cell;
            if (static_cast<int>(heap.size()) == k && heap.front().first < guard * guard) break;
            if (!any_cell && s > 0) {
                // ring may be empty while farther cells still hold points
                double span = 0.0;
                for (int t = 0; t < d; ++t) span = std::max(span, hi[t] - lo[t]);
                if (guard > span + cell) break;
            }
        }
        std::sort(heap.begin(), heap.end());
        result[i].reserve(heap.size());
        for (auto& [d2, j] : heap) result[i].push_back(j);
    }
    return result;
}

}  // namespace

std::vector<std::pair<int, int>> knn_edges(const PointCloud& P, int k) {
    const long n = P.size();
    if (n <= 1) return {};
    if (n <= k) throw KnnUndefined("knn graph needs at least k+1 points, got " + std::to_string(n));
    auto nbrs = knn_neighbors(P, k);
    std::vector<std::pair<int, int>> edges;
    for (long i = 0; i < n; ++i)
        for (int j : nbrs[i]) {
            const int a = static_cast<int>(std::min<long>(i, j));
            const int b = static_cast<int>(std::max<long>(i, j));
            edges.emplace_back(a, b);
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

long long count_components(const PointCloud& P, double r) {
    const GeometricGraph g = build_geometric_graph(P, r);
    UnionFind uf(P.size());
    long long comps = P.size();
    for (auto [i, j] : g.edges)
        if (uf.unite(i, j)) --comps;
    return comps;
}

namespace {

// Kahan-compensated sum over edges in sorted order; the totals can run to
// millions of terms.
double knn_total_length(const PointCloud& P, int k) {
    const auto edges = knn_edges(P, k);
    double sum = 0.0, comp = 0.0;
    for (auto [i, j] : edges) {
        const double term = std::sqrt(P.dist2(i, j));
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

double evaluate(const FunctionalSpec& F, const PointCloud& P) {
    switch (F.kind) {
        case FunctionalSpec::Kind::count:
            return static_cast<double>(P.size());
        case FunctionalSpec::Kind::euler:
            return static_cast<double>(rips_simplex_counts(P, F.radius, F.clique_cap).euler_characteristic());
        case FunctionalSpec::Kind::components:
            return static_cast<double>(count_components(P, F.radius));
        case FunctionalSpec::Kind::knn_length:
            return knn_total_length(P, F.k);
    }
    throw std::logic_error("unreachable functional kind");
}

namespace {

// New simplices created by inserting x are x joined with cliques among the
// neighbors of x, so the Euler increment is computable from B(x, r) alone.
double euler_add_one_local(const FunctionalSpec& F, const PointCloud& P, std::span<const double> x) {
    const double r2 = F.radius * F.radius;
    std::vector<int> nbr;
    for (long i = 0; i < P.size(); ++i)
        if (dist2(P.pt(i), x) <= r2) nbr.push_back(static_cast<int>(i));

    const int m = static_cast<int>(nbr.size());
    std::vector<std::vector<int>> adj(m);
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            if (P.dist2(nbr[a], nbr[b]) <= r2) {
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
    for (auto& v : adj) std::sort(v.begin(), v.end());

    // cliques of size s among the neighbors extend to size s+1 with x
    CliqueCounter cc{adj, F.clique_cap - 1, {}};
    cc.run();
    long long cost = 1;
    for (size_t s = 1; s <= cc.cnt.size(); ++s) {
        const long long c = cc.cnt[s - 1];
        cost += (s % 2 == 1) ? -c : c;
    }
    return static_cast<double>(cost);
}

}  // namespace

double add_one_cost(const FunctionalSpec& F, const PointCloud& P, std::span<const double> x) {
    if (P.contains_point(x)) throw std::invalid_argument("add_one_cost: x already in P");
    switch (F.kind) {
        case FunctionalSpec::Kind::count:
            return 1.0;
        case FunctionalSpec::Kind::euler:
            return euler_add_one_local(F, P, x);
        case FunctionalSpec::Kind::components:
        case FunctionalSpec::Kind::knn_length:
            return evaluate(F, P.with_point(x)) - evaluate(F, P);
    }
    throw std::logic_error("unreachable functional kind");
}

}  // namespace sglab

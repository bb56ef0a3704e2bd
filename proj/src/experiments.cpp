#include "sglab/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "sglab/errors.hpp"
#include "sglab/parallel.hpp"
#include "sglab/rng.hpp"
#include "sglab/stats.hpp"

namespace sglab {

namespace {

constexpr std::uint64_t kPoolRoute = 0x706f6f6cull;   // "pool"
constexpr std::uint64_t kPathRoute = 0x70617468ull;   // "path"

WindowGeometry window_at(const WindowGeometry& base, double n) {
    WindowGeometry g = base;
    g.n = n;
    return g;
}

double evaluate_process(const FunctionalSpec& F, ProcessKind process, const ProcessKey& key,
                        const WindowGeometry& geom, int d) {
    if (process == ProcessKind::poisson) return evaluate(F, poisson_window(key, geom, d));
    return evaluate(F, coupled_binomial(key, geom, d, std::max<long>(1, std::llround(geom.n))));
}

// Per-path cube cache so nested windows reuse one realization.
class CachedRealization {
  public:
    CachedRealization(const ProcessKey& key, int d) : key_(key), d_(d) {}

    PointCloud window(const WindowGeometry& geom) {
        const Box box = geom.box(d_);
        PointCloud cloud(d_);
        for (const auto& z : cubes_touching(box)) {
            const PointCloud& c = cube(z);
            for (long i = 0; i < c.size(); ++i)
                if (box.contains(c.pt(i))) cloud.push(c.pt(i));
        }
        cloud.window = box;
        return cloud;
    }

  private:
    const PointCloud& cube(const CubeIndex& z) {
        auto it = cache_.find(z.z);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(z.z, cube_points(key_, z)).first->second;
    }

    struct VecHash {
        size_t operator()(const std::vector<long long>& v) const {
            std::uint64_t h = 0xcbf29ce484222325ull;
            for (long long x : v) {
                h ^= static_cast<std::uint64_t>(x);
                h *= 0x100000001b3ull;
                h ^= h >> 29;
            }
            return static_cast<size_t>(h);
        }
    };
    ProcessKey key_;
    int d_;
    std::unordered_map<std::vector<long long>, PointCloud, VecHash> cache_;
};

}  // namespace

double MeanCurve::at(double n) const {
    for (size_t i = 0; i < ns.size(); ++i)
        if (ns[i] == n) return means[i];
    throw std::invalid_argument("mean_curve: n not on the pool grid");
}

double MeanCurve::se_at(double n) const {
    for (size_t i = 0; i < ns.size(); ++i)
        if (ns[i] == n) return ses[i];
    throw std::invalid_argument("mean_curve: n not on the pool grid");
}

MeanCurve mean_curve(const FunctionalSpec& F, ProcessKind process, int d,
                     const WindowGeometry& base_geometry, std::span<const double> n_grid,
                     long pool_replicates, std::uint64_t seed, int threads) {
    MeanCurve mc;
    const std::uint64_t master = derive_state({seed, kPoolRoute});
    // binomial Count is deterministic; one replicate pins the curve exactly
    const bool degenerate = F.kind == FunctionalSpec::Kind::count && process == ProcessKind::binomial;
    const long reps = degenerate ? 1 : pool_replicates;

    std::vector<std::vector<double>> values(n_grid.size(), std::vector<double>(reps));
    parallel_for_indexed(reps, threads, [&](long j) {
        CachedRealization real{ProcessKey{master, 0, static_cast<std::uint64_t>(j)}, d};
        for (size_t gi = 0; gi < n_grid.size(); ++gi) {
            const WindowGeometry geom = window_at(base_geometry, n_grid[gi]);
            if (process == ProcessKind::poisson)
                values[gi][j] = evaluate(F, real.window(geom));
            else
                values[gi][j] = evaluate_process(F, process, ProcessKey{master, 0, static_cast<std::uint64_t>(j)},
                                                 geom, d);
        }
    });
    for (size_t gi = 0; gi < n_grid.size(); ++gi) {
        mc.ns.push_back(n_grid[gi]);
        mc.means.push_back(mean(values[gi]));
        mc.ses.push_back(degenerate ? 0.0 : std_error_of_mean(values[gi]));
    }
    return mc;
}

std::vector<double> geometric_grid(double n0, double factor, double n_max) {
    std::vector<double> grid;
    double x = n0;
    for (int k = 0; x <= n_max; ++k) {
        const double n = std::ceil(x);
        if (grid.empty() || n > grid.back()) grid.push_back(n);
        x = n0 * std::pow(factor, k + 1);
    }
    if (grid.empty() || grid.back() < n_max) grid.push_back(std::ceil(n_max));
    return grid;
}

LilResult lil_experiment(const FunctionalSpec& F, ProcessKind process, int d,
                         const WindowGeometry& base_geometry, std::span<const double> n_grid,
                         const LilConfig& cfg) {
    if (n_grid.empty()) throw std::invalid_argument("lil_experiment: empty n grid");
    for (size_t i = 0; i + 1 < n_grid.size(); ++i)
        if (n_grid[i] >= n_grid[i + 1]) throw std::invalid_argument("lil_experiment: n_grid must increase");
    for (double n : n_grid)
        if (n < 3.0) throw std::invalid_argument("lil_experiment: needs n >= 3 so log log n > 0");

    LilResult res;
    res.pool = mean_curve(F, process, d, base_geometry, n_grid,
                          cfg.pool_replicates, cfg.seed, cfg.threads);

    const std::uint64_t master = derive_state({cfg.seed, kPathRoute});
    res.paths.assign(cfg.paths, LilPath{});
    parallel_for_indexed(cfg.paths, cfg.threads, [&](long p) {
        LilPath path;
        path.replicate_id = p;
        CachedRealization real{ProcessKey{master, 0, static_cast<std::uint64_t>(p)}, d};
        for (size_t gi = 0; gi < n_grid.size(); ++gi) {
            const double n = n_grid[gi];
            const WindowGeometry geom = window_at(base_geometry, n);
            double h;
            if (process == ProcessKind::poisson)
                h = evaluate(F, real.window(geom));
            else
                h = evaluate_process(F, process, ProcessKey{master, 0, static_cast<std::uint64_t>(p)},
                                     geom, d);
            const double centered = h - res.pool.at(n);
            path.ns.push_back(n);
            path.centered.push_back(centered);
            path.normalized.push_back(centered / std::sqrt(2.0 * n * std::log(std::log(n))));
        }
        res.paths[p] = std::move(path);
    });

    const double tail_start = n_grid.back() * cfg.tail_fraction;
    res.tail_max.reserve(cfg.paths);
    long pass = 0;
    res.envelope = cfg.envelope_factor * cfg.sigma_ref;
    for (const auto& path : res.paths) {
        double tm = 0.0;
        for (size_t i = 0; i < path.ns.size(); ++i)
            if (path.ns[i] >= tail_start) tm = std::max(tm, std::abs(path.normalized[i]));
        res.tail_max.push_back(tm);
        if (tm <= res.envelope) ++pass;
    }
    res.pass_fraction = static_cast<double>(pass) / static_cast<double>(cfg.paths);
    for (size_t gi = 0; gi < n_grid.size(); ++gi) {
        const double n = n_grid[gi];
        if (n >= tail_start)
            res.centering_se_worst = std::max(
                res.centering_se_worst,
                res.pool.se_at(n) / std::sqrt(2.0 * n * std::log(std::log(n))));
    }
    return res;
}

CltResult clt_experiment(const FunctionalSpec& F, ProcessKind process, int d, double n,
                         long replicates, std::uint64_t seed, int threads,
                         std::optional<double> variance_override) {
    if (replicates < 500) throw std::invalid_argument("clt_experiment needs at least 500 replicates");
    CltResult out;
    out.replicates = replicates;

    double v;
    if (variance_override) {
        v = *variance_override;
    } else {
        EstimatorConfig ecfg;
        ecfg.seed = derive_state({seed, 0x766172ull});
        ecfg.replicates = std::max<long>(replicates, 20000);
        ecfg.threads = threads;
        v = process == ProcessKind::poisson ? sigma2_hat(F, d, ecfg).estimate
                                            : tau2_hat(F, d, ecfg).estimate;
    }
    out.sigma2_used = v;
    if (!(v > 0.0)) throw DegenerateSample("clt_experiment: nonpositive variance scale");

    // centering pool sized so its error is small next to the KS resolution
    const std::vector<double> grid{n};
    const long pool_n = std::max<long>(2 * replicates, 2000);
    const MeanCurve pool = mean_curve(F, process, d, WindowGeometry::cubic(n), grid, pool_n,
                                      derive_state({seed, kPoolRoute, 2}), threads);

    const std::uint64_t master = derive_state({seed, 0x636c74ull});
    std::vector<double> zs(replicates);
    parallel_for_indexed(replicates, threads, [&](long j) {
        const ProcessKey key{master, 0, static_cast<std::uint64_t>(j)};
        const double h = evaluate_process(F, process, key, WindowGeometry::cubic(n), d);
        zs[j] = (h - pool.at(n)) / std::sqrt(n * v);
    });
    // all-equal samples (e.g. binomial Count) are flagged, not scored
    if (std::adjacent_find(zs.begin(), zs.end(), std::not_equal_to<>()) == zs.end())
        throw DegenerateSample("clt_experiment: degenerate sample");
    out.ks_statistic = ks_against_standard_normal(std::move(zs));
    return out;
}

SipReport sip_experiment(const FunctionalSpec& F, ProcessKind process, int d, const SipConfig& cfg) {
    if (d < 2) throw std::invalid_argument("sip_experiment needs d >= 2 (the base is a (d-1)-box)");
    if (cfg.n_max < 10.0 * cfg.block_len)
        throw std::invalid_argument("sip_experiment needs n_max >= 10*block_len");

    SipReport rep;
    const WindowGeometry base = WindowGeometry::stretched(cfg.base, cfg.n_max);
    const long nblocks = static_cast<long>(std::floor(cfg.n_max / cfg.block_len));
    std::vector<double> boundaries;  // window lengths at block boundaries
    for (long b = 1; b <= nblocks; ++b) boundaries.push_back(static_cast<double>(b) * cfg.block_len);

    const MeanCurve pool = mean_curve(F, process, d, base, boundaries,
                                      std::max<long>(cfg.paths, 200), cfg.seed, cfg.threads);

    const std::uint64_t master = derive_state({cfg.seed, kPathRoute, 0x736970ull});
    std::vector<std::vector<double>> level(cfg.paths, std::vector<double>(nblocks));
    parallel_for_indexed(cfg.paths, cfg.threads, [&](long p) {
        CachedRealization real{ProcessKey{master, 0, static_cast<std::uint64_t>(p)}, d};
        for (long b = 0; b < nblocks; ++b) {
            const WindowGeometry geom = window_at(base, boundaries[b]);
            double h;
            if (process == ProcessKind::poisson)
                h = evaluate(F, real.window(geom));
            else
                h = evaluate_process(F, process, ProcessKey{master, 0, static_cast<std::uint64_t>(p)},
                                     geom, d);
            level[p][b] = h - pool.at(boundaries[b]);
        }
    });

    // (i) variance regression over the upper block boundaries
    for (long b = 0; b < nblocks; ++b) {
        std::vector<double> vals(cfg.paths);
        for (long p = 0; p < cfg.paths; ++p) vals[p] = level[p][b];
        rep.grid_ns.push_back(boundaries[b]);
        rep.variance_values.push_back(sample_variance(vals));
        rep.variance_ses.push_back(jackknife_se_of_variance(vals));
    }
    {
        const LinearFit f = linear_fit(rep.grid_ns, rep.variance_values);
        rep.nu2_slope = f.slope;
        rep.nu2_slope_se = f.slope_se;
        rep.nu2_intercept = f.intercept;
        rep.variance_fit_r2 = f.r_squared;
    }

    // (ii)+(iii) disjoint block increments: correlations and per-block normality
    std::vector<std::vector<double>> inc(nblocks, std::vector<double>(cfg.paths));
    for (long p = 0; p < cfg.paths; ++p)
        for (long b = 0; b < nblocks; ++b)
            inc[b][p] = b == 0 ? level[p][0] : level[p][b] - level[p][b - 1];
    rep.increment_correlation.assign(nblocks, std::vector<double>(nblocks, 0.0));
    for (long a = 0; a < nblocks; ++a)
        for (long b = 0; b < nblocks; ++b)
            rep.increment_correlation[a][b] = a == b ? 1.0 : correlation(inc[a], inc[b]);
    rep.correlation_se = 1.0 / std::sqrt(static_cast<double>(cfg.paths) - 3.0);
    for (long b = 0; b < nblocks; ++b) {
        try {
            rep.block_ks.push_back(ks_normal(inc[b]));
        } catch (const DegenerateSample&) {
            rep.block_ks.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }

    // (iv) binomial branch: Poissonization defect on the same grid
    if (cfg.defect_replicates > 0) {
        rep.has_defect = true;
        const std::uint64_t dm = derive_state({cfg.seed, 0x646566ull});
        for (long b = 0; b < nblocks; ++b) {
            const double n = boundaries[b];
            const WindowGeometry geom = window_at(base, n);
            std::vector<double> diffs(cfg.defect_replicates);
            parallel_for_indexed(cfg.defect_replicates, cfg.threads, [&](long j) {
                const ProcessKey key{dm, 0, static_cast<std::uint64_t>(j)};
                const long count = poisson_window_count(key, geom, d);
                const double h_pois = evaluate(F, poisson_window(key, geom, d));
                const double h_binom =
                    evaluate(F, coupled_binomial(key, geom, d, std::max<long>(1, std::llround(n))));
                diffs[j] = h_pois - h_binom;  // H(U_{n,N_n}) - H(U_{n,n}) by the coupling
                (void)count;
            });
            rep.defect_ns.push_back(n);
            rep.defect_values.push_back(std::abs(mean(diffs)));
            rep.defect_ses.push_back(std_error_of_mean(diffs));
        }
        std::vector<double> lx, ly;
        for (size_t i = 0; i < rep.defect_ns.size(); ++i) {
            if (rep.defect_values[i] > 0.0) {
                lx.push_back(std::log(rep.defect_ns[i]));
                ly.push_back(std::log(rep.defect_values[i]));
            }
        }
        if (lx.size() >= 2) {
            const LinearFit f = linear_fit(lx, ly);
            rep.defect_exponent = f.slope;
            rep.defect_fit_r2 = f.r_squared;
        }
    }
    return rep;
}

}  // namespace sglab

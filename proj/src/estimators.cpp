#include "sglab/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <optional>

#include "sglab/errors.hpp"
#include "sglab/hashing.hpp"
#include "sglab/parallel.hpp"
#include "sglab/rng.hpp"
#include "sglab/stats.hpp"

namespace sglab {

namespace {

std::string cfg_hash(const FunctionalSpec& F, int d, const EstimatorConfig& cfg,
                     const std::string& method) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "method=%s;functional=%s;d=%d;R=%.17g;replicates=%ld;seed=%llu",
                  method.c_str(), F.to_string().c_str(), d, cfg.R, cfg.replicates,
                  static_cast<unsigned long long>(cfg.seed));
    return hex64(fnv1a64(buf));
}

// Distinct master seeds for routes that must not share randomness.
std::uint64_t route_seed(std::uint64_t seed, std::uint64_t route) {
    return derive_state({seed, 0x726f757465ull, route});
}

double base_radius(const FunctionalSpec& F, const EstimatorConfig& cfg) {
    if (cfg.R > 0.0) return cfg.R;
    const auto cert = certified_radius(F);
    return cert ? std::max(cert->radius, 1.0) : 2.0;
}

}  // namespace

double add_one_cost_at_origin(const FunctionalSpec& F, const ProcessKey& key, int d, double R) {
    const std::vector<double> origin(d, 0.0);
    const bool exact_local = F.kind == FunctionalSpec::Kind::count ||
                             F.kind == FunctionalSpec::Kind::euler;
    if (exact_local) {
        const double r_need = certified_radius(F)->radius;
        return add_one_cost(F, poisson_ball(key, origin, std::max(R, r_need)), origin);
    }
    // doubling schedule, value must repeat once
    constexpr int kMaxDoublings = 5;
    double r = std::max(R, 2.0);
    std::optional<double> prev;
    for (int step = 0; step <= kMaxDoublings; ++step, r *= 2.0) {
        double c;
        try {
            c = add_one_cost(F, poisson_ball(key, origin, r), origin);
        } catch (const KnnUndefined&) {
            prev.reset();
            continue;
        }
        const bool close = prev && (F.kind == FunctionalSpec::Kind::knn_length
                                        ? std::abs(*prev - c) <= 1e-9 * std::max(1.0, std::abs(c))
                                        : *prev == c);
        if (close) return c;
        prev = c;
    }
    throw ConvergenceNotReached("add-one cost still changing at the end of the doubling schedule");
}

EstimateReport alpha_hat(const FunctionalSpec& F, int d, const EstimatorConfig& cfg) {
    EstimateReport rep;
    rep.method = "alpha_hat";
    rep.replicates = cfg.replicates;
    rep.seed = cfg.seed;
    rep.config_hash = cfg_hash(F, d, cfg, rep.method);

    if (F.kind == FunctionalSpec::Kind::count) {  // cost is identically 1
        rep.estimate = 1.0;
        rep.std_error = 0.0;
        rep.has_cross = true;
        rep.cross_estimate = 1.0;
        rep.cross_se = 0.0;
        return rep;
    }

    const double R = base_radius(F, cfg);
    const std::uint64_t m1 = route_seed(cfg.seed, 1), m2 = route_seed(cfg.seed, 2);

    std::vector<double> direct(cfg.replicates), cross(cfg.replicates);
    parallel_for_indexed(cfg.replicates, cfg.threads, [&](long j) {
        const ProcessKey k1{m1, 0, static_cast<std::uint64_t>(j)};
        direct[j] = add_one_cost_at_origin(F, k1, d, R);

        const ProcessKey k2{m2, 0, static_cast<std::uint64_t>(j)};
        const DeltaSample ds = sample_delta_inner(F, k2, d, CubeIndex::origin(d), R, 0);
        cross[j] = ds.value * static_cast<double>(ds.base_cube_count);
    });

    rep.estimate = mean(direct);
    rep.std_error = std_error_of_mean(direct);
    rep.has_cross = true;
    rep.cross_estimate = mean(cross);
    rep.cross_se = std_error_of_mean(cross);
    const double joint = std::sqrt(rep.std_error * rep.std_error + rep.cross_se * rep.cross_se);
    rep.cross_flagged = std::abs(rep.estimate - rep.cross_estimate) > 3.0 * joint;
    return rep;
}

EstimateReport sigma2_hat(const FunctionalSpec& F, int d, const EstimatorConfig& cfg) {
    EstimateReport rep;
    rep.method = "sigma2_hat";
    rep.replicates = cfg.replicates;
    rep.seed = cfg.seed;
    rep.config_hash = cfg_hash(F, d, cfg, rep.method);

    const double R = base_radius(F, cfg);
    const std::uint64_t m = route_seed(cfg.seed, 3);
    std::vector<double> prods(cfg.replicates);
    parallel_for_indexed(cfg.replicates, cfg.threads, [&](long j) {
        const ProcessKey key{m, 0, static_cast<std::uint64_t>(j)};
        const auto [d1, d2] = sample_delta_pair(F, key, d, CubeIndex::origin(d), R);
        prods[j] = d1.value * d2.value;
    });
    rep.estimate = mean(prods);
    rep.std_error = std_error_of_mean(prods);
    rep.warning_nonpositive = rep.estimate <= 0.0;
    return rep;
}

EstimateReport tau2_hat(const FunctionalSpec& F, int d, const EstimatorConfig& cfg) {
    EstimateReport rep;
    rep.method = "tau2_hat";
    rep.replicates = cfg.replicates;
    rep.seed = cfg.seed;
    rep.config_hash = cfg_hash(F, d, cfg, rep.method);

    EstimatorConfig sub = cfg;
    sub.seed = route_seed(cfg.seed, 4);
    const EstimateReport alpha = alpha_hat(F, d, sub);

    const double R = base_radius(F, cfg);
    const std::uint64_t m = route_seed(cfg.seed, 5);
    std::vector<double> prods(cfg.replicates);
    parallel_for_indexed(cfg.replicates, cfg.threads, [&](long j) {
        const ProcessKey key{m, 0, static_cast<std::uint64_t>(j)};
        const auto [d1, d2] = sample_delta_pair(F, key, d, CubeIndex::origin(d), R);
        const double a = d1.value - alpha.estimate * static_cast<double>(d1.delta_prime());
        const double b = d2.value - alpha.estimate * static_cast<double>(d2.delta_prime());
        prods[j] = a * b;
    });
    rep.estimate = mean(prods);
    rep.std_error = std_error_of_mean(prods);
    rep.warning_nonpositive = rep.estimate <= 0.0;

    // identity check against σ̂² − α̂² on a disjoint seed
    EstimatorConfig sigma_cfg = cfg;
    sigma_cfg.seed = route_seed(cfg.seed, 6);
    const EstimateReport sig = sigma2_hat(F, d, sigma_cfg);
    rep.has_cross = true;
    rep.cross_estimate = sig.estimate - alpha.estimate * alpha.estimate;
    rep.cross_se = std::sqrt(sig.std_error * sig.std_error +
                             std::pow(2.0 * alpha.estimate * alpha.std_error, 2));
    const double joint = std::sqrt(rep.std_error * rep.std_error + rep.cross_se * rep.cross_se);
    rep.cross_flagged = std::abs(rep.estimate - rep.cross_estimate) > 3.0 * joint;
    return rep;
}

VarianceCurve direct_variance(const FunctionalSpec& F, ProcessKind process, int d,
                              std::span<const double> n_grid, long replicates,
                              std::uint64_t seed, int threads) {
    if (replicates < 30) throw std::invalid_argument("direct_variance needs at least 30 replicates");
    VarianceCurve curve;
    const std::uint64_t m = route_seed(seed, 7);
    for (double n : n_grid) {
        std::vector<double> hs(replicates);
        parallel_for_indexed(replicates, threads, [&](long j) {
            const ProcessKey key{derive_state({m, std::bit_cast<std::uint64_t>(n)}), 0,
                                 static_cast<std::uint64_t>(j)};
            const WindowGeometry geom = WindowGeometry::cubic(n);
            if (process == ProcessKind::poisson) {
                hs[j] = evaluate(F, poisson_window(key, geom, d));
            } else {
                hs[j] = evaluate(F, coupled_binomial(key, geom, d, std::llround(n)));
            }
        });
        curve.ns.push_back(n);
        curve.values.push_back(sample_variance(hs) / n);
        curve.ses.push_back(jackknife_se_of_variance(hs) / n);
    }
    return curve;
}

std::vector<CovariancePoint> covariance_curve(const FunctionalSpec& F, int d,
                                              const EstimatorConfig& cfg,
                                              std::span<const CubeIndex> lags) {
    if (lags.empty()) throw std::invalid_argument("covariance_curve needs at least one lag");
    const double R = base_radius(F, cfg);
    const long m_inner = std::max<long>(cfg.inner, 1);
    const std::uint64_t master = route_seed(cfg.seed, 8);

    const CubeIndex origin = CubeIndex::origin(d);
    const long L = static_cast<long>(lags.size());
    // per replicate: F̂_0 and each F̂_z on one shared base-stream realization
    std::vector<double> f0(cfg.replicates);
    std::vector<std::vector<double>> fz(L, std::vector<double>(cfg.replicates));
    std::vector<double> inner_var0(cfg.replicates);

    parallel_for_indexed(cfg.replicates, cfg.threads, [&](long j) {
        const ProcessKey key{master, 0, static_cast<std::uint64_t>(j)};
        auto inner_mean = [&](const CubeIndex& z, std::vector<double>* out_vals) {
            KahanSum s;
            std::vector<double> vals;
            for (long i = 0; i < m_inner; ++i) {
                const DeltaSample ds = sample_delta_inner(F, key, d, z, R, static_cast<std::uint64_t>(i));
                s.add(ds.value);
                if (out_vals) vals.push_back(ds.value);
            }
            if (out_vals) *out_vals = std::move(vals);
            return s.sum / static_cast<double>(m_inner);
        };
        std::vector<double> vals0;
        f0[j] = inner_mean(origin, &vals0);
        inner_var0[j] = vals0.size() > 1 ? sample_variance(vals0) / static_cast<double>(m_inner) : 0.0;
        for (long l = 0; l < L; ++l) {
            if (lags[l] == origin)
                fz[l][j] = f0[j];
            else
                fz[l][j] = inner_mean(lags[l], nullptr);
        }
    });

    std::vector<CovariancePoint> out;
    for (long l = 0; l < L; ++l) {
        CovariancePoint p;
        p.lag = lags[l];
        const long Rn = cfg.replicates;
        std::vector<double> prod(Rn);
        for (long j = 0; j < Rn; ++j) prod[j] = f0[j] * fz[l][j];
        const double mp = mean(prod), ma = mean(f0), mb = mean(fz[l]);
        p.cov = mp - ma * mb;
        // jackknife over replicates
        std::vector<double> loo(Rn);
        KahanSum sp, sa, sb;
        for (long j = 0; j < Rn; ++j) {
            sp.add(prod[j]);
            sa.add(f0[j]);
            sb.add(fz[l][j]);
        }
        for (long j = 0; j < Rn; ++j) {
            const double n1 = static_cast<double>(Rn - 1);
            loo[j] = (sp.sum - prod[j]) / n1 - ((sa.sum - f0[j]) / n1) * ((sb.sum - fz[l][j]) / n1);
        }
        const double lm = mean(loo);
        double acc = 0.0;
        for (double v : loo) acc += (v - lm) * (v - lm);
        p.se = std::sqrt(acc * static_cast<double>(Rn - 1) / static_cast<double>(Rn));
        if (lags[l] == origin) p.inner_bias = mean(inner_var0);
        out.push_back(p);
    }
    return out;
}

}  // namespace sglab

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sglab/estimators.hpp"

namespace sglab {

struct MeanCurve {
    std::vector<double> ns;
    std::vector<double> means;
    std::vector<double> ses;

    double at(double n) const;     // mean for grid point n
    double se_at(double n) const;
};

// Replicate pool for centering; the pool seed space is disjoint from path seeds.
MeanCurve mean_curve(const FunctionalSpec& F, ProcessKind process, int d,
                     const WindowGeometry& base_geometry, std::span<const double> n_grid,
                     long pool_replicates, std::uint64_t seed, int threads = 1);

// One realization of H along nested windows with the iterated-logarithm
// normalization R_n = (H - Ê[H]) / sqrt(2 n log log n).
struct LilPath {
    long replicate_id = 0;
    std::vector<double> ns;
    std::vector<double> centered;    // H - Ê[H]
    std::vector<double> normalized;  // R_n
};

struct LilConfig {
    long paths = 50;
    long pool_replicates = 500;
    std::uint64_t seed = 0;
    int threads = 1;
    double tail_fraction = 0.1;  // envelope tail starts at max(n) * fraction
    double sigma_ref = 1.0;      // theoretical scale the envelope is compared to
    double envelope_factor = 1.3;
};

struct LilResult {
    std::vector<LilPath> paths;
    std::vector<double> tail_max;     // per path, max |R_n| over the grid tail
    double envelope = 0.0;            // envelope_factor * sigma_ref
    double pass_fraction = 0.0;       // share of paths with tail_max <= envelope
    double centering_se_worst = 0.0;  // largest pool SE propagated into R_n units
    MeanCurve pool;
};

// Geometric grid n_k = ceil(n0 * factor^k), deduplicated.
std::vector<double> geometric_grid(double n0, double factor, double n_max);

LilResult lil_experiment(const FunctionalSpec& F, ProcessKind process, int d,
                         const WindowGeometry& base_geometry, std::span<const double> n_grid,
                         const LilConfig& cfg);

struct CltResult {
    double ks_statistic = 0.0;
    double sigma2_used = 0.0;
    long replicates = 0;
};

// KS distance of (H - Ê[H]) / sqrt(n v̂) against the standard normal, with
// v̂ = σ̂² under Poisson sampling and τ̂² under binomial sampling.
CltResult clt_experiment(const FunctionalSpec& F, ProcessKind process, int d, double n,
                         long replicates, std::uint64_t seed, int threads = 1,
                         std::optional<double> variance_override = {});

struct SipConfig {
    double n_max = 400.0;
    double block_len = 40.0;
    long paths = 400;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<double> base = {1.0};  // the (d-1)-dimensional box D
    long defect_replicates = 0;        // 0 disables the binomial defect branch
};

struct SipReport {
    // variance regression Var(H(Q_n)) ~ nu2 * n + intercept
    double nu2_slope = 0.0, nu2_slope_se = 0.0, nu2_intercept = 0.0, variance_fit_r2 = 0.0;
    std::vector<double> grid_ns;
    std::vector<double> variance_values;  // Var̂ at each grid n (not divided by n)
    std::vector<double> variance_ses;

    // centered increments over disjoint blocks
    std::vector<std::vector<double>> increment_correlation;  // [i][j]
    double correlation_se = 0.0;                             // 1/sqrt(paths-3)
    std::vector<double> block_ks;                            // per-block normality

    // binomial branch: |Ê[H(U_{n,N_n}) - H(U_{n,n})]| with log-log exponent fit
    std::vector<double> defect_ns;
    std::vector<double> defect_values;
    std::vector<double> defect_ses;
    double defect_exponent = 0.0;
    double defect_fit_r2 = 0.0;
    bool has_defect = false;
};

SipReport sip_experiment(const FunctionalSpec& F, ProcessKind process, int d, const SipConfig& cfg);

}  // namespace sglab

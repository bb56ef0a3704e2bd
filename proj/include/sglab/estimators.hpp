#pragma once

#include <string>
#include <vector>

#include "sglab/stabilization.hpp"

namespace sglab {

struct EstimatorConfig {
    double R = 0.0;  // truncation radius; 0 means take it from the certificate
    long replicates = 10000;
    std::uint64_t seed = 0;
    int threads = 1;
    long inner = 8;  // inner replicates for covariance_curve
};

struct EstimateReport {
    double estimate = 0.0;
    double std_error = 0.0;
    long replicates = 0;
    std::string method;
    std::string config_hash;
    std::uint64_t seed = 0;

    // cross-check route carried alongside the primary estimate
    bool has_cross = false;
    double cross_estimate = 0.0;
    double cross_se = 0.0;
    bool cross_flagged = false;   // disagreement beyond 3 joint SE
    bool warning_nonpositive = false;
};

// α = E[add-one cost at the origin], estimated on Poisson balls. The report
// carries the independent-seed cross-check mean(Δ(0,∞)·P(Q_0)).
EstimateReport alpha_hat(const FunctionalSpec& F, int d, const EstimatorConfig& cfg);

// σ² = E[E[Δ(0,∞)|F_0]²] via the shared-past paired product.
EstimateReport sigma2_hat(const FunctionalSpec& F, int d, const EstimatorConfig& cfg);

// τ² via the paired product of (Δ − α̂ Δ'); carries the σ̂² − α̂² identity check.
EstimateReport tau2_hat(const FunctionalSpec& F, int d, const EstimatorConfig& cfg);

enum class ProcessKind { poisson, binomial };

struct VarianceCurve {
    std::vector<double> ns;
    std::vector<double> values;  // Var̂(H)/n
    std::vector<double> ses;     // jackknife
};

VarianceCurve direct_variance(const FunctionalSpec& F, ProcessKind process, int d,
                              std::span<const double> n_grid, long replicates,
                              std::uint64_t seed, int threads = 1);

struct CovariancePoint {
    CubeIndex lag;
    double cov = 0.0;
    double se = 0.0;
    double inner_bias = 0.0;  // nonzero only at lag 0 (inner-average bias bound)
};

// Cov(F_0, F_z) from inner-averaged conditional means on one shared
// realization; futures of distinct cubes ride on disjoint streams.
std::vector<CovariancePoint> covariance_curve(const FunctionalSpec& F, int d,
                                              const EstimatorConfig& cfg,
                                              std::span<const CubeIndex> lags);

// Stabilized add-one cost at the origin on a Poisson ball; doubles the ball
// for functionals whose stabilization radius is random.
double add_one_cost_at_origin(const FunctionalSpec& F, const ProcessKey& key, int d, double R);

}  // namespace sglab

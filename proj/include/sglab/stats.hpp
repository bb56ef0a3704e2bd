#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace sglab {

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // denominator n-1
double std_error_of_mean(std::span<const double> xs);

// Jackknife standard error of the sample variance.
double jackknife_se_of_variance(std::span<const double> xs);

// Kahan-compensated accumulator.
struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

struct LinearFit {
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
    double slope_se = 0.0;
};

// Ordinary least squares y = a + b x with the usual residual-based slope SE.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);

// Kolmogorov-Smirnov sup-distance between the empirical distribution of the
// samples, studentized by their own mean and SD, and the standard normal.
// Throws DegenerateSample when the SD is zero.
double ks_normal(std::span<const double> samples);

// KS distance of already-standardized samples against the standard normal.
double ks_against_standard_normal(std::vector<double> standardized);

// Pearson correlation.
double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace sglab

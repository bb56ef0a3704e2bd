#include "sglab/stats.hpp"

#include <algorithm>
#include <stdexcept>

#include "sglab/errors.hpp"

namespace sglab {

double mean(std::span<const double> xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return xs.empty() ? 0.0 : s.sum / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    const size_t n = xs.size();
    if (n < 2) return 0.0;
    const double m = mean(xs);
    KahanSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.sum / static_cast<double>(n - 1);
}

double std_error_of_mean(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

double jackknife_se_of_variance(std::span<const double> xs) {
    const long n = static_cast<long>(xs.size());
    if (n < 3) return 0.0;
    // Leave-one-out variances from sufficient statistics.
    KahanSum s1, s2;
    for (double x : xs) {
        s1.add(x);
        s2.add(x * x);
    }
    const double S1 = s1.sum, S2 = s2.sum;
    std::vector<double> loo(n);
    for (long i = 0; i < n; ++i) {
        const double m = (S1 - xs[i]) / (n - 1);
        const double ss = S2 - xs[i] * xs[i];
        loo[i] = (ss - (n - 1) * m * m) / (n - 2);
    }
    const double lm = mean(loo);
    KahanSum dev;
    for (double v : loo) dev.add((v - lm) * (v - lm));
    return std::sqrt(dev.sum * static_cast<double>(n - 1) / static_cast<double>(n));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit needs two same-length series");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    f.slope_se = n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2) / sxx) : 0.0;
    return f;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_against_standard_normal(std::vector<double> zs) {
    std::sort(zs.begin(), zs.end());
    const double n = static_cast<double>(zs.size());
    double d = 0.0;
    for (size_t i = 0; i < zs.size(); ++i) {
        const double F = normal_cdf(zs[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - F);
        d = std::max(d, F - static_cast<double>(i) / n);
    }
    return d;
}

double ks_normal(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("ks_normal needs at least 2 samples");
    const double m = mean(samples);
    const double sd = std::sqrt(sample_variance(samples));
    if (sd == 0.0) throw DegenerateSample("ks_normal: zero sample standard deviation");
    std::vector<double> zs(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) zs[i] = (samples[i] - m) / sd;
    return ks_against_standard_normal(std::move(zs));
}

double correlation(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("correlation needs two same-length series");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace sglab

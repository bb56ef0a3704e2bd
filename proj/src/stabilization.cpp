#include "sglab/stabilization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "sglab/errors.hpp"
#include "sglab/rng.hpp"
#include "sglab/stats.hpp"

namespace sglab {

std::optional<RadiusCertificate> certified_radius(const FunctionalSpec& F) {
    switch (F.kind) {
        case FunctionalSpec::Kind::count:
            return RadiusCertificate{1e-12, RadiusCertificate::Kind::hard_threshold, 0, false};
        case FunctionalSpec::Kind::euler:
        case FunctionalSpec::Kind::components:
            return RadiusCertificate{F.radius, RadiusCertificate::Kind::hard_threshold, 0, false};
        case FunctionalSpec::Kind::knn_length:
            return std::nullopt;
    }
    return std::nullopt;
}

namespace {

bool point_in_closed_triangle(std::span<const double> p, const double a[2], const double b[2],
                              const double c[2]) {
    auto cross = [](double ox, double oy, double ax, double ay, double bx, double by) {
        return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
    };
    const double d1 = cross(a[0], a[1], b[0], b[1], p[0], p[1]);
    const double d2 = cross(b[0], b[1], c[0], c[1], p[0], p[1]);
    const double d3 = cross(c[0], c[1], a[0], a[1], p[0], p[1]);
    const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(neg && pos);
}

}  // namespace

RadiusCertificate knn_triangle_radius(const PointCloud& P, int k, std::span<const double> origin) {
    if (P.dim() != 2) throw std::invalid_argument("triangle criterion is a planar construction (d = 2)");
    if (P.size() < 6L * (k + 1)) throw NotCertifiable("fewer than 6(k+1) points in total");

    double window_extent = std::numeric_limits<double>::infinity();
    if (P.window) {
        window_extent = 0.0;
        for (int i = 0; i < 2; ++i) window_extent = std::max(window_extent, P.window->hi[i] - P.window->lo[i]);
    }

    const double kPi = 3.14159265358979323846;
    for (double r = 0.5; r <= (std::isfinite(window_extent) ? window_extent : 64.0); r *= 2.0) {
        const double edge = r / 4.0;
        bool all_full = true;
        for (int j = 0; j < 6 && all_full; ++j) {
            // equilateral triangle with one vertex at the origin
            const double t0 = kPi / 3.0 * j;
            const double t1 = kPi / 3.0 * (j + 1);
            const double a[2] = {origin[0], origin[1]};
            const double b[2] = {origin[0] + edge * std::cos(t0), origin[1] + edge * std::sin(t0)};
            const double c[2] = {origin[0] + edge * std::cos(t1), origin[1] + edge * std::sin(t1)};
            long inside = 0;
            for (long i = 0; i < P.size() && inside <= k; ++i)
                if (point_in_closed_triangle(P.pt(i), a, b, c)) ++inside;
            all_full = inside >= k + 1;
        }
        if (all_full) {
            RadiusCertificate cert;
            cert.kind = RadiusCertificate::Kind::triangle_criterion;
            cert.trials = 0;
            const double margin = P.window ? P.window->boundary_margin(origin)
                                           : std::numeric_limits<double>::infinity();
            if (margin >= r) {
                cert.radius = r;
                cert.boundary_case = false;
            } else {
                cert.radius = 9.0 * r;  // conservative two-edge bound
                cert.boundary_case = true;
            }
            return cert;
        }
    }
    throw NotCertifiable("no grid radius up to the window size satisfies the triangle criterion");
}

std::vector<double> default_r_schedule() {
    std::vector<double> s;
    for (int i = 0; i <= 8; ++i) s.push_back(0.5 * std::pow(2.0, i));
    return s;
}

namespace {

constexpr std::uint64_t kPtShell = 0x7368656cull;  // "shel"

// Poisson(unit intensity) configuration in the closed shell B(0,3r)\B(0,r).
PointCloud shell_configuration(const ProcessKey& key, int d, double r, std::uint64_t trial) {
    DrawStream s(derive_state({key.master_seed, key.stream_id, key.replicate_id, kPtShell, trial,
                               std::bit_cast<std::uint64_t>(r), static_cast<std::uint64_t>(d)}));
    const double lo = r, hi = 3.0 * r;
    double vol_box = 1.0;
    for (int i = 0; i < d; ++i) vol_box *= 2.0 * hi;
    // expected count = shell volume; rejection-sample positions from the box
    const double vol_ball_unit = std::pow(3.14159265358979323846, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    const double vol_shell = vol_ball_unit * (std::pow(hi, d) - std::pow(lo, d));
    // Poisson(vol_shell) via thinning of Poisson(1) cubes would be overkill;
    // use the product method with the exact mean.
    int n = 0;
    {
        double p = s.next_unit();
        const double L = std::exp(-vol_shell);
        while (p > L) {
            p *= s.next_unit();
            ++n;
        }
    }
    PointCloud A(d);
    std::vector<double> x(d);
    for (int i = 0; i < n; ++i) {
        for (;;) {
            for (int t = 0; t < d; ++t) x[t] = -hi + 2.0 * hi * s.next_unit();
            const double q = dist2(x, std::vector<double>(d, 0.0));
            if (q > lo * lo && q <= hi * hi) break;
        }
        A.push(x);
    }
    return A;
}

bool costs_equal(const FunctionalSpec& F, double a, double b) {
    if (F.kind == FunctionalSpec::Kind::knn_length)
        return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    return a == b;
}

}  // namespace

RadiusCertificate empirical_radius(const FunctionalSpec& F, const ProcessKey& key, int d,
                                   long trials, std::span<const double> r_schedule) {
    if (trials < 1) throw std::invalid_argument("empirical_radius needs at least one trial");
    const std::vector<double> origin(d, 0.0);
    for (double r : r_schedule) {
        const PointCloud core = poisson_ball(key, origin, r);
        bool constant = true;
        std::optional<double> ref;
        for (long t = 0; t <= trials && constant; ++t) {
            PointCloud cfg = core;
            if (t > 0) {  // t = 0 probes the bare core
                const PointCloud A = shell_configuration(key, d, r, static_cast<std::uint64_t>(t));
                for (long i = 0; i < A.size(); ++i) cfg.push(A.pt(i));
            }
            double c;
            try {
                c = add_one_cost(F, cfg, origin);
            } catch (const KnnUndefined&) {
                constant = false;
                break;
            }
            if (!ref)
                ref = c;
            else
                constant = costs_equal(F, *ref, c);
        }
        if (constant)
            return RadiusCertificate{r, RadiusCertificate::Kind::empirical_falsification, trials, false};
    }
    throw NotCertifiable("r_schedule exhausted without a stable add-one cost");
}

double delta_truncation_radius(const FunctionalSpec& F, int d, double user_radius) {
    const double half_diag = 0.5 * std::sqrt(static_cast<double>(d));
    const auto cert = certified_radius(F);
    const double base = cert ? cert->radius : 0.0;
    // points interacting with the resampled cube live within base of Q_z
    return std::max(user_radius, base + half_diag) + 1e-9;
}

namespace {

void append_filtered_ball(PointCloud& dst, const PointCloud& src, std::span<const double> center,
                          double R, const std::optional<Box>& clip) {
    const double R2 = R * R;
    for (long i = 0; i < src.size(); ++i) {
        if (dist2(src.pt(i), center) > R2) continue;
        if (clip && !clip->contains(src.pt(i))) continue;
        dst.push(src.pt(i));
    }
}

struct DeltaParts {
    PointCloud original;   // P ∩ B(z,R)
    PointCloud resampled;  // P''_z ∩ B(z,R)
    long base_cube_count = 0;
    long replacement_cube_count = 0;
};

// Shared past = cubes y ⪯ z inside the ball from the base stream. future_tag
// selects the streams for the cubes y ≻ z and for the Q_z replacement.
DeltaParts assemble_delta_clouds(const ProcessKey& key, int d, const CubeIndex& z, double R,
                                 std::uint64_t future_tag, const std::optional<Box>& clip) {
    std::vector<double> center(d);
    for (int i = 0; i < d; ++i) center[i] = static_cast<double>(z.z[i]);

    DeltaParts parts{PointCloud(d), PointCloud(d)};
    for (const auto& y : cubes_touching_ball(center, R, d)) {
        const bool past = !(z < y);  // y ⪯ z
        const PointCloud pts = past ? cube_points(key, y)
                                    : cube_points(key.with_stream(aux_future_stream(z, future_tag)), y);
        append_filtered_ball(parts.original, pts, center, R, clip);
        if (y == z) {
            const PointCloud repl =
                cube_points(key.with_stream(aux_replacement_stream(z, future_tag)), y);
            append_filtered_ball(parts.resampled, repl, center, R, clip);
            parts.base_cube_count = pts.size();
            parts.replacement_cube_count = repl.size();
        } else {
            append_filtered_ball(parts.resampled, pts, center, R, clip);
        }
    }
    return parts;
}

}  // namespace

DeltaSample sample_delta_finite(const FunctionalSpec& F, const ProcessKey& key,
                                const WindowGeometry& geometry, int d, const CubeIndex& z) {
    const PointCloud p = poisson_window(key, geometry, d);
    const PointCloud pz = resampled_window(key, geometry, d, z, 1);
    DeltaSample s;
    s.value = evaluate(F, p) - evaluate(F, pz);
    s.z = z;
    s.kind = DeltaSample::Kind::finite_window;
    s.window_n = geometry.n;
    s.base_cube_count = cube_points(key, z).size();
    s.replacement_cube_count = cube_points(key.with_stream(1), z).size();
    return s;
}

DeltaSample sample_delta_stabilized(const FunctionalSpec& F, const ProcessKey& key, int d,
                                    const CubeIndex& z, double R) {
    std::vector<double> center(d);
    for (int i = 0; i < d; ++i) center[i] = static_cast<double>(z.z[i]);
    const double Re = delta_truncation_radius(F, d, R);
    PointCloud orig(d), res(d);
    for (const auto& y : cubes_touching_ball(center, Re, d)) {
        const PointCloud pts = cube_points(key, y);
        append_filtered_ball(orig, pts, center, Re, std::nullopt);
        if (y == z) {
            const PointCloud repl = cube_points(key.with_stream(1), y);
            append_filtered_ball(res, repl, center, Re, std::nullopt);
        } else {
            append_filtered_ball(res, pts, center, Re, std::nullopt);
        }
    }
    DeltaSample s;
    s.value = evaluate(F, orig) - evaluate(F, res);
    s.z = z;
    s.truncation_radius = Re;
    s.kind = DeltaSample::Kind::stabilized;
    s.base_cube_count = cube_points(key, z).size();
    s.replacement_cube_count = cube_points(key.with_stream(1), z).size();
    return s;
}

DeltaSample sample_delta_inner(const FunctionalSpec& F, const ProcessKey& key, int d,
                               const CubeIndex& z, double R, std::uint64_t inner_tag,
                               const std::optional<WindowGeometry>& clip) {
    std::optional<Box> box;
    if (clip) box = clip->box(d);
    std::vector<double> center(d);
    for (int i = 0; i < d; ++i) center[i] = static_cast<double>(z.z[i]);

    // Count and Euler differences are exactly local; component merges and kNN
    // rewiring can reach farther, so those take the doubling schedule.
    const bool exact_local = F.kind == FunctionalSpec::Kind::count ||
                             F.kind == FunctionalSpec::Kind::euler;
    double Re = delta_truncation_radius(F, d, R);
    DeltaSample out;
    out.z = z;
    out.kind = DeltaSample::Kind::stabilized;

    if (exact_local) {
        const auto parts = assemble_delta_clouds(key, d, z, Re, inner_tag, box);
        out.value = evaluate(F, parts.original) - evaluate(F, parts.resampled);
        out.truncation_radius = Re;
        out.base_cube_count = parts.base_cube_count;
        out.replacement_cube_count = parts.replacement_cube_count;
        return out;
    }

    // Random stabilization radius: double R until the value settles.
    constexpr int kMaxDoublings = 5;
    std::optional<double> prev;
    for (int step = 0; step <= kMaxDoublings; ++step, Re *= 2.0) {
        const auto parts = assemble_delta_clouds(key, d, z, Re, inner_tag, box);
        double v;
        try {
            v = evaluate(F, parts.original) - evaluate(F, parts.resampled);
        } catch (const KnnUndefined&) {
            prev.reset();
            continue;
        }
        if (prev && costs_equal(F, *prev, v)) {
            out.value = v;
            out.truncation_radius = Re;
            out.base_cube_count = parts.base_cube_count;
            out.replacement_cube_count = parts.replacement_cube_count;
            return out;
        }
        prev = v;
    }
    throw ConvergenceNotReached("delta value still changing at the end of the doubling schedule");
}

std::pair<DeltaSample, DeltaSample> sample_delta_pair(const FunctionalSpec& F, const ProcessKey& key,
                                                      int d, const CubeIndex& z, double R,
                                                      const std::optional<WindowGeometry>& clip) {
    return {sample_delta_inner(F, key, d, z, R, 0, clip),
            sample_delta_inner(F, key, d, z, R, 1, clip)};
}

long sample_delta_prime(const ProcessKey& key, const CubeIndex& z) {
    return cube_points(key, z).size() - cube_points(key.with_stream(1), z).size();
}

TailFit radius_tail_fit(std::span<const double> radii) {
    const long n = static_cast<long>(radii.size());
    if (n < 50) throw std::invalid_argument("radius_tail_fit needs at least 50 samples");
    std::vector<double> sorted(radii.begin(), radii.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw DegenerateFit("all radii equal");

    // survival evaluated at each distinct radius value
    std::vector<double> xs, ys;
    const double min_surv = 10.0 / static_cast<double>(n);
    for (long i = 0; i < n;) {
        long j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double surv = static_cast<double>(n - j) / static_cast<double>(n);
        if (surv >= min_surv) {
            xs.push_back(sorted[i]);
            ys.push_back(std::log(surv));
        }
        i = j;
    }
    if (xs.size() < 2) throw DegenerateFit("not enough distinct radii above the survival floor");
    const LinearFit f = linear_fit(xs, ys);
    TailFit t;
    t.c1 = std::exp(f.intercept);
    t.c2 = -f.slope;
    t.r_squared = f.r_squared;
    t.n_samples = n;
    return t;
}

}  // namespace sglab

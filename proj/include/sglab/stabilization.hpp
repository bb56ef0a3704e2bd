#pragma once

#include <optional>
#include <vector>

#include "sglab/functionals.hpp"
#include "sglab/process.hpp"

namespace sglab {

struct RadiusCertificate {
    enum class Kind { hard_threshold, triangle_criterion, empirical_falsification };
    double radius = 0.0;
    Kind kind = Kind::hard_threshold;
    long trials = 0;           // 0 for certified kinds
    bool boundary_case = false;
};

// One realization of a cube-resample difference. The Q_z occupation counts of
// the base and the replacement stream are carried along so Δ'(z,·) can be
// formed on exactly the streams that produced Δ.
struct DeltaSample {
    enum class Kind { finite_window, stabilized };
    double value = 0.0;
    CubeIndex z;
    double truncation_radius = 0.0;
    Kind kind = Kind::stabilized;
    double window_n = 0.0;
    long base_cube_count = 0;         // P(Q_z)
    long replacement_cube_count = 0;  // P'(Q_z) for the stream used

    long delta_prime() const { return base_cube_count - replacement_cube_count; }
};

// Deterministic certificates. Euler(r) and Components(r) map to radius r,
// Count to an arbitrarily small positive radius, KnnLength to none (its
// stabilization radius is random). Note the component count can couple
// through connectivity paths outside any fixed ball, so its certificate is
// sound for the clique structure but falsifiable for merges; see the tests.
std::optional<RadiusCertificate> certified_radius(const FunctionalSpec& F);

// Constructive criterion for the kNN length in the plane: the smallest grid
// radius r = r0*2^i such that each of 6 equilateral triangles of edge r/4
// hanging off the origin holds at least k+1 points. Interior origins get
// radius r; origins nearer the boundary than r get the conservative 9r.
RadiusCertificate knn_triangle_radius(const PointCloud& P, int k, std::span<const double> origin);

// One-sided falsification: smallest scheduled r such that the add-one cost at
// the origin computed on (P ∩ B(0,r)) ∪ A is constant over `trials` random
// shell configurations A ⊂ B(0,3r) \ B(0,r).
RadiusCertificate empirical_radius(const FunctionalSpec& F, const ProcessKey& key, int d,
                                   long trials, std::span<const double> r_schedule);

std::vector<double> default_r_schedule();

// Raw Δ(z,n) = H(P_n) − H(P''_{n,z}) on the window, canonical streams.
DeltaSample sample_delta_finite(const FunctionalSpec& F, const ProcessKey& key,
                                const WindowGeometry& geometry, int d, const CubeIndex& z);

// Truncated Δ(z,∞) = H(P ∩ B(z,R)) − H(P''_z ∩ B(z,R)), canonical streams.
DeltaSample sample_delta_stabilized(const FunctionalSpec& F, const ProcessKey& key, int d,
                                    const CubeIndex& z, double R);

// Two draws of Δ(z,∞) truncated at R that share the lexicographic past inside
// B(z,R) and use independent futures and cube replacements, so they are
// conditionally i.i.d. given the filtration through z. E[Δ1·Δ2] estimates the
// second moment of the conditional mean. Exponentially stabilizing functionals
// get a doubling schedule on R with a convergence check.
std::pair<DeltaSample, DeltaSample> sample_delta_pair(const FunctionalSpec& F, const ProcessKey& key,
                                                      int d, const CubeIndex& z, double R,
                                                      const std::optional<WindowGeometry>& clip = {});

// Same construction with explicit inner tags; equal tags give identical values.
DeltaSample sample_delta_inner(const FunctionalSpec& F, const ProcessKey& key, int d,
                               const CubeIndex& z, double R, std::uint64_t inner_tag,
                               const std::optional<WindowGeometry>& clip = {});

// Δ'(z,∞) = P(Q_z) − P'(Q_z).
long sample_delta_prime(const ProcessKey& key, const CubeIndex& z);

// Margin added to a stabilization radius so the truncation ball covers every
// point whose insertion interacts with cube Q_z.
double delta_truncation_radius(const FunctionalSpec& F, int d, double user_radius);

struct TailFit {
    double c1 = 0.0, c2 = 0.0, r_squared = 0.0;
    long n_samples = 0;
};

// Least-squares fit of the log empirical survival function against r over the
// range where survival >= 10/n. Throws DegenerateFit when all radii coincide.
TailFit radius_tail_fit(std::span<const double> radii);

}  // namespace sglab

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sglab {

// Axis-aligned closed box [lo_i, hi_i]^d.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(std::span<const double> x) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
        return v;
    }

    // Euclidean distance from x to the boundary (0 if outside).
    double boundary_margin(std::span<const double> x) const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim(); ++i) {
            m = std::min(m, x[i] - lo[i]);
            m = std::min(m, hi[i] - x[i]);
        }
        return std::max(m, 0.0);
    }
};

struct Ball {
    std::vector<double> center;
    double radius = 0.0;
};

// Observation window. Cubic(n) is the centered cube of volume n; Stretched is
// base x [0, n] where base is a (d-1)-dimensional box of given side lengths
// anchored at the origin, stretching along the last axis.
struct WindowGeometry {
    enum class Kind { cubic, stretched };
    Kind kind = Kind::cubic;
    double n = 1.0;
    std::vector<double> base;  // stretched only: d-1 side lengths

    static WindowGeometry cubic(double n) { return {Kind::cubic, n, {}}; }
    static WindowGeometry stretched(std::vector<double> base, double n) {
        return {Kind::stretched, n, std::move(base)};
    }

    Box box(int d) const {
        Box b;
        b.lo.resize(d);
        b.hi.resize(d);
        if (kind == Kind::cubic) {
            const double half = 0.5 * std::pow(n, 1.0 / d);
            for (int i = 0; i < d; ++i) {
                b.lo[i] = -half;
                b.hi[i] = half;
            }
        } else {
            for (int i = 0; i < d - 1; ++i) {
                b.lo[i] = 0.0;
                b.hi[i] = i < static_cast<int>(base.size()) ? base[i] : 1.0;
            }
            b.lo[d - 1] = 0.0;
            b.hi[d - 1] = n;
        }
        return b;
    }

    // Exact by construction; avoids the round trip through pow().
    double volume(int /*d*/) const {
        if (kind == Kind::cubic) return n;
        double v = n;
        for (double s : base) v *= s;
        return v;
    }
};

// Flat row-major point storage; geometry is carried along when known.
class PointCloud {
  public:
    PointCloud() = default;
    explicit PointCloud(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    long size() const { return dim_ == 0 ? 0 : static_cast<long>(xs_.size()) / dim_; }

    std::span<const double> pt(long i) const { return {xs_.data() + i * dim_, static_cast<size_t>(dim_)}; }

    void push(std::span<const double> x) { xs_.insert(xs_.end(), x.begin(), x.end()); }
    void push(const std::vector<double>& x) { xs_.insert(xs_.end(), x.begin(), x.end()); }

    double dist2(long i, long j) const {
        const double* a = xs_.data() + i * dim_;
        const double* b = xs_.data() + j * dim_;
        double s = 0.0;
        for (int k = 0; k < dim_; ++k) {
            const double d = a[k] - b[k];
            s += d * d;
        }
        return s;
    }

    const std::vector<double>& raw() const { return xs_; }
    std::vector<double>& raw() { return xs_; }

    bool contains_point(std::span<const double> x) const {
        for (long i = 0; i < size(); ++i) {
            bool eq = true;
            for (int k = 0; k < dim_; ++k)
                if (pt(i)[k] != x[k]) { eq = false; break; }
            if (eq) return true;
        }
        return false;
    }

    PointCloud with_point(std::span<const double> x) const {
        PointCloud c = *this;
        c.push(x);
        return c;
    }

    std::optional<Box> window;
    std::optional<Ball> ball;

  private:
    int dim_ = 0;
    std::vector<double> xs_;
};

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace sglab

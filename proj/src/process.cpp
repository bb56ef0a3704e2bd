#include "sglab/process.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "sglab/rng.hpp"

namespace sglab {

namespace {

// Purpose tags keep the cube-point, ordering-tag and top-up streams disjoint.
constexpr std::uint64_t kPtCube = 0x63756265ull;    // "cube"
constexpr std::uint64_t kPtOrder = 0x6f726465ull;   // "orde"
constexpr std::uint64_t kPtTopup = 0x746f7075ull;   // "topu"
constexpr std::uint64_t kPtAuxF = 0x61757866ull;    // "auxf"
constexpr std::uint64_t kPtAuxR = 0x61757872ull;    // "auxr"

std::uint64_t cube_state(const ProcessKey& key, const CubeIndex& z, std::uint64_t purpose) {
    std::uint64_t h = derive_state({key.master_seed, key.stream_id, key.replicate_id, purpose,
                                    static_cast<std::uint64_t>(z.z.size())});
    return derive_state_range(h, z.z.begin(), z.z.end());
}

}  // namespace

std::uint64_t aux_future_stream(const CubeIndex& z, std::uint64_t inner) {
    std::uint64_t h = derive_state({kPtAuxF, inner, static_cast<std::uint64_t>(z.z.size())});
    return 2 + derive_state_range(h, z.z.begin(), z.z.end());
}

std::uint64_t aux_replacement_stream(const CubeIndex& z, std::uint64_t inner) {
    std::uint64_t h = derive_state({kPtAuxR, inner, static_cast<std::uint64_t>(z.z.size())});
    return 2 + derive_state_range(h, z.z.begin(), z.z.end());
}

PointCloud cube_points(const ProcessKey& key, const CubeIndex& z) {
    const int d = static_cast<int>(z.z.size());
    DrawStream s(cube_state(key, z, kPtCube));
    const int count = s.next_poisson1();

    PointCloud cloud(d);
    std::vector<double> x(d);
    for (int i = 0; i < count; ++i) {
        for (;;) {
            for (int k = 0; k < d; ++k) x[k] = (static_cast<double>(z.z[k]) - 0.5) + s.next_unit();
            if (!cloud.contains_point(x)) break;  // duplicate: bump the draw counter
        }
        cloud.push(x);
    }
    return cloud;
}

std::vector<CubeIndex> cubes_touching(const Box& box) {
    const int d = box.dim();
    std::vector<long long> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = static_cast<long long>(std::ceil(box.lo[i] - 0.5));
        hi[i] = static_cast<long long>(std::floor(box.hi[i] + 0.5));
    }
    std::vector<CubeIndex> out;
    std::vector<long long> cur(lo);
    for (;;) {
        out.push_back(CubeIndex{cur});
        int k = d - 1;
        while (k >= 0) {
            if (++cur[k] <= hi[k]) break;
            cur[k] = lo[k];
            --k;
        }
        if (k < 0) break;
    }
    return out;
}

std::vector<CubeIndex> cubes_touching_ball(std::span<const double> center, double radius, int d) {
    Box bb;
    bb.lo.resize(d);
    bb.hi.resize(d);
    for (int i = 0; i < d; ++i) {
        bb.lo[i] = center[i] - radius;
        bb.hi[i] = center[i] + radius;
    }
    std::vector<CubeIndex> out;
    for (auto& z : cubes_touching(bb)) {
        // distance from center to the closed cube
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            const double lo = static_cast<double>(z.z[i]) - 0.5;
            const double hi = static_cast<double>(z.z[i]) + 0.5;
            const double c = std::clamp(center[i], lo, hi);
            const double dd = center[i] - c;
            s += dd * dd;
        }
        if (s <= radius * radius) out.push_back(std::move(z));
    }
    return out;
}

PointCloud poisson_window(const ProcessKey& key, const WindowGeometry& geometry, int d) {
    if (geometry.volume(d) <= 0.0) throw std::invalid_argument("window volume must be positive");
    const Box box = geometry.box(d);
    PointCloud cloud(d);
    for (const auto& z : cubes_touching(box)) {
        const PointCloud c = cube_points(key, z);
        for (long i = 0; i < c.size(); ++i)
            if (box.contains(c.pt(i))) cloud.push(c.pt(i));
    }
    cloud.window = box;
    return cloud;
}

PointCloud poisson_ball(const ProcessKey& key, std::span<const double> center, double radius) {
    const int d = static_cast<int>(center.size());
    PointCloud cloud(d);
    const double r2 = radius * radius;
    for (const auto& z : cubes_touching_ball(center, radius, d)) {
        const PointCloud c = cube_points(key, z);
        for (long i = 0; i < c.size(); ++i)
            if (dist2(c.pt(i), center) <= r2) cloud.push(c.pt(i));
    }
    cloud.ball = Ball{std::vector<double>(center.begin(), center.end()), radius};
    return cloud;
}

PointCloud resampled_window(const ProcessKey& key, const WindowGeometry& geometry, int d,
                            const CubeIndex& z, std::uint64_t future_tag) {
    const Box box = geometry.box(d);
    PointCloud cloud(d);
    for (const auto& y : cubes_touching(box)) {
        const PointCloud c = y == z ? cube_points(key.with_stream(future_tag), y) : cube_points(key, y);
        for (long i = 0; i < c.size(); ++i)
            if (box.contains(c.pt(i))) cloud.push(c.pt(i));
    }
    cloud.window = box;
    return cloud;
}

long poisson_window_count(const ProcessKey& key, const WindowGeometry& geometry, int d) {
    const Box box = geometry.box(d);
    long n = 0;
    for (const auto& z : cubes_touching(box)) {
        const PointCloud c = cube_points(key, z);
        for (long i = 0; i < c.size(); ++i)
            if (box.contains(c.pt(i))) ++n;
    }
    return n;
}

PointCloud coupled_binomial(const ProcessKey& key, const WindowGeometry& geometry, int d, long m) {
    if (m < 1) throw std::invalid_argument("binomial process length m must be >= 1");
    const Box box = geometry.box(d);

    struct Slot {
        std::uint64_t tag;
        CubeIndex cube;
        int idx;
        std::vector<double> x;
    };
    std::vector<Slot> slots;
    for (const auto& z : cubes_touching(box)) {
        const PointCloud c = cube_points(key, z);
        for (long i = 0; i < c.size(); ++i) {
            if (!box.contains(c.pt(i))) continue;
            std::uint64_t h = cube_state(key, z, kPtOrder);
            h = mix64((h + kGolden) ^ static_cast<std::uint64_t>(i));
            slots.push_back(Slot{h, z, static_cast<int>(i),
                                 std::vector<double>(c.pt(i).begin(), c.pt(i).end())});
        }
    }
    // The tag is a keyed hash of the (cube, draw index) slot, independent of
    // the positions, so sorting by it is an exchangeable order of the Poisson
    // points and the m-prefix has the binomial-process law.
    std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        if (a.tag != b.tag) return a.tag < b.tag;
        if (!(a.cube == b.cube)) return a.cube < b.cube;
        return a.idx < b.idx;
    });

    const long n_count = static_cast<long>(slots.size());
    PointCloud cloud(d);
    for (long i = 0; i < std::min(m, n_count); ++i) cloud.push(slots[i].x);

    if (m > n_count) {
        // Per-window top-up stream: fold the bit pattern of the window's
        // volume parameter so each n owns its own i.i.d. uniforms.
        std::uint64_t h = derive_state({key.master_seed, key.stream_id, key.replicate_id, kPtTopup,
                                        static_cast<std::uint64_t>(geometry.kind == WindowGeometry::Kind::cubic ? 0 : 1),
                                        std::bit_cast<std::uint64_t>(geometry.n),
                                        static_cast<std::uint64_t>(d)});
        DrawStream s(h);
        std::vector<double> x(d);
        for (long j = 0; j < m - n_count; ++j) {
            for (;;) {
                for (int k = 0; k < d; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * s.next_unit();
                if (!cloud.contains_point(x)) break;
            }
            cloud.push(x);
        }
    }
    cloud.window = box;
    return cloud;
}

}  // namespace sglab

#pragma once

#include <cstdint>
#include <vector>

#include "sglab/geometry.hpp"

namespace sglab {

// Address of the lattice cube Q_z = z + [-1/2, 1/2]^d.
struct CubeIndex {
    std::vector<long long> z;

    static CubeIndex origin(int d) { return CubeIndex{std::vector<long long>(d, 0)}; }

    bool operator==(const CubeIndex& o) const { return z == o.z; }
    // Lexicographic order; drives the filtration past/future split.
    bool operator<(const CubeIndex& o) const { return z < o.z; }
};

// Streams: 0 is the base process, 1 the canonical replacement process, ids >= 2
// are auxiliary (inner-replicate futures, replacements, top-ups). Identical
// keys reproduce identical point sets bit-for-bit.
struct ProcessKey {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t replicate_id = 0;

    ProcessKey with_stream(std::uint64_t s) const { return {master_seed, s, replicate_id}; }
    ProcessKey with_replicate(std::uint64_t r) const { return {master_seed, stream_id, r}; }
};

// Auxiliary stream ids for the paired-future machinery. The hash keeps inner
// replicates of different resampled cubes on disjoint streams.
std::uint64_t aux_future_stream(const CubeIndex& z, std::uint64_t inner);
std::uint64_t aux_replacement_stream(const CubeIndex& z, std::uint64_t inner);

// Points of the process restricted to one cube: count is Poisson(1), positions
// i.i.d. uniform on Q_z, all determined by (key, z). Exact duplicates (a
// measure-zero event at finite precision) are redrawn from the same stream.
PointCloud cube_points(const ProcessKey& key, const CubeIndex& z);

// All cubes whose closed cube intersects the box / the closed ball.
std::vector<CubeIndex> cubes_touching(const Box& box);
std::vector<CubeIndex> cubes_touching_ball(std::span<const double> center, double radius, int d);

// Restriction of the global realization to a window. Nested windows under one
// key give nested point sets.
PointCloud poisson_window(const ProcessKey& key, const WindowGeometry& geometry, int d);

// Restriction to a closed ball.
PointCloud poisson_ball(const ProcessKey& key, std::span<const double> center, double radius);

// Same realization with cube Q_z replaced from the stream selected by
// future_tag (1 = canonical replacement process; higher tags are independent
// inner-replicate futures).
PointCloud resampled_window(const ProcessKey& key, const WindowGeometry& geometry, int d,
                            const CubeIndex& z, std::uint64_t future_tag);

// Count of the process on the window (the coupling's N_n).
long poisson_window_count(const ProcessKey& key, const WindowGeometry& geometry, int d);

// Coupled binomial process of length m on the window: the first m ∧ N_n points
// of the Poisson realization in a keyed exchangeable order, topped up with
// (m − N_n)+ i.i.d. uniform points from a per-window stream. m = N_n returns
// the Poisson restriction exactly.
PointCloud coupled_binomial(const ProcessKey& key, const WindowGeometry& geometry, int d, long m);

}  // namespace sglab

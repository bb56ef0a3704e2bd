#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace sglab {

// SplitMix64 finalizer. Used both as the stream stepper and as the word mixer
// when deriving sub-stream states, so every stream is addressable by a list of
// 64-bit words (seed, stream id, replicate, lattice coordinates, counters).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// Hash-chain a word list into a stream state. Order-sensitive by construction.
inline std::uint64_t derive_state(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x5851f42d4c957f2dull;
    for (std::uint64_t w : words) h = mix64((h + kGolden) ^ w);
    return h;
}

template <typename It>
inline std::uint64_t derive_state_range(std::uint64_t h0, It first, It last) {
    std::uint64_t h = h0;
    for (It it = first; it != last; ++it) h = mix64((h + kGolden) ^ static_cast<std::uint64_t>(*it));
    return h;
}

// Counter-based stream: state advances by the golden-ratio increment, output
// is the SplitMix64 finalizer. Identical states reproduce identical draws.
class DrawStream {
  public:
    explicit DrawStream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform on [0, 1), 53-bit mantissa.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Poisson(1) by Knuth's product-of-uniforms method.
    int next_poisson1() {
        constexpr double kExpNeg1 = 0.36787944117144233;
        int k = 0;
        double p = next_unit();
        while (p > kExpNeg1) {
            p *= next_unit();
            ++k;
        }
        return k;
    }

    // Exponential(rate) by inversion; guards against log(0).
    double next_exponential(double rate) {
        double u = next_unit();
        return -std::log(1.0 - u) / rate;  // 1-u in (0,1]
    }

  private:
    std::uint64_t state_;
};

}  // namespace sglab

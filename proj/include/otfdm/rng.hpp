// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "grid.hpp"

/**
 * Deterministic random number plumbing.
 *
 * Reproducibility contract: every random quantity in a campaign is drawn
 * from a stream addressed by (master_seed, drop_index, stream id). The
 * address is folded through splitmix64 into a seed for a mt19937_64
 * engine, and uniform/Gaussian variates are synthesized here from raw
 * 64-bit draws rather than through std::<distribution> types, whose
 * sequences the standard does not pin down. Identical addresses therefore
 * give bit-identical variates on any platform, in any thread.
 */

namespace otfdm {

/// Disjoint per-drop random streams.
enum class Stream : std::uint64_t {
    ChannelGains = 0x1001,
    DopplerSpeeds = 0x2002,
    Noise = 0x3003,
    DataBits = 0x4004,
    PilotSeq = 0x5005,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Fold a list of words into one well-mixed seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t state = 0x7f4a7c15ULL;
    std::uint64_t out = 0;
    for (std::uint64_t w : words) {
        state ^= w + 0x9e3779b97f4a7c15ULL + (out << 6) + (out >> 2);
        out = detail::splitmix64(state);
    }
    return out;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; draws are consumed in pairs.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian, unit variance: E|z|^2 = 1.
    cdbl cgauss() {
        const double re = gauss();
        const double im = gauss();
        return cdbl(re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0);
    }

    bool bit() { return (eng_() >> 63) != 0; }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stream addressed by (master seed, drop index, stream id).
inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t drop_index, Stream s) {
    return Rng(mix_seed({master_seed, drop_index, static_cast<std::uint64_t>(s)}));
}

}  // namespace otfdm

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

#include "grid.hpp"

/**
 * Gray-mapped QPSK at unit symbol energy.
 *
 * Bit pair (b0, b1) maps to ((1-2*b0) + j(1-2*b1)) / sqrt(2): b0 selects
 * the sign of the real part, b1 of the imaginary part, so adjacent
 * constellation points differ in exactly one bit.
 *
 * LLR convention: positive LLR means bit 0 is more likely. For a
 * Gray-mapped QPSK symbol observed as y = gain*x + w (w complex Gaussian
 * of variance v) the exact per-bit LLRs are linear in the matched-filter
 * output: LLR(b0) = 2*sqrt(2)*Re(conj(gain)*y)/v and likewise Im for b1;
 * max-log and exact coincide here.
 */

namespace otfdm {

inline cvec qpsk_map(const std::vector<std::uint8_t>& bits) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_map: odd number of bits");
    static const double r = std::numbers::sqrt2 / 2.0;
    cvec out(bits.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        const double re = bits[2 * i] ? -r : r;
        const double im = bits[2 * i + 1] ? -r : r;
        out[i] = {re, im};
    }
    return out;
}

/// Hard demap (minimum distance); used by noiseless round-trip checks.
inline std::vector<std::uint8_t> qpsk_demap_hard(const cvec& syms) {
    std::vector<std::uint8_t> bits(2 * syms.size());
    for (size_t i = 0; i < syms.size(); ++i) {
        bits[2 * i] = syms[i].real() < 0.0 ? 1 : 0;
        bits[2 * i + 1] = syms[i].imag() < 0.0 ? 1 : 0;
    }
    return bits;
}

/// Per-bit LLRs for one equalized symbol. Erased symbols (infinite or
/// non-positive variance) produce zero LLRs.
inline void qpsk_llr(cdbl y, cdbl gain, double noise_var, double& l0, double& l1) {
    if (!(noise_var > 0.0) || std::isinf(noise_var)) {
        l0 = 0.0;
        l1 = 0.0;
        return;
    }
    const cdbl z = std::conj(gain) * y;
    const double s = 2.0 * std::numbers::sqrt2 / noise_var;
    l0 = s * z.real();
    l1 = s * z.imag();
}

}  // namespace otfdm

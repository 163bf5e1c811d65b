// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <numbers>

#include "grid.hpp"

/**
 * Unitary discrete Fourier transforms.
 *
 * Both directions carry 1/sqrt(len): forward kernel e^{-j 2 pi n k / len},
 * inverse kernel e^{+j 2 pi n k / len}, so forward(inverse(x)) == x and
 * energy is preserved exactly (Parseval).
 *
 * Any length >= 1 is accepted. Lengths factor into a mixed-radix
 * Cooley-Tukey recursion; a prime length degenerates to the direct
 * O(len^2) sum, which is still exact. Twiddle tables are cached per
 * thread, so concurrent transforms need no locking.
 */

namespace otfdm {
namespace detail {

inline int smallest_factor(int n) {
    for (int p = 2; static_cast<long long>(p) * p <= n; ++p)
        if (n % p == 0) return p;
    return n;
}

/// e^{-j 2 pi k / n} for k in [0, n), cached per thread and per n.
inline const cvec& twiddle_table(int n, bool inverse) {
    thread_local std::map<std::pair<int, bool>, std::unique_ptr<cvec>> cache;
    auto& slot = cache[{n, inverse}];
    if (!slot) {
        auto tab = std::make_unique<cvec>(static_cast<size_t>(n));
        const double sign = inverse ? 1.0 : -1.0;
        for (int k = 0; k < n; ++k)
            (*tab)[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * k / n);
        slot = std::move(tab);
    }
    return *slot;
}

/// In-place mixed-radix FFT. `step` is n_top / n, `tw` the n_top table, and
/// `scratch` must hold n entries.
inline void fft_rec(cdbl* x, cdbl* scratch, int n, long long step, const cdbl* tw) {
    if (n == 1) return;
    const int p = smallest_factor(n);
    const int m = n / p;
    const long long n_top = static_cast<long long>(n) * step;

    for (int q = 0; q < p; ++q)
        for (int t = 0; t < m; ++t)
            scratch[static_cast<size_t>(q) * m + t] = x[static_cast<size_t>(t) * p + q];

    for (int q = 0; q < p; ++q)
        fft_rec(scratch + static_cast<size_t>(q) * m, x, m, step * p, tw);

    for (int s = 0; s < p; ++s) {
        for (int r = 0; r < m; ++r) {
            const long long k = r + static_cast<long long>(s) * m;
            cdbl acc = 0.0;
            for (int q = 0; q < p; ++q) {
                const long long idx = (k * q * step) % n_top;
                acc += scratch[static_cast<size_t>(q) * m + r] * tw[idx];
            }
            x[k] = acc;
        }
    }
}

inline void fft_unscaled(cdbl* x, int n, bool inverse) {
    const cvec& tw = twiddle_table(n, inverse);
    cvec scratch(static_cast<size_t>(n));
    fft_rec(x, scratch.data(), n, 1, tw.data());
}

}  // namespace detail

/// Unitary DFT of any length >= 1. inverse=false applies the forward kernel.
inline cvec unitary_dft(const cvec& v, bool inverse) {
    if (v.empty()) throw std::invalid_argument("unitary_dft: empty input");
    cvec out = v;
    detail::fft_unscaled(out.data(), static_cast<int>(out.size()), inverse);
    const double scale = 1.0 / std::sqrt(static_cast<double>(out.size()));
    for (cdbl& z : out) z *= scale;
    return out;
}

/// Unitary DFT applied to every column independently.
inline CGrid dft_columns(const CGrid& g, bool inverse) {
    CGrid out(g.rows, g.cols);
    cvec scratch(static_cast<size_t>(g.rows));
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.rows));
    for (int c = 0; c < g.cols; ++c) {
        cdbl* col = out.data.data() + static_cast<size_t>(c) * g.rows;
        const cdbl* src = g.data.data() + static_cast<size_t>(c) * g.rows;
        std::copy(src, src + g.rows, col);
        detail::fft_unscaled(col, g.rows, inverse);
        for (int r = 0; r < g.rows; ++r) col[r] *= scale;
    }
    return out;
}

/// Unitary DFT applied to every row independently.
inline CGrid dft_rows(const CGrid& g, bool inverse) {
    CGrid out(g.rows, g.cols);
    cvec row(static_cast<size_t>(g.cols));
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.cols));
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) row[c] = g.at(r, c);
        detail::fft_unscaled(row.data(), g.cols, inverse);
        for (int c = 0; c < g.cols; ++c) out.at(r, c) = row[c] * scale;
    }
    return out;
}

}  // namespace otfdm

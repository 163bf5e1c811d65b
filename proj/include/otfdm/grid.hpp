// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * Frame geometry and complex grid primitives shared by every layer of the
 * simulator.
 *
 * A frame is an M x N grid of complex symbols: M subcarriers of the small
 * (sub-symbol) FFT, N sub-symbols (equivalently N Doppler slots) per frame.
 * The serialized frame body has M*N samples regardless of waveform, so the
 * large-symbol subcarrier spacing delta_f, the sub-symbol spacing
 * delta_f_prime = N * delta_f, and the sample period t_s = 1/(M*N*delta_f)
 * are all locked together by the geometry.
 *
 * Grids are stored column-major so that vectorize() is a straight copy.
 */

namespace otfdm {

using cdbl = std::complex<double>;
using cvec = std::vector<cdbl>;

/// Frame geometry. Derived fields always satisfy
/// t_s * m * n * delta_f == 1 and delta_f_prime == n * delta_f.
struct FrameConfig {
    int m = 0;                   // subcarriers per sub-symbol
    int n = 0;                   // sub-symbols (Doppler slots) per frame
    int n_cp = 0;                // cyclic prefix length in samples
    double delta_f = 0.0;        // large-symbol subcarrier spacing [Hz]
    double delta_f_prime = 0.0;  // sub-symbol subcarrier spacing [Hz]
    double t_s = 0.0;            // sample period [s]
    double f_c = 0.0;            // carrier frequency [Hz]

    int frame_len() const { return m * n; }

    static FrameConfig make(int m, int n, int n_cp, double delta_f, double f_c) {
        if (m < 1 || n < 1)
            throw std::invalid_argument("FrameConfig: m and n must be >= 1");
        if (n_cp < 0 || n_cp >= m * n)
            throw std::invalid_argument("FrameConfig: n_cp must be in [0, m*n)");
        if (delta_f <= 0.0 || f_c < 0.0)
            throw std::invalid_argument("FrameConfig: delta_f must be > 0, f_c >= 0");
        FrameConfig c;
        c.m = m;
        c.n = n;
        c.n_cp = n_cp;
        c.delta_f = delta_f;
        c.delta_f_prime = static_cast<double>(n) * delta_f;
        c.t_s = 1.0 / (static_cast<double>(m) * static_cast<double>(n) * delta_f);
        c.f_c = f_c;
        return c;
    }
};

/// Dense complex matrix, column-major storage.
struct CGrid {
    int rows = 0;
    int cols = 0;
    cvec data;

    CGrid() = default;
    CGrid(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {
        if (r < 1 || c < 1)
            throw std::invalid_argument("CGrid: dimensions must be >= 1");
    }

    cdbl& at(int r, int c) { return data[static_cast<size_t>(c) * rows + r]; }
    const cdbl& at(int r, int c) const { return data[static_cast<size_t>(c) * rows + r]; }

    size_t size() const { return data.size(); }
};

inline void require_shape(const CGrid& g, int rows, int cols, const char* who) {
    if (g.rows != rows || g.cols != cols)
        throw std::invalid_argument(std::string(who) + ": grid shape " +
                                    std::to_string(g.rows) + "x" + std::to_string(g.cols) +
                                    " does not match expected " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
}

/// Column-major stacking: out[r + c*rows] = g(r, c).
inline cvec vectorize(const CGrid& g) { return g.data; }

/// Inverse of vectorize for a rows x cols grid.
inline CGrid devectorize(const cvec& v, int rows, int cols) {
    if (v.size() != static_cast<size_t>(rows) * cols)
        throw std::invalid_argument("devectorize: length does not match rows*cols");
    CGrid g(rows, cols);
    g.data = v;
    return g;
}

/// Comb interleaving of an M x N grid onto the M*N tone axis:
/// out[m*N + n] = X(m, n). Row m of the grid lands on tones {m*N ... m*N+N-1},
/// so the N sub-symbols of one subcarrier occupy N adjacent tones.
inline cvec comb_interleave(const CGrid& x) {
    cvec out(x.size());
    for (int m = 0; m < x.rows; ++m)
        for (int n = 0; n < x.cols; ++n)
            out[static_cast<size_t>(m) * x.cols + n] = x.at(m, n);
    return out;
}

/// Inverse of comb_interleave.
inline CGrid comb_deinterleave(const cvec& v, int m, int n) {
    if (v.size() != static_cast<size_t>(m) * n)
        throw std::invalid_argument("comb_deinterleave: length does not match m*n");
    CGrid x(m, n);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            x.at(r, c) = v[static_cast<size_t>(r) * n + c];
    return x;
}

inline double energy(const cvec& v) {
    double e = 0.0;
    for (const cdbl& z : v) e += std::norm(z);
    return e;
}

inline double energy(const CGrid& g) { return energy(g.data); }

/// Max absolute elementwise difference; vectors must have equal length.
inline double max_abs_diff(const cvec& a, const cvec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("max_abs_diff: length mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace otfdm

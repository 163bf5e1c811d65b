// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numbers>

#include "dft.hpp"
#include "grid.hpp"

/**
 * Transmit waveforms over a common M x N symbol grid.
 *
 *  - OFDM_LARGE: one M*N-point OFDM symbol, single CP. Robust to delay
 *    spread, fragile under Doppler (subcarrier spacing delta_f is small).
 *  - OFDM_SHORT: N back-to-back M-point OFDM sub-symbols, one short CP
 *    each. Robust to Doppler (spacing delta_f_prime = N*delta_f), pays
 *    N CPs of overhead.
 *  - OTFS_DZT:   Zak-domain mapping, row-wise N-point inverse transform
 *    of the delay-Doppler grid.
 *  - OTFDM:      sub-symbol modulation (per-column M-point inverse DFT),
 *    a per-sample Doppler dot product e^{j 2 pi n l / (M N)}, and an
 *    N-point inverse DFT across sub-symbols that spreads each sub-symbol
 *    over N time replicas. Keeps the short-symbol Doppler robustness
 *    while needing only the single CP of the large symbol: the body is
 *    exactly the large OFDM symbol of the comb-interleaved grid (see
 *    check_ofdm_equivalence).
 *
 * All bodies are M*N samples; add_cp prepends the last n_cp body samples.
 */

namespace otfdm {

enum class WaveformKind { OfdmLarge, OfdmShort, OtfsDzt, Otfdm };

inline const char* waveform_name(WaveformKind k) {
    switch (k) {
        case WaveformKind::OfdmLarge: return "OFDM_LARGE";
        case WaveformKind::OfdmShort: return "OFDM_SHORT";
        case WaveformKind::OtfsDzt: return "OTFS_DZT";
        case WaveformKind::Otfdm: return "OTFDM";
    }
    return "?";
}

/// Serialized transmit frame. For OFDM_SHORT, n_cp is the per-sub-symbol
/// CP and samples holds N blocks of (n_cp + M); otherwise samples holds
/// one CP of n_cp followed by the M*N body.
struct TxFrame {
    cvec samples;
    WaveformKind kind = WaveformKind::OfdmLarge;
    int n_cp = 0;
};

/// Prepend a cyclic prefix: the last n_cp samples of the body.
inline cvec add_cp(const cvec& body, int n_cp) {
    if (n_cp < 0 || static_cast<size_t>(n_cp) > body.size())
        throw std::invalid_argument("add_cp: n_cp out of range");
    cvec out;
    out.reserve(body.size() + n_cp);
    out.insert(out.end(), body.end() - n_cp, body.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

inline cvec remove_cp(const cvec& frame, int n_cp) {
    if (n_cp < 0 || static_cast<size_t>(n_cp) >= frame.size() + 1)
        throw std::invalid_argument("remove_cp: n_cp out of range");
    return cvec(frame.begin() + n_cp, frame.end());
}

/// One large OFDM symbol: body = unitary M*N-point inverse DFT of the
/// column-major vectorized grid.
inline TxFrame ofdm_modulate_large(const CGrid& x, const FrameConfig& cfg) {
    require_shape(x, cfg.m, cfg.n, "ofdm_modulate_large");
    cvec body = unitary_dft(vectorize(x), true);
    return {add_cp(body, cfg.n_cp), WaveformKind::OfdmLarge, cfg.n_cp};
}

/// N short OFDM sub-symbols, each an M-point inverse DFT with its own CP.
inline TxFrame ofdm_modulate_short(const CGrid& x, const FrameConfig& cfg, int n_cp_short) {
    require_shape(x, cfg.m, cfg.n, "ofdm_modulate_short");
    if (n_cp_short < 0 || n_cp_short > cfg.m)
        throw std::invalid_argument("ofdm_modulate_short: n_cp_short out of range");
    CGrid bodies = dft_columns(x, true);
    cvec out;
    out.reserve(static_cast<size_t>(cfg.n) * (cfg.m + n_cp_short));
    for (int c = 0; c < cfg.n; ++c) {
        cvec body(bodies.data.begin() + static_cast<size_t>(c) * cfg.m,
                  bodies.data.begin() + static_cast<size_t>(c + 1) * cfg.m);
        cvec with_cp = add_cp(body, n_cp_short);
        out.insert(out.end(), with_cp.begin(), with_cp.end());
    }
    return {std::move(out), WaveformKind::OfdmShort, n_cp_short};
}

/// Discrete-Zak OTFS: row-wise N-point inverse DFT of the delay-Doppler
/// grid, serialized column-major (delay index fast).
inline TxFrame otfs_modulate_dzt(const CGrid& x, const FrameConfig& cfg) {
    require_shape(x, cfg.m, cfg.n, "otfs_modulate_dzt");
    CGrid s = dft_rows(x, true);
    return {add_cp(vectorize(s), cfg.n_cp), WaveformKind::OtfsDzt, cfg.n_cp};
}

/// Forward M-point unitary DFT of each column (optional transparent
/// spreading stage; the inverse transform in the modulator cancels it so
/// the body becomes the time-multiplexed data itself).
inline CGrid dft_spread_columns(const CGrid& d) { return dft_columns(d, false); }

/// OTFDM body. Stages, in order:
///   S1[l,n] = M-point inverse DFT of column n
///   S2[l,n] = S1[l,n] * e^{j 2 pi n l / (M N)}   (Doppler dot product)
///   S3[l,k] = N-point inverse DFT across n
///   body[k*M + l] = S3[l,k]
/// doppler_product=false skips the S2 stage (then the chain reduces to the
/// Zak transform of the per-column spectra; used by equivalence tests).
inline cvec otfdm_body(const CGrid& x, const FrameConfig& cfg, bool doppler_product = true) {
    require_shape(x, cfg.m, cfg.n, "otfdm_body");
    CGrid s = dft_columns(x, true);
    if (doppler_product) {
        const double mn = static_cast<double>(cfg.m) * cfg.n;
        for (int n = 0; n < cfg.n; ++n)
            for (int l = 0; l < cfg.m; ++l)
                s.at(l, n) *= std::polar(1.0, 2.0 * std::numbers::pi * n * l / mn);
    }
    s = dft_rows(s, true);
    return vectorize(s);
}

/// Full OTFDM modulator with single CP. dft_spread=true first applies
/// dft_spread_columns to the grid.
inline TxFrame otfdm_modulate(const CGrid& x, const FrameConfig& cfg, bool dft_spread = false) {
    cvec body = dft_spread ? otfdm_body(dft_spread_columns(x), cfg) : otfdm_body(x, cfg);
    return {add_cp(body, cfg.n_cp), WaveformKind::Otfdm, cfg.n_cp};
}

/// Max absolute sample difference between the OTFDM body of X and the
/// large OFDM body of the comb-interleaved grid. Analytically zero: the
/// three OTFDM stages compose into the M*N-point inverse DFT of the
/// comb-interleaved tones.
inline double check_ofdm_equivalence(const CGrid& x, const FrameConfig& cfg) {
    const cvec a = otfdm_body(x, cfg);
    const cvec b = unitary_dft(comb_interleave(x), true);
    return max_abs_diff(a, b);
}

}  // namespace otfdm

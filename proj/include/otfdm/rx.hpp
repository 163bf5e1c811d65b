// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>

#include "channel.hpp"
#include "dft.hpp"
#include "grid.hpp"

/**
 * OTFDM receive chain and equalizers.
 *
 * The received body is reshaped to Y[l,k] (l fast within each Doppler
 * replica k), the transmit dot product is divided out once per
 * sub-symbol hypothesis n, and an M-point forward DFT along l yields the
 * expanded tensor Y''[m,n,k]. Under the narrow-replica approximation
 * (nu_i * M * t_s << 1) the channel seen by symbol (m,n) collapses to a
 * dot product: N scalar coefficients over k,
 *
 *   c_{m,n}[k] = (1/sqrt(N)) eta_{m,n,k} e^{j 2 pi k n / N},
 *   eta_{m,n,k} = sum_i h_i e^{-j 2 pi ((mN+n)/(M N t_s) + nu_i) tau_i}
 *                          e^{j 2 pi nu_i k M t_s}.
 *
 * Equalization is then either per-symbol dot division plus despreading
 * (td_equalize_despread) or a per-subcarrier N x N regularized inverse
 * (lmmse_despread). For static channels eta does not depend on k and
 * both recover the data exactly in the noiseless limit.
 */

namespace otfdm {

enum class RxStage { DotDivided, SubcarrierDomain };

/// M x N x N complex tensor indexed (a, b, c) = (l or m, n, k).
struct ExpandedRxTensor {
    int m = 0, n = 0, k = 0;
    RxStage stage = RxStage::DotDivided;
    cvec data;

    ExpandedRxTensor() = default;
    ExpandedRxTensor(int m_, int n_, int k_, RxStage st)
        : m(m_), n(n_), k(k_), stage(st),
          data(static_cast<size_t>(m_) * n_ * k_) {}

    cdbl& at(int a, int b, int c) {
        return data[a + static_cast<size_t>(m) * (b + static_cast<size_t>(n) * c)];
    }
    const cdbl& at(int a, int b, int c) const {
        return data[a + static_cast<size_t>(m) * (b + static_cast<size_t>(n) * c)];
    }
};

/// Dot-product channel coefficients eta_{m,n,k} for one frame.
struct DotProductChannel {
    int m = 0, n = 0, k = 0;
    cvec eta;

    DotProductChannel() = default;
    DotProductChannel(int m_, int n_, int k_)
        : m(m_), n(n_), k(k_), eta(static_cast<size_t>(m_) * n_ * k_) {}

    cdbl& eta_at(int a, int b, int c) {
        return eta[a + static_cast<size_t>(m) * (b + static_cast<size_t>(n) * c)];
    }
    const cdbl& eta_at(int a, int b, int c) const {
        return eta[a + static_cast<size_t>(m) * (b + static_cast<size_t>(n) * c)];
    }

    /// 2D channel coefficient c_{m,n}[k] = (1/sqrt(N)) eta e^{j 2 pi k n / N}.
    cdbl h2d(int a, int b, int c) const {
        return eta_at(a, b, c) *
               std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                          2.0 * std::numbers::pi * static_cast<double>(c) * b / n);
    }
};

/// Y[l,k] = body[k*M + l]; the received body reshaped column-major.
inline CGrid reshape_body(const cvec& body, const FrameConfig& cfg) {
    return devectorize(body, cfg.m, cfg.n);
}

/// Divides the transmit Doppler dot product out of every replica for
/// each sub-symbol hypothesis n: Y'[l,n,k] = Y[l,k] e^{-j 2 pi n l / (M N)}.
inline ExpandedRxTensor doppler_dot_divide(const CGrid& y, const FrameConfig& cfg) {
    require_shape(y, cfg.m, cfg.n, "doppler_dot_divide");
    const double mn = static_cast<double>(cfg.m) * cfg.n;
    CGrid divider(cfg.m, cfg.n);  // e^{-j 2 pi n l / (M N)}, shared across k
    for (int n = 0; n < cfg.n; ++n)
        for (int l = 0; l < cfg.m; ++l)
            divider.at(l, n) = std::polar(1.0, -2.0 * std::numbers::pi * n * l / mn);
    ExpandedRxTensor t(cfg.m, cfg.n, cfg.n, RxStage::DotDivided);
    for (int k = 0; k < cfg.n; ++k)
        for (int n = 0; n < cfg.n; ++n)
            for (int l = 0; l < cfg.m; ++l)
                t.at(l, n, k) = y.at(l, k) * divider.at(l, n);
    return t;
}

/// M-point forward unitary DFT along the first axis for every (n,k).
inline ExpandedRxTensor subcarrier_transform(const ExpandedRxTensor& t) {
    if (t.stage != RxStage::DotDivided)
        throw std::invalid_argument("subcarrier_transform: tensor is not in the dot-divided stage");
    ExpandedRxTensor out(t.m, t.n, t.k, RxStage::SubcarrierDomain);
    const double scale = 1.0 / std::sqrt(static_cast<double>(t.m));
    cvec col(static_cast<size_t>(t.m));
    for (int c = 0; c < t.k; ++c)
        for (int b = 0; b < t.n; ++b) {
            cdbl* dst = &out.at(0, b, c);
            const cdbl* src = &t.at(0, b, c);
            std::copy(src, src + t.m, dst);
            detail::fft_unscaled(dst, t.m, false);
            for (int a = 0; a < t.m; ++a) dst[a] *= scale;
        }
    return out;
}

/// Dot-product channel coefficients from known paths. Each path's Doppler
/// phase is frozen at the first sample of every replica, so the model is
/// exact for static paths; a moving path additionally sees the intra-replica
/// drift (amplitude the rectangular-window gain, phase ~ pi nu t_s (M-1))
/// that the dot-product form deliberately leaves out.
inline DotProductChannel analytic_dot_channel(const PathSet& ps, const FrameConfig& cfg) {
    DotProductChannel ch(cfg.m, cfg.n, cfg.n);
    const double mn = static_cast<double>(cfg.frame_len());
    cvec kfac(static_cast<size_t>(cfg.n));
    for (const Path& p : ps.paths) {
        const double d = p.tau / cfg.t_s;  // on-grid but kept real here
        // e^{-j 2 pi (q/(M N t_s) + nu) tau} = e^{-j 2 pi nu tau} * e^{-j 2 pi q d / (M N)}
        const cdbl base = p.h * std::polar(1.0, -2.0 * std::numbers::pi * p.nu * p.tau);
        for (int k = 0; k < cfg.n; ++k)
            kfac[k] = std::polar(1.0, 2.0 * std::numbers::pi * p.nu * k * cfg.m * cfg.t_s);
        detail::PhasorRamp tone_ramp(-d / (mn * cfg.t_s), cfg.t_s, 0.0);  // e^{-j 2 pi q d / MN}
        for (int q = 0; q < cfg.frame_len(); ++q) {
            const int m = q / cfg.n;
            const int n = q % cfg.n;
            const cdbl tone = base * tone_ramp.value();
            for (int k = 0; k < cfg.n; ++k) ch.eta_at(m, n, k) += tone * kfac[k];
            tone_ramp.advance();
        }
    }
    return ch;
}

/// Per-symbol channel contribution vectors for one grid symbol (m,n)
/// of value x: the exact body-domain contribution, the narrow-replica
/// approximation (Doppler phase frozen at each replica start), and the
/// post-FFT per-replica contribution c_{m,n}[k] * x.
struct GammaVectors {
    cvec exact;     // length M*N, body domain
    cvec approx;    // length M*N, body domain
    cvec post_fft;  // length N, subcarrier domain over k
    double rel_err = 0.0;  // residual energy / exact energy
};

inline GammaVectors analytic_gamma_symbol(int m, int n, cdbl x, const PathSet& ps,
                                          const FrameConfig& cfg) {
    if (m < 0 || m >= cfg.m || n < 0 || n >= cfg.n)
        throw std::invalid_argument("analytic_gamma_symbol: symbol index out of range");
    const int mn = cfg.frame_len();
    const double tone_hz = (static_cast<double>(m) * cfg.n + n) * cfg.delta_f;
    GammaVectors g;
    g.exact.assign(static_cast<size_t>(mn), cdbl(0.0));
    g.approx.assign(static_cast<size_t>(mn), cdbl(0.0));
    const double amp = 1.0 / std::sqrt(static_cast<double>(mn));
    for (const Path& p : ps.paths) {
        for (int l = 0; l < mn; ++l) {
            const double t_rel = l * cfg.t_s - p.tau;
            g.exact[l] += amp * p.h * x * std::polar(1.0, 2.0 * std::numbers::pi * (tone_hz + p.nu) * t_rel);
            const int k = l / cfg.m;
            const double ph_approx =
                tone_hz * t_rel + p.nu * (k * cfg.m * cfg.t_s) - p.nu * p.tau;
            g.approx[l] += amp * p.h * x * std::polar(1.0, 2.0 * std::numbers::pi * ph_approx);
        }
    }
    DotProductChannel ch = analytic_dot_channel(ps, cfg);
    g.post_fft.resize(static_cast<size_t>(cfg.n));
    for (int k = 0; k < cfg.n; ++k) g.post_fft[k] = ch.h2d(m, n, k) * x;

    double num = 0, den = 0;
    for (int l = 0; l < mn; ++l) {
        num += std::norm(g.exact[l] - g.approx[l]);
        den += std::norm(g.exact[l]);
    }
    // Energy ratio: the phase drift within one replica is bounded by
    // 2 pi nu M t_s, so rel_err ~ (2 pi nu M t_s)^2 / 3 for one path.
    g.rel_err = den > 0 ? num / den : 0.0;
    return g;
}

/// Superposition of all exact (and approximate) per-symbol contributions
/// for a whole grid. O((M*N)^2 * P); intended for oracle-sized grids.
struct GammaAnalysis {
    cvec exact_sum;   // == noiseless apply_channel output
    cvec approx_sum;
    double max_rel_err = 0.0;
};

inline GammaAnalysis analytic_gamma(const CGrid& x, const PathSet& ps, const FrameConfig& cfg) {
    require_shape(x, cfg.m, cfg.n, "analytic_gamma");
    const int mn = cfg.frame_len();
    GammaAnalysis out;
    out.exact_sum.assign(static_cast<size_t>(mn), cdbl(0.0));
    out.approx_sum.assign(static_cast<size_t>(mn), cdbl(0.0));
    for (int m = 0; m < cfg.m; ++m)
        for (int n = 0; n < cfg.n; ++n) {
            const cdbl v = x.at(m, n);
            if (v == cdbl(0.0)) continue;
            GammaVectors g = analytic_gamma_symbol(m, n, v, ps, cfg);
            for (int l = 0; l < mn; ++l) {
                out.exact_sum[l] += g.exact[l];
                out.approx_sum[l] += g.approx[l];
            }
            out.max_rel_err = std::max(out.max_rel_err, g.rel_err);
        }
    return out;
}

/// Equalized grid plus what the demapper needs: per symbol, X_hat is
/// modeled as gain * x + noise with the given residual variance. The
/// dot-division equalizers are unbiased (gain 1); MMSE variants shrink.
struct EqualizedGrid {
    CGrid x_hat;
    std::vector<double> noise_var;  // column-major, same layout as x_hat
    std::vector<cdbl> gain;

    EqualizedGrid() = default;
    EqualizedGrid(int rows, int cols)
        : x_hat(rows, cols),
          noise_var(static_cast<size_t>(rows) * cols, 0.0),
          gain(static_cast<size_t>(rows) * cols, cdbl(1.0)) {}

    size_t idx(int r, int c) const { return static_cast<size_t>(c) * x_hat.rows + r; }
};

constexpr double kEtaErasure = 1e-12;

/// Dot-division equalizer: per (m,n), each replica k is divided by
/// eta_{m,n,k} and the N replicas are despread with e^{-j 2 pi k n / N}.
/// Normalization is 1/sqrt(N) when all N replicas are usable (this is
/// the measured constant that makes the noiseless static chain exact);
/// replicas with |eta| below the erasure threshold are skipped and the
/// normalization rescales to the survivors. sigma2 feeds the per-symbol
/// output noise variance; if no replica survives the symbol is erased
/// (X_hat 0, infinite variance).
///
/// ici_var is an optional extra effective-noise power per equalized
/// symbol (units of symbol power): Doppler leaks energy between fine
/// tones, and that interference rides the same fade as the signal, so
/// after the per-replica division it contributes roughly its fraction of
/// symbol power regardless of fade depth. Including it keeps the LLR
/// confidence honest in fast channels.
inline EqualizedGrid td_equalize_despread(const ExpandedRxTensor& ypp,
                                          const DotProductChannel& ch, double sigma2,
                                          const FrameConfig& cfg, double ici_var = 0.0) {
    if (ypp.stage != RxStage::SubcarrierDomain)
        throw std::invalid_argument("td_equalize_despread: tensor is not subcarrier-domain");
    if (ypp.m != cfg.m || ypp.n != cfg.n || ypp.k != cfg.n || ch.m != cfg.m || ch.n != cfg.n ||
        ch.k != cfg.n)
        throw std::invalid_argument("td_equalize_despread: tensor/channel shape mismatch");

    EqualizedGrid out(cfg.m, cfg.n);
    const double nn = static_cast<double>(cfg.n);
    CGrid despread(cfg.n, cfg.n);  // e^{-j 2 pi k n / N}, indexed (k, n)
    for (int n = 0; n < cfg.n; ++n)
        for (int k = 0; k < cfg.n; ++k)
            despread.at(k, n) = std::polar(1.0, -2.0 * std::numbers::pi * k * n / nn);
    for (int n = 0; n < cfg.n; ++n)
        for (int m = 0; m < cfg.m; ++m) {
            cdbl acc = 0.0;
            double var_acc = 0.0;
            int used = 0;
            for (int k = 0; k < cfg.n; ++k) {
                const cdbl eta = ch.eta_at(m, n, k);
                if (std::abs(eta) < kEtaErasure) continue;
                acc += despread.at(k, n) * ypp.at(m, n, k) / eta;
                var_acc += sigma2 / std::norm(eta);
                ++used;
            }
            const size_t i = out.idx(m, n);
            if (used == 0) {
                out.x_hat.at(m, n) = 0.0;
                out.noise_var[i] = std::numeric_limits<double>::infinity();
            } else {
                const double scale = std::sqrt(nn) / used;
                out.x_hat.at(m, n) = scale * acc;
                out.noise_var[i] =
                    (nn / (static_cast<double>(used) * used)) * var_acc + (nn / used) * ici_var;
            }
        }
    return out;
}

namespace detail {

/// In-place inverse of a dense complex matrix via Gauss-Jordan with
/// partial pivoting. Throws on (numerically) singular input.
inline std::vector<cvec> invert_dense(std::vector<cvec> a) {
    const int n = static_cast<int>(a.size());
    std::vector<cvec> inv(n, cvec(n, 0.0));
    for (int i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300)
            throw std::runtime_error("lmmse_despread: ill-conditioned system (singular pivot)");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const cdbl d = a[col][col];
        for (int c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cdbl f = a[r][col];
            if (f == cdbl(0.0)) continue;
            for (int c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

}  // namespace detail

/// Per-subcarrier LMMSE over the N sub-symbols sharing subcarrier m.
///
/// Model: the N replicas of subcarrier m form the observation
///   yobs_m[k] = (1/sqrt(N)) sum_n e^{+j 2 pi k n / N} yhat_{m,n},
///   yhat_{m,n} = (1/sqrt(N)) sum_k e^{-j 2 pi k n / N} Y''[m,n,k]
/// (algebraically, yhat_{m,n} is M*N-point FFT bin m*N+n of the body, so
/// yobs_m = H_m x_m + w exactly for static channels), with H_m columns
/// c_{m,n}. Returns rows of (H^H H + sigma2 I)^{-1} H^H yobs: the
/// standard regularized estimate (biased for sigma2 > 0; per-symbol gain
/// and residual variance are reported for the demapper).
///
/// ici_frac budgets Doppler-induced inter-tone leakage the per-subcarrier
/// model cannot represent: that interference arrives through (nearly) the
/// same fade as the signal, so each subcarrier's effective noise floor is
/// raised by ici_frac times its own mean channel power, both in the solve
/// and in the reported per-symbol variances.
inline EqualizedGrid lmmse_despread(const ExpandedRxTensor& ypp, const DotProductChannel& ch,
                                    double sigma2, const FrameConfig& cfg,
                                    double ici_frac = 0.0) {
    if (ypp.stage != RxStage::SubcarrierDomain)
        throw std::invalid_argument("lmmse_despread: tensor is not subcarrier-domain");
    if (sigma2 < 0) throw std::invalid_argument("lmmse_despread: negative sigma2");
    if (ypp.m != cfg.m || ypp.n != cfg.n || ypp.k != cfg.n || ch.m != cfg.m || ch.n != cfg.n ||
        ch.k != cfg.n)
        throw std::invalid_argument("lmmse_despread: tensor/channel shape mismatch");

    const int nn = cfg.n;
    const double rn = 1.0 / std::sqrt(static_cast<double>(nn));
    EqualizedGrid out(cfg.m, cfg.n);

    CGrid spread(nn, nn);  // (1/sqrt(N)) e^{+j 2 pi k n / N}, indexed (k, n)
    for (int n = 0; n < nn; ++n)
        for (int k = 0; k < nn; ++k)
            spread.at(k, n) = std::polar(rn, 2.0 * std::numbers::pi * k * n / static_cast<double>(nn));

    cvec yhat(static_cast<size_t>(nn)), yobs(static_cast<size_t>(nn)), b(static_cast<size_t>(nn));
    std::vector<cvec> h(static_cast<size_t>(nn), cvec(static_cast<size_t>(nn)));
    std::vector<cvec> a(static_cast<size_t>(nn), cvec(static_cast<size_t>(nn)));

    for (int m = 0; m < cfg.m; ++m) {
        for (int n = 0; n < nn; ++n) {
            cdbl acc = 0.0;
            for (int k = 0; k < nn; ++k) acc += std::conj(spread.at(k, n)) * ypp.at(m, n, k);
            yhat[n] = acc;
        }
        double chan_pow = 0.0;
        for (int k = 0; k < nn; ++k) {
            cdbl acc = 0.0;
            for (int n = 0; n < nn; ++n) acc += spread.at(k, n) * yhat[n];
            yobs[k] = acc;
            // H_m column n over k: c_{m,n}[k] = spread(k,n) * eta_{m,n,k}
            for (int n = 0; n < nn; ++n) {
                h[k][n] = spread.at(k, n) * ch.eta_at(m, n, k);
                chan_pow += std::norm(h[k][n]);
            }
        }
        const double sig2_eff = sigma2 + ici_frac * chan_pow / nn;
        // A = H^H H + sig2_eff I, b = H^H yobs
        for (int r = 0; r < nn; ++r) {
            cdbl bacc = 0.0;
            for (int c = 0; c < nn; ++c) {
                cdbl acc = 0.0;
                for (int k = 0; k < nn; ++k) acc += std::conj(h[k][r]) * h[k][c];
                a[r][c] = acc + (r == c ? cdbl(sig2_eff) : cdbl(0.0));
            }
            for (int k = 0; k < nn; ++k) bacc += std::conj(h[k][r]) * yobs[k];
            b[r] = bacc;
        }
        const std::vector<cvec> ainv = detail::invert_dense(a);
        for (int n = 0; n < nn; ++n) {
            cdbl xhat = 0.0;
            for (int c = 0; c < nn; ++c) xhat += ainv[n][c] * b[c];
            out.x_hat.at(m, n) = xhat;

            // G row n = (A^{-1} H^H)[n,:]; effective mix E = G H = I - sigma2 A^{-1}
            double noise_pow = 0.0;
            for (int k = 0; k < nn; ++k) {
                cdbl g = 0.0;
                for (int c = 0; c < nn; ++c) g += ainv[n][c] * std::conj(h[k][c]);
                noise_pow += std::norm(g);
            }
            double interf = 0.0;
            for (int c = 0; c < nn; ++c) {
                const cdbl e = (c == n ? cdbl(1.0) : cdbl(0.0)) - sig2_eff * ainv[n][c];
                if (c != n) interf += std::norm(e);
            }
            const cdbl gain = cdbl(1.0) - sig2_eff * ainv[n][n];
            const size_t i = out.idx(m, n);
            out.gain[i] = gain;
            out.noise_var[i] = interf + sig2_eff * noise_pow;
        }
    }
    return out;
}

/// One-tap equalizer for OFDM tone vectors. Zero-forcing by default
/// (X_hat = y/h, unbiased); mmse=true applies the scalar regularized
/// inverse conj(h) y / (|h|^2 + sigma2). Tones with |h| below the
/// erasure threshold (ZF) are zeroed with infinite variance.
inline EqualizedGrid ofdm_one_tap_equalize(const cvec& y_tones, const cvec& h_est, double sigma2,
                                           bool mmse = false) {
    if (y_tones.size() != h_est.size())
        throw std::invalid_argument("ofdm_one_tap_equalize: tone/channel length mismatch");
    if (y_tones.empty()) throw std::invalid_argument("ofdm_one_tap_equalize: empty input");
    EqualizedGrid out(static_cast<int>(y_tones.size()), 1);
    for (size_t q = 0; q < y_tones.size(); ++q) {
        const cdbl h = h_est[q];
        const double h2 = std::norm(h);
        if (mmse) {
            const double den = h2 + sigma2;
            if (den < kEtaErasure) {
                out.x_hat.data[q] = 0.0;
                out.noise_var[q] = std::numeric_limits<double>::infinity();
                continue;
            }
            out.x_hat.data[q] = std::conj(h) * y_tones[q] / den;
            out.gain[q] = h2 / den;
            out.noise_var[q] = sigma2 * h2 / (den * den);
        } else {
            if (std::abs(h) < kEtaErasure) {
                out.x_hat.data[q] = 0.0;
                out.noise_var[q] = std::numeric_limits<double>::infinity();
                continue;
            }
            out.x_hat.data[q] = y_tones[q] / h;
            out.noise_var[q] = sigma2 / h2;
        }
    }
    return out;
}

namespace detail {
/// (1/len) sum_{j<len} e^{j 2 pi nu t_s j}: the per-tone self-gain of a
/// Doppler shift over a rectangular window.
inline cdbl doppler_window_gain(double nu, double t_s, int len) {
    cdbl acc = 0.0;
    PhasorRamp run(nu, t_s, 0.0);
    for (int j = 0; j < len; ++j) {
        acc += run.value();
        run.advance();
    }
    return acc / static_cast<double>(len);
}
}  // namespace detail

/// Genie diagonal (same-tone) channel gains of the large OFDM symbol:
/// H[q] = sum_i h_i e^{-j 2 pi (q delta_f + nu_i) tau_i} * w(nu_i) where
/// w is the Doppler self-gain over the M*N window. Off-diagonal leakage
/// (inter-carrier interference) is not representable by one tap and is
/// what the one-tap equalizer suffers at speed.
inline cvec ofdm_analytic_one_tap(const PathSet& ps, const FrameConfig& cfg) {
    const int mn = cfg.frame_len();
    cvec h(static_cast<size_t>(mn), cdbl(0.0));
    for (const Path& p : ps.paths) {
        const double d = p.tau / cfg.t_s;
        const cdbl base =
            p.h * std::polar(1.0, -2.0 * std::numbers::pi * p.nu * p.tau) *
            detail::doppler_window_gain(p.nu, cfg.t_s, mn);
        detail::PhasorRamp tone_ramp(-d / (mn * cfg.t_s), cfg.t_s, 0.0);
        for (int q = 0; q < mn; ++q) {
            h[q] += base * tone_ramp.value();
            tone_ramp.advance();
        }
    }
    return h;
}

/// Genie per-sub-symbol diagonal gains for OFDM_SHORT: tone m of
/// sub-symbol n, including the absolute-time Doppler phase of the
/// sub-symbol's body start.
inline CGrid ofdm_short_analytic_one_tap(const PathSet& ps, const FrameConfig& cfg,
                                         int n_cp_short) {
    CGrid h(cfg.m, cfg.n);
    const int blk = cfg.m + n_cp_short;
    for (const Path& p : ps.paths) {
        const cdbl win = detail::doppler_window_gain(p.nu, cfg.t_s, cfg.m);
        for (int n = 0; n < cfg.n; ++n) {
            const cdbl base = p.h * std::polar(1.0, -2.0 * std::numbers::pi * p.nu * p.tau) *
                              std::polar(1.0, 2.0 * std::numbers::pi * p.nu * cfg.t_s *
                                                  static_cast<double>(n) * blk) *
                              win;
            for (int m = 0; m < cfg.m; ++m)
                h.at(m, n) += base * std::polar(1.0, -2.0 * std::numbers::pi * m *
                                                         cfg.delta_f_prime * p.tau);
        }
    }
    return h;
}

}  // namespace otfdm

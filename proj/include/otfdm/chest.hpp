// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dft.hpp"
#include "grid.hpp"
#include "rng.hpp"
#include "rx.hpp"

/**
 * Pilot-based channel estimation.
 *
 * OTFDM layout: every lambda-th subcarrier is a pilot subcarrier
 * (lambda must divide M). At each pilot subcarrier, w consecutive
 * Doppler slots are reserved: slot 0 carries the pilot symbol, slots
 * 1..w-1 are zero guards that absorb Doppler-domain leakage. The pilot
 * is a unit-modulus QPSK-alphabet value scaled by sqrt(w) plus a
 * configurable power boost, so the total pilot power matches a
 * per-slot pilot scheme of the same overhead ("equal total pilot
 * power"); the scaling is divided back out at estimation.
 *
 * Estimation: the receiver recovers the fine-tone spectrum of the frame
 * body on each reserved window, where Doppler smears the pilot across
 * the zero guards; a per-replica despread across the window re-collects
 * the smear into a sample of eta at the pilot tone, and an FFT-based
 * oversampling of that comb (zero-padding in the delay domain)
 * interpolates eta to all M*N tones per replica. The interpolation is
 * exact for channels whose delays stay below the M/lambda-sample
 * budget, and the window despread is exact when the per-tone Doppler
 * shift stays inside the w-slot window.
 *
 * The same machinery provides the periodic frequency-domain pilots of
 * the OFDM baselines.
 */

namespace otfdm {

struct PilotLayout {
    int lambda = 0;         // pilot subcarrier spacing (divides M)
    int w = 0;              // reserved Doppler width in slots, 1..N
    double boost_db = 0.0;  // extra pilot power on top of the sqrt(w) scaling
    std::uint64_t seed = 0;
    std::vector<int> pilot_subcarriers;  // {0, lambda, 2*lambda, ...}
    cvec pilot_values;                   // full-amplitude pilot per pilot subcarrier

    /// Amplitude applied to the unit-modulus pilot symbol.
    double amplitude() const { return std::sqrt(static_cast<double>(w)) * std::pow(10.0, boost_db / 20.0); }

    bool is_reserved(int m, int n) const {
        return lambda > 0 && m % lambda == 0 && n < w;
    }
};

namespace detail {
/// Unit-modulus QPSK-alphabet pseudo-random value.
inline cdbl qpsk_alphabet_value(Rng& rng) {
    static const double r = std::numbers::sqrt2 / 2.0;
    switch (rng.next_u64() & 3) {
        case 0: return {r, r};
        case 1: return {r, -r};
        case 2: return {-r, r};
        default: return {-r, -r};
    }
}
}  // namespace detail

inline PilotLayout build_pilot_layout(int lambda, int w, double boost_db, const FrameConfig& cfg,
                                      std::uint64_t seed) {
    if (lambda < 1 || cfg.m % lambda != 0)
        throw std::invalid_argument("build_pilot_layout: lambda must divide M");
    if (w < 1 || w > cfg.n)
        throw std::invalid_argument("build_pilot_layout: w must be in [1, N]");
    PilotLayout lay;
    lay.lambda = lambda;
    lay.w = w;
    lay.boost_db = boost_db;
    lay.seed = seed;
    Rng rng(mix_seed({seed, static_cast<std::uint64_t>(Stream::PilotSeq)}));
    const double amp = lay.amplitude();
    for (int m = 0; m < cfg.m; m += lambda) {
        lay.pilot_subcarriers.push_back(m);
        lay.pilot_values.push_back(amp * detail::qpsk_alphabet_value(rng));
    }
    return lay;
}

/// Number of grid elements left for data under the layout.
inline int data_capacity(const PilotLayout& lay, const FrameConfig& cfg) {
    return cfg.m * cfg.n - static_cast<int>(lay.pilot_subcarriers.size()) * lay.w;
}

/// Overwrites the reserved elements with pilot (slot 0) and guard
/// (slots 1..w-1) values; data elements pass through untouched.
/// Idempotent: inserting twice equals inserting once.
inline CGrid insert_pilots(const CGrid& x, const PilotLayout& lay, const FrameConfig& cfg) {
    require_shape(x, cfg.m, cfg.n, "insert_pilots");
    CGrid out = x;
    for (size_t j = 0; j < lay.pilot_subcarriers.size(); ++j) {
        const int m = lay.pilot_subcarriers[j];
        out.at(m, 0) = lay.pilot_values[j];
        for (int n = 1; n < lay.w; ++n) out.at(m, n) = 0.0;
    }
    return out;
}

/// FFT-based oversampling of a uniformly spaced frequency-domain comb by
/// an integer factor: inverse DFT to the delay domain (a causal delay of d
/// samples lands in bin d), zero-pad the high delay bins, forward DFT back
/// at the fine grid, rescale by sqrt(factor).
/// Input samples are reproduced exactly at their original positions
/// (out[j*factor] == in[j]); intermediate values are exact whenever the
/// underlying delay support is below len(samples) bins.
inline cvec fft_interpolate(const cvec& samples, int factor) {
    if (samples.empty()) throw std::invalid_argument("fft_interpolate: empty input");
    if (factor < 1) throw std::invalid_argument("fft_interpolate: factor must be >= 1");
    const size_t l = samples.size();
    cvec delay = unitary_dft(samples, true);
    delay.resize(l * static_cast<size_t>(factor), cdbl(0.0));
    cvec fine = unitary_dft(delay, false);
    const double scale = std::sqrt(static_cast<double>(factor));
    for (cdbl& z : fine) z *= scale;
    return fine;
}

/// Estimates the dot-product channel from the subcarrier-domain tensor.
///
/// Step 1 recovers the fine-tone spectrum of the frame body on the
/// reserved window of each pilot subcarrier via the exact identity
///   Yhat[m*N + i] = (1/sqrt(N)) sum_k e^{-j 2 pi i k / N} Y''[m,i,k],
/// then divides by the known full-amplitude pilot. With the zero guards
/// in place the window holds exactly the pilot's Doppler smear: for a
/// static channel everything sits in window slot 0 and the data tones
/// never enter.
///
/// Step 2 despreads the window per replica,
///   z_j[k] = sum_{i<w} r_j[i] e^{+j 2 pi i k / N},
/// which re-collects the smear into eta at the pilot tone for replica k
/// (the full-ring version of this sum is an exact identity; truncating
/// it to the w reserved slots is the estimator's Doppler budget).
///
/// Step 3 interpolates each per-replica pilot comb to all M*N tones by
/// FFT-based oversampling (factor lambda*N), exact whenever the delay
/// support stays below the M/lambda-sample budget.
inline DotProductChannel estimate_channel(const ExpandedRxTensor& ypp, const PilotLayout& lay,
                                          const FrameConfig& cfg) {
    if (ypp.stage != RxStage::SubcarrierDomain)
        throw std::invalid_argument("estimate_channel: tensor is not subcarrier-domain");
    if (ypp.m != cfg.m || ypp.n != cfg.n || ypp.k != cfg.n)
        throw std::invalid_argument("estimate_channel: tensor shape mismatch");
    if (lay.pilot_subcarriers.empty())
        throw std::invalid_argument("estimate_channel: layout has no pilot subcarriers");

    const int np = static_cast<int>(lay.pilot_subcarriers.size());
    const double invrootn = 1.0 / std::sqrt(static_cast<double>(cfg.n));
    const double step = 2.0 * std::numbers::pi / static_cast<double>(cfg.n);

    std::vector<cvec> comb(static_cast<size_t>(cfg.n), cvec(static_cast<size_t>(np)));
    cvec r(static_cast<size_t>(lay.w));
    for (int j = 0; j < np; ++j) {
        const int mp = lay.pilot_subcarriers[j];
        for (int i = 0; i < lay.w; ++i) {
            cdbl acc = 0.0;
            for (int k = 0; k < cfg.n; ++k)
                acc += ypp.at(mp, i, k) * std::polar(1.0, -step * i * k);
            r[i] = invrootn * acc / lay.pilot_values[j];
        }
        for (int k = 0; k < cfg.n; ++k) {
            cdbl acc = 0.0;
            for (int i = 0; i < lay.w; ++i) acc += r[i] * std::polar(1.0, step * i * k);
            comb[static_cast<size_t>(k)][static_cast<size_t>(j)] = acc;
        }
    }
    DotProductChannel ch(cfg.m, cfg.n, cfg.n);
    for (int k = 0; k < cfg.n; ++k) {
        const cvec fine = fft_interpolate(comb[static_cast<size_t>(k)], lay.lambda * cfg.n);
        for (int m = 0; m < cfg.m; ++m)
            for (int n = 0; n < cfg.n; ++n)
                ch.eta_at(m, n, k) = fine[static_cast<size_t>(m) * cfg.n + n];
    }
    return ch;
}

/// Pilot-overhead budget in the style of a dimensioning checklist.
struct OverheadReport {
    double delay_budget_samples = 0;    // M / lambda
    double required_delay_samples = 0;  // max tau / t_s
    double doppler_budget_slots = 0;    // w
    double required_doppler_slots = 0;  // 2 * max|nu| / delta_f
    double rho = 0;                     // delay-pulse overhead needed (alternative scheme)
    double mu = 0;                      // max time-sampling period (alternative scheme)
    bool feasible = false;
};

/// Checks the layout against nominal channel bounds: the delay comb must
/// span max_tau and the reserved Doppler width must cover the two-sided
/// Doppler support at the large-symbol spacing. rho and mu report the
/// equivalent requirements of the delay-pulse / time-sampling pilot
/// alternatives (informational only).
inline OverheadReport overhead_report(const PilotLayout& lay, double max_tau, double max_abs_nu,
                                      const FrameConfig& cfg) {
    if (max_tau < 0 || max_abs_nu < 0)
        throw std::invalid_argument("overhead_report: negative channel bounds");
    OverheadReport r;
    r.delay_budget_samples = static_cast<double>(cfg.m) / lay.lambda;
    r.required_delay_samples = max_tau / cfg.t_s;
    r.doppler_budget_slots = static_cast<double>(lay.w);
    r.required_doppler_slots = 2.0 * max_abs_nu / cfg.delta_f;
    r.rho = r.required_delay_samples;
    r.mu = r.required_doppler_slots > 0 ? static_cast<double>(cfg.m) / r.required_doppler_slots
                                        : std::numeric_limits<double>::infinity();
    r.feasible = r.delay_budget_samples >= r.required_delay_samples &&
                 r.doppler_budget_slots >= r.required_doppler_slots;
    return r;
}

// --------------------------------------------------------------------
// Periodic frequency-domain pilots for the OFDM baselines.

/// Pilot tones {0, lambda, 2*lambda, ...} on the M*N-tone axis of the
/// large OFDM symbol. Pilot amplitude is the bare boost (no sqrt(w)):
/// with the same density the total pilot power then matches the OTFDM
/// layout exactly (the OTFDM layout concentrates the same power into
/// one of w slots).
struct OfdmPilots {
    int lambda = 0;
    std::vector<int> tones;
    cvec values;  // full amplitude
};

inline OfdmPilots build_ofdm_pilots(int lambda, double boost_db, int n_tones, std::uint64_t seed) {
    if (lambda < 1 || n_tones % lambda != 0)
        throw std::invalid_argument("build_ofdm_pilots: lambda must divide the tone count");
    OfdmPilots p;
    p.lambda = lambda;
    Rng rng(mix_seed({seed, static_cast<std::uint64_t>(Stream::PilotSeq)}));
    const double amp = std::pow(10.0, boost_db / 20.0);
    for (int q = 0; q < n_tones; q += lambda) {
        p.tones.push_back(q);
        p.values.push_back(amp * detail::qpsk_alphabet_value(rng));
    }
    return p;
}

/// Least-squares estimate at the pilot tones, FFT-interpolated to the
/// full tone axis.
inline cvec ofdm_estimate_channel(const cvec& rx_tones, const OfdmPilots& p) {
    if (p.tones.empty()) throw std::invalid_argument("ofdm_estimate_channel: no pilot tones");
    cvec comb(p.tones.size());
    for (size_t j = 0; j < p.tones.size(); ++j) comb[j] = rx_tones[p.tones[j]] / p.values[j];
    return fft_interpolate(comb, p.lambda);
}

}  // namespace otfdm

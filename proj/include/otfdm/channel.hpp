// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <sstream>

#include "grid.hpp"
#include "rng.hpp"
#include "waveform.hpp"

/**
 * Doubly-selective multipath channel.
 *
 * Each path i carries a complex gain h_i, an on-grid delay tau_i (an
 * integer number of samples once divided by t_s), and an off-grid real
 * Doppler shift nu_i. The received body sample is
 *
 *   y[l] = sum_i h_i * s[(l - tau_i/t_s) mod MN] * e^{j 2 pi (l - tau_i/t_s) nu_i t_s}
 *
 * i.e. the Doppler phase rides on the delayed copy, referenced to the
 * body start. Because the CP cyclically extends the body and every delay
 * is below n_cp, this modulo form equals a plain linear convolution of
 * the CP-extended frame followed by CP removal; apply_channel_linear
 * implements that route and the two are cross-checked in the tests.
 */

namespace otfdm {

struct Path {
    cdbl h;           // complex gain
    double tau = 0;   // delay [s]; tau/t_s is integer and < n_cp
    double nu = 0;    // Doppler shift [Hz], need not be on any grid
};

struct PathSet {
    std::vector<Path> paths;
    std::uint64_t seed = 0;

    double total_power() const {
        double p = 0;
        for (const Path& q : paths) p += std::norm(q.h);
        return p;
    }
    double max_delay() const {
        double t = 0;
        for (const Path& q : paths) t = std::max(t, q.tau);
        return t;
    }
    double max_abs_doppler() const {
        double v = 0;
        for (const Path& q : paths) v = std::max(v, std::abs(q.nu));
        return v;
    }
};

struct NoiseSpec {
    double sigma2 = 0.0;  // complex noise variance per sample
    std::uint64_t seed = 0;
};

struct TdlTap {
    double delay_norm;  // delay normalized to unit rms delay spread
    double power_db;
};

/// 24-tap TDL-C power delay profile (3GPP TR 38.901, Table 7.7.2-3),
/// delays normalized so the rms delay spread is 1.
inline const std::array<TdlTap, 24>& tdlc_profile() {
    static const std::array<TdlTap, 24> taps = {{
        {0.0000, -4.4}, {0.2099, -1.2}, {0.2219, -3.5}, {0.2329, -5.2},
        {0.2176, -2.5}, {0.6366, 0.0},  {0.6448, -2.2}, {0.6560, -3.9},
        {0.6584, -7.4}, {0.7935, -7.1}, {0.8213, -10.7}, {0.9336, -11.1},
        {1.2285, -5.1}, {1.3083, -6.8}, {2.1704, -8.7},  {2.7105, -13.2},
        {4.2589, -13.9}, {4.6003, -13.9}, {5.4902, -15.8}, {5.6077, -17.1},
        {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8},
    }};
    return taps;
}

constexpr double kSpeedOfLight = 299792458.0;

struct TdlcOptions {
    bool symmetric_doppler = false;  // draw speeds in [-max, +max] instead of [0, max]
};

/// Random TDL-C channel draw.
///
/// Tap delays are the normalized profile scaled by rms_ds, rounded to the
/// t_s grid and clipped to n_cp - 1 (at large delay spreads a few weak
/// tail taps pile up at the CP edge; the CP-circularity invariant of
/// apply_channel is preserved). Taps whose rounded delays collide stay
/// separate entries: their contributions superpose identically in the
/// channel sum, and each keeps its own Doppler draw. Per-tap gains are
/// Rayleigh (complex Gaussian) shaped by the profile powers, then
/// renormalized so sum |h_i|^2 == 1 exactly. Per-tap speeds are uniform
/// in [0, max_speed] (or symmetric, see options); nu_i = f_c * v_i / c.
/// Delays that would exceed the frame body itself are rejected.
///
/// Same seed, same arguments -> bit-identical PathSet.
inline PathSet build_tdlc_paths(double rms_ds, double max_speed, const FrameConfig& cfg,
                                std::uint64_t seed, TdlcOptions opt = {}) {
    if (rms_ds < 0 || max_speed < 0)
        throw std::invalid_argument("build_tdlc_paths: negative rms_ds or max_speed");
    if (cfg.n_cp < 1)
        throw std::invalid_argument("build_tdlc_paths: frame has no CP to cover delays");

    Rng gain_rng(mix_seed({seed, static_cast<std::uint64_t>(Stream::ChannelGains)}));
    Rng speed_rng(mix_seed({seed, static_cast<std::uint64_t>(Stream::DopplerSpeeds)}));

    const auto& prof = tdlc_profile();
    PathSet ps;
    ps.seed = seed;
    ps.paths.resize(prof.size());

    double total = 0;
    for (size_t i = 0; i < prof.size(); ++i) {
        const double p_lin = std::pow(10.0, prof[i].power_db / 10.0);
        ps.paths[i].h = std::sqrt(p_lin) * gain_rng.cgauss();
        total += std::norm(ps.paths[i].h);

        double d = std::round(prof[i].delay_norm * rms_ds / cfg.t_s);
        if (d >= cfg.frame_len())
            throw std::invalid_argument("build_tdlc_paths: rms_ds puts a tap beyond the frame body");
        d = std::min(d, static_cast<double>(cfg.n_cp - 1));
        ps.paths[i].tau = d * cfg.t_s;

        const double v = opt.symmetric_doppler ? speed_rng.uniform(-max_speed, max_speed)
                                               : speed_rng.uniform(0.0, max_speed);
        ps.paths[i].nu = cfg.f_c * v / kSpeedOfLight;
    }
    const double scale = 1.0 / std::sqrt(total);
    for (Path& p : ps.paths) p.h *= scale;
    return ps;
}

namespace detail {

/// Integer delay in samples; rejects off-grid delays and delays the CP
/// cannot cover (cp_len is the covering CP of the frame in question).
inline int delay_samples(const Path& p, double t_s, int cp_len, const char* who) {
    const double d_real = p.tau / t_s;
    const int d = static_cast<int>(std::llround(d_real));
    if (std::abs(d_real - d) > 1e-6)
        throw std::invalid_argument(std::string(who) + ": path delay is not on the sample grid");
    if (d < 0 || (d > 0 && d >= cp_len))
        throw std::invalid_argument(std::string(who) + ": path delay outside [0, n_cp)");
    return d;
}

/// Phase recurrence e^{j 2 pi nu t_s (start + step_count)}, recomputed
/// from scratch every 256 steps so drift stays near machine precision.
class PhasorRamp {
  public:
    PhasorRamp(double nu, double t_s, double start_index)
        : step_(std::polar(1.0, 2.0 * std::numbers::pi * nu * t_s)),
          cur_(std::polar(1.0, 2.0 * std::numbers::pi * nu * t_s * start_index)),
          nu_ts_(nu * t_s),
          start_(start_index) {}

    cdbl value() const { return cur_; }

    void advance() {
        ++count_;
        if (count_ % 256 == 0)
            cur_ = std::polar(1.0, 2.0 * std::numbers::pi * nu_ts_ * (start_ + count_));
        else
            cur_ *= step_;
    }

  private:
    cdbl step_, cur_;
    double nu_ts_, start_;
    long long count_ = 0;
};

}  // namespace detail

/// Modulo-form channel: strips the CP and applies the cyclic delay /
/// Doppler sum directly on the M*N body. Rejects OFDM_SHORT frames
/// (their CP structure is per sub-symbol; see apply_channel_short).
inline cvec apply_channel(const TxFrame& frame, const PathSet& ps, const FrameConfig& cfg) {
    if (frame.kind == WaveformKind::OfdmShort)
        throw std::invalid_argument("apply_channel: OFDM_SHORT frames need apply_channel_short");
    const int mn = cfg.frame_len();
    if (frame.samples.size() != static_cast<size_t>(mn) + frame.n_cp)
        throw std::invalid_argument("apply_channel: frame length does not match config");
    const cvec s = remove_cp(frame.samples, frame.n_cp);

    cvec y(static_cast<size_t>(mn), cdbl(0.0));
    for (const Path& p : ps.paths) {
        const int d = detail::delay_samples(p, cfg.t_s, frame.n_cp, "apply_channel");
        detail::PhasorRamp ramp(p.nu, cfg.t_s, -static_cast<double>(d));
        for (int l = 0; l < mn; ++l) {
            const int idx = l - d + (l < d ? mn : 0);
            y[l] += p.h * s[idx] * ramp.value();
            ramp.advance();
        }
    }
    return y;
}

/// Linear-convolution form: runs the delay/Doppler sum over the full
/// CP-extended frame (no wraparound; samples before the frame are zero),
/// then removes the CP. The Doppler phase of the contribution arriving
/// at stream index t is e^{j 2 pi nu t_s (t - d - n_cp)}: the phase of
/// the transmit sample at its transmit time, referenced to body start.
/// Equal to apply_channel whenever all delays are below n_cp.
inline cvec apply_channel_linear(const TxFrame& frame, const PathSet& ps, const FrameConfig& cfg) {
    if (frame.kind == WaveformKind::OfdmShort)
        throw std::invalid_argument("apply_channel_linear: OFDM_SHORT frames need apply_channel_short");
    const int total = static_cast<int>(frame.samples.size());
    const int n_cp = frame.n_cp;

    cvec r(static_cast<size_t>(total), cdbl(0.0));
    for (const Path& p : ps.paths) {
        const int d = detail::delay_samples(p, cfg.t_s, n_cp, "apply_channel_linear");
        detail::PhasorRamp run(p.nu, cfg.t_s, static_cast<double>(-n_cp));
        for (int t = d; t < total; ++t) {
            r[t] += p.h * frame.samples[t - d] * run.value();
            run.advance();
        }
    }
    return remove_cp(r, n_cp);
}

/// Per-sub-symbol channel for OFDM_SHORT frames. Absolute time runs
/// across the whole frame so the Doppler phase evolves continuously from
/// one sub-symbol to the next; the phase reference is the first
/// sub-symbol's body start. Returns the M x N grid of received
/// sub-symbol bodies (CPs stripped).
inline CGrid apply_channel_short(const TxFrame& frame, const PathSet& ps, const FrameConfig& cfg) {
    if (frame.kind != WaveformKind::OfdmShort)
        throw std::invalid_argument("apply_channel_short: frame is not OFDM_SHORT");
    const int n_cps = frame.n_cp;
    const int blk = cfg.m + n_cps;
    if (frame.samples.size() != static_cast<size_t>(cfg.n) * blk)
        throw std::invalid_argument("apply_channel_short: frame length does not match config");

    CGrid y(cfg.m, cfg.n);
    for (const Path& p : ps.paths) {
        const int d = detail::delay_samples(p, cfg.t_s, n_cps, "apply_channel_short");
        for (int n = 0; n < cfg.n; ++n) {
            const int body0 = n * blk + n_cps;  // stream index of body sample 0
            // transmit-time phase of the first contributing sample:
            // (body0 - d) - n_cps relative to the first body start
            detail::PhasorRamp run(p.nu, cfg.t_s, static_cast<double>(body0 - d - n_cps));
            for (int j = 0; j < cfg.m; ++j) {
                y.at(j, n) += p.h * frame.samples[body0 + j - d] * run.value();
                run.advance();
            }
        }
    }
    return y;
}

/// Adds circularly-symmetric complex white Gaussian noise of per-sample
/// variance sigma2. sigma2 == 0 returns the input unchanged.
inline cvec add_awgn(const cvec& y, const NoiseSpec& spec) {
    if (spec.sigma2 < 0) throw std::invalid_argument("add_awgn: negative sigma2");
    if (spec.sigma2 == 0.0) return y;
    Rng rng(spec.seed);
    const double s = std::sqrt(spec.sigma2);
    cvec out = y;
    for (cdbl& z : out) z += s * rng.cgauss();
    return out;
}

namespace detail {
/// 1 - |D(x)|^2 for the mn-point Dirichlet kernel at a tone displacement
/// of x bins: the fraction of a unit tone's energy that lands off its
/// own bin after one mn-sample observation window.
inline double dirichlet_leak(double x, double mn) {
    const double s = std::sin(std::numbers::pi * x / mn);
    if (s == 0.0) return 0.0;
    const double d = std::sin(std::numbers::pi * x) / (mn * s);
    return 1.0 - d * d;
}
}  // namespace detail

/// Fraction of a path's energy that Doppler moves off its own fine tone.
/// Over one body of MN samples a shift of nu Hz displaces each tone by
/// x = nu * MN * t_s bins of the 1/(MN t_s) tone grid; the tone's own bin
/// keeps |D(x)|^2 with D the MN-point Dirichlet kernel, and the rest
/// lands on neighboring tones as inter-carrier interference that no
/// per-tone (diagonal) channel description can absorb.
inline double fine_tone_leak_fraction(const PathSet& ps, const FrameConfig& cfg) {
    const double mn = static_cast<double>(cfg.frame_len());
    double leak = 0.0, total = 0.0;
    for (const Path& p : ps.paths) {
        leak += std::norm(p.h) * detail::dirichlet_leak(p.nu * mn * cfg.t_s, mn);
        total += std::norm(p.h);
    }
    return total > 0 ? leak / total : 0.0;
}

/// Expected leak fraction when per-path speeds are uniform on
/// [0, max_speed] (m/s) — what a receiver that knows only the mobility
/// class (not the realized Doppler shifts) should budget for. nu_ref is
/// the bulk frequency offset the receiver removes beforehand (see
/// remove_bulk_offset); the budget then covers only the residual spread.
inline double expected_leak_fraction(double max_speed, const FrameConfig& cfg,
                                     double nu_ref = 0.0) {
    if (max_speed <= 0) return 0.0;
    const double mn = static_cast<double>(cfg.frame_len());
    const int steps = 256;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double v = max_speed * (i + 0.5) / steps;
        const double nu = cfg.f_c * v / kSpeedOfLight - nu_ref;
        acc += detail::dirichlet_leak(nu * mn * cfg.t_s, mn);
    }
    return acc / steps;
}

/// Power-weighted mean Doppler shift of a path set: the bulk frequency
/// offset a receiver's carrier-synchronization stage would lock to.
inline double doppler_centroid(const PathSet& ps) {
    double num = 0.0, den = 0.0;
    for (const Path& p : ps.paths) {
        num += std::norm(p.h) * p.nu;
        den += std::norm(p.h);
    }
    return den > 0 ? num / den : 0.0;
}

/// De-rotates a CP-stripped body by a bulk frequency offset:
/// y'[l] = y[l] * e^{-j 2 pi nu_ref l t_s}.
inline void remove_bulk_offset(cvec& body, double nu_ref, const FrameConfig& cfg) {
    if (nu_ref == 0.0) return;
    detail::PhasorRamp ramp(-nu_ref, cfg.t_s, 0.0);
    for (cdbl& z : body) {
        z *= ramp.value();
        ramp.advance();
    }
}

/// The channel seen through remove_bulk_offset(nu_ref). Exact identity,
/// not an approximation: with apply_channel's phase convention
/// y[l] = sum_p h_p e^{j 2 pi nu_p t_s (l - d_p)} s[l - d_p], de-rotating
/// by nu_ref turns each term into gain h_p e^{-j 2 pi nu_ref tau_p} with
/// Doppler nu_p - nu_ref. Centering the Doppler support this way halves
/// the worst-case fine-tone displacement under one-sided mobility, which
/// is what keeps per-tone channel descriptions usable at high speed.
inline PathSet recentre_paths(const PathSet& ps, double nu_ref) {
    PathSet out = ps;
    for (Path& p : out.paths) {
        p.h *= std::polar(1.0, -2.0 * std::numbers::pi * nu_ref * p.tau);
        p.nu -= nu_ref;
    }
    return out;
}

/// Text serialization: one path per line, "re(h) im(h) tau_samples nu_hz".
inline std::string pathset_to_text(const PathSet& ps, const FrameConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    for (const Path& p : ps.paths)
        os << p.h.real() << " " << p.h.imag() << " " << p.tau / cfg.t_s << " " << p.nu << "\n";
    return os.str();
}

inline PathSet pathset_from_text(const std::string& text, const FrameConfig& cfg) {
    PathSet ps;
    std::istringstream is(text);
    double re, im, d, nu;
    while (is >> re >> im >> d >> nu) ps.paths.push_back({cdbl(re, im), d * cfg.t_s, nu});
    return ps;
}

}  // namespace otfdm

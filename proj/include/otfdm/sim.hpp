#pragma once

/*
 * Monte-Carlo link-level campaign engine.
 *
 * A campaign sweeps (waveform x max_speed x snr) cells over `drops`
 * independent channel realizations. Within one drop every waveform sees
 * the SAME path set, the SAME information bits and the SAME unit noise
 * draws (paired comparison); the per-drop randomness is derived from
 * (master_seed, drop_index) through disjoint counter-based streams, so a
 * drop's result is a pure function of (config, drop_index) and the
 * aggregated CSV is byte-identical no matter how many threads ran it.
 *
 * Per-drop pipeline, per waveform:
 *   bits -> rate-1/2 LDPC -> QPSK -> grid (pilots inserted) -> modulate
 *        -> doubly-selective channel -> AWGN -> receiver -> equalized
 *        symbols -> LLRs -> LDPC decode -> block errors / EVM / NMSE.
 *
 * Receivers: OFDM_LARGE uses one-tap zero-forcing on the M*N tones
 * (genie diagonal or comb-pilot estimate); OTFDM first removes the bulk
 * Doppler offset (the one-sided mobility model gives the channel a
 * nonzero mean shift; centering it halves the worst-case fine-tone
 * displacement the per-subcarrier model must absorb), then expands the
 * body into the replica tensor and equalizes with the configured scheme
 * (dot division + despreading, or per-subcarrier LMMSE); OTFDM_DFTS
 * adds the transparent spreading stage and undoes it after equalization
 * (genie CSI only); OFDM_SHORT equalizes each sub-symbol with its own
 * genie one-tap diagonal (genie CSI only). The one-tap OFDM baseline is
 * deliberately kept classical - no offset correction - because it IS
 * the reference the comparison is about.
 *
 * Code-to-resource mapping: each frame carries `blocks` rate-1/2 LDPC
 * codewords (an optimized irregular-profile graph; see ldpc.hpp) and a
 * codeword occupies every blocks-th payload element rather than a
 * contiguous sub-band, spreading it across the whole bandwidth for
 * frequency diversity. Both waveforms use the same interleaving.
 *
 * SNR convention: sigma2 = mean transmit grid power / 10^(snr/10). All
 * transforms are unitary and QPSK is unit-modulus, so the grid power is
 * the same constant for every waveform and drop; noise is added to the
 * post-CP body samples.
 */

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "chest.hpp"
#include "grid.hpp"
#include "ldpc.hpp"
#include "qpsk.hpp"
#include "rng.hpp"
#include "rx.hpp"
#include "waveform.hpp"

namespace otfdm {

enum class SimWaveform { OfdmLarge, OfdmShort, Otfdm, OtfdmDfts };
enum class Equalizer { TdEq, Lmmse };
enum class CsiMode { Genie, Estimated };

inline const char* sim_waveform_name(SimWaveform w) {
    switch (w) {
        case SimWaveform::OfdmLarge: return "OFDM_LARGE";
        case SimWaveform::OfdmShort: return "OFDM_SHORT";
        case SimWaveform::Otfdm: return "OTFDM";
        case SimWaveform::OtfdmDfts: return "OTFDM_DFTS";
    }
    return "?";
}

inline const char* equalizer_name(Equalizer e) {
    return e == Equalizer::TdEq ? "td_eq" : "lmmse";
}

inline const char* csi_name(CsiMode c) { return c == CsiMode::Genie ? "genie" : "estimated"; }

namespace detail {
inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// Codeword-to-resource interleaving. `pos` lists payload positions in
/// natural (spectrally contiguous) order; after the permutation,
/// codeword b reads positions b, b+blocks, b+2*blocks, ... so each
/// codeword is spread across the whole band instead of owning one
/// contiguous sub-band. Positions beyond the tiled codewords (filler)
/// keep their natural order.
inline void stride_interleave(std::vector<int>& pos, int blocks, int k_syms) {
    if (blocks <= 1) return;
    std::vector<int> out(pos.size());
    for (int b = 0; b < blocks; ++b)
        for (int s = 0; s < k_syms; ++s)
            out[static_cast<size_t>(b) * k_syms + s] = pos[static_cast<size_t>(s) * blocks + b];
    for (size_t i = static_cast<size_t>(blocks) * k_syms; i < pos.size(); ++i) out[i] = pos[i];
    pos.swap(out);
}
}  // namespace detail

inline SimWaveform parse_sim_waveform(const std::string& name) {
    const std::string s = detail::lower(name);
    if (s == "ofdm" || s == "ofdm_large") return SimWaveform::OfdmLarge;
    if (s == "ofdm_short") return SimWaveform::OfdmShort;
    if (s == "otfdm") return SimWaveform::Otfdm;
    if (s == "otfdm_dfts" || s == "dft_s_otfdm") return SimWaveform::OtfdmDfts;
    throw std::invalid_argument("unknown waveform: " + name);
}

inline Equalizer parse_equalizer(const std::string& name) {
    const std::string s = detail::lower(name);
    if (s == "td_eq" || s == "tdeq") return Equalizer::TdEq;
    if (s == "lmmse") return Equalizer::Lmmse;
    throw std::invalid_argument("unknown equalizer: " + name);
}

inline CsiMode parse_csi(const std::string& name) {
    const std::string s = detail::lower(name);
    if (s == "genie") return CsiMode::Genie;
    if (s == "estimated") return CsiMode::Estimated;
    throw std::invalid_argument("unknown csi mode: " + name);
}

/// Full campaign description. Defaults reproduce the headline comparison
/// at desk scale: 24 GHz, 15 kHz fine spacing, M=512 x N=8 grid with one
/// 288-sample CP, 1/4 comb pilots boosted 6 dB, TDL-C with 1000 ns rms
/// delay spread, speeds {200,350,500} km/h at 6 dB SNR, 2000 drops.
struct CampaignConfig {
    int m = 512;
    int n = 8;
    int n_cp = 288;
    double delta_f = 15e3;  // fine (large-symbol) subcarrier spacing [Hz]
    double f_c = 24e9;      // carrier [Hz]

    std::vector<SimWaveform> waveforms = {SimWaveform::OfdmLarge, SimWaveform::Otfdm};
    Equalizer equalizer = Equalizer::TdEq;  // OTFDM-family only; OFDM is always one-tap
    CsiMode csi = CsiMode::Estimated;

    int pilot_lambda = 4;
    int pilot_width = 8;
    double pilot_boost_db = 6.0;

    double rms_ds = 1000e-9;  // [s]
    bool symmetric_doppler = false;
    std::vector<double> max_speeds_kmh = {200.0, 350.0, 500.0};
    std::vector<double> snrs_db = {6.0};

    int drops = 2000;
    std::uint64_t master_seed = 1;
    std::string out = "results.csv";

    int ldpc_k = 1024;       // rate-1/2 info block
    int ofdm_short_cp = 288; // per-sub-symbol CP of the OFDM_SHORT extra
    int threads = 1;
    bool timing = false;     // fill the wall_ms CSV column (non-reproducible)

    FrameConfig frame() const { return FrameConfig::make(m, n, n_cp, delta_f, f_c); }

    double max_speed_mps() const {
        double v = 0.0;
        for (double s : max_speeds_kmh) v = std::max(v, s);
        return v / 3.6;
    }
    double nu_max() const { return f_c * max_speed_mps() / kSpeedOfLight; }
};

// The LDPC graph is a campaign constant: fixed seed so results with
// different master seeds stay comparable under the same code.
constexpr std::uint64_t kLdpcGraphSeed = 0xC0DEC0DEULL;

inline void validate_campaign_config(const CampaignConfig& c) {
    c.frame();  // geometry checks
    if (c.waveforms.empty()) throw std::invalid_argument("config: waveform list is empty");
    if (c.max_speeds_kmh.empty() || c.snrs_db.empty())
        throw std::invalid_argument("config: sweep lists must be non-empty");
    for (double s : c.max_speeds_kmh)
        if (s < 0) throw std::invalid_argument("config: negative max speed");
    if (c.drops < 1) throw std::invalid_argument("config: drops must be >= 1");
    if (c.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (c.ldpc_k < 4) throw std::invalid_argument("config: ldpc_k too small");
    if (c.rms_ds < 0) throw std::invalid_argument("config: negative rms delay spread");
    for (SimWaveform w : c.waveforms) {
        const bool genie_only = (w == SimWaveform::OfdmShort || w == SimWaveform::OtfdmDfts);
        if (genie_only && c.csi == CsiMode::Estimated)
            throw std::invalid_argument(std::string("config: ") + sim_waveform_name(w) +
                                        " supports genie CSI only");
    }
    if (c.ofdm_short_cp < 0 || c.ofdm_short_cp > c.m)
        throw std::invalid_argument("config: ofdm_short_cp out of range");
}

/// Precomputed campaign state shared (read-only) by all drops/threads.
struct CampaignContext {
    CampaignConfig cfg;
    FrameConfig frame;
    PilotLayout pilots;        // OTFDM comb layout (also the power reference)
    OfdmPilots ofdm_pilots;    // valid iff has_ofdm_large
    LdpcCode code;
    OverheadReport overhead;

    bool has_ofdm_large = false;
    bool has_ofdm_short = false;
    bool has_otfdm_family = false;

    int blocks = 0;  // LDPC codewords per frame
    int filler = 0;  // data REs beyond the tiled codewords
    std::vector<int> grid_data_pos;    // column-major M x N indices, codeword-interleaved
    std::vector<int> ofdm_data_tones;  // large-OFDM payload tones, same interleaving
    double mean_grid_power = 0.0;      // informational: includes the pilot boost

    /// Noise variance for a target SNR, referenced to the unit-power
    /// data symbols (the pilot boost is overhead, not counted as signal).
    double sigma2_for(double snr_db) const { return std::pow(10.0, -snr_db / 10.0); }
};

inline CampaignContext make_context(const CampaignConfig& c) {
    validate_campaign_config(c);
    CampaignContext ctx;
    ctx.cfg = c;
    ctx.frame = c.frame();
    ctx.pilots = build_pilot_layout(c.pilot_lambda, c.pilot_width, c.pilot_boost_db, ctx.frame,
                                    c.master_seed);

    for (SimWaveform w : c.waveforms) {
        ctx.has_ofdm_large |= (w == SimWaveform::OfdmLarge);
        ctx.has_ofdm_short |= (w == SimWaveform::OfdmShort);
        ctx.has_otfdm_family |= (w == SimWaveform::Otfdm || w == SimWaveform::OtfdmDfts);
    }

    // Natural (spectrally contiguous) fill order over the non-reserved
    // grid elements; interleaved across codewords below.
    for (int m = 0; m < ctx.frame.m; ++m)
        for (int n = 0; n < ctx.frame.n; ++n)
            if (!ctx.pilots.is_reserved(m, n))
                ctx.grid_data_pos.push_back(n * ctx.frame.m + m);

    const int data_res = static_cast<int>(ctx.grid_data_pos.size());
    ctx.code = ldpc_build(c.ldpc_k, kLdpcGraphSeed, LdpcGraph::OptimizedIrregular);
    ctx.blocks = data_res / ctx.code.k_info;  // QPSK: one codeword = k_info symbols
    ctx.filler = data_res - ctx.blocks * ctx.code.k_info;
    if (ctx.blocks < 1)
        throw std::invalid_argument("config: frame too small for one LDPC codeword");
    detail::stride_interleave(ctx.grid_data_pos, ctx.blocks, ctx.code.k_info);

    if (ctx.has_ofdm_large) {
        // Same overhead fraction as the grid layout: density w/(lambda*N)
        // on the M*N-tone axis.
        const int lam_num = c.pilot_lambda * c.n;
        if (lam_num % c.pilot_width != 0)
            throw std::invalid_argument(
                "config: OFDM pilot comb needs pilot_lambda*n divisible by pilot_width");
        const int lam_ofdm = lam_num / c.pilot_width;
        const int mn = ctx.frame.frame_len();
        if (lam_ofdm < 1 || mn % lam_ofdm != 0)
            throw std::invalid_argument("config: OFDM pilot spacing must divide M*N");
        ctx.ofdm_pilots = build_ofdm_pilots(lam_ofdm, c.pilot_boost_db, mn, c.master_seed);
        for (int q = 0; q < mn; ++q)
            if (q % lam_ofdm != 0) ctx.ofdm_data_tones.push_back(q);
        if (static_cast<int>(ctx.ofdm_data_tones.size()) != data_res)
            throw std::invalid_argument(
                "config: OFDM and OTFDM payloads differ; adjust pilot_width/pilot_lambda");
        detail::stride_interleave(ctx.ofdm_data_tones, ctx.blocks, ctx.code.k_info);
    }

    if (ctx.has_ofdm_short) {
        // Longest tap after the builder's CP clipping must still fit the
        // per-sub-symbol CP.
        const auto& prof = tdlc_profile();
        const double span = prof.back().delay_norm * c.rms_ds / ctx.frame.t_s;
        const int worst = static_cast<int>(
            std::min<double>(c.n_cp - 1, std::llround(span)));
        if (c.ofdm_short_cp <= worst)
            throw std::invalid_argument(
                "config: ofdm_short_cp cannot cover the channel delay spread");
    }

    double pilot_energy = 0.0;
    for (cdbl v : ctx.pilots.pilot_values) pilot_energy += std::norm(v);
    ctx.mean_grid_power = (data_res + pilot_energy) / ctx.frame.frame_len();

    ctx.overhead = overhead_report(ctx.pilots, c.rms_ds, c.nu_max(), ctx.frame);
    if (!ctx.overhead.feasible) {
        char msg[256];
        std::snprintf(msg, sizeof msg,
                      "infeasible pilot overhead: delay %.3f/%.3f samples, Doppler %.3f/%.3f slots",
                      ctx.overhead.required_delay_samples, ctx.overhead.delay_budget_samples,
                      ctx.overhead.required_doppler_slots, ctx.overhead.doppler_budget_slots);
        throw std::runtime_error(msg);
    }
    return ctx;
}

// ----------------------------------------------------------------------
// Per-drop transmit side (shared by all sweep cells of the drop).

struct DropTx {
    std::uint64_t seed = 0;
    std::vector<std::vector<std::uint8_t>> info_bits;  // per codeword
    cvec data_syms;                                    // payload in fill order
    CGrid grid;                                        // pilot-inserted M x N grid
    cvec ofdm_tones;                                   // large-OFDM tone loading
    std::vector<TxFrame> frames;                       // parallel to cfg.waveforms
};

inline DropTx build_drop_tx(const CampaignContext& ctx, int drop_index) {
    const CampaignConfig& c = ctx.cfg;
    const FrameConfig& fr = ctx.frame;
    DropTx tx;
    tx.seed = mix_seed({c.master_seed, static_cast<std::uint64_t>(drop_index)});

    Rng bits = stream_rng(c.master_seed, drop_index, Stream::DataBits);
    tx.data_syms.reserve(ctx.grid_data_pos.size());
    for (int b = 0; b < ctx.blocks; ++b) {
        std::vector<std::uint8_t> msg(ctx.code.k_info);
        for (auto& x : msg) x = bits.bit();
        const cvec syms = qpsk_map(ldpc_encode(msg, ctx.code));
        tx.data_syms.insert(tx.data_syms.end(), syms.begin(), syms.end());
        tx.info_bits.push_back(std::move(msg));
    }
    for (int i = 0; i < ctx.filler; ++i) {
        const std::vector<std::uint8_t> fb{bits.bit(), bits.bit()};
        tx.data_syms.push_back(qpsk_map(fb)[0]);
    }

    CGrid g(fr.m, fr.n);
    for (size_t i = 0; i < ctx.grid_data_pos.size(); ++i)
        g.data[ctx.grid_data_pos[i]] = tx.data_syms[i];
    tx.grid = insert_pilots(g, ctx.pilots, fr);

    if (ctx.has_ofdm_large) {
        tx.ofdm_tones.assign(fr.frame_len(), cdbl(0.0));
        for (size_t j = 0; j < ctx.ofdm_pilots.tones.size(); ++j)
            tx.ofdm_tones[ctx.ofdm_pilots.tones[j]] = ctx.ofdm_pilots.values[j];
        for (size_t i = 0; i < ctx.ofdm_data_tones.size(); ++i)
            tx.ofdm_tones[ctx.ofdm_data_tones[i]] = tx.data_syms[i];
    }

    tx.frames.reserve(c.waveforms.size());
    for (SimWaveform w : c.waveforms) {
        switch (w) {
            case SimWaveform::OfdmLarge:
                tx.frames.push_back(ofdm_modulate_large(devectorize(tx.ofdm_tones, fr.m, fr.n), fr));
                break;
            case SimWaveform::OfdmShort:
                tx.frames.push_back(ofdm_modulate_short(tx.grid, fr, c.ofdm_short_cp));
                break;
            case SimWaveform::Otfdm:
                tx.frames.push_back(otfdm_modulate(tx.grid, fr, false));
                break;
            case SimWaveform::OtfdmDfts:
                tx.frames.push_back(otfdm_modulate(tx.grid, fr, true));
                break;
        }
    }
    return tx;
}

// ----------------------------------------------------------------------
// Drop execution.

struct WaveformDropStats {
    long long block_errors = 0;
    long long blocks = 0;
    double evm_err = 0.0;   // sum |x_hat - x|^2 over payload REs
    double evm_ref = 0.0;   // sum |x|^2
    double nmse_num = 0.0;  // sum |h_hat - h|^2 (estimated CSI)
    double nmse_den = 0.0;  // sum |h|^2
    double wall_ns = 0.0;
};

/// stats is flattened [speed][snr][waveform].
struct DropResult {
    std::uint64_t seed = 0;
    std::vector<WaveformDropStats> stats;
};

inline size_t drop_stat_index(const CampaignConfig& c, size_t si, size_t yi, size_t wi) {
    return (si * c.snrs_db.size() + yi) * c.waveforms.size() + wi;
}

namespace detail {

/// EVM accumulation and per-codeword decoding over the payload positions
/// of an equalized grid.
inline void score_payload(WaveformDropStats& st, const EqualizedGrid& eq,
                          const std::vector<int>& pos, const DropTx& tx,
                          const CampaignContext& ctx) {
    for (size_t i = 0; i < pos.size(); ++i) {
        st.evm_err += std::norm(eq.x_hat.data[pos[i]] - tx.data_syms[i]);
        st.evm_ref += std::norm(tx.data_syms[i]);
    }
    std::vector<double> llr(ctx.code.n_code);
    for (int b = 0; b < ctx.blocks; ++b) {
        for (int s = 0; s < ctx.code.k_info; ++s) {
            const int p = pos[static_cast<size_t>(b) * ctx.code.k_info + s];
            qpsk_llr(eq.x_hat.data[p], eq.gain[p], eq.noise_var[p], llr[2 * s], llr[2 * s + 1]);
        }
        const LdpcDecodeResult dec = ldpc_decode(llr, ctx.code);
        st.blocks += 1;
        if (dec.message != tx.info_bits[b]) st.block_errors += 1;
    }
}

inline void accumulate_nmse(WaveformDropStats& st, const cvec& est, const cvec& truth) {
    for (size_t i = 0; i < truth.size(); ++i) {
        st.nmse_num += std::norm(est[i] - truth[i]);
        st.nmse_den += std::norm(truth[i]);
    }
}

/// Undo the transparent column spreading after equalization. The symbol
/// estimates transform exactly; the per-column noise variance and bias
/// are summarized by their column means (the unitary mixing preserves
/// totals; an erased replica poisons its whole column).
inline EqualizedGrid despread_columns(const EqualizedGrid& eq, const FrameConfig& fr) {
    EqualizedGrid out(fr.m, fr.n);
    out.x_hat = dft_columns(eq.x_hat, true);
    for (int n = 0; n < fr.n; ++n) {
        double var = 0.0;
        cdbl gain = 0.0;
        for (int m = 0; m < fr.m; ++m) {
            var += eq.noise_var[eq.idx(m, n)];
            gain += eq.gain[eq.idx(m, n)];
        }
        var /= fr.m;
        gain /= static_cast<double>(fr.m);
        for (int m = 0; m < fr.m; ++m) {
            out.noise_var[out.idx(m, n)] = var;
            out.gain[out.idx(m, n)] = gain;
        }
    }
    return out;
}

}  // namespace detail

inline DropResult run_drop(const CampaignContext& ctx, int drop_index) {
    const CampaignConfig& c = ctx.cfg;
    const FrameConfig& fr = ctx.frame;
    const int mn = fr.frame_len();
    const size_t n_wf = c.waveforms.size();

    DropResult res;
    res.seed = mix_seed({c.master_seed, static_cast<std::uint64_t>(drop_index)});
    res.stats.resize(c.max_speeds_kmh.size() * c.snrs_db.size() * n_wf);

    const DropTx tx = build_drop_tx(ctx, drop_index);

    Rng nrng = stream_rng(c.master_seed, drop_index, Stream::Noise);
    cvec noise(static_cast<size_t>(mn));
    for (cdbl& z : noise) z = nrng.cgauss();

    const bool estimated = (c.csi == CsiMode::Estimated);

    for (size_t si = 0; si < c.max_speeds_kmh.size(); ++si) {
        const PathSet ps = build_tdlc_paths(c.rms_ds, c.max_speeds_kmh[si] / 3.6, fr, res.seed,
                                            TdlcOptions{c.symmetric_doppler});

        std::vector<cvec> clean(n_wf);
        for (size_t wi = 0; wi < n_wf; ++wi)
            clean[wi] = (c.waveforms[wi] == SimWaveform::OfdmShort)
                            ? apply_channel_short(tx.frames[wi], ps, fr).data
                            : apply_channel(tx.frames[wi], ps, fr);

        cvec truth_ofdm_h;
        if (ctx.has_ofdm_large) truth_ofdm_h = ofdm_analytic_one_tap(ps, fr);
        CGrid truth_short_h;
        if (ctx.has_ofdm_short) truth_short_h = ofdm_short_analytic_one_tap(ps, fr, c.ofdm_short_cp);

        // Replica-domain receiver synchronization: remove the bulk Doppler
        // offset before fitting the per-subcarrier model. A genie receiver
        // locks to the true power-weighted centroid; an estimating receiver
        // only knows the configured mobility class, whose one-sided draw has
        // its mean shift at half the maximum. Everything downstream (truth
        // tensor, estimator reference, LMMSE interference budget) lives in
        // the same de-rotated basis — recentre_paths is an exact identity.
        double nu_bar = 0.0;
        DotProductChannel truth_eta;
        double lmmse_ici = 0.0;
        if (ctx.has_otfdm_family) {
            if (estimated)
                nu_bar = c.symmetric_doppler
                             ? 0.0
                             : 0.5 * c.f_c * (c.max_speeds_kmh[si] / 3.6) / kSpeedOfLight;
            else
                nu_bar = doppler_centroid(ps);
            const PathSet ps_rc = recentre_paths(ps, nu_bar);
            truth_eta = analytic_dot_channel(ps_rc, fr);
            if (c.equalizer == Equalizer::Lmmse)
                lmmse_ici = estimated
                                ? expected_leak_fraction(c.max_speeds_kmh[si] / 3.6, fr, nu_bar)
                                : fine_tone_leak_fraction(ps_rc, fr);
        }

        for (size_t yi = 0; yi < c.snrs_db.size(); ++yi) {
            const double sigma2 = ctx.sigma2_for(c.snrs_db[yi]);
            const double sigma = std::sqrt(sigma2);

            for (size_t wi = 0; wi < n_wf; ++wi) {
                WaveformDropStats& st = res.stats[drop_stat_index(c, si, yi, wi)];
                const auto t0 = std::chrono::steady_clock::now();

                cvec body = clean[wi];
                for (int j = 0; j < mn; ++j) body[j] += sigma * noise[j];

                switch (c.waveforms[wi]) {
                    case SimWaveform::OfdmLarge: {
                        const cvec tones = unitary_dft(body, false);
                        cvec h_est;
                        const cvec* h = &truth_ofdm_h;
                        if (estimated) {
                            h_est = ofdm_estimate_channel(tones, ctx.ofdm_pilots);
                            detail::accumulate_nmse(st, h_est, truth_ofdm_h);
                            h = &h_est;
                        }
                        const EqualizedGrid eq = ofdm_one_tap_equalize(tones, *h, sigma2);
                        detail::score_payload(st, eq, ctx.ofdm_data_tones, tx, ctx);
                        break;
                    }
                    case SimWaveform::Otfdm:
                    case SimWaveform::OtfdmDfts: {
                        remove_bulk_offset(body, nu_bar, fr);
                        const ExpandedRxTensor ypp =
                            subcarrier_transform(doppler_dot_divide(reshape_body(body, fr), fr));
                        DotProductChannel est;
                        const DotProductChannel* ch = &truth_eta;
                        if (estimated && c.waveforms[wi] == SimWaveform::Otfdm) {
                            est = estimate_channel(ypp, ctx.pilots, fr);
                            detail::accumulate_nmse(st, est.eta, truth_eta.eta);
                            ch = &est;
                        }
                        EqualizedGrid eq = (c.equalizer == Equalizer::TdEq)
                                               ? td_equalize_despread(ypp, *ch, sigma2, fr)
                                               : lmmse_despread(ypp, *ch, sigma2, fr, lmmse_ici);
                        if (c.waveforms[wi] == SimWaveform::OtfdmDfts)
                            eq = detail::despread_columns(eq, fr);
                        detail::score_payload(st, eq, ctx.grid_data_pos, tx, ctx);
                        break;
                    }
                    case SimWaveform::OfdmShort: {
                        const CGrid tones = dft_columns(devectorize(body, fr.m, fr.n), false);
                        const EqualizedGrid eq =
                            ofdm_one_tap_equalize(tones.data, truth_short_h.data, sigma2);
                        detail::score_payload(st, eq, ctx.grid_data_pos, tx, ctx);
                        break;
                    }
                }
                if (c.timing)
                    st.wall_ns += std::chrono::duration<double, std::nano>(
                                      std::chrono::steady_clock::now() - t0)
                                      .count();
            }
        }
    }
    return res;
}

// ----------------------------------------------------------------------
// Campaign execution and CSV output.

struct CellAggregate {
    SimWaveform waveform = SimWaveform::OfdmLarge;
    double max_speed_kmh = 0.0;
    double snr_db = 0.0;
    long long drops = 0;
    long long block_errors = 0;
    long long blocks = 0;
    double evm_err = 0.0, evm_ref = 0.0;
    double nmse_num = 0.0, nmse_den = 0.0;
    double wall_ns = 0.0;
    bool nmse_valid = false;

    double bler() const { return blocks > 0 ? static_cast<double>(block_errors) / blocks : 0.0; }
    double evm_db() const { return 10.0 * std::log10(evm_err / evm_ref); }
    double nmse_db() const { return 10.0 * std::log10(nmse_num / nmse_den); }
};

using ProgressFn = std::function<void(long long done, long long total)>;

inline std::vector<CellAggregate> run_campaign(const CampaignConfig& cfg,
                                               const ProgressFn& progress = {}) {
    const CampaignContext ctx = make_context(cfg);
    std::vector<DropResult> results(static_cast<size_t>(cfg.drops));

    const int n_threads = std::min<int>(cfg.threads, cfg.drops);
    if (n_threads <= 1) {
        for (int d = 0; d < cfg.drops; ++d) {
            results[d] = run_drop(ctx, d);
            if (progress) progress(d + 1, cfg.drops);
        }
    } else {
        std::atomic<long long> done{0};
        std::atomic<bool> failed{false};
        std::vector<std::exception_ptr> errors(static_cast<size_t>(n_threads));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (int d = t; d < cfg.drops; d += n_threads) {
                        if (failed.load(std::memory_order_relaxed)) return;
                        results[d] = run_drop(ctx, d);
                        done.fetch_add(1, std::memory_order_relaxed);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            });
        if (progress) {
            long long seen = -1;
            while (done.load() < cfg.drops && !failed.load()) {
                const long long now = done.load();
                if (now != seen) {
                    progress(now, cfg.drops);
                    seen = now;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            }
        }
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
        if (progress) progress(cfg.drops, cfg.drops);
    }

    // Fixed-order reduction: cell totals are summed drop 0..D-1 so the
    // output is independent of the execution schedule.
    std::vector<CellAggregate> rows;
    rows.reserve(cfg.waveforms.size() * cfg.max_speeds_kmh.size() * cfg.snrs_db.size());
    for (size_t wi = 0; wi < cfg.waveforms.size(); ++wi)
        for (size_t si = 0; si < cfg.max_speeds_kmh.size(); ++si)
            for (size_t yi = 0; yi < cfg.snrs_db.size(); ++yi) {
                CellAggregate agg;
                agg.waveform = cfg.waveforms[wi];
                agg.max_speed_kmh = cfg.max_speeds_kmh[si];
                agg.snr_db = cfg.snrs_db[yi];
                agg.drops = cfg.drops;
                for (int d = 0; d < cfg.drops; ++d) {
                    const WaveformDropStats& st = results[d].stats[drop_stat_index(cfg, si, yi, wi)];
                    agg.block_errors += st.block_errors;
                    agg.blocks += st.blocks;
                    agg.evm_err += st.evm_err;
                    agg.evm_ref += st.evm_ref;
                    agg.nmse_num += st.nmse_num;
                    agg.nmse_den += st.nmse_den;
                    agg.wall_ns += st.wall_ns;
                }
                agg.nmse_valid = (cfg.csi == CsiMode::Estimated && agg.nmse_den > 0.0);
                rows.push_back(agg);
            }
    return rows;
}

/// Header: waveform,max_speed_kmh,snr_db,drops,block_errors,bler,evm_db,nmse_db,wall_ms.
/// nmse_db is empty under genie CSI; wall_ms is empty unless timing was
/// requested (measured times are not reproducible and would break the
/// byte-identical output guarantee).
inline void write_campaign_csv(const std::vector<CellAggregate>& rows, bool timing,
                               std::ostream& os) {
    os << "waveform,max_speed_kmh,snr_db,drops,block_errors,bler,evm_db,nmse_db,wall_ms\n";
    char buf[320];
    for (const CellAggregate& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%lld,%lld,%.10g,%.10g",
                      sim_waveform_name(r.waveform), r.max_speed_kmh, r.snr_db, r.drops,
                      r.block_errors, r.bler(), r.evm_db());
        os << buf << ',';
        if (r.nmse_valid) {
            std::snprintf(buf, sizeof buf, "%.10g", r.nmse_db());
            os << buf;
        }
        os << ',';
        if (timing && r.drops > 0) {
            std::snprintf(buf, sizeof buf, "%.3f", r.wall_ns / 1e6 / static_cast<double>(r.drops));
            os << buf;
        }
        os << '\n';
    }
}

inline void save_campaign_csv(const std::vector<CellAggregate>& rows, bool timing,
                              const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output CSV: " + path);
    write_campaign_csv(rows, timing, os);
    os.flush();
    if (!os) throw std::runtime_error("CSV write failed: " + path);
}

// ----------------------------------------------------------------------
// Channel snapshot (truth vs estimate) and IQ dump.

struct SnapshotResult {
    std::string truth_abs_path, est_abs_path, truth_path, est_path;
    double nmse = 0.0;  // linear, complex, over the full replica tensor
};

namespace detail {

inline void write_tensor_text(const DotProductChannel& ch, bool magnitudes,
                              const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open snapshot file: " + path);
    char buf[64];
    // rows: fine tone index m*N + n; columns: replica index k
    for (int m = 0; m < ch.m; ++m)
        for (int n = 0; n < ch.n; ++n) {
            for (int k = 0; k < ch.k; ++k) {
                const cdbl v = ch.eta_at(m, n, k);
                if (magnitudes) {
                    std::snprintf(buf, sizeof buf, "%.17g", std::abs(v));
                    os << (k ? " " : "") << buf;
                } else {
                    std::snprintf(buf, sizeof buf, "%.17g %.17g", v.real(), v.imag());
                    os << (k ? " " : "") << buf;
                }
            }
            os << '\n';
        }
    if (!os) throw std::runtime_error("snapshot write failed: " + path);
}

}  // namespace detail

/// Reproduces drop 0 of the first sweep cell, estimates the replica
/// tensor from its pilots and writes truth/estimate grids for external
/// plotting: "<prefix>_{truth,est}_abs.txt" hold magnitudes,
/// "<prefix>_{truth,est}.txt" hold "re im" pairs. M*N rows (fine tone
/// index m*N+n), N columns (replica k).
inline SnapshotResult emit_channel_snapshot(const CampaignConfig& cfg,
                                            const std::string& prefix) {
    if (cfg.csi != CsiMode::Estimated)
        throw std::invalid_argument("channel snapshot requires estimated CSI");
    const CampaignContext ctx = make_context(cfg);
    const FrameConfig& fr = ctx.frame;

    const DropTx tx = build_drop_tx(ctx, 0);
    const TxFrame frame = otfdm_modulate(tx.grid, fr, false);
    const PathSet ps = build_tdlc_paths(cfg.rms_ds, cfg.max_speeds_kmh[0] / 3.6, fr, tx.seed,
                                        TdlcOptions{cfg.symmetric_doppler});
    cvec body = apply_channel(frame, ps, fr);

    Rng nrng = stream_rng(cfg.master_seed, 0, Stream::Noise);
    const double sigma = std::sqrt(ctx.sigma2_for(cfg.snrs_db[0]));
    for (cdbl& z : body) z += sigma * nrng.cgauss();

    // Same receiver front end as run_drop's estimated-CSI path: estimate
    // and truth live in the bulk-offset-corrected basis.
    const double nu_bar = cfg.symmetric_doppler
                              ? 0.0
                              : 0.5 * cfg.f_c * (cfg.max_speeds_kmh[0] / 3.6) / kSpeedOfLight;
    remove_bulk_offset(body, nu_bar, fr);
    const ExpandedRxTensor ypp =
        subcarrier_transform(doppler_dot_divide(reshape_body(body, fr), fr));
    const DotProductChannel est = estimate_channel(ypp, ctx.pilots, fr);
    const DotProductChannel truth = analytic_dot_channel(recentre_paths(ps, nu_bar), fr);

    SnapshotResult out;
    out.truth_abs_path = prefix + "_truth_abs.txt";
    out.est_abs_path = prefix + "_est_abs.txt";
    out.truth_path = prefix + "_truth.txt";
    out.est_path = prefix + "_est.txt";
    detail::write_tensor_text(truth, true, out.truth_abs_path);
    detail::write_tensor_text(est, true, out.est_abs_path);
    detail::write_tensor_text(truth, false, out.truth_path);
    detail::write_tensor_text(est, false, out.est_path);

    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < truth.eta.size(); ++i) {
        num += std::norm(est.eta[i] - truth.eta[i]);
        den += std::norm(truth.eta[i]);
    }
    out.nmse = num / den;
    return out;
}

/// Raw float64 little-endian interleaved (re, im) samples.
inline void dump_iq(const cvec& samples, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open IQ dump: " + path);
    for (cdbl z : samples) {
        const double re = z.real(), im = z.imag();
        os.write(reinterpret_cast<const char*>(&re), sizeof re);
        os.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
    os.flush();
    if (!os) throw std::runtime_error("IQ dump write failed: " + path);
}

}  // namespace otfdm

// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <otfdm/channel.hpp>
#include <otfdm/chest.hpp>
#include <otfdm/rng.hpp>

#include <cmath>
#include <numbers>

using namespace otfdm;

namespace {

CGrid random_grid(int m, int n, uint64_t seed) {
  Rng rng(seed);
  CGrid g(m, n);
  for (auto& z : g.data) z = rng.cgauss();
  return g;
}

ExpandedRxTensor receive(const cvec& body, const FrameConfig& cfg) {
  return subcarrier_transform(doppler_dot_divide(reshape_body(body, cfg), cfg));
}

double tensor_nmse(const DotProductChannel& est, const DotProductChannel& truth) {
  double num = 0, den = 0;
  for (size_t i = 0; i < truth.eta.size(); ++i) {
    num += std::norm(est.eta[i] - truth.eta[i]);
    den += std::norm(truth.eta[i]);
  }
  return num / den;
}

// Random static path set with on-grid delays below max_d samples.
PathSet static_paths(int count, int max_d, double t_s, uint64_t seed) {
  Rng rng(seed);
  PathSet ps;
  double tot = 0;
  for (int i = 0; i < count; ++i) {
    Path p;
    p.h = rng.cgauss();
    p.tau = (i == 0 ? 0.0 : std::floor(rng.uniform(0.0, max_d))) * t_s;
    tot += std::norm(p.h);
    ps.paths.push_back(p);
  }
  for (auto& p : ps.paths) p.h /= std::sqrt(tot);
  return ps;
}

}  // namespace

// ------------------------------------------------------------- layout

TEST_CASE("pilot layout: index sets, amplitude, determinism, rejection") {
  SECTION("M=8, lambda=4 reserves subcarriers 0 and 4") {
    auto cfg = FrameConfig::make(8, 4, 8, 15e3, 24e9);
    PilotLayout lay = build_pilot_layout(4, 2, 0.0, cfg, 1);
    REQUIRE(lay.pilot_subcarriers == std::vector<int>{0, 4});
    REQUIRE(lay.is_reserved(0, 0));
    REQUIRE(lay.is_reserved(4, 1));
    REQUIRE_FALSE(lay.is_reserved(4, 2));   // beyond the reserved width
    REQUIRE_FALSE(lay.is_reserved(1, 0));   // data subcarrier
  }

  SECTION("Table scale: 128 pilot subcarriers, 3072 data elements") {
    auto cfg = FrameConfig::make(512, 8, 288, 15e3, 24e9);
    PilotLayout lay = build_pilot_layout(4, 8, 6.0, cfg, 1);
    REQUIRE(lay.pilot_subcarriers.size() == 128);
    REQUIRE(data_capacity(lay, cfg) == 3072);
    // sqrt(W) concentration plus 6 dB boost on top
    const double want = std::sqrt(8.0) * std::pow(10.0, 6.0 / 20.0);
    REQUIRE(lay.amplitude() == Catch::Approx(want));
    for (cdbl v : lay.pilot_values) REQUIRE(std::abs(v) == Catch::Approx(want));
  }

  SECTION("same seed reproduces the sequence; different seed does not") {
    auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
    PilotLayout a = build_pilot_layout(4, 8, 6.0, cfg, 5);
    PilotLayout b = build_pilot_layout(4, 8, 6.0, cfg, 5);
    PilotLayout c = build_pilot_layout(4, 8, 6.0, cfg, 6);
    REQUIRE(a.pilot_values == b.pilot_values);
    REQUIRE(a.pilot_values != c.pilot_values);
  }

  SECTION("invalid geometry is rejected") {
    auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
    REQUIRE_THROWS_AS(build_pilot_layout(3, 8, 0.0, cfg, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(build_pilot_layout(4, 0, 0.0, cfg, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(build_pilot_layout(4, 9, 0.0, cfg, 1), std::invalid_argument);
  }
}

TEST_CASE("pilot insertion: disjointness, capacity, idempotence") {
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 6.0, cfg, 2);

  SECTION("zero grid becomes nonzero exactly at pilot slots") {
    CGrid z(64, 8);
    CGrid out = insert_pilots(z, lay, cfg);
    for (int m = 0; m < 64; ++m)
      for (int n = 0; n < 8; ++n) {
        const bool pilot_re = (m % 4 == 0 && n == 0);
        REQUIRE((std::abs(out.at(m, n)) > 0) == pilot_re);
      }
  }

  SECTION("data elements pass through and a second insertion changes nothing") {
    CGrid x = random_grid(64, 8, 3);
    CGrid once = insert_pilots(x, lay, cfg);
    for (int m = 0; m < 64; ++m)
      for (int n = 0; n < 8; ++n)
        if (!lay.is_reserved(m, n)) REQUIRE(once.at(m, n) == x.at(m, n));
    CGrid twice = insert_pilots(once, lay, cfg);
    REQUIRE(twice.data == once.data);
  }
}

TEST_CASE("pilot power budget matches the per-slot comb of equal overhead") {
  // The concentrated layout (one sqrt(W)-scaled pilot per W reserved
  // slots) must spend exactly the power of the spread layout (one
  // bare-boost pilot on every W-th tone of the long-symbol comb).
  auto cfg = FrameConfig::make(512, 8, 288, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 6.0, cfg, 9);
  OfdmPilots comb = build_ofdm_pilots(4, 6.0, cfg.frame_len(), 9);

  double p_grid = 0, p_comb = 0;
  for (cdbl v : lay.pilot_values) p_grid += std::norm(v);
  for (cdbl v : comb.values) p_comb += std::norm(v);
  REQUIRE(p_grid == Catch::Approx(128.0 * 8.0 * std::pow(10.0, 0.6)).epsilon(1e-12));
  REQUIRE(p_comb == Catch::Approx(p_grid).epsilon(1e-12));
}

// ---------------------------------------------------------- interpolate

TEST_CASE("fft_interpolate: anchors, flatness, delay-limited exactness") {
  SECTION("constant comb stays constant") {
    cvec c(16, cdbl(2.0, -1.0));
    for (cdbl v : fft_interpolate(c, 4)) REQUIRE(std::abs(v - cdbl(2.0, -1.0)) < 1e-12);
  }

  SECTION("factor 1 is the identity") {
    Rng rng(4);
    cvec c(8);
    for (auto& v : c) v = rng.cgauss();
    cvec out = fft_interpolate(c, 1);
    for (size_t i = 0; i < c.size(); ++i) REQUIRE(std::abs(out[i] - c[i]) < 1e-12);
  }

  SECTION("original samples are reproduced at their positions") {
    Rng rng(5);
    cvec c(16);
    for (auto& v : c) v = rng.cgauss();
    cvec out = fft_interpolate(c, 8);
    for (size_t j = 0; j < c.size(); ++j) REQUIRE(std::abs(out[8 * j] - c[j]) < 1e-10);
  }

  SECTION("exact for any response whose delay support fits the comb") {
    // frequency response of a few taps with delays < 16 samples, sampled
    // on a 16-point comb over 128 tones, must interpolate exactly
    const int taps = 5, comb_len = 16, fine_len = 128;
    Rng rng(6);
    std::vector<int> delay = {0, 3, 7, 11, 15};
    cvec gain(taps);
    for (auto& g : gain) g = rng.cgauss();

    auto response = [&](double tone_frac) {
      cdbl acc = 0;
      for (int t = 0; t < taps; ++t)
        acc += gain[t] * std::polar(1.0, -2.0 * std::numbers::pi * tone_frac * delay[t]);
      return acc;
    };
    cvec comb(comb_len);
    for (int j = 0; j < comb_len; ++j)
      comb[j] = response(static_cast<double>(j) / comb_len);
    const cvec fine = fft_interpolate(comb, fine_len / comb_len);
    for (int q = 0; q < fine_len; ++q)
      REQUIRE(std::abs(fine[q] - response(static_cast<double>(q) / fine_len)) < 1e-9);
  }

  SECTION("projection: re-sampling an interpolated comb is idempotent") {
    Rng rng(7);
    cvec c(8);
    for (auto& v : c) v = rng.cgauss();
    const cvec fine = fft_interpolate(c, 4);
    cvec back(8);
    for (int j = 0; j < 8; ++j) back[j] = fine[4 * j];
    const cvec fine2 = fft_interpolate(back, 4);
    for (size_t i = 0; i < fine.size(); ++i) REQUIRE(std::abs(fine2[i] - fine[i]) < 1e-10);
  }

  SECTION("degenerate inputs are rejected") {
    REQUIRE_THROWS_AS(fft_interpolate({}, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(fft_interpolate(cvec(4, cdbl(1.0)), 0), std::invalid_argument);
  }
}

// ------------------------------------------------------------ estimator

TEST_CASE("noiseless static channels are recovered almost exactly") {
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 6.0, cfg, 11);
  // delay support within the M/lambda = 16-sample interpolation budget
  const PathSet ps = static_paths(6, 16, cfg.t_s, 12);

  CGrid tx_grid = insert_pilots(random_grid(64, 8, 13), lay, cfg);
  const cvec body = apply_channel(otfdm_modulate(tx_grid, cfg), ps, cfg);
  const DotProductChannel est = estimate_channel(receive(body, cfg), lay, cfg);
  const DotProductChannel truth = analytic_dot_channel(ps, cfg);

  const double nmse_db = 10.0 * std::log10(tensor_nmse(est, truth));
  REQUIRE(nmse_db < -40.0);  // essentially exact: guards keep data out
}

TEST_CASE("full-width reservation recovers a pure pilot frame at on-grid Doppler") {
  // With w == N the window despread is the complete ring sum. A Doppler
  // shift that is a non-negative integer number of fine-tone spacings below
  // N lands exactly on a ring tap inside the pilot's own block, so with no
  // data in the frame the estimate matches the oracle to machine precision
  // (delays fit the comb budget here).
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 0.0, cfg, 14);
  PathSet ps = static_paths(4, 16, cfg.t_s, 15);
  const double eps[] = {0.0, 1.0, 2.0, 5.0};
  for (size_t i = 0; i < ps.paths.size(); ++i) ps.paths[i].nu = eps[i] * cfg.delta_f;

  CGrid pilots_only = insert_pilots(CGrid(64, 8), lay, cfg);
  const cvec body = apply_channel(otfdm_modulate(pilots_only, cfg), ps, cfg);
  const DotProductChannel est = estimate_channel(receive(body, cfg), lay, cfg);
  const DotProductChannel truth = analytic_dot_channel(ps, cfg);
  REQUIRE(10.0 * std::log10(tensor_nmse(est, truth)) < -100.0);
}

TEST_CASE("the pilot window is one-sided: negative shifts are invisible") {
  // A pilot occupies slot 0 of its subcarrier block with guards above it,
  // so Doppler must land in [0, w) fine spacings. A shift of -1 spacing
  // moves the path's main lobe onto the top fine tone of the *previous*
  // subcarrier block, which carries data and is never read by the
  // estimator: the despread field at the pilot, and hence the estimate,
  // is essentially zero. This is why the feasibility rule sizes w against
  // the full two-sided spread 2*nu_max rather than nu_max.
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 0.0, cfg, 14);
  PathSet ps;
  ps.paths.push_back({cdbl(1.0, 0.0), 3.0 * cfg.t_s, -1.0 * cfg.delta_f});

  CGrid pilots_only = insert_pilots(CGrid(64, 8), lay, cfg);
  const cvec body = apply_channel(otfdm_modulate(pilots_only, cfg), ps, cfg);
  const DotProductChannel est = estimate_channel(receive(body, cfg), lay, cfg);

  double est_energy = 0.0;
  for (const cdbl& z : est.eta) est_energy += std::norm(z);
  double truth_energy = 0.0;
  const DotProductChannel truth = analytic_dot_channel(ps, cfg);
  for (const cdbl& z : truth.eta) truth_energy += std::norm(z);
  REQUIRE(est_energy < 1e-18 * truth_energy);
}

TEST_CASE("fractional Doppler leaves a bounded model-mismatch floor") {
  // Off-grid Doppler spreads each path across every ring tap with a
  // non-circulant (Toeplitz) intra-block structure that the per-tap comb
  // interpolation cannot represent, so a residual floor remains even with
  // a pure pilot frame and full-width reservation. Half a fine spacing is
  // the worst case; the floor must stay bounded and the recovered tensor
  // must still carry most of the channel energy.
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 0.0, cfg, 14);
  PathSet ps = static_paths(4, 16, cfg.t_s, 15);
  for (auto& p : ps.paths) p.nu = 0.5 * cfg.delta_f;

  CGrid pilots_only = insert_pilots(CGrid(64, 8), lay, cfg);
  const cvec body = apply_channel(otfdm_modulate(pilots_only, cfg), ps, cfg);
  const DotProductChannel est = estimate_channel(receive(body, cfg), lay, cfg);
  const DotProductChannel truth = analytic_dot_channel(ps, cfg);
  REQUIRE(10.0 * std::log10(tensor_nmse(est, truth)) < -6.0);
}

TEST_CASE("doubling pilot power halves the noise-limited error energy") {
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  const PathSet ps = static_paths(6, 16, cfg.t_s, 21);
  const DotProductChannel truth = analytic_dot_channel(ps, cfg);
  const double bump = 10.0 * std::log10(2.0);

  double err_lo = 0, err_hi = 0;
  for (uint64_t drop = 0; drop < 4; ++drop) {
    Rng noise_rng(900 + drop);
    cvec noise(cfg.frame_len());
    for (auto& z : noise) z = 0.3 * noise_rng.cgauss();

    for (int which = 0; which < 2; ++which) {
      PilotLayout lay = build_pilot_layout(4, 8, which ? bump : 0.0, cfg, 22);
      CGrid tx_grid = insert_pilots(random_grid(64, 8, 23 + drop), lay, cfg);
      cvec body = apply_channel(otfdm_modulate(tx_grid, cfg), ps, cfg);
      for (size_t i = 0; i < body.size(); ++i) body[i] += noise[i];
      const DotProductChannel est = estimate_channel(receive(body, cfg), lay, cfg);
      (which ? err_hi : err_lo) += tensor_nmse(est, truth);
    }
  }
  // same noise realization, static channel: the ratio is exactly the
  // pilot power ratio
  REQUIRE(err_lo / err_hi == Catch::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("estimation error vanishes as the noise goes away") {
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 6.0, cfg, 31);
  const PathSet ps = static_paths(6, 16, cfg.t_s, 32);
  const DotProductChannel truth = analytic_dot_channel(ps, cfg);
  CGrid tx_grid = insert_pilots(random_grid(64, 8, 33), lay, cfg);
  const cvec clean = apply_channel(otfdm_modulate(tx_grid, cfg), ps, cfg);

  double last = 1e9;
  for (double sigma2 : {1e-2, 1e-4, 1e-6}) {
    const cvec body = add_awgn(clean, {sigma2, 77});
    const double nmse = tensor_nmse(estimate_channel(receive(body, cfg), lay, cfg), truth);
    REQUIRE(nmse < last);
    last = nmse;
  }
  REQUIRE(10.0 * std::log10(last) < -40.0);
}

TEST_CASE("estimator input validation") {
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 6.0, cfg, 41);
  CGrid tx_grid = insert_pilots(random_grid(64, 8, 42), lay, cfg);
  const cvec body = apply_channel(otfdm_modulate(tx_grid, cfg),
                                  static_paths(3, 8, cfg.t_s, 43), cfg);

  SECTION("tensor must be in the subcarrier domain") {
    ExpandedRxTensor raw = doppler_dot_divide(reshape_body(body, cfg), cfg);
    REQUIRE_THROWS_AS(estimate_channel(raw, lay, cfg), std::invalid_argument);
  }

  SECTION("layout/config shape mismatch is rejected") {
    auto other = FrameConfig::make(32, 8, 16, 15e3, 24e9);
    REQUIRE_THROWS_AS(estimate_channel(receive(body, cfg), lay, other),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(estimate_channel(receive(body, cfg), PilotLayout{}, cfg),
                      std::invalid_argument);
  }
}

// -------------------------------------------------------------- overhead

TEST_CASE("overhead report reproduces the dimensioning checklist") {
  auto cfg = FrameConfig::make(512, 8, 288, 15e3, 24e9);
  PilotLayout lay = build_pilot_layout(4, 8, 6.0, cfg, 51);

  SECTION("table-scale budgets: 128 delay samples, 1.48 Doppler slots") {
    const double vmax = 500.0 / 3.6;
    const double nu_max = cfg.f_c * vmax / kSpeedOfLight;
    OverheadReport r = overhead_report(lay, 1000e-9, nu_max, cfg);
    REQUIRE(r.delay_budget_samples == Catch::Approx(128.0));
    REQUIRE(r.required_delay_samples == Catch::Approx(1000e-9 / cfg.t_s));  // 61.44
    REQUIRE(r.doppler_budget_slots == Catch::Approx(8.0));
    REQUIRE(r.required_doppler_slots == Catch::Approx(1.4825).epsilon(1e-3));
    REQUIRE(r.feasible);
    // alternative-scheme equivalents are reported alongside
    REQUIRE(r.rho == Catch::Approx(r.required_delay_samples));
    REQUIRE(r.mu == Catch::Approx(512.0 / r.required_doppler_slots));
  }

  SECTION("benign channel is feasible for any layout") {
    OverheadReport r = overhead_report(lay, 0.0, 0.0, cfg);
    REQUIRE(r.feasible);
    REQUIRE(std::isinf(r.mu));
  }

  SECTION("too-narrow reservations and too-sparse combs are flagged") {
    PilotLayout narrow = build_pilot_layout(4, 1, 0.0, cfg, 1);
    OverheadReport r1 = overhead_report(narrow, 0.0, 11118.8, cfg);
    REQUIRE_FALSE(r1.feasible);  // needs ~1.48 slots, has 1
    OverheadReport r2 = overhead_report(lay, 300 * cfg.t_s, 0.0, cfg);
    REQUIRE_FALSE(r2.feasible);  // needs 300 samples, budget 128
    REQUIRE_THROWS_AS(overhead_report(lay, -1.0, 0.0, cfg), std::invalid_argument);
  }
}

// -------------------------------------------------- OFDM baseline pilots

TEST_CASE("long-symbol comb estimator matches the static frequency response") {
  auto cfg = FrameConfig::make(64, 8, 16, 15e3, 24e9);
  const int mn = cfg.frame_len();
  OfdmPilots pil = build_ofdm_pilots(4, 6.0, mn, 61);
  REQUIRE(pil.tones.size() == static_cast<size_t>(mn / 4));
  REQUIRE_THROWS_AS(build_ofdm_pilots(3, 6.0, mn, 1), std::invalid_argument);

  const PathSet ps = static_paths(6, 16, cfg.t_s, 62);
  cvec tones(mn, cdbl(0.0));
  Rng rng(63);
  for (int q = 0; q < mn; ++q) tones[q] = rng.cgauss();
  for (size_t j = 0; j < pil.tones.size(); ++j) tones[pil.tones[j]] = pil.values[j];

  CGrid grid(cfg.m, cfg.n);
  grid.data.assign(tones.begin(), tones.end());
  const cvec body = apply_channel(ofdm_modulate_large(grid, cfg), ps, cfg);
  const cvec rx_tones = unitary_dft(body, false);

  const cvec est = ofdm_estimate_channel(rx_tones, pil);
  const cvec truth = ofdm_analytic_one_tap(ps, cfg);
  double num = 0, den = 0;
  for (int q = 0; q < mn; ++q) {
    num += std::norm(est[q] - truth[q]);
    den += std::norm(truth[q]);
  }
  REQUIRE(10.0 * std::log10(num / den) < -90.0);  // noiseless + delay-limited
}

// SPDX-License-Identifier: Apache-2.0
//
// Bit chain: Gray QPSK mapping/LLRs and the rate-1/2 LDPC families
// (construction shape, encoding algebra, decoding behavior, AWGN
// operating points frozen from calibration runs).

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>
#include <otfdm/otfdm.hpp>

using namespace otfdm;

namespace {

std::vector<std::uint8_t> random_bits(size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> b(count);
  for (auto& x : b) x = rng.uniform(0.0, 1.0) < 0.5 ? 0 : 1;
  return b;
}

/// Pairs of checks sharing two or more variables (each such pair is a
/// length-4 cycle in the Tanner graph).
int four_cycle_pairs(const LdpcCode& c) {
  int bad = 0;
  for (int a = 0; a < c.n_checks; ++a)
    for (int b = a + 1; b < c.n_checks; ++b) {
      int shared = 0;
      for (int v : c.check_vars[a])
        for (int w : c.check_vars[b]) shared += (v == w);
      if (shared >= 2) ++bad;
    }
  return bad;
}

/// AWGN block-error count for a code at one Es/N0, unit-energy QPSK,
/// exact per-bit LLRs, default decoder settings.
int awgn_block_errors(const LdpcCode& code, double esn0_db, int blocks,
                      LdpcMethod method = LdpcMethod::SumProduct) {
  const double sigma2 = std::pow(10.0, -esn0_db / 10.0);
  int errs = 0;
  for (int b = 0; b < blocks; ++b) {
    const auto msg = random_bits(code.k_info, mix_seed({static_cast<std::uint64_t>(b), 11u}));
    const auto cw = ldpc_encode(msg, code);
    const cvec syms = qpsk_map(cw);
    const cvec rx = add_awgn(syms, NoiseSpec{sigma2, mix_seed({static_cast<std::uint64_t>(b), 77u})});
    std::vector<double> llr(cw.size());
    for (size_t i = 0; i < syms.size(); ++i)
      qpsk_llr(rx[i], cdbl(1.0), sigma2, llr[2 * i], llr[2 * i + 1]);
    const auto dec = ldpc_decode(llr, code, 50, method);
    if (dec.message != msg) ++errs;
  }
  return errs;
}

}  // namespace

// ----------------------------------------------------------------- QPSK

TEST_CASE("QPSK mapping: Gray layout at unit energy") {
  const cvec pts = qpsk_map({0, 0, 0, 1, 1, 0, 1, 1});
  const double r = 1.0 / std::sqrt(2.0);
  REQUIRE(std::abs(pts[0] - cdbl(r, r)) < 1e-15);    // 00
  REQUIRE(std::abs(pts[1] - cdbl(r, -r)) < 1e-15);   // 01
  REQUIRE(std::abs(pts[2] - cdbl(-r, r)) < 1e-15);   // 10
  REQUIRE(std::abs(pts[3] - cdbl(-r, -r)) < 1e-15);  // 11
  for (const cdbl& p : pts) REQUIRE(std::norm(p) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE_THROWS_AS(qpsk_map({0, 1, 0}), std::invalid_argument);
}

TEST_CASE("QPSK hard demap inverts the mapping") {
  const auto bits = random_bits(64, 5);
  REQUIRE(qpsk_demap_hard(qpsk_map(bits)) == bits);
}

TEST_CASE("QPSK LLRs: sign, scale, gain rotation, erasure") {
  double l0, l1;

  SECTION("clean symbol gives LLRs of the right sign and magnitude") {
    const cvec s = qpsk_map({1, 0});
    qpsk_llr(s[0], cdbl(1.0), 0.5, l0, l1);
    // LLR = 2*sqrt(2)*Re/Im(conj(gain)*y)/v with Re = -1/sqrt(2): exactly -4.
    REQUIRE(l0 == Catch::Approx(-4.0).margin(1e-12));
    REQUIRE(l1 == Catch::Approx(4.0).margin(1e-12));
  }

  SECTION("halving the variance doubles the confidence") {
    const cdbl y(0.3, -0.9);
    double a0, a1, b0, b1;
    qpsk_llr(y, cdbl(1.0), 0.4, a0, a1);
    qpsk_llr(y, cdbl(1.0), 0.2, b0, b1);
    REQUIRE(b0 == Catch::Approx(2.0 * a0));
    REQUIRE(b1 == Catch::Approx(2.0 * a1));
  }

  SECTION("a complex gain is derotated before slicing") {
    const cdbl x = qpsk_map({0, 1})[0];
    const cdbl g = std::polar(0.7, 1.1);
    qpsk_llr(g * x, g, 0.25, l0, l1);
    REQUIRE(l0 > 0.0);
    REQUIRE(l1 < 0.0);
  }

  SECTION("non-positive or infinite variance erases the symbol") {
    qpsk_llr(cdbl(1.0, 1.0), cdbl(1.0), std::numeric_limits<double>::infinity(), l0, l1);
    REQUIRE(l0 == 0.0);
    REQUIRE(l1 == 0.0);
    qpsk_llr(cdbl(1.0, 1.0), cdbl(1.0), 0.0, l0, l1);
    REQUIRE(l0 == 0.0);
    REQUIRE(l1 == 0.0);
  }
}

// ------------------------------------------------------- LDPC construction

TEST_CASE("regular family is exactly (3,6)-regular and first-attempt clean") {
  const LdpcCode c = ldpc_build(1024, kLdpcGraphSeed, LdpcGraph::Regular36);
  REQUIRE(c.k_info == 1024);
  REQUIRE(c.n_code == 2048);
  REQUIRE(c.n_checks == 1024);
  REQUIRE(c.build_attempts == 1);
  REQUIRE(c.edge_count() == 6144);
  for (const auto& v : c.var_checks) REQUIRE(v.size() == 3);
  for (const auto& ck : c.check_vars) REQUIRE(ck.size() == 6);
  REQUIRE(c.info_cols.size() == 1024);
  REQUIRE(c.parity_cols.size() == 1024);
  REQUIRE(four_cycle_pairs(c) == 0);  // PEG keeps girth >= 6 here
}

TEST_CASE("irregular family hits its degree profile") {
  const LdpcCode c = ldpc_build(1024, kLdpcGraphSeed, LdpcGraph::OptimizedIrregular);
  REQUIRE(c.build_attempts == 1);
  REQUIRE(c.edge_count() == 7268);
  int n2 = 0, n3 = 0, n9 = 0;
  for (const auto& v : c.var_checks) {
    if (v.size() == 2) ++n2;
    else if (v.size() == 3) ++n3;
    else if (v.size() == 9) ++n9;
    else FAIL("unexpected variable degree " << v.size());
  }
  REQUIRE(n2 == 1006);
  REQUIRE(n3 == 687);
  REQUIRE(n9 == 355);
  int c7 = 0, c8 = 0;
  for (const auto& ck : c.check_vars) {
    if (ck.size() == 7) ++c7;
    else if (ck.size() == 8) ++c8;
    else FAIL("unexpected check degree " << ck.size());
  }
  REQUIRE(c7 == 924);
  REQUIRE(c8 == 100);
  // Degree-2 pressure costs a few short cycles but they stay rare.
  REQUIRE(four_cycle_pairs(c) <= 10);
}

TEST_CASE("construction is deterministic in (k, seed, family)") {
  const LdpcCode a = ldpc_build(256, 9, LdpcGraph::Regular36);
  const LdpcCode b = ldpc_build(256, 9, LdpcGraph::Regular36);
  REQUIRE(a.check_vars == b.check_vars);
  REQUIRE(a.info_cols == b.info_cols);
  const LdpcCode c = ldpc_build(256, 10, LdpcGraph::Regular36);
  REQUIRE(a.check_vars != c.check_vars);
  REQUIRE_THROWS_AS(ldpc_build(2, 1), std::invalid_argument);
}

// --------------------------------------------------------- encode/decode

TEST_CASE("encoding is systematic, parity-valid, and GF(2)-linear") {
  const LdpcCode code = ldpc_build(256, 4, LdpcGraph::Regular36);
  const auto m1 = random_bits(256, 21);
  const auto m2 = random_bits(256, 22);
  const auto c1 = ldpc_encode(m1, code);
  const auto c2 = ldpc_encode(m2, code);

  REQUIRE(ldpc_syndrome_ok(c1, code));
  REQUIRE(ldpc_syndrome_ok(c2, code));
  REQUIRE(ldpc_extract_message(c1, code) == m1);

  std::vector<std::uint8_t> mx(256), cx(c1.size());
  for (size_t i = 0; i < mx.size(); ++i) mx[i] = m1[i] ^ m2[i];
  for (size_t i = 0; i < cx.size(); ++i) cx[i] = c1[i] ^ c2[i];
  REQUIRE(ldpc_encode(mx, code) == cx);

  const std::vector<std::uint8_t> all_zero(256, 0);
  REQUIRE(ldpc_encode(all_zero, code) == std::vector<std::uint8_t>(code.n_code, 0));
  REQUIRE_THROWS_AS(ldpc_encode(random_bits(255, 1), code), std::invalid_argument);
}

TEST_CASE("a flipped codeword bit breaks the syndrome") {
  const LdpcCode code = ldpc_build(256, 4, LdpcGraph::Regular36);
  auto cw = ldpc_encode(random_bits(256, 31), code);
  cw[137] ^= 1;
  REQUIRE_FALSE(ldpc_syndrome_ok(cw, code));
}

TEST_CASE("noiseless LLRs decode in one iteration") {
  const LdpcCode code = ldpc_build(256, 4, LdpcGraph::Regular36);
  const auto msg = random_bits(256, 41);
  const auto cw = ldpc_encode(msg, code);
  std::vector<double> llr(cw.size());
  for (size_t i = 0; i < cw.size(); ++i) llr[i] = cw[i] ? -20.0 : 20.0;
  for (auto method : {LdpcMethod::SumProduct, LdpcMethod::MinSum}) {
    const auto dec = ldpc_decode(llr, code, 50, method);
    REQUIRE(dec.converged);
    REQUIRE(dec.iterations == 1);
    REQUIRE(dec.message == msg);
  }
  REQUIRE_THROWS_AS(ldpc_decode(std::vector<double>(7, 1.0), code), std::invalid_argument);
}

TEST_CASE("min-sum decisions are invariant to a common LLR scale") {
  // Normalized min-sum only looks at signs and relative magnitudes, so a
  // common positive scale (inside the clip range) cannot change the
  // decoded word. The tanh rule has no such invariance.
  const LdpcCode code = ldpc_build(256, 4, LdpcGraph::Regular36);
  const auto msg = random_bits(256, 51);
  const auto cw = ldpc_encode(msg, code);
  const double sigma2 = std::pow(10.0, -0.2);
  const cvec rx = add_awgn(qpsk_map(cw), NoiseSpec{sigma2, 99});
  std::vector<double> llr(cw.size());
  for (size_t i = 0; i < rx.size(); ++i) qpsk_llr(rx[i], cdbl(1.0), sigma2, llr[2 * i], llr[2 * i + 1]);
  // keep |llr| * 3 below the input clip
  for (auto& v : llr) v = std::clamp(v, -9.9, 9.9);
  std::vector<double> scaled = llr;
  for (auto& v : scaled) v *= 3.0;
  const auto a = ldpc_decode(llr, code, 20, LdpcMethod::MinSum);
  const auto b = ldpc_decode(scaled, code, 20, LdpcMethod::MinSum);
  REQUIRE(a.codeword == b.codeword);
}

// ------------------------------------------------------ AWGN waterfall

TEST_CASE("AWGN operating points match the frozen calibration") {
  // Frozen from 400-block calibration runs (QPSK, exact LLRs, 50
  // sum-product iterations): irregular 0.23 / 0.00 / 0.00 and regular
  // 0.79 / 0.10 / 0.0025 block-error rate at Es/N0 = 1.0 / 1.5 / 2.0 dB.
  const LdpcCode irr = ldpc_build(1024, kLdpcGraphSeed, LdpcGraph::OptimizedIrregular);
  const LdpcCode reg = ldpc_build(1024, kLdpcGraphSeed, LdpcGraph::Regular36);
  const int blocks = 150;

  const int irr15 = awgn_block_errors(irr, 1.5, blocks);
  const int reg15 = awgn_block_errors(reg, 1.5, blocks);
  const int irr10 = awgn_block_errors(irr, 1.0, blocks);
  const int reg20 = awgn_block_errors(reg, 2.0, blocks);

  REQUIRE(irr15 <= 3);       // expected 0
  REQUIRE(reg15 >= 6);       // expected ~15: the irregular profile buys real dB
  REQUIRE(irr15 < reg15);
  REQUIRE(irr10 >= 15);      // expected ~35: inside the irregular waterfall
  REQUIRE(reg20 <= 6);       // expected ~0-1
}

TEST_CASE("sum-product beats min-sum inside the waterfall") {
  const LdpcCode reg = ldpc_build(1024, kLdpcGraphSeed, LdpcGraph::Regular36);
  const int sp = awgn_block_errors(reg, 1.5, 100, LdpcMethod::SumProduct);
  const int ms = awgn_block_errors(reg, 1.5, 100, LdpcMethod::MinSum);
  REQUIRE(sp < ms);
}

// ------------------------------------------------------------ alist dump

TEST_CASE("alist export round-trips the graph shape") {
  const LdpcCode code = ldpc_build(64, 4, LdpcGraph::Regular36);
  const std::string path = "ldpc_test_dump.alist";
  ldpc_write_alist(code, path);

  std::ifstream is(path);
  REQUIRE(is.good());
  int n, m, dv, dc;
  is >> n >> m >> dv >> dc;
  REQUIRE(n == 128);
  REQUIRE(m == 64);
  REQUIRE(dv == 3);
  REQUIRE(dc == 6);
  long degree_sum = 0;
  for (int i = 0; i < n; ++i) {
    int d;
    is >> d;
    degree_sum += d;
  }
  REQUIRE(degree_sum == code.edge_count());
  for (int i = 0; i < m; ++i) {
    int d;
    is >> d;
    REQUIRE(d == 6);
  }
  // first variable's first entry is 1-indexed and within range
  int first;
  is >> first;
  REQUIRE(first >= 1);
  REQUIRE(first <= m);
  is.close();
  std::remove(path.c_str());
}

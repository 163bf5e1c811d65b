// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>

#include "rng.hpp"

/**
 * Rate-1/2 LDPC codes: regular (3,6) or an optimized irregular profile.
 *
 * Construction is progressive edge growth: variable nodes take their
 * edges one at a time; each edge goes to the check node at maximal graph
 * distance from the variable (unreachable checks count as infinitely
 * far), restricted to checks below their capacity, so the regular family
 * comes out exactly (3,6)-regular and the irregular family matches its
 * degree profile. Ties break by lowest current degree, then by a
 * seeded pseudo-random draw, so a given (k, seed, graph) always yields
 * the same code. Girth >= 6 falls out of the distance rule whenever any
 * check outside the variable's 2-neighborhood has capacity.
 *
 * Encoding is systematic over an information set found by Gaussian
 * elimination of H: the k columns that carry no pivot hold the message,
 * the m pivot columns hold parity, each parity bit an XOR mask over the
 * message. If H turns out rank-deficient the build reruns with the seed
 * incremented (reported in build_attempts).
 *
 * Decoding is normalized min-sum (factor 0.75), LLR clip +-30, early
 * stop on a zero syndrome.
 */

namespace otfdm {

struct LdpcCode {
    int k_info = 0;
    int n_code = 0;
    int n_checks = 0;
    std::uint64_t seed = 0;
    int build_attempts = 1;

    std::vector<std::vector<int>> check_vars;  // per check: variable indices
    std::vector<std::vector<int>> var_checks;  // per variable: check indices

    // Systematic encoding support.
    std::vector<int> info_cols;    // size k_info, grid positions of message bits
    std::vector<int> parity_cols;  // size n_checks
    // Per parity column: mask over message bits (bit-packed, k_info bits).
    std::vector<std::vector<std::uint64_t>> parity_masks;

    int edge_count() const {
        int e = 0;
        for (const auto& c : check_vars) e += static_cast<int>(c.size());
        return e;
    }
};

namespace detail {

/// BFS distances from a variable node in the bipartite graph; -1 means
/// unreachable. Distances to checks are odd (1 = directly connected).
inline void bfs_check_distances(const LdpcCode& code, int var, std::vector<int>& dist_check,
                                std::vector<int>& dist_var) {
    dist_check.assign(code.n_checks, -1);
    dist_var.assign(code.n_code, -1);
    std::deque<std::pair<int, bool>> q;  // (index, is_var)
    dist_var[var] = 0;
    q.emplace_back(var, true);
    while (!q.empty()) {
        auto [idx, is_var] = q.front();
        q.pop_front();
        if (is_var) {
            for (int c : code.var_checks[idx])
                if (dist_check[c] < 0) {
                    dist_check[c] = dist_var[idx] + 1;
                    q.emplace_back(c, false);
                }
        } else {
            for (int v : code.check_vars[idx])
                if (dist_var[v] < 0) {
                    dist_var[v] = dist_check[idx] + 1;
                    q.emplace_back(v, true);
                }
        }
    }
}

/// Gaussian elimination over GF(2); fills info/parity columns and the
/// parity masks. Returns false if H is rank-deficient.
inline bool build_encoder(LdpcCode& code) {
    const int m = code.n_checks, n = code.n_code;
    const int words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> h(m, std::vector<std::uint64_t>(words, 0));
    for (int c = 0; c < m; ++c)
        for (int v : code.check_vars[c]) h[c][v >> 6] ^= (1ULL << (v & 63));

    std::vector<int> pivot_col(m, -1);
    std::vector<char> is_pivot(n, 0);
    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        int sel = -1;
        for (int r = row; r < m; ++r)
            if ((h[r][col >> 6] >> (col & 63)) & 1) {
                sel = r;
                break;
            }
        if (sel < 0) continue;
        std::swap(h[sel], h[row]);
        for (int r = 0; r < m; ++r) {
            if (r == row) continue;
            if ((h[r][col >> 6] >> (col & 63)) & 1)
                for (int wdx = 0; wdx < words; ++wdx) h[r][wdx] ^= h[row][wdx];
        }
        pivot_col[row] = col;
        is_pivot[col] = 1;
        ++row;
    }
    if (row < m) return false;  // rank deficient

    code.info_cols.clear();
    code.parity_cols.assign(m, 0);
    for (int col = 0; col < n; ++col)
        if (!is_pivot[col]) code.info_cols.push_back(col);
    std::vector<int> info_index(n, -1);
    for (size_t i = 0; i < code.info_cols.size(); ++i) info_index[code.info_cols[i]] = static_cast<int>(i);

    const int kwords = (code.k_info + 63) / 64;
    code.parity_masks.assign(m, std::vector<std::uint64_t>(kwords, 0));
    for (int r = 0; r < m; ++r) {
        code.parity_cols[r] = pivot_col[r];
        for (int col = 0; col < n; ++col) {
            if (col == pivot_col[r] || !((h[r][col >> 6] >> (col & 63)) & 1)) continue;
            const int ii = info_index[col];
            if (ii < 0) return false;  // non-pivot dependency on another pivot: impossible after RREF
            code.parity_masks[r][ii >> 6] ^= (1ULL << (ii & 63));
        }
    }
    return true;
}

/// Progressive edge growth over an arbitrary degree sequence: variables
/// are processed in ascending-degree order (fragile low-degree nodes
/// claim large girth while the graph is sparse); each edge goes to the
/// check at maximal graph distance among those below their capacity.
inline bool try_build_peg(LdpcCode& code, std::uint64_t seed, const std::vector<int>& var_deg,
                          const std::vector<int>& check_cap) {
    const int n = code.n_code, m = code.n_checks;
    code.check_vars.assign(m, {});
    code.var_checks.assign(n, {});
    Rng rng(mix_seed({seed, 0xbddcULL}));

    std::vector<int> order(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return var_deg[a] < var_deg[b]; });

    std::vector<int> dist_check, dist_var;
    for (int v : order) {
        for (int e = 0; e < var_deg[v]; ++e) {
            bfs_check_distances(code, v, dist_check, dist_var);
            // candidates: capacity left, not already attached, maximal distance
            // (-1 = unreachable beats any finite distance), then min degree.
            int best = -1;
            long long best_key = -1;
            int n_tied = 0;
            for (int c = 0; c < m; ++c) {
                if (static_cast<int>(code.check_vars[c].size()) >= check_cap[c]) continue;
                if (dist_check[c] == 1) continue;  // already attached to v
                const long long dist_rank = dist_check[c] < 0 ? (1LL << 32) : dist_check[c];
                const long long key = dist_rank * 1024 - static_cast<long long>(code.check_vars[c].size());
                if (key > best_key) {
                    best_key = key;
                    best = c;
                    n_tied = 1;
                } else if (key == best_key) {
                    // reservoir-style seeded tie break
                    ++n_tied;
                    if (rng.next_u64() % n_tied == 0) best = c;
                }
            }
            if (best < 0) return false;  // no check has capacity
            code.check_vars[best].push_back(v);
            code.var_checks[v].push_back(best);
        }
    }
    return build_encoder(code);
}

}  // namespace detail

/// Graph family for ldpc_build. Regular36 is the textbook (3,6)-regular
/// ensemble. OptimizedIrregular is a density-evolution-optimized
/// rate-1/2 profile (edge fractions lambda_2 = 0.27684, lambda_3 =
/// 0.28342, lambda_9 = 0.43974, checks concentrated at degree 7-8) whose
/// ensemble threshold sits several tenths of a dB closer to capacity
/// than the regular code — worth a factor of a few in BLER near the
/// waterfall.
enum class LdpcGraph {
    Regular36,
    OptimizedIrregular,
};

/// Builds a deterministic rate-1/2 code for k information bits
/// (n = 2k, k checks) from the requested graph family.
inline LdpcCode ldpc_build(int k_info, std::uint64_t seed,
                           LdpcGraph graph = LdpcGraph::Regular36) {
    if (k_info < 4) throw std::invalid_argument("ldpc_build: k_info too small");
    LdpcCode code;
    code.k_info = k_info;
    code.n_code = 2 * k_info;
    code.n_checks = k_info;
    code.seed = seed;

    const int n = code.n_code, m = code.n_checks;
    std::vector<int> var_deg(n, 3), check_cap(m, 6);
    if (graph == LdpcGraph::OptimizedIrregular) {
        // Node-perspective fractions from the edge profile above:
        // 49.13% degree 2, 33.53% degree 3, remainder degree 9.
        const int n2 = static_cast<int>(std::lround(0.49128 * n));
        const int n3 = static_cast<int>(std::lround(0.33531 * n));
        if (n2 >= m) throw std::invalid_argument("ldpc_build: k_info too small for this profile");
        int edges = 0;
        for (int v = 0; v < n; ++v) {
            var_deg[v] = v < n2 ? 2 : (v < n2 + n3 ? 3 : 9);
            edges += var_deg[v];
        }
        // Check capacities: as concentrated as the edge count allows.
        const int base = edges / m, extra = edges - base * m;
        for (int c = 0; c < m; ++c) check_cap[c] = base + (c < extra ? 1 : 0);
    }

    std::uint64_t s = seed;
    for (int attempt = 1; attempt <= 32; ++attempt) {
        code.build_attempts = attempt;
        if (detail::try_build_peg(code, s, var_deg, check_cap)) return code;
        ++s;  // rank-deficient or stuck: rebuild with incremented seed
    }
    throw std::runtime_error("ldpc_build: no full-rank construction found");
}

/// Systematic encode: message bits land on info_cols, parity on
/// parity_cols. Returns the n_code-bit codeword.
inline std::vector<std::uint8_t> ldpc_encode(const std::vector<std::uint8_t>& msg,
                                             const LdpcCode& code) {
    if (msg.size() != static_cast<size_t>(code.k_info))
        throw std::invalid_argument("ldpc_encode: message length mismatch");
    const int kwords = (code.k_info + 63) / 64;
    std::vector<std::uint64_t> packed(kwords, 0);
    for (int i = 0; i < code.k_info; ++i)
        if (msg[i]) packed[i >> 6] ^= (1ULL << (i & 63));

    std::vector<std::uint8_t> cw(code.n_code, 0);
    for (int i = 0; i < code.k_info; ++i) cw[code.info_cols[i]] = msg[i];
    for (int r = 0; r < code.n_checks; ++r) {
        std::uint64_t acc = 0;
        for (int wdx = 0; wdx < kwords; ++wdx) acc ^= packed[wdx] & code.parity_masks[r][wdx];
        cw[code.parity_cols[r]] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return cw;
}

/// Extracts the message bits back out of a codeword.
inline std::vector<std::uint8_t> ldpc_extract_message(const std::vector<std::uint8_t>& cw,
                                                      const LdpcCode& code) {
    std::vector<std::uint8_t> msg(code.k_info);
    for (int i = 0; i < code.k_info; ++i) msg[i] = cw[code.info_cols[i]];
    return msg;
}

inline bool ldpc_syndrome_ok(const std::vector<std::uint8_t>& cw, const LdpcCode& code) {
    for (const auto& vars : code.check_vars) {
        int s = 0;
        for (int v : vars) s ^= cw[v];
        if (s) return false;
    }
    return true;
}

struct LdpcDecodeResult {
    std::vector<std::uint8_t> codeword;
    std::vector<std::uint8_t> message;
    bool converged = false;
    int iterations = 0;
};

enum class LdpcMethod {
    SumProduct,  // exact tanh rule — best with widely varying per-bit reliability
    MinSum,      // normalized min-sum (alpha = 0.75) — faster, ~0.3-0.5 dB loss
};

/// Layered belief-propagation decoding. llr[i] > 0 favors bit 0.
inline LdpcDecodeResult ldpc_decode(const std::vector<double>& llr, const LdpcCode& code,
                                    int max_iter = 50,
                                    LdpcMethod method = LdpcMethod::SumProduct) {
    if (llr.size() != static_cast<size_t>(code.n_code))
        throw std::invalid_argument("ldpc_decode: LLR length mismatch");
    constexpr double kClip = 30.0;  // channel-LLR confidence cap
    constexpr double kMsg = 25.0;   // check-to-variable message cap
    constexpr double kAlpha = 0.75;

    // flat edge arrays
    std::vector<int> edge_var, check_off;
    check_off.reserve(code.n_checks + 1);
    check_off.push_back(0);
    for (const auto& vars : code.check_vars) {
        for (int v : vars) edge_var.push_back(v);
        check_off.push_back(static_cast<int>(edge_var.size()));
    }
    const int n_edges = static_cast<int>(edge_var.size());
    std::vector<double> c2v(n_edges, 0.0);

    std::vector<double> post(code.n_code);
    LdpcDecodeResult res;
    res.codeword.assign(code.n_code, 0);

    // Inputs are clipped once; check messages are capped at kMsg. The
    // posterior then stays within |llr| + deg_v * kMsg by construction,
    // so post = llr + sum(c2v) holds exactly (no in-loop clipping, which
    // would corrupt the extrinsic subtraction post - c2v).
    auto clip = [](double x) { return x < -kClip ? -kClip : (x > kClip ? kClip : x); };
    auto cap = [](double x) { return x < -kMsg ? -kMsg : (x > kMsg ? kMsg : x); };
    for (int i = 0; i < code.n_code; ++i) post[i] = clip(llr[i]);

    std::vector<double> th(16);  // tanh(v2c/2) per edge of one check
    for (int it = 1; it <= max_iter; ++it) {
        // layered update: posterior is adjusted check by check (post = chan + sum c2v)
        for (int c = 0; c < code.n_checks; ++c) {
            const int b = check_off[c], e = check_off[c + 1];
            if (method == LdpcMethod::SumProduct) {
                if (static_cast<size_t>(e - b) > th.size()) th.resize(e - b);
                for (int j = b; j < e; ++j)
                    th[j - b] = std::tanh(0.5 * (post[edge_var[j]] - c2v[j]));
                for (int j = b; j < e; ++j) {
                    double prod = 1.0;
                    for (int o = b; o < e; ++o)
                        if (o != j) prod *= th[o - b];
                    if (prod > 0.999999999999) prod = 0.999999999999;
                    if (prod < -0.999999999999) prod = -0.999999999999;
                    const double nv = cap(2.0 * std::atanh(prod));
                    post[edge_var[j]] += nv - c2v[j];
                    c2v[j] = nv;
                }
                continue;
            }
            // v2c = post - old c2v
            double min1 = 1e300, min2 = 1e300;
            int min_idx = -1;
            int sign = 0;
            for (int j = b; j < e; ++j) {
                const double v2c = post[edge_var[j]] - c2v[j];
                const double a = std::abs(v2c);
                if (v2c < 0) sign ^= 1;
                if (a < min1) {
                    min2 = min1;
                    min1 = a;
                    min_idx = j;
                } else if (a < min2) {
                    min2 = a;
                }
            }
            for (int j = b; j < e; ++j) {
                const double v2c = post[edge_var[j]] - c2v[j];
                const double mag = kAlpha * cap(j == min_idx ? min2 : min1);
                const int s = sign ^ (v2c < 0 ? 1 : 0);
                const double nv = s ? -mag : mag;
                // update posterior incrementally
                post[edge_var[j]] += nv - c2v[j];
                c2v[j] = nv;
            }
        }
        for (int i = 0; i < code.n_code; ++i) res.codeword[i] = post[i] < 0.0 ? 1 : 0;
        res.iterations = it;
        if (ldpc_syndrome_ok(res.codeword, code)) {
            res.converged = true;
            break;
        }
    }
    res.message = ldpc_extract_message(res.codeword, code);
    return res;
}

/// Writes the parity-check matrix in alist format.
inline void ldpc_write_alist(const LdpcCode& code, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("ldpc_write_alist: cannot open " + path);
    int max_dv = 0, max_dc = 0;
    for (const auto& v : code.var_checks) max_dv = std::max(max_dv, static_cast<int>(v.size()));
    for (const auto& c : code.check_vars) max_dc = std::max(max_dc, static_cast<int>(c.size()));
    os << code.n_code << " " << code.n_checks << "\n" << max_dv << " " << max_dc << "\n";
    for (const auto& v : code.var_checks) os << v.size() << " ";
    os << "\n";
    for (const auto& c : code.check_vars) os << c.size() << " ";
    os << "\n";
    for (const auto& v : code.var_checks) {
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (size_t j = 0; j < static_cast<size_t>(max_dv); ++j)
            os << (j < sorted.size() ? sorted[j] + 1 : 0) << (j + 1 < static_cast<size_t>(max_dv) ? " " : "");
        os << "\n";
    }
    for (const auto& c : code.check_vars) {
        auto sorted = c;
        std::sort(sorted.begin(), sorted.end());
        for (size_t j = 0; j < static_cast<size_t>(max_dc); ++j)
            os << (j < sorted.size() ? sorted[j] + 1 : 0) << (j + 1 < static_cast<size_t>(max_dc) ? " " : "");
        os << "\n";
    }
    if (!os) throw std::runtime_error("ldpc_write_alist: write failed for " + path);
}

}  // namespace otfdm

#pragma once

// Sparse-parity pseudorandom codes and their belief-propagation decoder.
//
// A key is (H, pad): H a random r x n parity matrix of fixed row weight, pad
// a secret n-bit mask derived from the PRF.  Codewords are uniform solutions
// of H x = 0, released as x XOR pad.  Detection scores the number of
// satisfied checks of (bits XOR pad) against the r/2 expectation that holds
// for strings independent of H; decoding runs standard sum-product BP in the
// unmasked domain and re-masks its correction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tamperlock/core.hpp"
#include "tamperlock/prf_mask.hpp"
#include "tamperlock/rng.hpp"
#include "tamperlock/stats.hpp"

namespace tamperlock {

using Bits = std::vector<std::uint8_t>;

inline Codeword bits_to_codeword(const Bits& bits) {
  Codeword c;
  c.q = 2;
  c.symbols.assign(bits.begin(), bits.end());
  c.validate();
  return c;
}

inline Bits codeword_to_bits(const Codeword& c) {
  require(c.q == 2, "expected a binary codeword");
  return Bits(c.symbols.begin(), c.symbols.end());
}

inline double bit_error_fraction(const Bits& a, const Bits& b) {
  require(a.size() == b.size() && !a.empty(), "bit_error_fraction: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return static_cast<double>(d) / static_cast<double>(a.size());
}

/// Binary symmetric channel: flips each bit independently with flip_rate.
inline Bits bsc(const Bits& bits, double flip_rate, Rng& rng) {
  require(flip_rate >= 0.0 && flip_rate <= 1.0, "bsc: flip rate outside [0, 1]");
  Bits out = bits;
  for (auto& b : out)
    if (rng.bernoulli(flip_rate)) b ^= 1;
  return out;
}

// --- parity matrix ------------------------------------------------------------

/// r x n sparse parity-check matrix; each row lists `row_weight` distinct
/// sorted column indices.
struct ParityMatrix {
  std::size_t n = 0;
  std::vector<std::vector<std::uint32_t>> rows;

  std::size_t r() const noexcept { return rows.size(); }
  std::size_t row_weight() const noexcept { return rows.empty() ? 0 : rows[0].size(); }

  void validate() const {
    require(n >= 1, "parity matrix: n must be >= 1");
    require(!rows.empty(), "parity matrix: no rows");
    const std::size_t w = rows[0].size();
    for (const auto& row : rows) {
      require(row.size() == w, "parity matrix: ragged row weight");
      require(std::is_sorted(row.begin(), row.end()), "parity matrix: row not sorted");
      for (std::size_t i = 0; i < row.size(); ++i) {
        require(row[i] < n, "parity matrix: column index out of range");
        require(i == 0 || row[i] != row[i - 1], "parity matrix: duplicate column in row");
      }
    }
  }

  /// Content fingerprint; keys the PRF-derived pad to this exact matrix.
  std::uint64_t content_hash() const {
    std::string blob = std::to_string(n) + "," + std::to_string(r()) + ";";
    for (const auto& row : rows) {
      for (auto c : row) {
        blob += std::to_string(c);
        blob.push_back(' ');
      }
      blob.push_back(';');
    }
    return fnv1a64(blob);
  }
};

/// Random parity matrix: each row's support is sampled uniformly without
/// replacement.  Requires row_weight >= 3, row_weight <= n, and r <= n/2.
inline ParityMatrix gen_parity(std::size_t n, std::size_t r, std::size_t row_weight, Rng& rng) {
  require(n >= 1, "gen_parity: n must be >= 1");
  require(row_weight >= 3, "gen_parity: row weight must be >= 3");
  require(row_weight <= n, "gen_parity: row weight exceeds n");
  require(r >= 1 && r <= n / 2, "gen_parity: need 1 <= r <= n/2");
  ParityMatrix h;
  h.n = n;
  h.rows.reserve(r);
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  for (std::size_t row = 0; row < r; ++row) {
    for (std::size_t i = 0; i < row_weight; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
      std::swap(idx[i], idx[j]);
    }
    std::vector<std::uint32_t> support(idx.begin(), idx.begin() + static_cast<long>(row_weight));
    std::sort(support.begin(), support.end());
    h.rows.push_back(std::move(support));
  }
  return h;
}

// Matrix file ("TAMPERLOCK-H v1"): header then one space-separated row per line.

inline std::string serialize_matrix(const ParityMatrix& h) {
  h.validate();
  std::string out = "TAMPERLOCK-H v1 n=" + std::to_string(h.n) +
                    " r=" + std::to_string(h.r()) +
                    " w=" + std::to_string(h.row_weight()) + "\n";
  for (const auto& row : h.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(' ');
      out += std::to_string(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

inline ParityMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  std::string magic, version, ntok, rtok, wtok;
  in >> magic >> version >> ntok >> rtok >> wtok;
  require(magic == "TAMPERLOCK-H", "matrix file: bad magic");
  require(version == "v1", "matrix file: unsupported version");
  require(ntok.rfind("n=", 0) == 0 && rtok.rfind("r=", 0) == 0 && wtok.rfind("w=", 0) == 0,
          "matrix file: malformed header fields");
  ParityMatrix h;
  h.n = static_cast<std::size_t>(parse_u64(ntok.substr(2), "matrix n"));
  const std::uint64_t r = parse_u64(rtok.substr(2), "matrix r");
  const std::uint64_t w = parse_u64(wtok.substr(2), "matrix w");
  std::string line;
  std::getline(in, line);  // rest of header line
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row_in(line);
    std::vector<std::uint32_t> row;
    std::string tok;
    while (row_in >> tok)
      row.push_back(static_cast<std::uint32_t>(parse_u64(tok, "matrix column index")));
    require(row.size() == w, "matrix file: row weight does not match header");
    h.rows.push_back(std::move(row));
  }
  require(h.rows.size() == r, "matrix file: row count does not match header");
  h.validate();
  return h;
}

inline void write_matrix_file(const ParityMatrix& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot open matrix file for writing: " + path);
  out << serialize_matrix(h);
  out.flush();
  if (!out.good()) throw std::runtime_error("failed writing matrix file: " + path);
}

inline ParityMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open matrix file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix(buf.str());
}

// --- GF(2) solver -------------------------------------------------------------

/// Row-reduced view of H used to sample uniform null-space vectors: pivot
/// variables are determined by free variables, which are drawn uniformly.
class Gf2Solver {
 public:
  explicit Gf2Solver(const ParityMatrix& h) : n_(h.n), words_((h.n + 63) / 64) {
    h.validate();
    std::vector<std::vector<std::uint64_t>> rows(h.r(), std::vector<std::uint64_t>(words_, 0));
    for (std::size_t i = 0; i < h.r(); ++i)
      for (auto c : h.rows[i]) rows[i][c >> 6] ^= 1ULL << (c & 63);

    // Gauss-Jordan to reduced row echelon form.
    std::size_t next_row = 0;
    for (std::size_t col = 0; col < n_ && next_row < rows.size(); ++col) {
      std::size_t pivot = next_row;
      while (pivot < rows.size() && !bit(rows[pivot], col)) ++pivot;
      if (pivot == rows.size()) continue;
      std::swap(rows[next_row], rows[pivot]);
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (i != next_row && bit(rows[i], col))
          for (std::size_t w = 0; w < words_; ++w) rows[i][w] ^= rows[next_row][w];
      pivot_cols_.push_back(static_cast<std::uint32_t>(col));
      ++next_row;
    }
    // Pivot rows are only final once every column has been eliminated: row i
    // stays at index i after its swap, but later pivots keep clearing their
    // columns out of it.  Snapshot them after the full pass.
    pivot_rows_.assign(rows.begin(), rows.begin() + static_cast<long>(next_row));
    std::vector<std::uint8_t> is_pivot(n_, 0);
    for (auto c : pivot_cols_) is_pivot[c] = 1;
    for (std::size_t c = 0; c < n_; ++c)
      if (!is_pivot[c]) free_cols_.push_back(static_cast<std::uint32_t>(c));
  }

  std::size_t rank() const noexcept { return pivot_cols_.size(); }
  std::size_t nullity() const noexcept { return n_ - rank(); }

  /// Uniform sample from {x : Hx = 0}.
  Bits sample_nullspace(Rng& rng) const {
    std::vector<std::uint64_t> x(words_, 0);
    for (auto c : free_cols_)
      if (rng.next_u64() & 1) x[c >> 6] ^= 1ULL << (c & 63);
    for (std::size_t i = 0; i < pivot_rows_.size(); ++i) {
      // In RREF the row reads x[pivot] + sum(free support) = 0.
      std::uint64_t parity = 0;
      for (std::size_t w = 0; w < words_; ++w) parity ^= pivot_rows_[i][w] & x[w];
      if (__builtin_popcountll(parity) & 1) x[pivot_cols_[i] >> 6] ^= 1ULL << (pivot_cols_[i] & 63);
    }
    Bits out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = static_cast<std::uint8_t>((x[i >> 6] >> (i & 63)) & 1);
    return out;
  }

 private:
  static bool bit(const std::vector<std::uint64_t>& row, std::size_t col) {
    return (row[col >> 6] >> (col & 63)) & 1;
  }

  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint32_t> pivot_cols_;
  std::vector<std::vector<std::uint64_t>> pivot_rows_;
  std::vector<std::uint32_t> free_cols_;
};

// --- keyed code ----------------------------------------------------------------

struct PrcKey {
  ParityMatrix h;
  Bits pad;
  double detect_threshold = 4.0;

  void validate() const {
    h.validate();
    require(pad.size() == h.n, "prc key: pad length does not match matrix");
    require(detect_threshold > 0.0, "prc key: detect threshold must be > 0");
  }
};

/// Derive the secret pad for H from the PRF (counter = matrix fingerprint),
/// so a (kappa, H) pair always yields the same key.
inline PrcKey make_prc_key(ParityMatrix h, const PrfKey& kappa, double detect_threshold = 4.0) {
  h.validate();
  PrcKey key;
  const std::vector<Symbol> pad = prf_expand(kappa, h.content_hash(), h.n, 2);
  key.pad.assign(pad.begin(), pad.end());
  key.h = std::move(h);
  key.detect_threshold = detect_threshold;
  key.validate();
  return key;
}

inline std::size_t count_satisfied_checks(const ParityMatrix& h, const Bits& u) {
  require(u.size() == h.n, "check count: length mismatch");
  std::size_t satisfied = 0;
  for (const auto& row : h.rows) {
    unsigned parity = 0;
    for (auto c : row) parity ^= u[c];
    satisfied += (parity == 0) ? 1 : 0;
  }
  return satisfied;
}

/// Fresh codeword: uniform null-space vector, re-masked with the secret pad.
inline Bits prc_encode(const PrcKey& key, const Gf2Solver& solver, Rng& rng) {
  key.validate();
  Bits x = solver.sample_nullspace(rng);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] ^= key.pad[i];
  return x;
}

inline Bits prc_encode(const PrcKey& key, Rng& rng) {
  return prc_encode(key, Gf2Solver(key.h), rng);
}

struct DetectResult {
  double score = 0.0;       // z-statistic of satisfied checks vs the r/2 null
  bool watermarked = false;
  std::size_t satisfied = 0;
};

inline DetectResult prc_detect(const PrcKey& key, const Bits& bits) {
  key.validate();
  require(bits.size() == key.h.n, "prc_detect: length mismatch");
  Bits u = bits;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] ^= key.pad[i];
  DetectResult res;
  res.satisfied = count_satisfied_checks(key.h, u);
  const double r = static_cast<double>(key.h.r());
  res.score = (2.0 * static_cast<double>(res.satisfied) - r) / std::sqrt(r);
  res.watermarked = res.score >= key.detect_threshold;
  return res;
}

// --- belief propagation ---------------------------------------------------------

struct BpParams {
  std::size_t max_iters = 100;
  double prior_flip_rate = 0.15;  // assumed channel error rate (fixed, not fitted)
  double llr_clamp = 25.0;

  void validate() const {
    require(max_iters >= 1, "bp: max_iters must be >= 1");
    require(prior_flip_rate > 0.0 && prior_flip_rate < 0.5, "bp: prior flip rate must be in (0, 0.5)");
    require(llr_clamp > 0.0, "bp: llr clamp must be > 0");
  }
};

struct BpResult {
  Bits corrected;
  bool converged = false;
  std::size_t iterations_used = 0;
};

/// Sum-product decoding toward the zero syndrome.  Input and output are in
/// the released (masked) domain; the pad is stripped on entry and re-applied
/// on exit.  Convergence = the current hard decision satisfies every check,
/// tested before each round, so an intact codeword returns immediately.
inline BpResult bp_decode(const PrcKey& key, const Bits& bits, const BpParams& params = {}) {
  key.validate();
  params.validate();
  require(bits.size() == key.h.n, "bp_decode: length mismatch");

  const std::size_t n = key.h.n;
  const std::size_t r = key.h.r();
  Bits u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = bits[i] ^ key.pad[i];

  // Flattened edge arrays, grouped by check.
  std::vector<std::uint32_t> edge_var;
  std::vector<std::size_t> check_off(r + 1, 0);
  for (std::size_t c = 0; c < r; ++c) {
    check_off[c + 1] = check_off[c] + key.h.rows[c].size();
    for (auto v : key.h.rows[c]) edge_var.push_back(v);
  }
  const std::size_t n_edges = edge_var.size();
  std::vector<std::vector<std::uint32_t>> var_edges(n);
  for (std::size_t e = 0; e < n_edges; ++e) var_edges[edge_var[e]].push_back(static_cast<std::uint32_t>(e));

  const double base_llr = std::log((1.0 - params.prior_flip_rate) / params.prior_flip_rate);
  std::vector<double> llr_ch(n);
  for (std::size_t i = 0; i < n; ++i) llr_ch[i] = u[i] ? -base_llr : base_llr;

  std::vector<double> c2v(n_edges, 0.0), v2c(n_edges, 0.0), total(n);
  Bits hard(n);
  const auto clamp = [&](double x) { return std::clamp(x, -params.llr_clamp, params.llr_clamp); };

  BpResult res;
  for (std::size_t iter = 0; iter <= params.max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = llr_ch[i];
      for (auto e : var_edges[i]) s += c2v[e];
      total[i] = s;
      hard[i] = (s < 0.0) ? 1 : 0;
    }
    if (count_satisfied_checks(key.h, hard) == r) {
      res.converged = true;
      res.iterations_used = iter;
      break;
    }
    if (iter == params.max_iters) {
      res.iterations_used = iter;
      break;
    }

    // Variable-to-check: total belief minus the edge's own contribution.
    for (std::size_t e = 0; e < n_edges; ++e) v2c[e] = clamp(total[edge_var[e]] - c2v[e]);

    // Check-to-variable via exclusive prefix/suffix tanh products.
    std::vector<double> t, pre, suf;
    for (std::size_t c = 0; c < r; ++c) {
      const std::size_t deg = check_off[c + 1] - check_off[c];
      t.resize(deg);
      pre.resize(deg + 1);
      suf.resize(deg + 1);
      for (std::size_t j = 0; j < deg; ++j) t[j] = std::tanh(v2c[check_off[c] + j] / 2.0);
      pre[0] = 1.0;
      suf[deg] = 1.0;
      for (std::size_t j = 0; j < deg; ++j) pre[j + 1] = pre[j] * t[j];
      for (std::size_t j = deg; j > 0; --j) suf[j - 1] = suf[j] * t[j - 1];
      for (std::size_t j = 0; j < deg; ++j) {
        const double prod = std::clamp(pre[j] * suf[j + 1], -(1.0 - 1e-15), 1.0 - 1e-15);
        c2v[check_off[c] + j] = clamp(2.0 * std::atanh(prod));
      }
    }
  }

  res.corrected.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.corrected[i] = hard[i] ^ key.pad[i];
  return res;
}

}  // namespace tamperlock

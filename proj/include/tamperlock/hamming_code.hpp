#pragma once

// Distance-threshold messageless code.  The secret key is a uniform string
// sk over an alphabet of size q; encoding releases sk itself, and decoding
// buckets a received string by its Hamming distance d from sk:
//
//   d == 0            -> valid
//   0 <  d <= t       -> tampered      with t = n * (1 - 1/q) * (1 - delta)
//   d >  t            -> invalid
//
// The threshold comparison is carried out in exact integer arithmetic (the
// binary fraction of delta is cross-multiplied), so boundary distances never
// depend on floating-point rounding.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "tamperlock/core.hpp"
#include "tamperlock/rng.hpp"

namespace tamperlock {

/// Decision threshold t = n(1 - 1/q)(1 - delta) as a double, for reporting.
inline double threshold(std::size_t n, std::uint64_t q, double delta) {
  SecurityParams{1, n, q, delta}.validate();
  return static_cast<double>(n) * (1.0 - 1.0 / static_cast<double>(q)) * (1.0 - delta);
}

/// Exact floor(t).  For integer distances, d <= t iff d <= floor(t), so this
/// single integer pins the valid/tampered/invalid boundaries exactly.
inline std::uint64_t threshold_floor(std::size_t n, std::uint64_t q, double delta) {
  SecurityParams{1, n, q, delta}.validate();
  // delta = m / 2^s exactly (every double in (0,1) is such a binary rational).
  int e = 0;
  const double frac = std::frexp(delta, &e);  // delta = frac * 2^e, frac in [0.5, 1)
  auto m = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  int s = 53 - e;
  while ((m & 1) == 0 && s > 1) { m >>= 1; --s; }
  if (s <= 62 && n <= (1ULL << 30)) {
    // t = n (q-1) (2^s - m) / (q 2^s); worst case ~2^(30+32+62) < 2^127.
    const unsigned __int128 num = static_cast<unsigned __int128>(n) * (q - 1) *
                                  ((static_cast<unsigned __int128>(1) << s) - m);
    const unsigned __int128 den = static_cast<unsigned __int128>(q) << s;
    return static_cast<std::uint64_t>(num / den);
  }
  // Fallback for extreme parameters (delta below ~2^-61 or n > 2^30): the
  // 64-bit long double mantissa keeps the error far below the integer gap.
  const long double t = static_cast<long double>(n) *
                        (1.0L - 1.0L / static_cast<long double>(q)) *
                        (1.0L - static_cast<long double>(delta));
  return static_cast<std::uint64_t>(std::floor(t));
}

/// Chernoff-style bound reported for the soundness error, exp(-delta^2 n / (2q)).
inline double soundness_bound(std::size_t n, std::uint64_t q, double delta) {
  SecurityParams{1, n, q, delta}.validate();
  return std::exp(-delta * delta * static_cast<double>(n) / (2.0 * static_cast<double>(q)));
}

/// Bound on a full resample changing fewer than (1+delta) of its expected
/// n(1-1/q) positions: exp(-delta^2 n (1-1/q) / 3).
inline double impossibility_bound(std::size_t n, std::uint64_t q, double delta) {
  SecurityParams{1, n, q, delta}.validate();
  return std::exp(-delta * delta * static_cast<double>(n) *
                  (1.0 - 1.0 / static_cast<double>(q)) / 3.0);
}

struct HammingCodeKey {
  Codeword sk;
  double delta = 0.5;

  std::size_t n() const noexcept { return sk.n(); }
  std::uint64_t q() const noexcept { return sk.q; }

  void validate() const {
    sk.validate();
    require(delta > 0.0 && delta < 1.0, "delta must lie strictly in (0, 1)");
  }
};

inline HammingCodeKey hamming_kgen(const SecurityParams& params, Rng& rng) {
  params.validate();
  return HammingCodeKey{uniform_codeword(params.n, params.q, rng), params.delta};
}

/// Encoding is the key itself (messageless release of sk).
inline const Codeword& hamming_enc(const HammingCodeKey& key) { return key.sk; }

inline DecodeOutcome hamming_dec(const HammingCodeKey& key, const Codeword& gamma_hat) {
  const std::size_t d = hamming_distance(key.sk, gamma_hat);
  if (d == 0) return DecodeOutcome::valid;
  if (d <= threshold_floor(key.n(), key.q(), key.delta)) return DecodeOutcome::tampered;
  return DecodeOutcome::invalid;
}

// --- key file ("TAMPERLOCK-HK v1") -------------------------------------------

inline std::string serialize_key(const HammingCodeKey& key) {
  key.validate();
  std::string out = "TAMPERLOCK-HK v1 n=" + std::to_string(key.n()) +
                    " q=" + std::to_string(key.q()) +
                    " delta=" + double_repr(key.delta) + "\n";
  out += to_text(key.sk);
  out += "\n";
  return out;
}

inline HammingCodeKey parse_key(const std::string& text) {
  std::istringstream in(text);
  std::string magic, version, ntok, qtok, dtok, body;
  in >> magic >> version >> ntok >> qtok >> dtok;
  require(magic == "TAMPERLOCK-HK", "key file: bad magic");
  require(version == "v1", "key file: unsupported version");
  require(ntok.rfind("n=", 0) == 0 && qtok.rfind("q=", 0) == 0 && dtok.rfind("delta=", 0) == 0,
          "key file: malformed header fields");
  const std::uint64_t n = parse_u64(ntok.substr(2), "key file n");
  const std::uint64_t q = parse_u64(qtok.substr(2), "key file q");
  char* end = nullptr;
  const double delta = std::strtod(dtok.c_str() + 6, &end);
  require(end && *end == '\0', "key file: malformed delta");
  in >> body;
  HammingCodeKey key{parse_codeword(body, q), delta};
  require(key.n() == n, "key file: length does not match header");
  key.validate();
  return key;
}

inline void write_key_file(const HammingCodeKey& key, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot open key file for writing: " + path);
  out << serialize_key(key);
  out.flush();
  if (!out.good()) throw std::runtime_error("failed writing key file: " + path);
}

inline HammingCodeKey read_key_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open key file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key(buf.str());
}

/// Interface adapter so the threshold code can plug into generic machinery.
class HammingCode final : public MessagelessCode {
 public:
  explicit HammingCode(HammingCodeKey key) : key_(std::move(key)) { key_.validate(); }

  static std::unique_ptr<HammingCode> generate(const SecurityParams& params, Rng& rng) {
    return std::make_unique<HammingCode>(hamming_kgen(params, rng));
  }

  Codeword encode(Rng&) override { return key_.sk; }
  DecodeOutcome decode(const Codeword& gamma_hat) const override {
    return hamming_dec(key_, gamma_hat);
  }
  std::size_t length() const override { return key_.n(); }
  std::uint64_t alphabet_size() const override { return key_.q(); }

  const HammingCodeKey& key() const noexcept { return key_; }

 private:
  HammingCodeKey key_;
};

}  // namespace tamperlock

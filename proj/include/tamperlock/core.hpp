#pragma once

// Shared vocabulary: alphabets, codewords, decode outcomes, and the
// messageless-code interface everything else composes against.

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tamperlock/rng.hpp"

namespace tamperlock {

using Symbol = std::uint32_t;

inline constexpr std::uint64_t kMaxAlphabet = 1ULL << 32;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Finite symbol alphabet {0, ..., size-1}, 2 <= size <= 2^32.
struct Alphabet {
  std::uint64_t size = 2;

  void validate() const {
    require(size >= 2 && size <= kMaxAlphabet, "alphabet size must be in [2, 2^32]");
  }
};

/// Fixed-length string over an alphabet of size q.
struct Codeword {
  std::vector<Symbol> symbols;
  std::uint64_t q = 2;

  std::size_t n() const noexcept { return symbols.size(); }

  void validate() const {
    Alphabet{q}.validate();
    require(!symbols.empty(), "codeword length must be >= 1");
    for (Symbol s : symbols)
      require(static_cast<std::uint64_t>(s) < q, "codeword symbol out of alphabet range");
  }

  bool operator==(const Codeword& o) const noexcept {
    return q == o.q && symbols == o.symbols;
  }
};

enum class DecodeOutcome { valid, invalid, tampered };

inline const char* to_string(DecodeOutcome o) noexcept {
  switch (o) {
    case DecodeOutcome::valid: return "valid";
    case DecodeOutcome::invalid: return "invalid";
    case DecodeOutcome::tampered: return "tampered";
  }
  return "?";
}

/// Instance parameters: security parameter lambda (bits), length n,
/// alphabet size q, threshold slack delta in (0,1).
struct SecurityParams {
  std::uint64_t lambda = 128;
  std::size_t n = 0;
  std::uint64_t q = 2;
  double delta = 0.5;

  void validate() const {
    require(lambda >= 1, "lambda must be >= 1");
    require(n >= 1, "n must be >= 1");
    Alphabet{q}.validate();
    require(delta > 0.0 && delta < 1.0, "delta must lie strictly in (0, 1)");
  }
};

inline void require_same_shape(const Codeword& a, const Codeword& b) {
  require(a.q == b.q, "alphabet mismatch");
  require(a.n() == b.n(), "length mismatch");
}

/// Number of positions where a and b differ.  Throws on shape mismatch.
inline std::size_t hamming_distance(const Codeword& a, const Codeword& b) {
  require_same_shape(a, b);
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.symbols.size(); ++i)
    d += (a.symbols[i] != b.symbols[i]) ? 1 : 0;
  return d;
}

inline Codeword uniform_codeword(std::size_t n, std::uint64_t q, Rng& rng) {
  require(n >= 1, "n must be >= 1");
  Alphabet{q}.validate();
  Codeword c;
  c.q = q;
  c.symbols.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    c.symbols.push_back(static_cast<Symbol>(rng.uniform_below(q)));
  return c;
}

inline Codeword uniform_codeword(std::size_t n, std::uint64_t q, std::uint64_t seed) {
  Rng rng(seed);
  return uniform_codeword(n, q, rng);
}

// --- serialization -----------------------------------------------------------
//
// Canonical text form: colon-joined decimal symbols, e.g. "0:3:1:2".
// Binary codewords may alternatively use "hex:<nbits>:<hexbytes>" with bits
// packed MSB-first into bytes (trailing pad bits zero).

inline std::string to_text(const Codeword& c) {
  std::string out;
  for (std::size_t i = 0; i < c.symbols.size(); ++i) {
    if (i) out.push_back(':');
    out += std::to_string(c.symbols[i]);
  }
  return out;
}

inline std::string to_hex(const Codeword& c) {
  require(c.q == 2, "hex form is defined for binary codewords only");
  std::string out = "hex:" + std::to_string(c.n()) + ":";
  static const char* digits = "0123456789abcdef";
  std::uint8_t byte = 0;
  int nbits = 0;
  for (std::size_t i = 0; i < c.symbols.size(); ++i) {
    byte = static_cast<std::uint8_t>((byte << 1) | (c.symbols[i] & 1));
    if (++nbits == 8 || i + 1 == c.symbols.size()) {
      byte = static_cast<std::uint8_t>(byte << (8 - nbits));
      out.push_back(digits[byte >> 4]);
      out.push_back(digits[byte & 0xf]);
      byte = 0;
      nbits = 0;
    }
  }
  return out;
}

inline std::uint64_t parse_u64(std::string_view tok, const std::string& what) {
  require(!tok.empty(), what + ": empty integer");
  std::uint64_t v = 0;
  for (char ch : tok) {
    require(ch >= '0' && ch <= '9', what + ": not a non-negative integer: '" + std::string(tok) + "'");
    std::uint64_t d = static_cast<std::uint64_t>(ch - '0');
    require(v <= (UINT64_MAX - d) / 10, what + ": integer overflow");
    v = v * 10 + d;
  }
  return v;
}

inline Codeword parse_codeword(std::string_view text, std::uint64_t q) {
  Alphabet{q}.validate();
  Codeword c;
  c.q = q;
  if (text.rfind("hex:", 0) == 0) {
    require(q == 2, "hex form is defined for binary codewords only");
    std::string_view rest = text.substr(4);
    std::size_t sep = rest.find(':');
    require(sep != std::string_view::npos, "hex codeword: missing bit length");
    std::size_t nbits = static_cast<std::size_t>(parse_u64(rest.substr(0, sep), "hex codeword length"));
    std::string_view hex = rest.substr(sep + 1);
    require(hex.size() == 2 * ((nbits + 7) / 8), "hex codeword: byte count does not match bit length");
    auto nibble = [](char ch) -> int {
      if (ch >= '0' && ch <= '9') return ch - '0';
      if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
      if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
      throw std::invalid_argument("hex codeword: bad hex digit");
    };
    c.symbols.reserve(nbits);
    for (std::size_t i = 0; i < nbits; ++i) {
      int byte = nibble(hex[2 * (i / 8)]) * 16 + nibble(hex[2 * (i / 8) + 1]);
      c.symbols.push_back(static_cast<Symbol>((byte >> (7 - (i % 8))) & 1));
    }
  } else {
    std::size_t start = 0;
    while (true) {
      std::size_t sep = text.find(':', start);
      std::string_view tok = text.substr(start, sep == std::string_view::npos ? sep : sep - start);
      std::uint64_t v = parse_u64(tok, "codeword symbol");
      require(v < q, "codeword symbol out of alphabet range");
      c.symbols.push_back(static_cast<Symbol>(v));
      if (sep == std::string_view::npos) break;
      start = sep + 1;
    }
  }
  c.validate();
  return c;
}

/// Round-trip-exact decimal form of a double (shortest via %.17g).
inline std::string double_repr(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- code interface ----------------------------------------------------------

/// A keyed messageless code: encoding emits a codeword (no message input) and
/// decoding sorts received strings into valid / invalid / tampered.
/// Implementations hold their own secret key; key generation is a factory.
class MessagelessCode {
 public:
  virtual ~MessagelessCode() = default;

  /// Fresh codeword.  Deterministic codes ignore the generator.
  virtual Codeword encode(Rng& rng) = 0;
  virtual DecodeOutcome decode(const Codeword& gamma_hat) const = 0;
  virtual std::size_t length() const = 0;
  virtual std::uint64_t alphabet_size() const = 0;
};

}  // namespace tamperlock

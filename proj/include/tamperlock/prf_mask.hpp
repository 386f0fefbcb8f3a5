#pragma once

// Pseudorandom masking of codewords with a public, never-reused counter.
//
// A released codeword gamma is replaced by gamma + F(kappa, pi) (per-symbol
// addition mod q), where F is ChaCha20-IETF keyed by kappa with the counter
// pi as nonce, and pi comes from a crash-safe on-disk monotone counter.  For
// every fixed pi the mask is a bijection on codeword space, so decode-label
// distributions are preserved exactly; fresh pi values make released words
// pairwise independent pseudorandom strings.

#include <sodium.h>

#include <sys/file.h>
#include <sys/stat.h>
#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tamperlock/core.hpp"
#include "tamperlock/rng.hpp"

namespace tamperlock {

inline void ensure_sodium() {
  static const int rc = sodium_init();  // idempotent; 1 = already initialized
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

/// Secret PRF key of lambda/8 bytes.
struct PrfKey {
  std::vector<std::uint8_t> bytes;

  static PrfKey generate(std::uint64_t lambda_bits, Rng& rng) {
    require(lambda_bits >= 8 && lambda_bits % 8 == 0, "lambda must be a positive multiple of 8");
    PrfKey k;
    k.bytes.reserve(lambda_bits / 8);
    for (std::uint64_t i = 0; i < lambda_bits / 8; ++i)
      k.bytes.push_back(static_cast<std::uint8_t>(rng.next_u64() & 0xff));
    return k;
  }

  /// 32-byte stream key: kappa itself when already 32 bytes, else BLAKE2b-256(kappa).
  std::array<std::uint8_t, 32> stream_key() const {
    require(!bytes.empty(), "empty PRF key");
    ensure_sodium();
    std::array<std::uint8_t, 32> k{};
    if (bytes.size() == 32) {
      std::memcpy(k.data(), bytes.data(), 32);
    } else {
      crypto_generichash(k.data(), k.size(), bytes.data(), bytes.size(), nullptr, 0);
    }
    return k;
  }
};

namespace detail {

/// Incremental ChaCha20-IETF keystream for a fixed (key, pi) pair.
class Keystream {
 public:
  Keystream(const std::array<std::uint8_t, 32>& key, std::uint64_t pi) : key_(key) {
    ensure_sodium();
    for (int i = 0; i < 8; ++i) nonce_[i] = static_cast<std::uint8_t>((pi >> (8 * i)) & 0xff);
  }

  std::uint8_t next_byte() {
    if (pos_ == buf_.size()) refill();
    return buf_[pos_++];
  }

  /// Next bit, MSB-first within each keystream byte.
  int next_bit() {
    if (bitpos_ == 0) {
      cur_ = next_byte();
      bitpos_ = 8;
    }
    --bitpos_;
    return (cur_ >> bitpos_) & 1;
  }

 private:
  void refill() {
    std::memset(buf_.data(), 0, buf_.size());
    if (crypto_stream_chacha20_ietf_xor_ic(buf_.data(), buf_.data(), buf_.size(),
                                           nonce_.data(), block_, key_.data()) != 0)
      throw std::runtime_error("keystream generation failed");
    block_ += buf_.size() / 64;
    pos_ = 0;
  }

  std::array<std::uint8_t, 32> key_;
  std::array<std::uint8_t, 12> nonce_{};
  std::array<std::uint8_t, 1024> buf_{};
  std::size_t pos_ = buf_.size();
  std::uint32_t block_ = 0;
  std::uint8_t cur_ = 0;
  int bitpos_ = 0;
};

}  // namespace detail

/// Expand F(kappa, pi) into out_len uniform symbols over [0, q).  Symbols are
/// read as ceil(log2(q))-bit chunks with rejection, so non-power-of-two
/// alphabets stay exactly uniform.
inline std::vector<Symbol> prf_expand(const PrfKey& key, std::uint64_t pi,
                                      std::size_t out_len, std::uint64_t q) {
  Alphabet{q}.validate();
  detail::Keystream ks(key.stream_key(), pi);
  int width = 0;
  while ((1ULL << width) < q) ++width;
  std::vector<Symbol> out;
  out.reserve(out_len);
  while (out.size() < out_len) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 1) | static_cast<std::uint64_t>(ks.next_bit());
    if (v < q) out.push_back(static_cast<Symbol>(v));
  }
  return out;
}

inline Codeword mask(const Codeword& gamma, const PrfKey& key, std::uint64_t pi) {
  gamma.validate();
  const std::vector<Symbol> pad = prf_expand(key, pi, gamma.n(), gamma.q);
  Codeword out = gamma;
  for (std::size_t i = 0; i < out.symbols.size(); ++i)
    out.symbols[i] = static_cast<Symbol>(
        (static_cast<std::uint64_t>(out.symbols[i]) + pad[i]) % gamma.q);
  return out;
}

inline Codeword unmask(const Codeword& masked, const PrfKey& key, std::uint64_t pi) {
  masked.validate();
  const std::vector<Symbol> pad = prf_expand(key, pi, masked.n(), masked.q);
  Codeword out = masked;
  for (std::size_t i = 0; i < out.symbols.size(); ++i)
    out.symbols[i] = static_cast<Symbol>(
        (static_cast<std::uint64_t>(out.symbols[i]) + masked.q - pad[i]) % masked.q);
  return out;
}

/// Masked codeword plus the public counter value it was masked under.
/// Wire form: "pi=<int>;" followed by the codeword text form.
struct MaskedCodeword {
  Codeword body;
  std::uint64_t pi = 0;

  std::string wire_form() const { return "pi=" + std::to_string(pi) + ";" + to_text(body); }

  static MaskedCodeword parse(std::string_view text, std::uint64_t q) {
    require(text.rfind("pi=", 0) == 0, "masked codeword: missing pi field");
    const std::size_t sep = text.find(';');
    require(sep != std::string_view::npos, "masked codeword: missing ';' separator");
    MaskedCodeword m;
    m.pi = parse_u64(text.substr(3, sep - 3), "masked codeword pi");
    m.body = parse_codeword(text.substr(sep + 1), q);
    return m;
  }
};

// --- crash-safe counter -------------------------------------------------------

/// File-backed monotone counter.  File format: "TAMPERLOCK-CTR v1 next=<k>".
///
/// issue() persists next = pi + 1 (write to a temp file, fsync, rename over,
/// fsync the directory) BEFORE returning pi, so a crash at any point can only
/// skip values, never repeat one.  Any storage or parse failure throws - the
/// store fails closed rather than risking counter reuse.  One instance owns
/// its file exclusively (advisory lock on a sibling .lock file); share an
/// instance across threads, not a file across instances.
class CounterStore {
 public:
  explicit CounterStore(std::string path) : path_(std::move(path)) {
    lock_fd_ = ::open((path_ + ".lock").c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0600);
    if (lock_fd_ < 0) throw std::runtime_error("counter: cannot open lock file: " + path_ + ".lock");
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      lock_fd_ = -1;
      throw std::runtime_error("counter: store already in use: " + path_);
    }
    if (::access(path_.c_str(), F_OK) == 0) {
      next_ = read_file();
    } else {
      next_ = 0;
      persist(next_);
    }
  }

  ~CounterStore() {
    if (lock_fd_ >= 0) ::close(lock_fd_);
  }

  CounterStore(const CounterStore&) = delete;
  CounterStore& operator=(const CounterStore&) = delete;

  /// Next counter value; durable before it is visible to the caller.
  std::uint64_t issue() {
    std::lock_guard<std::mutex> g(mu_);
    const std::uint64_t pi = next_;
    require(pi != UINT64_MAX, "counter exhausted");
    persist(pi + 1);
    next_ = pi + 1;
    return pi;
  }

  /// Value the next issue() will return (not reserved).
  std::uint64_t peek_next() {
    std::lock_guard<std::mutex> g(mu_);
    return next_;
  }

  const std::string& path() const noexcept { return path_; }

  /// Parse the on-disk state (what a restart would resume from).
  std::uint64_t read_file() const {
    std::FILE* f = std::fopen(path_.c_str(), "rb");
    if (!f) throw std::runtime_error("counter: cannot open state file: " + path_);
    char buf[128] = {0};
    const std::size_t got = std::fread(buf, 1, sizeof buf - 1, f);
    std::fclose(f);
    const std::string text(buf, got);
    const std::string prefix = "TAMPERLOCK-CTR v1 next=";
    if (text.rfind(prefix, 0) != 0)
      throw std::runtime_error("counter: malformed state file: " + path_);
    std::size_t end = text.find('\n');
    if (end == std::string::npos) end = text.size();
    return parse_u64(std::string_view(text).substr(prefix.size(), end - prefix.size()),
                     "counter next");
  }

 private:
  void persist(std::uint64_t next) {
    const std::string tmp = path_ + ".tmp";
    const std::string line = "TAMPERLOCK-CTR v1 next=" + std::to_string(next) + "\n";
    const int fd = ::open(tmp.c_str(), O_CREAT | O_WRONLY | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) throw std::runtime_error("counter: cannot write state: " + tmp);
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      const ssize_t w = ::write(fd, p, left);
      if (w < 0) {
        if (errno == EINTR) continue;
        ::close(fd);
        throw std::runtime_error("counter: write failed: " + tmp);
      }
      p += w;
      left -= static_cast<std::size_t>(w);
    }
    if (::fsync(fd) != 0) {
      ::close(fd);
      throw std::runtime_error("counter: fsync failed: " + tmp);
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path_.c_str()) != 0)
      throw std::runtime_error("counter: rename failed: " + path_);
    // Make the rename itself durable.
    std::string dir = path_;
    const std::size_t slash = dir.find_last_of('/');
    dir = (slash == std::string::npos) ? "." : dir.substr(0, slash);
    const int dfd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (dfd >= 0) {
      ::fsync(dfd);
      ::close(dfd);
    }
  }

  std::string path_;
  int lock_fd_ = -1;
  std::uint64_t next_ = 0;
  std::mutex mu_;
};

// --- wrapped code -------------------------------------------------------------

/// Masking upgrade around a deterministic-encoder messageless code: each
/// encode masks the inner codeword under a fresh counter value; decode
/// unmasks at the transported pi and defers to the inner decoder.  Per fixed
/// pi the mask is a bijection, so all label distributions match the inner
/// code's exactly.
class PrfWrappedCode {
 public:
  PrfWrappedCode(std::shared_ptr<MessagelessCode> inner, PrfKey key, CounterStore& counter)
      : inner_(std::move(inner)), key_(std::move(key)), counter_(counter) {
    require(inner_ != nullptr, "wrapped code: null inner code");
  }

  MaskedCodeword encode(Rng& rng) {
    const std::uint64_t pi = counter_.issue();
    return MaskedCodeword{mask(inner_->encode(rng), key_, pi), pi};
  }

  DecodeOutcome decode(const MaskedCodeword& received) const {
    return decode_at(received.pi, received.body);
  }

  DecodeOutcome decode_at(std::uint64_t pi, const Codeword& body) const {
    return inner_->decode(unmask(body, key_, pi));
  }

  MessagelessCode& inner() { return *inner_; }
  const PrfKey& prf_key() const noexcept { return key_; }

 private:
  std::shared_ptr<MessagelessCode> inner_;
  PrfKey key_;
  CounterStore& counter_;
};

}  // namespace tamperlock

#pragma once

// Message-carrying codes and the reduction that strips the message: fixing
// one message of an error-correcting multi-message code yields a messageless
// code whose `valid` outcome means "the fixed message survived".

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "tamperlock/channels.hpp"
#include "tamperlock/core.hpp"
#include "tamperlock/ldpc.hpp"

namespace tamperlock {

using Message = std::vector<Symbol>;

struct MultiMessageDecode {
  enum class Kind { message, invalid, tampered };
  Kind kind = Kind::invalid;
  Message message;  // populated iff kind == message

  static MultiMessageDecode decoded(Message m) {
    return {Kind::message, std::move(m)};
  }
  static MultiMessageDecode as_invalid() { return {Kind::invalid, {}}; }
  static MultiMessageDecode as_tampered() { return {Kind::tampered, {}}; }
};

/// Keyed code carrying messages from {0..message_alphabet-1}^message_length.
class MultiMessageCode {
 public:
  virtual ~MultiMessageCode() = default;
  virtual Codeword encode(const Message& mu, Rng& rng) = 0;
  virtual MultiMessageDecode decode(const Codeword& gamma_hat) const = 0;
  virtual std::size_t message_length() const = 0;
  virtual std::uint64_t message_alphabet() const = 0;
  virtual std::size_t length() const = 0;
  virtual std::uint64_t alphabet_size() const = 0;

  void validate_message(const Message& mu) const {
    require(mu.size() == message_length(), "message length mismatch");
    for (Symbol s : mu)
      require(static_cast<std::uint64_t>(s) < message_alphabet(), "message symbol out of range");
  }
};

/// Messageless view of `code` with the message pinned to mu_star: encode
/// emits enc(mu_star); decode is `valid` iff the inner decoder returns
/// exactly mu_star, otherwise `invalid`.
class FixedMessageCode final : public MessagelessCode {
 public:
  FixedMessageCode(std::shared_ptr<MultiMessageCode> code, Message mu_star)
      : code_(std::move(code)), mu_star_(std::move(mu_star)) {
    require(code_ != nullptr, "fix_message: null code");
    code_->validate_message(mu_star_);
  }

  Codeword encode(Rng& rng) override { return code_->encode(mu_star_, rng); }

  DecodeOutcome decode(const Codeword& gamma_hat) const override {
    const MultiMessageDecode d = code_->decode(gamma_hat);
    return (d.kind == MultiMessageDecode::Kind::message && d.message == mu_star_)
               ? DecodeOutcome::valid
               : DecodeOutcome::invalid;
  }

  std::size_t length() const override { return code_->length(); }
  std::uint64_t alphabet_size() const override { return code_->alphabet_size(); }

 private:
  std::shared_ptr<MultiMessageCode> code_;
  Message mu_star_;
};

inline std::unique_ptr<MessagelessCode> fix_message(std::shared_ptr<MultiMessageCode> code,
                                                    Message mu_star) {
  return std::make_unique<FixedMessageCode>(std::move(code), std::move(mu_star));
}

/// Empirical P[dec(f(enc(mu))) != mu | f changed the codeword].  Trials where
/// the channel returns the codeword unchanged are excluded; if every trial is
/// excluded the failure rate is reported as 0.
inline double check_error_correction(MultiMessageCode& code, const TamperChannel& channel,
                                     const Message& mu, std::size_t trials, std::uint64_t seed) {
  require(trials >= 1, "check_error_correction: trials must be >= 1");
  code.validate_message(mu);
  Rng master(seed);
  std::size_t counted = 0, failures = 0;
  for (std::size_t tr = 0; tr < trials; ++tr) {
    Rng rng = master.fork(tr);
    const Codeword gamma = code.encode(mu, rng);
    const Codeword tampered = channel.apply(gamma, rng);
    if (tampered == gamma) continue;
    ++counted;
    const MultiMessageDecode d = code.decode(tampered);
    if (!(d.kind == MultiMessageDecode::Kind::message && d.message == mu)) ++failures;
  }
  if (counted == 0) return 0.0;
  return static_cast<double>(failures) / static_cast<double>(counted);
}

/// m-bit messages on top of the sparse-parity code: message bit i toggles a
/// secret coset shift (PRF-derived, like the pad).  Decoding tries each of
/// the 2^m cosets, BP-decodes toward the zero syndrome, and accepts the
/// best-scoring coset iff its detection score clears the threshold; wrong
/// cosets look like uniform noise so their scores stay near zero.
class PrcCosetCode final : public MultiMessageCode {
 public:
  PrcCosetCode(PrcKey key, const PrfKey& kappa, std::size_t message_bits,
               BpParams bp = {})
      : key_(std::move(key)), solver_(key_.h), bp_(bp), m_(message_bits) {
    require(m_ <= 12, "coset code: message_bits must be <= 12 (decode is exhaustive)");
    bp_.validate();
    for (std::size_t i = 0; i < m_; ++i) {
      const std::vector<Symbol> shift =
          prf_expand(kappa, key_.h.content_hash() + 1 + i, key_.h.n, 2);
      coset_shifts_.emplace_back(shift.begin(), shift.end());
    }
  }

  Codeword encode(const Message& mu, Rng& rng) override {
    validate_message(mu);
    Bits released = prc_encode(key_, solver_, rng);
    apply_shift(released, mu);
    return bits_to_codeword(released);
  }

  MultiMessageDecode decode(const Codeword& gamma_hat) const override {
    require(gamma_hat.q == 2 && gamma_hat.n() == key_.h.n, "coset code: shape mismatch");
    Bits received = codeword_to_bits(gamma_hat);
    double best_score = -1e300;
    Message best;
    Message mu(m_, 0);
    for (std::uint64_t pattern = 0; pattern < (1ULL << m_); ++pattern) {
      for (std::size_t i = 0; i < m_; ++i) mu[i] = static_cast<Symbol>((pattern >> i) & 1);
      Bits shifted = received;
      apply_shift(shifted, mu);
      const BpResult bp = bp_decode(key_, shifted, bp_);
      const DetectResult det = prc_detect(key_, bp.corrected);
      if (det.score > best_score) {
        best_score = det.score;
        best = mu;
      }
    }
    if (best_score >= key_.detect_threshold) return MultiMessageDecode::decoded(best);
    return MultiMessageDecode::as_invalid();
  }

  std::size_t message_length() const override { return m_; }
  std::uint64_t message_alphabet() const override { return 2; }
  std::size_t length() const override { return key_.h.n; }
  std::uint64_t alphabet_size() const override { return 2; }

  const PrcKey& key() const noexcept { return key_; }

 private:
  void apply_shift(Bits& bits, const Message& mu) const {
    for (std::size_t i = 0; i < m_; ++i)
      if (mu[i])
        for (std::size_t j = 0; j < bits.size(); ++j) bits[j] ^= coset_shifts_[i][j];
  }

  PrcKey key_;
  Gf2Solver solver_;
  BpParams bp_;
  std::size_t m_;
  std::vector<Bits> coset_shifts_;
};

/// What "error-correcting" is taken to mean when transferring guarantees:
/// the channel it holds against and the failure probability it was measured
/// at (with the trial count backing the estimate).
struct ErrorCorrectionContract {
  std::string channel_spec;
  double failure_rate = 0.0;
  std::size_t trials = 0;
};

inline ErrorCorrectionContract measure_error_correction(MultiMessageCode& code,
                                                        const TamperChannel& channel,
                                                        const Message& mu, std::size_t trials,
                                                        std::uint64_t seed) {
  return ErrorCorrectionContract{channel.spec_string(),
                                 check_error_correction(code, channel, mu, trials, seed), trials};
}

}  // namespace tamperlock

#pragma once

// Watermarking <-> messageless-code reductions.  A keyed watermarking scheme
// (embedder + detector) at a fixed prompt IS a messageless code whose
// decoder never says `valid` (detection cannot distinguish intact from
// usefully-tampered output); conversely any messageless code packages as a
// watermarking scheme by generating codewords and detecting non-`invalid`
// decodes.  Both directions preserve label behavior mechanically, so
// detection/soundness trade-offs transfer between the two worlds.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "tamperlock/core.hpp"
#include "tamperlock/ldpc.hpp"

namespace tamperlock {

/// A keyed watermarking scheme: the embedder produces watermarked output for
/// a prompt, the detector decides whether given output carries the mark.
class WatermarkedScheme {
 public:
  virtual ~WatermarkedScheme() = default;
  virtual Codeword generate(const std::string& prompt, Rng& rng) const = 0;
  virtual bool detect(const std::string& prompt, const Codeword& output) const = 0;
  virtual std::size_t output_length() const = 0;
  virtual std::uint64_t alphabet_size() const = 0;
};

/// Messageless code derived from a watermarking scheme at a fixed prompt.
/// decode maps detect=true -> tampered and detect=false -> invalid; it can
/// never output valid.
class WatermarkDerivedCode final : public MessagelessCode {
 public:
  WatermarkDerivedCode(std::shared_ptr<const WatermarkedScheme> scheme, std::string prompt)
      : scheme_(std::move(scheme)), prompt_(std::move(prompt)) {
    require(scheme_ != nullptr, "code_from_watermark: null scheme");
  }

  Codeword encode(Rng& rng) override { return scheme_->generate(prompt_, rng); }

  DecodeOutcome decode(const Codeword& gamma_hat) const override {
    return scheme_->detect(prompt_, gamma_hat) ? DecodeOutcome::tampered
                                               : DecodeOutcome::invalid;
  }

  std::size_t length() const override { return scheme_->output_length(); }
  std::uint64_t alphabet_size() const override { return scheme_->alphabet_size(); }

 private:
  std::shared_ptr<const WatermarkedScheme> scheme_;
  std::string prompt_;
};

inline std::unique_ptr<MessagelessCode> code_from_watermark(
    std::shared_ptr<const WatermarkedScheme> scheme, std::string fixed_prompt) {
  return std::make_unique<WatermarkDerivedCode>(std::move(scheme), std::move(fixed_prompt));
}

/// Converse packaging: a messageless code as a watermarking scheme.  The
/// prompt is ignored; detect fires iff the decoder does NOT say invalid.
class CodeBackedWatermark final : public WatermarkedScheme {
 public:
  explicit CodeBackedWatermark(std::shared_ptr<MessagelessCode> code) : code_(std::move(code)) {
    require(code_ != nullptr, "watermark_from_code: null code");
  }

  Codeword generate(const std::string&, Rng& rng) const override { return code_->encode(rng); }

  bool detect(const std::string&, const Codeword& output) const override {
    return code_->decode(output) != DecodeOutcome::invalid;
  }

  std::size_t output_length() const override { return code_->length(); }
  std::uint64_t alphabet_size() const override { return code_->alphabet_size(); }

 private:
  std::shared_ptr<MessagelessCode> code_;
};

inline std::unique_ptr<WatermarkedScheme> watermark_from_code(
    std::shared_ptr<MessagelessCode> code) {
  return std::make_unique<CodeBackedWatermark>(std::move(code));
}

/// Toy watermarked generator: outputs are fresh sparse-parity codewords
/// (pseudorandom bit strings), detection BP-denoises and scores the parity
/// checks.  Stands in for a generative model with latent-space watermarking.
class ToyPrcWatermark final : public WatermarkedScheme {
 public:
  ToyPrcWatermark(PrcKey key, BpParams bp = {}, bool bp_before_detect = true)
      : key_(std::move(key)), solver_(key_.h), bp_(bp), bp_before_detect_(bp_before_detect) {
    bp_.validate();
  }

  Codeword generate(const std::string&, Rng& rng) const override {
    return bits_to_codeword(prc_encode(key_, solver_, rng));
  }

  bool detect(const std::string&, const Codeword& output) const override {
    require(output.q == 2 && output.n() == key_.h.n, "toy watermark: shape mismatch");
    Bits bits = codeword_to_bits(output);
    if (bp_before_detect_) bits = bp_decode(key_, bits, bp_).corrected;
    return prc_detect(key_, bits).watermarked;
  }

  std::size_t output_length() const override { return key_.h.n; }
  std::uint64_t alphabet_size() const override { return 2; }

  const PrcKey& key() const noexcept { return key_; }

 private:
  PrcKey key_;
  Gf2Solver solver_;
  BpParams bp_;
  bool bp_before_detect_;
};

/// Keyed construction of the toy scheme (the "watermark a model" step).
inline std::shared_ptr<ToyPrcWatermark> toy_prc_watermarked_model(std::size_t n, std::size_t r,
                                                                  std::size_t row_weight,
                                                                  const PrfKey& kappa, Rng& rng,
                                                                  double detect_threshold = 4.0,
                                                                  BpParams bp = {}) {
  ParityMatrix h = gen_parity(n, r, row_weight, rng);
  return std::make_shared<ToyPrcWatermark>(make_prc_key(std::move(h), kappa, detect_threshold), bp);
}

}  // namespace tamperlock

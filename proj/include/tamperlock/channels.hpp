#pragma once

// Tampering channels: randomized maps from codewords to same-shape codewords.
// These model the adversary classes the codes are measured against, from
// benign per-position noise up to the uniform full resample that witnesses
// the detection/soundness trade-off.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "tamperlock/core.hpp"
#include "tamperlock/rng.hpp"

namespace tamperlock {

namespace detail {
/// Uniform symbol different from `keep` (q-1 candidates).
inline Symbol resample_different(Symbol keep, std::uint64_t q, Rng& rng) {
  const std::uint64_t v = rng.uniform_below(q - 1);
  return static_cast<Symbol>(v + (v >= keep ? 1 : 0));
}
}  // namespace detail

/// Each position is independently replaced by a fresh uniform symbol with
/// probability beta (the new symbol may equal the old one, so the expected
/// changed fraction is beta * (1 - 1/q)).
inline Codeword independent_resample(const Codeword& gamma, double beta, Rng& rng) {
  gamma.validate();
  require(beta >= 0.0 && beta <= 1.0, "independent_resample: beta outside [0, 1]");
  Codeword out = gamma;
  for (auto& s : out.symbols)
    if (rng.bernoulli(beta)) s = static_cast<Symbol>(rng.uniform_below(gamma.q));
  return out;
}

/// Every position resampled uniformly: the output is an exactly uniform
/// string regardless of the input (each position keeps its value with the
/// induced probability 1/q).
inline Codeword full_resample(const Codeword& gamma, Rng& rng) {
  gamma.validate();
  return uniform_codeword(gamma.n(), gamma.q, rng);
}

enum class WorstCaseStrategy { random_positions, prefix };

/// Change exactly `budget` positions to symbols that differ from the input.
inline Codeword worst_case_flip(const Codeword& gamma, std::size_t budget,
                                WorstCaseStrategy strategy, Rng& rng) {
  gamma.validate();
  require(budget <= gamma.n(), "worst_case_flip: budget exceeds length");
  Codeword out = gamma;
  if (budget == 0) return out;
  if (strategy == WorstCaseStrategy::prefix) {
    for (std::size_t i = 0; i < budget; ++i)
      out.symbols[i] = detail::resample_different(gamma.symbols[i], gamma.q, rng);
    return out;
  }
  // Partial Fisher-Yates: the first `budget` slots become the changed set.
  std::vector<std::uint32_t> idx(gamma.n());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < budget; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    out.symbols[idx[i]] = detail::resample_different(gamma.symbols[idx[i]], gamma.q, rng);
  }
  return out;
}

/// Adversary hook: the callback produces the tampered word itself (it may
/// know the key); the realized distance is validated against the budget.
using AdversaryFn = std::function<Codeword(const Codeword&, std::size_t budget, Rng&)>;

inline Codeword worst_case_flip(const Codeword& gamma, std::size_t budget,
                                const AdversaryFn& adversary, Rng& rng) {
  gamma.validate();
  require(budget <= gamma.n(), "worst_case_flip: budget exceeds length");
  Codeword out = adversary(gamma, budget, rng);
  require_same_shape(gamma, out);
  out.validate();
  require(hamming_distance(gamma, out) == budget,
          "worst_case_flip: adversary did not realize the exact budget");
  return out;
}

/// Input-independent channel: always emits `target`.
inline Codeword constant_channel(const Codeword& gamma, const Codeword& target) {
  gamma.validate();
  target.validate();
  require_same_shape(gamma, target);
  return target;
}

inline double realized_change_fraction(const Codeword& before, const Codeword& after) {
  return static_cast<double>(hamming_distance(before, after)) /
         static_cast<double>(before.n());
}

// --- channel descriptions ----------------------------------------------------
//
// Channel spec strings:  "ind:beta=<b>" | "full" | "worst:budget=<k>:strategy=<s>"
// (s in {random, prefix}) | "const:<codeword text>".

struct TamperChannel {
  enum class Kind { independent, full, worst_case, constant };

  Kind kind = Kind::full;
  double beta = 0.0;                         // independent
  std::size_t budget = 0;                    // worst_case
  WorstCaseStrategy strategy = WorstCaseStrategy::random_positions;
  std::optional<Codeword> target;            // constant

  Codeword apply(const Codeword& gamma, Rng& rng) const {
    switch (kind) {
      case Kind::independent: return independent_resample(gamma, beta, rng);
      case Kind::full: return full_resample(gamma, rng);
      case Kind::worst_case: return worst_case_flip(gamma, budget, strategy, rng);
      case Kind::constant:
        require(target.has_value(), "constant channel without target");
        return constant_channel(gamma, *target);
    }
    throw std::logic_error("unreachable channel kind");
  }

  /// Nominal change fraction the channel is declared at: expected fraction
  /// for the random channels, exact fraction for worst-case, and the maximal
  /// 1.0 for the input-independent constant channel.
  double declared_alpha(std::size_t n, std::uint64_t q) const {
    switch (kind) {
      case Kind::independent: return beta * (1.0 - 1.0 / static_cast<double>(q));
      case Kind::full: return 1.0 - 1.0 / static_cast<double>(q);
      case Kind::worst_case: return static_cast<double>(budget) / static_cast<double>(n);
      case Kind::constant: return 1.0;
    }
    throw std::logic_error("unreachable channel kind");
  }

  std::string spec_string() const {
    switch (kind) {
      case Kind::independent: return "ind:beta=" + double_repr(beta);
      case Kind::full: return "full";
      case Kind::worst_case:
        return "worst:budget=" + std::to_string(budget) + ":strategy=" +
               (strategy == WorstCaseStrategy::prefix ? "prefix" : "random");
      case Kind::constant: return "const:" + to_text(*target);
    }
    throw std::logic_error("unreachable channel kind");
  }

  /// Parse a channel spec; q is needed to validate a constant target.
  static TamperChannel parse(std::string_view spec, std::uint64_t q) {
    TamperChannel ch;
    if (spec == "full") {
      ch.kind = Kind::full;
      return ch;
    }
    if (spec.rfind("ind:beta=", 0) == 0) {
      ch.kind = Kind::independent;
      const std::string num(spec.substr(9));
      char* end = nullptr;
      ch.beta = std::strtod(num.c_str(), &end);
      require(end && *end == '\0', "channel spec: malformed beta");
      require(ch.beta >= 0.0 && ch.beta <= 1.0, "channel spec: beta outside [0, 1]");
      return ch;
    }
    if (spec.rfind("worst:budget=", 0) == 0) {
      ch.kind = Kind::worst_case;
      std::string_view rest = spec.substr(13);
      const std::size_t sep = rest.find(':');
      require(sep != std::string_view::npos, "channel spec: missing strategy");
      ch.budget = static_cast<std::size_t>(parse_u64(rest.substr(0, sep), "channel budget"));
      std::string_view strat = rest.substr(sep + 1);
      require(strat.rfind("strategy=", 0) == 0, "channel spec: malformed strategy field");
      strat.remove_prefix(9);
      if (strat == "random") ch.strategy = WorstCaseStrategy::random_positions;
      else if (strat == "prefix") ch.strategy = WorstCaseStrategy::prefix;
      else throw std::invalid_argument("channel spec: unknown strategy");
      return ch;
    }
    if (spec.rfind("const:", 0) == 0) {
      ch.kind = Kind::constant;
      ch.target = parse_codeword(spec.substr(6), q);
      return ch;
    }
    throw std::invalid_argument("unrecognized channel spec: '" + std::string(spec) + "'");
  }
};

}  // namespace tamperlock

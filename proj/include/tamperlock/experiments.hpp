#pragma once

// Experiment drivers shared by the CLI and the test suites: the
// detection-vs-soundness conflict check, threshold sweeps, and soundness
// Monte Carlo, each with a fixed CSV schema.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tamperlock/channels.hpp"
#include "tamperlock/core.hpp"
#include "tamperlock/hamming_code.hpp"
#include "tamperlock/stats.hpp"

namespace tamperlock {

// --- detection/soundness conflict -----------------------------------------------
//
// Under a full resample the tampered output is an exactly uniform string, so
// uniform inputs measure both claims at once: soundness wants uniform
// strings to decode `invalid`, full-resample detection wants them to decode
// `tampered`.  The labels partition the space, hence
// p_invalid + p_tampered <= 1 and at least one error is >= 1/2.

struct ConflictReport {
  std::string mode;            // "exact" or "sampled"
  std::uint64_t samples = 0;   // q^n for exact mode
  double p_valid = 0.0;
  double p_invalid = 0.0;
  double p_tampered = 0.0;
  /// p_invalid + p_tampered - 1; never above 0.
  double conflict_margin = 0.0;
  /// Rate at which the soundness claim holds on uniform inputs (= p_invalid).
  double soundness_claim_rate = 0.0;
  /// Rate at which full-resample tampering is caught, conditioned on the
  /// resample actually changing the codeword.
  double tamper_claim_rate = 0.0;
  /// max(1 - p_invalid, 1 - p_tampered) >= 1/2 (the universal floor).
  bool law_holds = false;

  void finalize(std::uint64_t n_valid, std::uint64_t n_invalid, std::uint64_t n_tampered,
                std::uint64_t excluded_tampered, std::uint64_t excluded_total) {
    const std::uint64_t total = n_valid + n_invalid + n_tampered;
    samples = total;
    p_valid = static_cast<double>(n_valid) / static_cast<double>(total);
    p_invalid = static_cast<double>(n_invalid) / static_cast<double>(total);
    p_tampered = static_cast<double>(n_tampered) / static_cast<double>(total);
    conflict_margin = p_invalid + p_tampered - 1.0;
    soundness_claim_rate = p_invalid;
    const std::uint64_t kept = total - excluded_total;
    tamper_claim_rate = kept == 0 ? 0.0
                                  : static_cast<double>(n_tampered - excluded_tampered) /
                                        static_cast<double>(kept);
    law_holds = std::max(1.0 - p_invalid, 1.0 - p_tampered) >= 0.5 - 1e-12;
  }
};

/// Exact mode: enumerate all q^n inputs (guarded to q^n <= 2^20).  Works for
/// any code implementation; `reference` is one honest codeword, used for the
/// "resample left it unchanged" exclusion (exactly one enumerated string).
inline ConflictReport verify_impossibility_exact(const MessagelessCode& code,
                                                 const Codeword& reference) {
  const std::size_t n = code.length();
  const std::uint64_t q = code.alphabet_size();
  require(reference.n() == n && reference.q == q, "verify: reference shape mismatch");
  double space = 1.0;
  for (std::size_t i = 0; i < n; ++i) space *= static_cast<double>(q);
  require(space <= static_cast<double>(1ULL << 20), "verify exact: q^n exceeds 2^20");

  Codeword probe;
  probe.q = q;
  probe.symbols.assign(n, 0);
  std::uint64_t n_valid = 0, n_invalid = 0, n_tampered = 0, excluded_tampered = 0;
  while (true) {
    const DecodeOutcome o = code.decode(probe);
    if (o == DecodeOutcome::valid) ++n_valid;
    else if (o == DecodeOutcome::invalid) ++n_invalid;
    else {
      ++n_tampered;
      if (probe == reference) ++excluded_tampered;
    }
    // odometer increment
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (static_cast<std::uint64_t>(probe.symbols[i]) + 1 < q) {
        probe.symbols[i] += 1;
        break;
      }
      probe.symbols[i] = 0;
    }
    if (i == n) break;
  }
  ConflictReport rep;
  rep.mode = "exact";
  rep.finalize(n_valid, n_invalid, n_tampered, excluded_tampered, 1);
  return rep;
}

/// Sampled mode: uniform probe strings (the full-resample output law).
inline ConflictReport verify_impossibility_sampled(const MessagelessCode& code,
                                                   const Codeword& reference,
                                                   std::size_t samples, std::uint64_t seed) {
  require(samples >= 1, "verify sampled: samples must be >= 1");
  const std::size_t n = code.length();
  const std::uint64_t q = code.alphabet_size();
  require(reference.n() == n && reference.q == q, "verify: reference shape mismatch");
  Rng master(seed);
  std::uint64_t n_valid = 0, n_invalid = 0, n_tampered = 0;
  std::uint64_t excluded_tampered = 0, excluded_total = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng = master.fork(s);
    const Codeword probe = uniform_codeword(n, q, rng);
    const bool unchanged = probe == reference;
    excluded_total += unchanged ? 1 : 0;
    const DecodeOutcome o = code.decode(probe);
    if (o == DecodeOutcome::valid) ++n_valid;
    else if (o == DecodeOutcome::invalid) ++n_invalid;
    else {
      ++n_tampered;
      if (unchanged) ++excluded_tampered;
    }
  }
  ConflictReport rep;
  rep.mode = "sampled";
  rep.finalize(n_valid, n_invalid, n_tampered, excluded_tampered, excluded_total);
  return rep;
}

// --- threshold sweep -------------------------------------------------------------

struct SweepPoint {
  std::size_t n = 0;
  std::uint64_t q = 0;
  double delta = 0.0;
  double alpha = 0.0;
  std::size_t budget = 0;     // floor(alpha * n)
  std::size_t trials = 0;
  double det_worst = 0.0;     // tampered-rate under exact-budget changes
  Interval det_worst_ci;
  double det_ind = 0.0;       // tampered-rate under calibrated independent resample
  Interval det_ind_ci;
  double soundness_rate = 0.0;  // invalid-rate on uniform strings
  Interval soundness_ci;
  std::uint64_t seed = 0;
};

/// For each alpha: tamper-detection rate against (a) exactly floor(alpha*n)
/// changed positions and (b) an independent resample calibrated so the
/// EXPECTED changed fraction is alpha, plus the uniform-input soundness rate.
inline std::vector<SweepPoint> sweep_threshold(const HammingCodeKey& key,
                                               const std::vector<double>& alphas,
                                               std::size_t trials, std::uint64_t seed) {
  require(trials >= 1, "sweep: trials must be >= 1");
  key.validate();
  const std::size_t n = key.n();
  const std::uint64_t q = key.q();
  const double qfrac = 1.0 - 1.0 / static_cast<double>(q);
  std::vector<SweepPoint> out;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const double alpha = alphas[a];
    require(alpha >= 0.0 && alpha <= 1.0, "sweep: alpha outside [0, 1]");
    SweepPoint pt;
    pt.n = n;
    pt.q = q;
    pt.delta = key.delta;
    pt.alpha = alpha;
    pt.budget = static_cast<std::size_t>(alpha * static_cast<double>(n));
    pt.trials = trials;
    pt.seed = mix64(seed ^ mix64(a + 1));
    Rng master(pt.seed);
    const double beta = std::min(1.0, alpha / qfrac);
    std::uint64_t worst_hits = 0, worst_kept = 0, ind_hits = 0, ind_kept = 0, sound_hits = 0;
    for (std::size_t tr = 0; tr < trials; ++tr) {
      Rng rng = master.fork(tr);
      // (a) exact-budget adversary
      if (pt.budget > 0) {
        const Codeword tampered = worst_case_flip(key.sk, pt.budget,
                                                  WorstCaseStrategy::random_positions, rng);
        ++worst_kept;
        worst_hits += hamming_dec(key, tampered) == DecodeOutcome::tampered ? 1 : 0;
      }
      // (b) calibrated independent resample (skip unchanged outputs)
      const Codeword resampled = independent_resample(key.sk, beta, rng);
      if (!(resampled == key.sk)) {
        ++ind_kept;
        ind_hits += hamming_dec(key, resampled) == DecodeOutcome::tampered ? 1 : 0;
      }
      // soundness probe
      const Codeword probe = uniform_codeword(n, q, rng);
      sound_hits += hamming_dec(key, probe) == DecodeOutcome::invalid ? 1 : 0;
    }
    pt.det_worst = worst_kept ? static_cast<double>(worst_hits) / static_cast<double>(worst_kept) : 0.0;
    pt.det_worst_ci = worst_kept ? wilson_interval(worst_hits, worst_kept) : Interval{0.0, 1.0};
    pt.det_ind = ind_kept ? static_cast<double>(ind_hits) / static_cast<double>(ind_kept) : 0.0;
    pt.det_ind_ci = ind_kept ? wilson_interval(ind_hits, ind_kept) : Interval{0.0, 1.0};
    pt.soundness_rate = static_cast<double>(sound_hits) / static_cast<double>(trials);
    pt.soundness_ci = wilson_interval(sound_hits, trials);
    out.push_back(pt);
  }
  return out;
}

// --- soundness Monte Carlo --------------------------------------------------------

struct SoundnessReport {
  std::size_t n = 0;
  std::uint64_t q = 0;
  double delta = 0.0;
  std::size_t trials = 0;
  double not_invalid_rate = 0.0;  // empirical soundness error on uniform inputs
  Interval ci;
  double bound = 0.0;             // exp(-delta^2 n / (2q))
  double exact_tail = 0.0;        // P[Bin(n, 1/q) >= n - floor(t)]
  std::uint64_t seed = 0;
};

inline SoundnessReport soundness_mc(const HammingCodeKey& key, std::size_t trials,
                                    std::uint64_t seed) {
  require(trials >= 1, "soundness_mc: trials must be >= 1");
  key.validate();
  SoundnessReport rep;
  rep.n = key.n();
  rep.q = key.q();
  rep.delta = key.delta;
  rep.trials = trials;
  rep.seed = seed;
  rep.bound = soundness_bound(rep.n, rep.q, rep.delta);
  const std::uint64_t tf = threshold_floor(rep.n, rep.q, rep.delta);
  // not-invalid <=> dist <= floor(t) <=> matches >= n - floor(t)
  rep.exact_tail = binomial_tail_ge(rep.n, 1.0 / static_cast<double>(rep.q), rep.n - tf);
  Rng master(seed);
  std::uint64_t hits = 0;
  for (std::size_t tr = 0; tr < trials; ++tr) {
    Rng rng = master.fork(tr);
    const Codeword probe = uniform_codeword(rep.n, rep.q, rng);
    hits += hamming_dec(key, probe) != DecodeOutcome::invalid ? 1 : 0;
  }
  rep.not_invalid_rate = static_cast<double>(hits) / static_cast<double>(trials);
  rep.ci = wilson_interval(hits, trials);
  return rep;
}

// --- CSV -------------------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "n,q,delta,alpha,budget,trials,det_worst,det_worst_lo,det_worst_hi,"
    "det_ind,det_ind_lo,det_ind_hi,soundness_rate,sound_lo,sound_hi,seed,cfg_hash";

inline std::string sweep_csv_row(const SweepPoint& p, std::uint64_t cfg_hash) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%zu,%llu,%.6f,%.6f,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%llu,%016llx",
                p.n, static_cast<unsigned long long>(p.q), p.delta, p.alpha, p.budget, p.trials,
                p.det_worst, p.det_worst_ci.lo, p.det_worst_ci.hi, p.det_ind, p.det_ind_ci.lo,
                p.det_ind_ci.hi, p.soundness_rate, p.soundness_ci.lo, p.soundness_ci.hi,
                static_cast<unsigned long long>(p.seed),
                static_cast<unsigned long long>(cfg_hash));
  return buf;
}

inline constexpr const char* kSoundnessCsvHeader =
    "n,q,delta,trials,not_invalid_rate,rate_lo,rate_hi,soundness_bound,exact_tail,seed,cfg_hash";

inline std::string soundness_csv_row(const SoundnessReport& r, std::uint64_t cfg_hash) {
  char buf[384];
  std::snprintf(buf, sizeof buf, "%zu,%llu,%.6f,%zu,%.6f,%.6f,%.6f,%.17g,%.17g,%llu,%016llx",
                r.n, static_cast<unsigned long long>(r.q), r.delta, r.trials, r.not_invalid_rate,
                r.ci.lo, r.ci.hi, r.bound, r.exact_tail,
                static_cast<unsigned long long>(r.seed),
                static_cast<unsigned long long>(cfg_hash));
  return buf;
}

inline constexpr const char* kVerifyCsvHeader =
    "mode,n,q,delta,samples,p_valid,p_invalid,p_tampered,conflict_margin,"
    "soundness_claim_rate,tamper_claim_rate,law_holds,seed,cfg_hash";

inline std::string verify_csv_row(const ConflictReport& r, std::size_t n, std::uint64_t q,
                                  double delta, std::uint64_t seed, std::uint64_t cfg_hash) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s,%zu,%llu,%.6f,%llu,%.8f,%.8f,%.8f,%.8f,%.8f,%.8f,%d,%llu,%016llx",
                r.mode.c_str(), n, static_cast<unsigned long long>(q), delta,
                static_cast<unsigned long long>(r.samples), r.p_valid, r.p_invalid, r.p_tampered,
                r.conflict_margin, r.soundness_claim_rate, r.tamper_claim_rate,
                r.law_holds ? 1 : 0, static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(cfg_hash));
  return buf;
}

}  // namespace tamperlock

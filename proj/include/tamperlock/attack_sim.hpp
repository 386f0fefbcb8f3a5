#pragma once

// Latent-channel attack simulation: named image-transformation attacks are
// modeled at the bit level by the independent flip rate they induce on a
// decoded latent, then pushed through BP denoising and watermark detection.
// Preset rates are calibration constants for a diffusion-model latent
// pipeline at 512 latent bits; the BP/detection cliff they exercise is the
// reproducible object, not the individual mid-range values.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tamperlock/ldpc.hpp"
#include "tamperlock/stats.hpp"

namespace tamperlock {

struct AttackScenario {
  std::string name;
  double pre_bp_flip_rate = 0.0;
  /// Post-denoising residual error the calibration run reported, when one
  /// was recorded; empty for attacks where denoising did not help.
  std::optional<double> expected_post_bp_error;
  std::string note;
};

inline const std::vector<AttackScenario>& attack_presets() {
  static const std::vector<AttackScenario> presets = {
      {"inversion_only", 0.10, 0.01,
       "re-encode + latent inversion, no edit; denoising clears the residue"},
      {"color_shift", 0.23, 0.01, "global color shift; denoising clears the residue"},
      {"hsv", 0.26, 0.01, "hue/saturation adjustment; denoising clears the residue"},
      {"jpeg15", 0.32, 0.10, "JPEG re-encode at quality 15"},
      {"webp", 0.34, 0.15, "WebP re-encode at low quality"},
      {"crop_resize", 0.4807, 0.4896,
       "crop then resize back; denoising makes it slightly worse, detection lost"},
      {"downscale_pad", 0.498, std::nullopt, "downscale and pad to size; detection lost"},
      {"crop_pad", 0.167, std::nullopt, "crop and pad without rescaling"},
      {"down_up", 0.121, std::nullopt, "downscale then upscale in place"},
  };
  return presets;
}

inline const AttackScenario* find_preset(const std::string& name) {
  for (const auto& p : attack_presets())
    if (p.name == name) return &p;
  return nullptr;
}

struct AttackReport {
  std::string scenario;
  double flip_rate = 0.0;
  std::size_t trials = 0;
  double detection_rate = 0.0;
  Interval detection_ci;
  double mean_pre_bp_error = 0.0;
  double mean_post_bp_error = 0.0;
  std::uint64_t seed = 0;
};

/// One scenario: per trial, encode -> flip at the scenario rate -> BP -> detect.
/// Deterministic in (key, scenario, trials, seed); trial t uses fork(seed, t).
inline AttackReport run_attack(const PrcKey& key, const std::string& scenario_name,
                               double flip_rate, std::size_t trials, std::uint64_t seed,
                               const BpParams& bp = {}) {
  require(trials >= 1, "run_attack: trials must be >= 1");
  key.validate();
  const Gf2Solver solver(key.h);
  Rng master(seed);
  std::size_t detected = 0;
  double pre_sum = 0.0, post_sum = 0.0;
  for (std::size_t tr = 0; tr < trials; ++tr) {
    Rng rng = master.fork(tr);
    const Bits original = prc_encode(key, solver, rng);
    const Bits attacked = bsc(original, flip_rate, rng);
    pre_sum += bit_error_fraction(attacked, original);
    const BpResult bp_res = bp_decode(key, attacked, bp);
    post_sum += bit_error_fraction(bp_res.corrected, original);
    detected += prc_detect(key, bp_res.corrected).watermarked ? 1 : 0;
  }
  AttackReport rep;
  rep.scenario = scenario_name;
  rep.flip_rate = flip_rate;
  rep.trials = trials;
  rep.detection_rate = static_cast<double>(detected) / static_cast<double>(trials);
  rep.detection_ci = wilson_interval(detected, trials);
  rep.mean_pre_bp_error = pre_sum / static_cast<double>(trials);
  rep.mean_post_bp_error = post_sum / static_cast<double>(trials);
  rep.seed = seed;
  return rep;
}

inline AttackReport run_scenario(const PrcKey& key, const AttackScenario& scenario,
                                 std::size_t trials, std::uint64_t seed,
                                 const BpParams& bp = {}) {
  return run_attack(key, scenario.name, scenario.pre_bp_flip_rate, trials, seed, bp);
}

/// Detection/error curve over a flip-rate grid (each point an independent
/// sub-seed, so the curve is insensitive to grid order or subsetting).
inline std::vector<AttackReport> threshold_scan(const PrcKey& key, const std::vector<double>& grid,
                                                std::size_t trials, std::uint64_t seed,
                                                const BpParams& bp = {}) {
  require(!grid.empty(), "threshold_scan: empty grid");
  std::vector<AttackReport> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0.0 && grid[i] <= 0.5, "threshold_scan: flip rate outside [0, 0.5]");
    out.push_back(run_attack(key, "scan", grid[i], trials, mix64(seed ^ mix64(i + 1)), bp));
  }
  return out;
}

// --- CSV ------------------------------------------------------------------------

inline constexpr const char* kAttackCsvHeader =
    "scenario,flip_rate,trials,detection_rate,det_lo,det_hi,pre_bp_err,post_bp_err,seed";

inline std::string attack_csv_row(const AttackReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.6f,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%llu",
                r.scenario.c_str(), r.flip_rate, r.trials, r.detection_rate,
                r.detection_ci.lo, r.detection_ci.hi, r.mean_pre_bp_error,
                r.mean_post_bp_error, static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace tamperlock

// Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each, exit 0
// only when every criterion passes (otherwise 2).  Tolerances are pinned here
// in code; each line prints the measured values the verdict came from.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tamperlock/tamperlock.hpp"

namespace {

using namespace tamperlock;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// --- criterion 1: label-partition conflict, exact enumeration ---------------------

Verdict criterion_conflict_law() {
  Rng rng(101);
  const HammingCode code(hamming_kgen(SecurityParams{128, 8, 2, 0.5}, rng));
  const ConflictReport rep = verify_impossibility_exact(code, code.key().sk);
  const double max_err = std::max(1.0 - rep.p_invalid, 1.0 - rep.p_tampered);
  const bool partition = rep.p_invalid + rep.p_tampered <= 1.0;
  const bool law = max_err >= 0.5;
  return {partition && law,
          fmt("p_invalid=%.6f p_tampered=%.6f margin=%.6f max(sound_err,miss)=%.6f",
              rep.p_invalid, rep.p_tampered, rep.conflict_margin, max_err)};
}

// --- criterion 2: full resample output is uniform and input-independent ------------

Verdict criterion_resample_uniformity() {
  const std::size_t trials = 1000000;
  auto histogram = [&](const Codeword& input, std::uint64_t seed) {
    std::vector<std::uint64_t> counts(4, 0);
    Rng master(seed);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng = master.fork(t);
      const Codeword out = full_resample(input, rng);
      counts[out.symbols[0] * 2 + out.symbols[1]] += 1;
    }
    return counts;
  };
  Codeword a;
  a.q = 2;
  a.symbols = {0, 0};
  Codeword b;
  b.q = 2;
  b.symbols = {1, 1};
  const auto ca = histogram(a, 201);
  const auto cb = histogram(b, 202);
  const double tv_a = tv_from_uniform(ca);
  const double tv_b = tv_from_uniform(cb);
  const double p_homog = chisq_homogeneity(ca, cb).pvalue;
  const bool pass = tv_a < 0.01 && tv_b < 0.01 && p_homog > 0.001;
  return {pass, fmt("TV(a)=%.5f TV(b)=%.5f two-sample chi-square p=%.4f", tv_a, tv_b, p_homog)};
}

// --- criterion 3: deterministic detection inside the budget, soundness outside -----

Verdict criterion_achievability() {
  Rng rng(301);
  const HammingCodeKey key = hamming_kgen(SecurityParams{128, 64, 4096, 0.5}, rng);
  const std::uint64_t tf = threshold_floor(64, 4096, 0.5);  // 31

  std::uint64_t tamper_misses = 0;
  Rng adv_master(302);
  for (std::uint64_t budget = 1; budget <= tf; ++budget) {
    Rng budget_rng = adv_master.fork(budget);
    for (std::size_t t = 0; t < 1000; ++t) {
      Rng trial = budget_rng.fork(t);
      const Codeword tampered =
          worst_case_flip(key.sk, budget, WorstCaseStrategy::random_positions, trial);
      if (hamming_dec(key, tampered) != DecodeOutcome::tampered) ++tamper_misses;
    }
  }

  const std::size_t sound_trials = 10000;
  std::uint64_t not_invalid = 0;
  Rng sound_master(303);
  for (std::size_t t = 0; t < sound_trials; ++t) {
    Rng trial = sound_master.fork(t);
    if (hamming_dec(key, uniform_codeword(64, 4096, trial)) != DecodeOutcome::invalid)
      ++not_invalid;
  }
  const double invalid_rate = 1.0 - static_cast<double>(not_invalid) / sound_trials;
  const double exact_tail = binomial_tail_ge(64, 1.0 / 4096.0, 64 - tf);
  // consistency with the exact tail: the observed count may not exceed the
  // tail's 5-sigma envelope (which is zero hits at this tail)
  const double envelope =
      exact_tail * sound_trials + 5.0 * std::sqrt(exact_tail * sound_trials) + 1e-9;
  const bool pass = tamper_misses == 0 && invalid_rate >= 0.999 &&
                    static_cast<double>(not_invalid) <= envelope;
  return {pass, fmt("tamper_misses=%llu/31000 invalid_rate=%.4f exact_tail=%.3g",
                    static_cast<unsigned long long>(tamper_misses), invalid_rate, exact_tail)};
}

// --- criterion 4: concentration bounds, symbolic and empirical ---------------------

Verdict criterion_bounds() {
  const double sb = soundness_bound(100, 2, 0.2);
  const double ib = impossibility_bound(300, 2, 0.2);
  const bool symbolic = std::fabs(sb - std::exp(-1.0)) <= 1e-12 * std::exp(-1.0) &&
                        std::fabs(ib - std::exp(-2.0)) <= 1e-12 * std::exp(-2.0);

  struct GridPoint {
    std::size_t n;
    std::uint64_t q;
    double delta;
  };
  const std::vector<GridPoint> grid = {
      {16, 2, 0.5},    {16, 2, 0.25},   {32, 4, 0.5},   {64, 2, 0.125},
      {64, 16, 0.5},   {64, 4096, 0.5}, {128, 2, 0.5},  {128, 8, 0.25},
      {256, 16, 0.125}, {256, 256, 0.5}, {512, 2, 0.25}, {512, 64, 0.5}};
  const std::size_t trials = 10000;
  std::size_t violations = 0;
  std::string worst;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [n, q, delta] = grid[i];
    Rng rng(400 + i);
    const HammingCodeKey key = hamming_kgen(SecurityParams{128, n, q, delta}, rng);

    std::uint64_t not_invalid = 0;
    std::uint64_t big_change = 0;
    // distance at or beyond (1+delta) times the expected change means the
    // resample moved more than the impossibility bound allows for
    const double expected_change = static_cast<double>(n) * (1.0 - 1.0 / static_cast<double>(q));
    const auto k = static_cast<std::uint64_t>((1.0 + delta) * expected_change) + 1;
    Rng master(500 + i);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng trial = master.fork(t);
      if (hamming_dec(key, uniform_codeword(n, q, trial)) != DecodeOutcome::invalid)
        ++not_invalid;
      const Codeword resampled = full_resample(key.sk, trial);
      std::uint64_t dist = 0;
      for (std::size_t j = 0; j < n; ++j)
        dist += resampled.symbols[j] != key.sk.symbols[j] ? 1 : 0;
      if (dist >= k) ++big_change;
    }
    const double sound_rate = static_cast<double>(not_invalid) / trials;
    const double change_rate = static_cast<double>(big_change) / trials;
    const double sound_cap = soundness_bound(n, q, delta);
    const double change_cap = impossibility_bound(n, q, delta);
    if (sound_rate > sound_cap || change_rate > change_cap) {
      ++violations;
      worst = fmt(" first violation at (n=%zu q=%llu delta=%g): sound %.4f vs %.4f, "
                  "change %.4f vs %.4f",
                  n, static_cast<unsigned long long>(q), delta, sound_rate, sound_cap,
                  change_rate, change_cap);
    }
  }
  return {symbolic && violations == 0,
          fmt("sb(100,2,0.2)=%.12f ib(300,2,0.2)=%.12f grid_violations=%zu/12", sb, ib,
              violations) +
              worst};
}

// --- criterion 5: PRF mask preserves labels; counter never repeats -----------------

Verdict criterion_prf_wrap() {
  Rng rng(501);
  const HammingCodeKey hk = hamming_kgen(SecurityParams{128, 64, 2, 0.01}, rng);
  const PrfKey prf = PrfKey::generate(256, rng);
  const std::size_t trials = 10000;

  std::uint64_t inner_hits = 0;
  Rng inner_master(502);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng trial = inner_master.fork(t);
    if (hamming_dec(hk, uniform_codeword(64, 2, trial)) != DecodeOutcome::invalid) ++inner_hits;
  }

  const fs::path dir =
      fs::temp_directory_path() / ("tamperlock-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string counter_path = (dir / "counter").string();

  std::uint64_t wrapped_hits = 0;
  {
    CounterStore counter(counter_path);
    PrfWrappedCode wrapped(std::make_shared<HammingCode>(hk), prf, counter);
    Rng wrap_master(503);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng trial = wrap_master.fork(t);
      if (wrapped.decode_at(7, uniform_codeword(64, 2, trial)) != DecodeOutcome::invalid)
        ++wrapped_hits;
    }
  }
  const double r_in = static_cast<double>(inner_hits) / trials;
  const double r_wr = static_cast<double>(wrapped_hits) / trials;
  const double pooled = 0.5 * (r_in + r_wr);
  const double sigma = std::sqrt(std::max(pooled * (1.0 - pooled) * 2.0 / trials, 1e-12));
  const bool rates_agree = std::fabs(r_in - r_wr) <= 3.0 * sigma;

  std::size_t mask_failures = 0;
  Rng mask_rng(504);
  const std::uint64_t qs[] = {2, 3, 16, 4096, 1ULL << 32};
  for (std::size_t c = 0; c < 1000; ++c) {
    const std::uint64_t q = qs[mask_rng.uniform_below(5)];
    const std::size_t n = 1 + static_cast<std::size_t>(mask_rng.uniform_below(64));
    const PrfKey k = PrfKey::generate(128 + 8 * mask_rng.uniform_below(32), mask_rng);
    const std::uint64_t pi = mask_rng.next_u64();
    const Codeword x = uniform_codeword(n, q, mask_rng);
    if (!(unmask(mask(x, k, pi), k, pi) == x)) ++mask_failures;
  }

  std::set<std::uint64_t> issued;
  bool monotone = true;
  std::uint64_t prev = 0;
  for (int restart = 0; restart < 100; ++restart) {
    CounterStore counter(counter_path);  // fresh handle = simulated process restart
    const std::uint64_t pi = counter.issue();
    if (restart > 0 && pi <= prev) monotone = false;
    issued.insert(pi);
    prev = pi;
  }
  const bool counter_ok = issued.size() == 100 && monotone;

  const bool pass = rates_agree && mask_failures == 0 && counter_ok;
  return {pass, fmt("not_invalid inner=%.4f wrapped=%.4f (3sigma=%.4f) mask_failures=%zu "
                    "distinct_counters=%zu/100",
                    r_in, r_wr, 3.0 * sigma, mask_failures, issued.size())};
}

// --- criterion 6: belief-propagation detection cliff -------------------------------

Verdict criterion_bp_cliff() {
  Rng rng(601);
  ParityMatrix h = gen_parity(512, 128, 6, rng);
  const PrfKey kappa = PrfKey::generate(256, rng);
  const PrcKey key = make_prc_key(std::move(h), kappa, 4.0);

  const AttackReport low = run_attack(key, "accept", 0.10, 200, 602);
  const AttackReport high = run_attack(key, "accept", 0.4807, 200, 603);

  const bool detect_low = low.detection_rate >= 0.95;
  const bool detect_high = high.detection_rate <= 0.05;
  const bool post_window =
      high.mean_post_bp_error >= 0.45 && high.mean_post_bp_error <= 0.55;
  const bool post_not_better = high.mean_post_bp_error >= high.mean_pre_bp_error - 0.01;
  const bool pass = detect_low && detect_high && post_window && post_not_better;
  return {pass,
          fmt("det@0.10=%.3f (need >=0.95) det@0.4807=%.3f (need <=0.05) "
              "post@0.4807=%.4f pre@0.4807=%.4f",
              low.detection_rate, high.detection_rate, high.mean_post_bp_error,
              high.mean_pre_bp_error)};
}

// --- criterion 7: watermark-to-code reduction transfers soundness ------------------

Verdict criterion_reduction() {
  Rng rng(701);
  const PrfKey kappa = PrfKey::generate(256, rng);
  const auto scheme = toy_prc_watermarked_model(512, 128, 6, kappa, rng);
  const auto derived = code_from_watermark(scheme, "fixed prompt");

  const std::size_t sound_trials = 10000;
  std::uint64_t invalid = 0;
  Rng sound_master(702);
  for (std::size_t t = 0; t < sound_trials; ++t) {
    Rng trial = sound_master.fork(t);
    if (derived->decode(uniform_codeword(512, 2, trial)) == DecodeOutcome::invalid) ++invalid;
  }
  const double invalid_rate = static_cast<double>(invalid) / sound_trials;

  std::uint64_t tampered = 0;
  Rng clean_master(703);
  for (std::size_t t = 0; t < 300; ++t) {
    Rng trial = clean_master.fork(t);
    const Codeword out = scheme->generate("fixed prompt", trial);
    if (derived->decode(out) == DecodeOutcome::tampered) ++tampered;
  }

  // round trip on an enumerable instance: scheme -> code -> scheme
  Rng small_rng(704);
  const PrfKey kappa_small = PrfKey::generate(256, small_rng);
  const auto small = toy_prc_watermarked_model(12, 3, 3, kappa_small, small_rng, 1.7);
  const auto small_code = code_from_watermark(small, "p");
  const auto round_trip =
      watermark_from_code(code_from_watermark(small, "p"));
  std::size_t mismatches = 0;
  std::size_t valid_seen = 0;
  Codeword probe;
  probe.q = 2;
  probe.symbols.assign(12, 0);
  for (std::uint64_t v = 0; v < (1ULL << 12); ++v) {
    for (std::size_t j = 0; j < 12; ++j) probe.symbols[j] = (v >> j) & 1;
    if (small->detect("p", probe) != round_trip->detect("p", probe)) ++mismatches;
    if (small_code->decode(probe) == DecodeOutcome::valid) ++valid_seen;
  }

  const bool pass = invalid_rate >= 0.99 && tampered == 300 && mismatches == 0 &&
                    valid_seen == 0;
  return {pass, fmt("uniform_invalid=%.4f clean_tampered=%llu/300 roundtrip_mismatches=%zu "
                    "derived_valid_outputs=%zu/4096",
                    invalid_rate, static_cast<unsigned long long>(tampered), mismatches,
                    valid_seen)};
}

// --- criterion 8: soundness + robustness errors sum to at least 0.9 ----------------

Verdict criterion_error_sum() {
  Rng rng(801);
  const PrfKey kappa = PrfKey::generate(256, rng);
  const auto scheme = toy_prc_watermarked_model(512, 128, 6, kappa, rng);

  const std::size_t trials = 300;
  std::uint64_t false_hits = 0;
  std::uint64_t misses = 0;
  Rng master(802);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng trial = master.fork(t);
    if (scheme->detect("p", uniform_codeword(512, 2, trial))) ++false_hits;
    const Codeword marked = scheme->generate("p", trial);
    if (!scheme->detect("p", full_resample(marked, trial))) ++misses;
  }
  const double eps1 = static_cast<double>(false_hits) / trials;
  const double eps2 = static_cast<double>(misses) / trials;
  return {eps1 + eps2 >= 0.9,
          fmt("eps1(false positive)=%.4f eps2(resample miss)=%.4f sum=%.4f", eps1, eps2,
              eps1 + eps2)};
}

// --- criterion 9: CLI reruns are byte-identical -------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Verdict criterion_cli_reproducibility() {
  const fs::path dir = fs::temp_directory_path() /
                       ("tamperlock-acceptance-cli-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::string> cmds = {
      "verify-impossibility --q 2 --exact",
      "sweep --trials 30 --alphas 0.1,0.484375,0.75",
      "soundness --trials 500",
      "bp-curve --trials 10 --flips 0.0,0.10,0.4807",
      "attack jpeg15 --trials 10",
  };
  std::size_t mismatched = 0;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const fs::path out1 = dir / (std::to_string(i) + "-a.csv");
    const fs::path out2 = dir / (std::to_string(i) + "-b.csv");
    for (const fs::path& out : {out1, out2}) {
      const std::string cmd = std::string(TAMPERLOCK_CLI_PATH) + " " + cmds[i] + " --out " +
                              out.string() + " 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) ++failed;
    }
    const std::string a = slurp(out1);
    if (a.empty() || a != slurp(out2)) ++mismatched;
  }
  return {mismatched == 0 && failed == 0,
          fmt("subcommands=%zu rerun_mismatches=%zu nonzero_exits=%zu", cmds.size(),
              mismatched, failed)};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Verdict (*fn)();
    double budget_seconds;
  };
  const Entry entries[] = {
      {"impossibility conflict law (exact enumeration)", criterion_conflict_law, 1.0},
      {"full-resample output uniformity and input independence",
       criterion_resample_uniformity, 10.0},
      {"deterministic tamper detection inside the budget + soundness",
       criterion_achievability, 30.0},
      {"concentration bounds: symbolic identities and empirical ceilings",
       criterion_bounds, 120.0},
      {"PRF mask preserves label rates; counter survives restarts", criterion_prf_wrap,
       30.0},
      {"belief-propagation detection cliff at the noise threshold", criterion_bp_cliff,
       180.0},
      {"watermark-to-code reduction transfers soundness and labels",
       criterion_reduction, 60.0},
      {"soundness + full-resample robustness errors sum to >= 0.9",
       criterion_error_sum, 30.0},
      {"CLI subcommands rerun byte-identically", criterion_cli_reproducibility, 600.0},
  };

  int failures = 0;
  int id = 0;
  for (const Entry& entry : entries) {
    ++id;
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
      verdict = entry.fn();
    } catch (const std::exception& e) {
      verdict = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds < entry.budget_seconds;
    const bool pass = verdict.pass && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s — %s (%.2fs, budget %.0fs)\n", pass ? "PASS" : "FAIL",
                id, entry.name, verdict.detail.c_str(), seconds, entry.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 2;
}

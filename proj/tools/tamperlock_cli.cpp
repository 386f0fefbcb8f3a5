// Experiment front end: threshold sweeps, small-instance conflict enumeration,
// soundness Monte Carlo, belief-propagation failure curves, attack presets,
// key generation, and a masked-counter walkthrough.  Every CSV row embeds the
// master seed and a hash of the effective configuration, and re-running with
// the same configuration reproduces the output byte for byte.
//
// Exit codes: 0 success, 2 assertion/check failure, 3 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "tamperlock/tamperlock.hpp"

namespace {

using namespace tamperlock;

/// Bad flags, bad config lines, unknown scenarios: exit 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A result check failed (data is wrong, not the invocation): exit 2.
struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- small parsing helpers --------------------------------------------------------

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t to_u64(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 10);
    if (used != text.size() || text.empty() || text[0] == '-')
      throw std::invalid_argument("trailing junk");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a non-negative integer, got '" + text + "'");
  }
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || text.empty()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a number, got '" + text + "'");
  }
}

bool to_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw UsageError(what + ": expected a boolean, got '" + text + "'");
}

std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string cur;
  std::stringstream ss(text);
  while (std::getline(ss, cur, ',')) {
    const std::string item = trim(cur);
    if (item.empty()) throw UsageError(what + ": empty grid entry in '" + text + "'");
    out.push_back(to_double(item, what));
  }
  if (out.empty()) throw UsageError(what + ": empty grid");
  return out;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- key=value config files ---------------------------------------------------------
//
// Precedence: command-line flags override config-file values override defaults.
// Keys are the long option names without the leading dashes.  Unknown keys are
// rejected so typos cannot silently fall back to defaults.

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw UsageError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw UsageError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

/// Applies config values to options the command line left untouched and
/// rejects keys that name no option of the subcommand.
class ConfigApplier {
 public:
  ConfigApplier(const CLI::App& sub, const std::string& config_path) : sub_(sub) {
    if (!config_path.empty()) kv_ = load_config(config_path);
  }

  // std::size_t and std::uint64_t are the same type on this platform, so a
  // single unsigned overload covers both.
  void apply(const std::string& key, std::uint64_t& var) {
    if (const std::string* v = lookup(key)) var = to_u64(*v, "config key " + key);
  }
  void apply(const std::string& key, double& var) {
    if (const std::string* v = lookup(key)) var = to_double(*v, "config key " + key);
  }
  void apply(const std::string& key, bool& var) {
    if (const std::string* v = lookup(key)) var = to_bool(*v, "config key " + key);
  }
  void apply(const std::string& key, std::string& var) {
    if (const std::string* v = lookup(key)) var = *v;
  }

  void finish() const {
    for (const auto& kv : kv_)
      if (!consumed_.count(kv.first)) throw UsageError("unknown config key '" + kv.first + "'");
  }

 private:
  bool set_on_cmdline(const std::string& option_name) const {
    const CLI::Option* opt = sub_.get_option_no_throw(option_name);
    return opt != nullptr && opt->count() > 0;
  }

  // nullptr when the option was given on the command line (flags win, whether
  // spelled --key or as the matching positional) or the config file has no
  // entry for the key.
  const std::string* lookup(const std::string& key) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return nullptr;
    consumed_.insert(key);
    if (set_on_cmdline("--" + key) || set_on_cmdline(key)) return nullptr;
    return &it->second;
  }

  const CLI::App& sub_;
  std::map<std::string, std::string> kv_;
  std::set<std::string> consumed_;
};

// --- canonical configuration string -------------------------------------------------
//
// The hash embedded in every CSV row is FNV-1a over this string; it covers all
// parameters that influence the emitted data (the output path never does).

class Canon {
 public:
  explicit Canon(const std::string& cmd) { add("cmd", cmd); }
  void add(const std::string& k, const std::string& v) { s_ += k + "=" + v + ";"; }
  void add(const std::string& k, std::uint64_t v) { add(k, std::to_string(v)); }
  void add(const std::string& k, double v) { add(k, fmt_double(v)); }
  void add(const std::string& k, bool v) { add(k, std::string(v ? "1" : "0")); }
  void add(const std::string& k, const std::vector<double>& grid) {
    std::string joined;
    for (std::size_t i = 0; i < grid.size(); ++i)
      joined += (i ? "," : "") + fmt_double(grid[i]);
    add(k, joined);
  }
  std::uint64_t hash() const { return fnv1a64(s_); }
  const std::string& text() const { return s_; }

 private:
  std::string s_;
};

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw CheckError("cannot open output file: " + out_path);
  out << content;
  if (!out.good()) throw CheckError("failed writing output file: " + out_path);
}

// --- deterministic derivation --------------------------------------------------------
//
// Stream 0 of the master seed generates key material, stream 1 drives the
// experiment trials, streams 2+ serve auxiliary randomness.  This keeps the
// key independent of the trial count and grid.

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t k) {
  return mix64(master ^ mix64(k));
}

std::uint64_t default_q(std::uint64_t q, std::size_t n) {
  if (q != 0) return q;
  return static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
}

HammingCodeKey make_hamming_key(std::uint64_t lambda, std::size_t n, std::uint64_t q,
                                double delta, std::uint64_t master_seed) {
  Rng rng(stream_seed(master_seed, 0));
  return hamming_kgen(SecurityParams{lambda, n, q, delta}, rng);
}

PrcKey make_prc(std::size_t n, std::size_t rows, std::size_t row_weight, double threshold,
                std::uint64_t master_seed) {
  Rng rng(stream_seed(master_seed, 0));
  ParityMatrix h = gen_parity(n, rows, row_weight, rng);
  const PrfKey kappa = PrfKey::generate(256, rng);
  return make_prc_key(std::move(h), kappa, threshold);
}

// --- subcommands ---------------------------------------------------------------------

struct CommonCodeOpts {
  std::size_t n = 64;
  std::uint64_t q = 0;  // 0 means "use n^2"
  double delta = 0.5;
  std::uint64_t lambda = 128;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;

  void attach(CLI::App& sub, std::size_t default_n) {
    n = default_n;
    sub.add_option("--n", n, "codeword length");
    sub.add_option("--q", q, "alphabet size (0 = n^2, the documented default)");
    sub.add_option("--delta", delta, "threshold slack in (0,1)");
    sub.add_option("--lambda", lambda, "security parameter recorded in the key");
    sub.add_option("--seed", seed, "master seed (key = stream 0, trials = stream 1)");
    sub.add_option("--out", out, "output path (default: stdout)");
    sub.add_option("--config", config, "key=value config file (flags take precedence)");
  }

  void apply_config(ConfigApplier& cfg) {
    cfg.apply("n", n);
    cfg.apply("q", q);
    cfg.apply("delta", delta);
    cfg.apply("lambda", lambda);
    cfg.apply("seed", seed);
    cfg.apply("out", out);
  }

  void fill_canon(Canon& canon) const {
    canon.add("n", n);
    canon.add("q", q);
    canon.add("delta", delta);
    canon.add("lambda", lambda);
    canon.add("seed", seed);
  }
};

struct LatentOpts {
  std::size_t n = 512;
  std::size_t rows = 128;
  std::size_t row_weight = 6;
  std::size_t max_iters = 100;
  double prior = 0.15;
  double threshold = 4.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;

  void attach(CLI::App& sub) {
    sub.add_option("--n", n, "code length (bits)");
    sub.add_option("--rows", rows, "parity-check rows");
    sub.add_option("--row-weight", row_weight, "ones per parity row");
    sub.add_option("--max-iters", max_iters, "belief-propagation iteration cap");
    sub.add_option("--prior", prior, "assumed channel flip rate for BP");
    sub.add_option("--threshold", threshold, "detection z-score threshold");
    sub.add_option("--seed", seed, "master seed (key = stream 0, trials = stream 1)");
    sub.add_option("--out", out, "output path (default: stdout)");
    sub.add_option("--config", config, "key=value config file (flags take precedence)");
  }

  void apply_config(ConfigApplier& cfg) {
    cfg.apply("n", n);
    cfg.apply("rows", rows);
    cfg.apply("row-weight", row_weight);
    cfg.apply("max-iters", max_iters);
    cfg.apply("prior", prior);
    cfg.apply("threshold", threshold);
    cfg.apply("seed", seed);
    cfg.apply("out", out);
  }

  void fill_canon(Canon& canon) const {
    canon.add("n", n);
    canon.add("rows", rows);
    canon.add("row-weight", row_weight);
    canon.add("max-iters", max_iters);
    canon.add("prior", prior);
    canon.add("threshold", threshold);
    canon.add("seed", seed);
  }

  PrcKey key() const { return make_prc(n, rows, row_weight, threshold, seed); }

  BpParams bp() const {
    BpParams p;
    p.max_iters = max_iters;
    p.prior_flip_rate = prior;
    return p;
  }
};

int cmd_verify_impossibility(CLI::App& sub, CommonCodeOpts& code_opts, std::size_t& trials,
                             bool& exact) {
  ConfigApplier cfg(sub, code_opts.config);
  code_opts.apply_config(cfg);
  cfg.apply("trials", trials);
  cfg.apply("exact", exact);
  cfg.finish();
  const std::uint64_t q = default_q(code_opts.q, code_opts.n);

  Canon canon("verify-impossibility");
  code_opts.fill_canon(canon);
  canon.add("trials", trials);
  canon.add("exact", exact);

  const HammingCode code(
      make_hamming_key(code_opts.lambda, code_opts.n, q, code_opts.delta, code_opts.seed));
  const Codeword& reference = code.key().sk;
  const ConflictReport rep =
      exact ? verify_impossibility_exact(code, reference)
            : verify_impossibility_sampled(code, reference, trials,
                                           stream_seed(code_opts.seed, 1));

  std::string csv = std::string(kVerifyCsvHeader) + "\n" +
                    verify_csv_row(rep, code_opts.n, q, code_opts.delta, code_opts.seed,
                                   canon.hash()) +
                    "\n";
  emit(code_opts.out, csv);

  std::fprintf(stderr,
               "%s over %llu strings: p_valid=%.6f p_invalid=%.6f p_tampered=%.6f\n",
               rep.mode.c_str(), static_cast<unsigned long long>(rep.samples), rep.p_valid,
               rep.p_invalid, rep.p_tampered);
  std::fprintf(stderr,
               "conflict margin (p_invalid + p_tampered - 1) = %.8f  -> max(soundness "
               "error, full-resample miss) = %.6f (>= 0.5 always)\n",
               rep.conflict_margin, std::max(1.0 - rep.p_invalid, 1.0 - rep.p_tampered));

  if (rep.conflict_margin > 1e-12)
    throw CheckError("label partition violated: p_invalid + p_tampered > 1");
  if (!rep.law_holds)
    throw CheckError("conflict law violated: both error claims below 1/2");
  return 0;
}

int cmd_sweep(CLI::App& sub, CommonCodeOpts& code_opts, std::size_t& trials,
              std::string& alphas_text) {
  ConfigApplier cfg(sub, code_opts.config);
  code_opts.apply_config(cfg);
  cfg.apply("trials", trials);
  cfg.apply("alphas", alphas_text);
  cfg.finish();
  const std::uint64_t q = default_q(code_opts.q, code_opts.n);
  const std::vector<double> alphas = parse_grid(alphas_text, "--alphas");

  Canon canon("sweep");
  code_opts.fill_canon(canon);
  canon.add("trials", trials);
  canon.add("alphas", alphas);

  const HammingCodeKey key =
      make_hamming_key(code_opts.lambda, code_opts.n, q, code_opts.delta, code_opts.seed);
  const auto points = sweep_threshold(key, alphas, trials, stream_seed(code_opts.seed, 1));

  std::string csv = std::string(kSweepCsvHeader) + "\n";
  for (const auto& pt : points) csv += sweep_csv_row(pt, canon.hash()) + "\n";
  emit(code_opts.out, csv);

  std::fprintf(stderr, "swept %zu alpha points at %zu trials each (n=%zu, q=%llu, floor(t)=%llu)\n",
               points.size(), trials, code_opts.n, static_cast<unsigned long long>(q),
               static_cast<unsigned long long>(
                   threshold_floor(code_opts.n, q, code_opts.delta)));
  return 0;
}

int cmd_soundness(CLI::App& sub, CommonCodeOpts& code_opts, std::size_t& trials) {
  ConfigApplier cfg(sub, code_opts.config);
  code_opts.apply_config(cfg);
  cfg.apply("trials", trials);
  cfg.finish();
  if (trials < 100) throw UsageError("--trials: soundness runs need at least 100 trials");
  const std::uint64_t q = default_q(code_opts.q, code_opts.n);

  Canon canon("soundness");
  code_opts.fill_canon(canon);
  canon.add("trials", trials);

  const HammingCodeKey key =
      make_hamming_key(code_opts.lambda, code_opts.n, q, code_opts.delta, code_opts.seed);
  const SoundnessReport rep = soundness_mc(key, trials, stream_seed(code_opts.seed, 1));

  emit(code_opts.out,
       std::string(kSoundnessCsvHeader) + "\n" + soundness_csv_row(rep, canon.hash()) + "\n");

  std::fprintf(stderr,
               "uniform-input not-invalid rate %.6f [%.6f, %.6f] vs bound %.3g (exact tail %.3g)\n",
               rep.not_invalid_rate, rep.ci.lo, rep.ci.hi, rep.bound, rep.exact_tail);
  return 0;
}

int cmd_bp_curve(CLI::App& sub, LatentOpts& latent, std::size_t& trials,
                 std::string& flips_text) {
  ConfigApplier cfg(sub, latent.config);
  latent.apply_config(cfg);
  cfg.apply("trials", trials);
  cfg.apply("flips", flips_text);
  cfg.finish();
  const std::vector<double> flips = parse_grid(flips_text, "--flips");

  Canon canon("bp-curve");
  latent.fill_canon(canon);
  canon.add("trials", trials);
  canon.add("flips", flips);

  const PrcKey key = latent.key();
  const auto reports =
      threshold_scan(key, flips, trials, stream_seed(latent.seed, 1), latent.bp());

  std::string csv = std::string(kAttackCsvHeader) + ",cfg_hash\n";
  for (const auto& r : reports) csv += attack_csv_row(r) + "," + hex16(canon.hash()) + "\n";
  emit(latent.out, csv);

  std::fprintf(stderr, "scanned %zu flip rates at %zu trials each (n=%zu, rows=%zu, w=%zu)\n",
               reports.size(), trials, latent.n, latent.rows, latent.row_weight);
  return 0;
}

int cmd_attack(CLI::App& sub, LatentOpts& latent, std::string& scenario, std::size_t& trials) {
  ConfigApplier cfg(sub, latent.config);
  latent.apply_config(cfg);
  cfg.apply("trials", trials);
  cfg.apply("scenario", scenario);
  cfg.finish();

  const AttackScenario* preset = find_preset(scenario);
  if (preset == nullptr) {
    std::fprintf(stderr, "unknown scenario '%s'; available presets:\n", scenario.c_str());
    for (const auto& p : attack_presets())
      std::fprintf(stderr, "  %-18s flip=%.4f  %s\n", p.name.c_str(), p.pre_bp_flip_rate,
                   p.note.c_str());
    throw UsageError("scenario must name a preset");
  }

  Canon canon("attack");
  latent.fill_canon(canon);
  canon.add("trials", trials);
  canon.add("scenario", scenario);

  const PrcKey key = latent.key();
  const AttackReport rep =
      run_scenario(key, *preset, trials, stream_seed(latent.seed, 1), latent.bp());

  emit(latent.out, std::string(kAttackCsvHeader) + ",cfg_hash\n" + attack_csv_row(rep) + "," +
                       hex16(canon.hash()) + "\n");

  std::fprintf(stderr,
               "%s: detection %.4f [%.4f, %.4f], pre-BP error %.4f, post-BP error %.4f\n",
               rep.scenario.c_str(), rep.detection_rate, rep.detection_ci.lo,
               rep.detection_ci.hi, rep.mean_pre_bp_error, rep.mean_post_bp_error);
  if (preset->expected_post_bp_error)
    std::fprintf(stderr, "preset's nominal post-BP error for comparison: %.4f\n",
                 *preset->expected_post_bp_error);
  return 0;
}

int cmd_keygen(CLI::App& sub, CommonCodeOpts& code_opts) {
  ConfigApplier cfg(sub, code_opts.config);
  code_opts.apply_config(cfg);
  cfg.finish();
  if (code_opts.out.empty()) throw UsageError("keygen requires --out (key file path)");
  const std::uint64_t q = default_q(code_opts.q, code_opts.n);

  const HammingCodeKey key =
      make_hamming_key(code_opts.lambda, code_opts.n, q, code_opts.delta, code_opts.seed);
  write_key_file(key, code_opts.out);
  std::fprintf(stderr, "wrote key file %s (n=%zu, q=%llu, delta=%g, seed=%llu)\n",
               code_opts.out.c_str(), code_opts.n, static_cast<unsigned long long>(q),
               code_opts.delta, static_cast<unsigned long long>(code_opts.seed));
  return 0;
}

int cmd_mask_demo(CLI::App& sub, CommonCodeOpts& code_opts, std::string& key_file,
                  std::string& state_dir) {
  ConfigApplier cfg(sub, code_opts.config);
  code_opts.apply_config(cfg);
  cfg.apply("key-file", key_file);
  cfg.apply("state-dir", state_dir);
  cfg.finish();
  const std::uint64_t q_opt = default_q(code_opts.q, code_opts.n);

  const HammingCodeKey hk =
      key_file.empty()
          ? make_hamming_key(code_opts.lambda, code_opts.n, q_opt, code_opts.delta,
                             code_opts.seed)
          : read_key_file(key_file);
  const std::uint64_t q = hk.q();
  const PrfKey prf = [&] {
    Rng rng(stream_seed(code_opts.seed, 2));
    return PrfKey::generate(256, rng);
  }();

  std::filesystem::create_directories(state_dir);
  const std::string counter_path = (std::filesystem::path(state_dir) / "counter").string();
  CounterStore counter(counter_path);
  PrfWrappedCode code(std::make_shared<HammingCode>(hk), prf, counter);

  Rng rng(stream_seed(code_opts.seed, 3));
  const MaskedCodeword word = code.encode(rng);
  const std::string wire = word.wire_form();

  std::printf("counter state file : %s\n", counter_path.c_str());
  std::printf("issued counter     : %llu\n", static_cast<unsigned long long>(word.pi));
  std::printf("wire form          : %s\n", wire.c_str());

  const MaskedCodeword parsed = MaskedCodeword::parse(wire, q);
  const DecodeOutcome clean = code.decode(parsed);
  std::printf("decode(wire)       : %s\n", to_string(clean));
  if (clean != DecodeOutcome::valid)
    throw CheckError("round trip through the wire form did not decode as valid");

  MaskedCodeword edited = word;
  edited.body.symbols[0] = (edited.body.symbols[0] + 1) % q;
  std::printf("one-symbol edit    : %s\n", to_string(code.decode(edited)));

  Rng probe_rng(stream_seed(code_opts.seed, 4));
  const DecodeOutcome uniform =
      code.decode_at(word.pi, uniform_codeword(hk.n(), q, probe_rng));
  std::printf("uniform replacement: %s\n", to_string(uniform));
  std::printf("next counter       : %llu\n",
              static_cast<unsigned long long>(counter.peek_next()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tamperlock experiments: secret-key tamper-detection codes, masked counters,\n"
      "and sparse-parity watermark simulations.  CSV goes to --out (default stdout);\n"
      "progress notes go to stderr.  Exit codes: 0 ok, 2 check failed, 3 usage."};
  app.require_subcommand(1);

  // verify-impossibility
  auto* sub_verify = app.add_subcommand(
      "verify-impossibility",
      "enumerate or sample uniform strings and report the label-mass conflict");
  CommonCodeOpts verify_opts;
  verify_opts.attach(*sub_verify, 8);
  std::size_t verify_trials = 100000;
  bool verify_exact = false;
  sub_verify->add_option("--trials", verify_trials, "samples in sampled mode");
  sub_verify->add_flag("--exact", verify_exact, "enumerate all q^n strings (needs q^n <= 2^20)");

  // sweep
  auto* sub_sweep =
      app.add_subcommand("sweep", "tamper-detection and soundness rates over an alpha grid");
  CommonCodeOpts sweep_opts;
  sweep_opts.attach(*sub_sweep, 64);
  std::size_t sweep_trials = 200;
  std::string sweep_alphas =
      "0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40,0.45,0.50,0.55,0.60,0.65,0.70,0.75,0.80,"
      "0.85,0.90,0.95";
  sub_sweep->add_option("--trials", sweep_trials, "trials per alpha point");
  sub_sweep->add_option("--alphas", sweep_alphas, "comma-separated changed-fraction grid");

  // soundness
  auto* sub_sound =
      app.add_subcommand("soundness", "uniform-input not-invalid rate vs the analytic bound");
  CommonCodeOpts sound_opts;
  sound_opts.attach(*sub_sound, 64);
  std::size_t sound_trials = 10000;
  sub_sound->add_option("--trials", sound_trials, "Monte Carlo trials (>= 100)");

  // bp-curve
  auto* sub_curve = app.add_subcommand(
      "bp-curve", "detection and belief-propagation error across a flip-rate grid");
  LatentOpts curve_opts;
  curve_opts.attach(*sub_curve);
  std::size_t curve_trials = 100;
  std::string curve_flips = "0.00,0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40,0.45,0.4807";
  sub_curve->add_option("--trials", curve_trials, "trials per flip rate");
  sub_curve->add_option("--flips", curve_flips, "comma-separated flip-rate grid in [0, 0.5]");

  // attack
  auto* sub_attack = app.add_subcommand("attack", "run one named attack preset");
  LatentOpts attack_opts;
  attack_opts.seed = 42;
  attack_opts.attach(*sub_attack);
  std::string attack_scenario;
  std::size_t attack_trials = 50;
  sub_attack->add_option("scenario", attack_scenario,
                         "preset name (positional; settable as scenario= in --config)");
  sub_attack->add_option("--trials", attack_trials, "trials for the scenario");

  // keygen
  auto* sub_keygen = app.add_subcommand("keygen", "write a secret-key file for later runs");
  CommonCodeOpts keygen_opts;
  keygen_opts.attach(*sub_keygen, 64);

  // mask-demo
  auto* sub_demo = app.add_subcommand(
      "mask-demo", "walk one masked codeword through encode, wire form, and decode");
  CommonCodeOpts demo_opts;
  demo_opts.attach(*sub_demo, 16);
  std::string demo_key_file;
  std::string demo_state_dir = "tamperlock-state";
  sub_demo->add_option("--key-file", demo_key_file,
                       "load this key file instead of generating from --seed");
  sub_demo->add_option("--state-dir", demo_state_dir, "directory for the counter state");

  try {
    app.parse(argc, argv);
    if (sub_verify->parsed())
      return cmd_verify_impossibility(*sub_verify, verify_opts, verify_trials, verify_exact);
    if (sub_sweep->parsed()) return cmd_sweep(*sub_sweep, sweep_opts, sweep_trials, sweep_alphas);
    if (sub_sound->parsed()) return cmd_soundness(*sub_sound, sound_opts, sound_trials);
    if (sub_curve->parsed()) return cmd_bp_curve(*sub_curve, curve_opts, curve_trials, curve_flips);
    if (sub_attack->parsed())
      return cmd_attack(*sub_attack, attack_opts, attack_scenario, attack_trials);
    if (sub_keygen->parsed()) return cmd_keygen(*sub_keygen, keygen_opts);
    if (sub_demo->parsed())
      return cmd_mask_demo(*sub_demo, demo_opts, demo_key_file, demo_state_dir);
    std::fprintf(stderr, "no subcommand selected\n");
    return 3;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const CheckError& e) {
    std::fprintf(stderr, "check failed: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
}

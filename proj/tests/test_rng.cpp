#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "tamperlock/core.hpp"
#include "tamperlock/rng.hpp"
#include "tamperlock/stats.hpp"

using namespace tamperlock;

namespace {

// |count - n*p| <= sigmas * sqrt(n p (1-p))
bool within_sigma(double count, double n, double p, double sigmas) {
  return std::fabs(count - n * p) <= sigmas * std::sqrt(n * p * (1.0 - p));
}

}  // namespace

TEST_CASE("counter generator is reproducible and bit-stable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  // Frozen golden outputs: mix64(seed + i*gamma) for seed 42, i = 1..4.
  // Any change here silently breaks every recorded experiment, so the exact
  // words are pinned.
  Rng g(42);
  REQUIRE(g.next_u64() == UINT64_C(0xbdd732262feb6e95));
  REQUIRE(g.next_u64() == UINT64_C(0x28efe333b266f103));
  REQUIRE(g.next_u64() == UINT64_C(0x47526757130f9f52));
  REQUIRE(g.next_u64() == UINT64_C(0x581ce1ff0e4ae394));
  REQUIRE(Rng(7).fork(3).next_u64() == UINT64_C(0x649e25419b48acd3));
}

TEST_CASE("fork yields independent, order-insensitive streams") {
  Rng master(7);
  Rng f0 = master.fork(0);
  Rng f1 = master.fork(1);
  REQUIRE(f0.next_u64() != f1.next_u64());

  // fork is independent of draws already made from the parent
  Rng master2(7);
  master2.next_u64();
  master2.next_u64();
  Rng f0_again = master2.fork(0);
  Rng f0_ref = Rng(7).fork(0);
  REQUIRE(f0_again.next_u64() == f0_ref.next_u64());

  // distinct trial indices give distinct streams
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) firsts.insert(Rng(7).fork(i).next_u64());
  REQUIRE(firsts.size() == 1000);
}

TEST_CASE("uniform_below is exact and in range") {
  Rng rng(3);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 5ULL, 6ULL, 7ULL, 100ULL, (1ULL << 32)}) {
    for (int i = 0; i < 200; ++i) REQUIRE(rng.uniform_below(bound) < bound);
  }
  // uniformity smoke on a non-power-of-two bound
  std::vector<std::uint64_t> counts(5, 0);
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) counts[rng.uniform_below(5)] += 1;
  for (auto c : counts) REQUIRE(within_sigma(static_cast<double>(c), n, 0.2, 5.0));
}

TEST_CASE("uniform_codeword: symbol frequencies within 5 sigma at n=1e5, q=2") {
  Rng rng(11);
  const Codeword c = uniform_codeword(100000, 2, rng);
  double ones = 0;
  for (auto s : c.symbols) ones += s;
  REQUIRE(within_sigma(ones, 100000.0, 0.5, 5.0));
}

TEST_CASE("uniform_codeword: n=1 q=2 over 1e4 seeds sees both symbols") {
  std::set<Symbol> seen;
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
    seen.insert(uniform_codeword(1, 2, seed).symbols[0]);
  REQUIRE(seen == std::set<Symbol>{0, 1});
}

TEST_CASE("uniform_codeword: same seed reproduces the same word") {
  REQUIRE(uniform_codeword(64, 4096, 99) == uniform_codeword(64, 4096, 99));
  REQUIRE(!(uniform_codeword(64, 4096, 99) == uniform_codeword(64, 4096, 100)));
}

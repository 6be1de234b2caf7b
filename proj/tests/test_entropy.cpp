#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "entroheat/error.hpp"
#include "entroheat/entropy.hpp"

using namespace entroheat;

namespace {

// Frozen from a 40-digit mpmath evaluation.
constexpr double kH_07_02_tail01 = 1.1567796494470395;  // -.7lg.7 - .2lg.2 - .1lg.1
constexpr double kH_05_03_02 = 1.4854752972273343;      // -.5lg.5 - .3lg.3 - .2lg.2

TokenRecord record_of(std::vector<double> ps) {
  TokenRecord r;
  r.index = 1;
  for (std::size_t j = 0; j < ps.size(); ++j) r.alternatives.push_back({"t" + std::to_string(j), std::log(ps[j])});
  r.chosen_text = r.alternatives.front().text;
  return r;
}

FullDistribution random_distribution(std::mt19937_64& rng, std::size_t m, bool with_zeros) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(m);
  double total = 0;
  for (auto& x : p) {
    x = with_zeros && u(rng) < 0.2 ? 0.0 : -std::log(u(rng) + 1e-300);
    total += x;
  }
  if (total == 0) {
    p[0] = 1.0;
    total = 1.0;
  }
  for (auto& x : p) x /= total;
  // Put the rounding residue on the largest entry so the sum is 1 within 1e-9.
  double s = 0;
  for (double x : p) s += x;
  *std::max_element(p.begin(), p.end()) += 1.0 - s;
  return FullDistribution(p);
}

/// Number of outcomes with positive mass left out of the top-k.
std::size_t positive_tail_outcomes(const FullDistribution& d, const CoarseGrained& c) {
  std::vector<bool> kept(d.size(), false);
  for (auto idx : c.kept_indices) kept[idx] = true;
  std::size_t count = 0;
  for (std::size_t i = 0; i < d.size(); ++i) count += !kept[i] && d.probabilities()[i] > 0.0;
  return count;
}

}  // namespace

TEST_CASE("deterministic token has zero entropy") {
  const auto e = truncated_entropy(record_of({1.0}));
  CHECK(e.bits == 0.0);
  CHECK(e.tail_mass == 0.0);
}

TEST_CASE("fair coin is one bit") {
  const auto e = truncated_entropy(record_of({0.5, 0.5}));
  CHECK(e.bits == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.tail_mass == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("truncated entropy with a tail") {
  const auto e = truncated_entropy(record_of({0.7, 0.2}));
  CHECK(std::abs(e.bits - kH_07_02_tail01) < 1e-12);
  CHECK(std::abs(e.tail_mass - 0.1) < 1e-12);
}

TEST_CASE("full entropy") {
  CHECK(full_entropy(FullDistribution({1.0})) == 0.0);
  CHECK(full_entropy(FullDistribution({0.25, 0.25, 0.25, 0.25})) == 2.0);
  CHECK(std::abs(full_entropy(FullDistribution({0.5, 0.3, 0.2})) - kH_05_03_02) < 1e-12);
}

TEST_CASE("full distribution validation") {
  CHECK_THROWS_AS(FullDistribution({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(FullDistribution({1.5, -0.5}), ValidationError);
  CHECK_NOTHROW(FullDistribution({0.5, 0.5 + 5e-10}));
}

TEST_CASE("coarse graining examples") {
  const FullDistribution d({0.5, 0.3, 0.2});
  const auto c1 = coarse_grain(d, 1);
  CHECK(c1.kept == std::vector<double>{0.5});
  CHECK(c1.tail_mass == doctest::Approx(0.5));
  CHECK(truncated_entropy(c1).bits == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(truncated_entropy(c1).bits <= full_entropy(d));

  const FullDistribution two({0.6, 0.4});
  const auto c2 = coarse_grain(two, 2);
  CHECK(c2.tail_mass == 0.0);
  CHECK(truncated_entropy(c2).bits == doctest::Approx(full_entropy(two)).epsilon(1e-15));

  const FullDistribution uniform8(std::vector<double>(8, 0.125));
  const auto c4 = coarse_grain(uniform8, 4);
  CHECK(truncated_entropy(c4).bits == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(full_entropy(uniform8) == doctest::Approx(3.0).epsilon(1e-15));

  CHECK_THROWS_AS(coarse_grain(d, 0), DomainError);
  CHECK_THROWS_AS(coarse_grain(d, -1), DomainError);
  CHECK_THROWS_AS(coarse_grain(d, 4), DomainError);
}

TEST_CASE("one tail outcome keeps the entropy although the tail is not empty") {
  // Merging a single outcome into the tail changes nothing, so equality
  // holds with tail mass 0.2.
  const FullDistribution d({0.5, 0.3, 0.2});
  const auto c = coarse_grain(d, 2);
  CHECK(c.tail_mass == doctest::Approx(0.2));
  CHECK(std::abs(truncated_entropy(c).bits - full_entropy(d)) < 1e-12);
}

TEST_CASE("coarse graining ties keep source order") {
  const FullDistribution d({0.25, 0.25, 0.25, 0.25});
  const auto c = coarse_grain(d, 2);
  CHECK(c.kept_indices == std::vector<std::size_t>{0, 1});
  const auto r = c.to_record(3);
  CHECK(r.index == 3);
  CHECK(r.alternatives[0].text == "v0");
  CHECK(truncated_entropy(r).bits == doctest::Approx(truncated_entropy(c).bits));
}

TEST_CASE("property: coarse graining never raises entropy") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto m = static_cast<std::size_t>(2 + rng() % 63);
    const auto d = random_distribution(rng, m, trial % 3 == 0);
    const double full = full_entropy(d);
    for (std::ptrdiff_t k = 1; k <= static_cast<std::ptrdiff_t>(m); ++k) {
      const auto c = coarse_grain(d, k);
      const double trunc = truncated_entropy(c).bits;
      REQUIRE(trunc <= full + 1e-9);
      // Equality exactly when at most one positive-mass outcome was merged.
      const bool equal = std::abs(full - trunc) <= 1e-9;
      const std::size_t merged = positive_tail_outcomes(d, c);
      if (merged <= 1) {
        CHECK(equal);
      } else {
        // Two merged outcomes of mass >= 1e-9 / 2 lose a measurable amount;
        // only check when the loss is clearly resolvable.
        if (c.tail_mass > 1e-6) CHECK_FALSE(equal);
      }
    }
  }
}

TEST_CASE("entropy values are non-negative and bounded by log2(k+1)") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto m = static_cast<std::size_t>(1 + rng() % 20);
    const auto d = random_distribution(rng, m + 1, false);
    const auto c = coarse_grain(d, static_cast<std::ptrdiff_t>(m));
    const auto e = truncated_entropy(c);
    CHECK(e.bits >= 0.0);
    CHECK(e.bits <= std::log2(static_cast<double>(m + 1)) + 1e-12);
  }
}

TEST_CASE("series matches per-token recomputation and keeps special positions") {
  Transcript t;
  std::mt19937_64 rng(4);
  for (std::size_t i = 1; i <= 5000; ++i) {
    const auto d = random_distribution(rng, 6, false);
    TokenRecord r = coarse_grain(d, 4).to_record(i);
    if (i % 17 == 0) {
      r.chosen_text = "\n";
      r.is_special = true;
    }
    t.tokens.push_back(r);
  }
  const auto plain = entropy_series(t, false);
  const auto serial = entropy_series_serial(t, false);
  REQUIRE(plain.size() == t.size());
  CHECK(plain.values == serial.values);
  CHECK(plain.tail_masses == serial.tail_masses);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto e = truncated_entropy(t.tokens[i]);
    CHECK(plain.values[i] == e.bits);
    CHECK(plain.tail_masses[i] == e.tail_mass);
  }
  CHECK_FALSE(plain.excluded_special);

  const auto excl = entropy_series(t, true);
  CHECK(excl.excluded_special);
  REQUIRE(excl.size() == t.size());
  CHECK(excl.values == entropy_series_serial(t, true).values);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.tokens[i].is_special) {
      CHECK(excl.values[i] == 0.0);
      CHECK(excl.excluded[i] == 1);
    } else {
      CHECK(excl.values[i] == plain.values[i]);
      CHECK(excl.excluded[i] == 0);
    }
  }
}

TEST_CASE("series edge cases") {
  Transcript one;
  one.tokens.push_back(record_of({1.0}));
  CHECK(entropy_series(one, false).values == std::vector<double>{0.0});

  Transcript same;
  for (std::size_t i = 1; i <= 10; ++i) {
    auto r = record_of({0.6, 0.3});
    r.index = i;
    same.tokens.push_back(r);
  }
  const auto s = entropy_series(same, false);
  for (double v : s.values) CHECK(v == s.values.front());
}

TEST_CASE("tiny fixture series equals position-wise truncated entropy") {
  const Transcript t = read_transcript_file(std::string(ENTROHEAT_FIXTURES) + "/tiny.jsonl");
  const auto s = entropy_series(t, false);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double bits = 0, mass = 0;
    for (const auto& a : t.tokens[i].alternatives) {
      const double p = std::exp(a.logprob);
      bits -= p * std::log2(p);
      mass += p;
    }
    const double tail = std::max(0.0, 1.0 - mass);
    if (tail > 0) bits -= tail * std::log2(tail);
    CHECK(s.values[i] == doctest::Approx(bits).epsilon(1e-12));
  }
}

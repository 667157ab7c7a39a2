#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/ising_model.hpp"

using namespace qwalk;

namespace {

SpinConfig from_spins(std::initializer_list<int> s) {
  SpinConfig x(s.size());
  std::size_t i = 0;
  for (int v : s) x.set(i++, v);
  return x;
}

SpinConfig random_config(std::size_t n, std::mt19937_64& rng) {
  SpinConfig x(n);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i)
    if (coin(rng)) x.flip(i);
  return x;
}

} // namespace

TEST_CASE("spin config packs spins into bits") {
  auto x = SpinConfig::from_index(0b101, 3);
  CHECK(x.spin(0) == -1);
  CHECK(x.spin(1) == 1);
  CHECK(x.spin(2) == -1);
  CHECK(x.to_index() == 0b101);
  SpinConfig big(130);
  big.flip(129);
  CHECK(big.spin(129) == -1);
  CHECK(big.spin(128) == 1);
  CHECK_THROWS_AS(SpinConfig::from_index(0, 65), std::invalid_argument);
}

TEST_CASE("chain model") {
  const auto m = build_chain(3);
  REQUIRE(m.terms().size() == 2);
  CHECK(m.terms()[0].coupling == -1.0);
  CHECK(m.terms()[0].support == std::vector<std::uint32_t>{0, 1});
  CHECK(m.terms()[1].support == std::vector<std::uint32_t>{1, 2});
  CHECK(m.arity() == 2);
  CHECK(m.degree_bound() == 2);
  CHECK(energy(m, from_spins({1, 1, 1})) == -2.0);
  CHECK(energy(m, from_spins({1, -1, 1})) == 2.0);
  CHECK_THROWS_AS(build_chain(1), std::invalid_argument);

  // Brute-force ground states of the n = 4 chain.
  const auto m4 = build_chain(4);
  double best = 1e9;
  std::set<std::uint64_t> ground;
  for (std::uint64_t x = 0; x < 16; ++x) {
    const double e = oracle::naive_energy(m4, x);
    if (e < best - 1e-12) {
      best = e;
      ground = {x};
    } else if (std::abs(e - best) < 1e-12) {
      ground.insert(x);
    }
  }
  CHECK(best == -3.0);
  CHECK(ground == std::set<std::uint64_t>{0, 15});
  for (auto x : ground) CHECK(energy(m4, SpinConfig::from_index(x, 4)) == -3.0);
}

TEST_CASE("random sparse model") {
  const auto full = build_random_sparse(4, 6, 3);
  CHECK(full.terms().size() == 6);
  for (const auto& t : full.terms()) CHECK(t.support.size() == 2);

  const auto a = build_random_sparse(10, 35, 42);
  const auto b = build_random_sparse(10, 35, 42);
  REQUIRE(a.terms().size() == b.terms().size());
  for (std::size_t i = 0; i < a.terms().size(); ++i) {
    CHECK(a.terms()[i].coupling == b.terms()[i].coupling);
    CHECK(a.terms()[i].support == b.terms()[i].support);
  }
  CHECK(a.seed == std::optional<std::uint64_t>(42));

  std::vector<double> js;
  for (std::uint64_t s = 0; s < 12; ++s)
    for (const auto& t : build_random_sparse(10, 35, s).terms()) js.push_back(t.coupling);
  CHECK(js.size() == 12 * 35);
  double mean = 0, var = 0;
  for (double j : js) mean += j;
  mean /= double(js.size());
  for (double j : js) var += (j - mean) * (j - mean);
  var /= double(js.size() - 1);
  CHECK(var >= 0.5);
  CHECK(var <= 1.5);

  CHECK_THROWS_AS(build_random_sparse(4, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_random_sparse(4, 0, 1), std::invalid_argument);
  CHECK(default_pair_count(10) == 35);
  CHECK(default_pair_count(12) == 42);
  CHECK(default_pair_count(4) == 6);  // 3.5 n exceeds the 6 available pairs
}

TEST_CASE("complete binary model") {
  const auto m3 = build_complete_binary(3, 5);
  CHECK(m3.terms().size() == 3);
  for (const auto& t : m3.terms()) CHECK(std::abs(t.coupling) == 1.0);
  CHECK(build_complete_binary(500, 1).terms().size() == 124750);

  const auto m4 = build_complete_binary(4, 9);
  double sum = 0;
  for (const auto& t : m4.terms()) sum += t.coupling;
  CHECK(energy(m4, SpinConfig(4)) == doctest::Approx(sum).epsilon(1e-15));

  const auto ordered = build_complete_binary(40, 2, true);
  for (const auto& t : ordered.terms()) CHECK(std::abs(t.coupling) == 2.0);
  CHECK(ordered.terms().size() < 40 * 39 / 2);
  CHECK_THROWS_AS(build_complete_binary(1, 0), std::invalid_argument);
}

TEST_CASE("energy and energy_delta against naive evaluation") {
  CHECK(energy(IsingModel(3, {}), SpinConfig(3)) == 0.0);
  CHECK_THROWS_AS(energy(build_chain(3), SpinConfig(4)), std::invalid_argument);

  std::mt19937_64 rng(11);
  const auto m = build_random_sparse(8, 20, 17);
  for (int k = 0; k < 100; ++k) {
    const auto x = random_config(8, rng);
    CHECK(energy(m, x) == doctest::Approx(oracle::naive_energy(m, x.to_index())).epsilon(1e-13));
  }

  const std::uint32_t mid[] = {1};
  CHECK(energy_delta(build_chain(3), from_spins({1, 1, 1}), mid) == 4.0);
  const IsingModel lonely(3, {{1.0, {0, 1}}});
  const std::uint32_t free_spin[] = {2};
  CHECK(energy_delta(lonely, from_spins({1, -1, 1}), free_spin) == 0.0);

  std::uniform_int_distribution<std::size_t> size(3, 9);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = size(rng);
    const auto model = oracle::random_model(n, rng);
    auto x = random_config(n, rng);
    std::vector<std::uint32_t> z;
    for (std::uint32_t i = 0; i < n; ++i)
      if (rng() % 3 == 0) z.push_back(i);
    if (z.empty()) z.push_back(0);
    auto y = x;
    y.flip_all(z);
    const double d = energy_delta(model, x, z);
    CHECK(d == doctest::Approx(energy(model, y) - energy(model, x)).epsilon(1e-12).scale(1.0));
    CHECK(energy_delta(model, y, z) == doctest::Approx(-d).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("global flip symmetry for even-arity models") {
  std::mt19937_64 rng(4);
  const auto m = build_random_sparse(9, 25, 4);
  for (int k = 0; k < 50; ++k) {
    auto x = random_config(9, rng);
    auto y = x;
    for (std::size_t i = 0; i < 9; ++i) y.flip(i);
    CHECK(energy(m, x) == doctest::Approx(energy(m, y)).epsilon(1e-13));
  }
}

TEST_CASE("neighborhood") {
  const std::uint32_t z1[] = {1};
  CHECK(neighborhood(build_chain(4), z1) == std::vector<std::uint32_t>{0, 1, 2});
  const IsingModel lonely(3, {{1.0, {0, 1}}});
  const std::uint32_t z2[] = {2};
  CHECK(neighborhood(lonely, z2).empty());

  const auto m = build_random_sparse(10, 35, 8);
  for (std::uint32_t i = 0; i < 10; ++i) {
    const std::uint32_t z[] = {i};
    CHECK(neighborhood(m, z).size() <= m.arity() * m.degree_bound());
  }
}

TEST_CASE("model invariants") {
  const IsingModel merged(3, {{1.0, {0, 1}}, {0.5, {1, 0}}, {-2.0, {2}}});
  REQUIRE(merged.terms().size() == 2);
  double j01 = 0;
  for (const auto& t : merged.terms())
    if (t.support.size() == 2) j01 = t.coupling;
  CHECK(j01 == 1.5);

  CHECK_THROWS_AS(IsingModel(3, {{1.0, {0, 3}}}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel(3, {{1.0, {}}}), std::invalid_argument);

  // degree bound is tight: some spin attains it.
  const auto m = build_random_sparse(10, 35, 21);
  std::vector<std::size_t> count(10, 0);
  for (const auto& t : m.terms())
    for (auto s : t.support) ++count[s];
  CHECK(*std::max_element(count.begin(), count.end()) == m.degree_bound());
  for (std::size_t i = 0; i < 10; ++i) CHECK(m.incident_terms(i).size() == count[i]);
}

TEST_CASE("move sets") {
  const auto flips = MoveSet::single_spin_flips(5);
  CHECK(flips.size() == 5);
  CHECK(flips.max_flip() == 1);
  CHECK(flips.membership_bound() == 1);
  CHECK(flips.mask(3) == 8);
  CHECK_THROWS_AS(MoveSet(3, {{}}), std::invalid_argument);
  CHECK_THROWS_AS(MoveSet(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  const MoveSet pairs(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(pairs.max_flip() == 2);
  CHECK(pairs.membership_bound() == 2);
}

TEST_CASE("model json round trip") {
  const auto m = build_random_sparse(6, 10, 77);
  const auto j = to_json(m);
  CHECK(j.at("seed") == 77);
  const auto back = model_from_json(j);
  REQUIRE(back.terms().size() == m.terms().size());
  for (std::uint64_t x = 0; x < 64; ++x)
    CHECK(energy(back, SpinConfig::from_index(x, 6)) == energy(m, SpinConfig::from_index(x, 6)));
  CHECK_THROWS_AS(model_from_json(nlohmann::json{{"n", 3}}), std::invalid_argument);
}

TEST_CASE("all_energies guard") {
  CHECK_THROWS_AS(all_energies(build_chain(27)), CapacityError);
  const auto e = all_energies(build_chain(5));
  for (std::uint64_t x = 0; x < 32; ++x) CHECK(e[x] == oracle::naive_energy(build_chain(5), x));
}

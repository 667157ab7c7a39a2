#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qwalk/parallel_walk.hpp"

using namespace qwalk;

namespace {

/// Product formula: every spin flips independently with probability q * B_i(x).
std::vector<double> product_formula(const IsingModel& m, std::uint64_t x, double q, double beta) {
  const std::size_t n = m.num_spins();
  const double ex = oracle::naive_energy(m, x);
  std::vector<double> flip(n);
  for (std::size_t i = 0; i < n; ++i)
    flip[i] = q * std::min(1.0, std::exp(beta * (ex - oracle::naive_energy(m, x ^ (std::uint64_t{1} << i)))));
  std::vector<double> out(std::size_t{1} << n);
  for (std::uint64_t y = 0; y < out.size(); ++y) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= ((x ^ y) >> i) & 1 ? flip[i] : 1.0 - flip[i];
    out[y] = p;
  }
  return out;
}

SpinConfig random_config(std::size_t n, std::mt19937_64& rng) {
  SpinConfig x(n);
  for (std::size_t i = 0; i < n; ++i)
    if (rng() & 1) x.flip(i);
  return x;
}

} // namespace

TEST_CASE("trivial sweeps") {
  std::mt19937_64 rng(1);
  const auto m = build_complete_binary(12, 3);
  const auto x = random_config(12, rng);
  CHECK(parallel_step(m, x, {0.0, 1.0}, rng) == x);
  const auto y = parallel_step(m, x, {1.0, 0.0}, rng);
  for (std::size_t i = 0; i < 12; ++i) CHECK(y.spin(i) == -x.spin(i));
  CHECK_THROWS_AS(ParallelWalkConfig({1.5, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(parallel_step(m, x, {-0.1, 1.0}, rng), std::invalid_argument);
}

TEST_CASE("one sweep distribution matches the product formula") {
  const auto m = build_complete_binary(3, 8);
  for (double q : {0.1, 0.5, 1.0})
    for (double beta : {0.1, 0.7, 2.0})
      for (std::uint64_t x = 0; x < 8; ++x) {
        const auto got = parallel_sweep_distribution(m, SpinConfig::from_index(x, 3), {q, beta});
        const auto want = product_formula(m, x, q, beta);
        for (std::size_t y = 0; y < 8; ++y) CHECK(std::abs(got[y] - want[y]) <= 1e-12);
      }
  const auto p = sweep_flip_probabilities(m, SpinConfig(3), {0.5, 0.7});
  CHECK(p.size() == 3);
  for (double v : p) CHECK(v <= 0.5);
}

TEST_CASE("sampled sweeps follow the exact distribution") {
  const auto m = build_random_sparse(4, 5, 2);
  const ParallelWalkConfig cfg{0.6, 0.8};
  const auto x = SpinConfig::from_index(6, 4);
  const auto exact = parallel_sweep_distribution(m, x, cfg);
  std::mt19937_64 rng(21);
  std::vector<double> freq(16, 0.0);
  const int samples = 200000;
  for (int k = 0; k < samples; ++k) freq[parallel_step(m, x, cfg, rng).to_index()] += 1.0 / samples;
  double tv = 0;
  for (std::size_t y = 0; y < 16; ++y) tv += 0.5 * std::abs(freq[y] - exact[y]);
  CHECK(tv <= 0.01);
}

TEST_CASE("small q sweep is close to the standard walk mixture") {
  const auto m = build_complete_binary(3, 5);
  const std::size_t n = 3;
  const double beta = 0.9;
  const auto w = oracle::dense_walk(m, beta, false, false);
  for (double q : {0.2, 0.1, 0.05}) {
    const auto mix = (1.0 - q * double(n)) * Eigen::MatrixXd::Identity(8, 8) + q * double(n) * w;
    for (std::uint64_t x = 0; x < 8; ++x) {
      const auto sweep = parallel_sweep_distribution(m, SpinConfig::from_index(x, 3), {q, beta});
      double tv = 0;
      for (std::size_t y = 0; y < 8; ++y) tv += 0.5 * std::abs(sweep[y] - mix(Eigen::Index(y), Eigen::Index(x)));
      CHECK(tv <= 2.0 * double(n) * q * q);
    }
  }
}

TEST_CASE("cached local fields") {
  std::mt19937_64 rng(6);
  const auto m = build_complete_binary(60, 2);
  SpinSystem sys(m, random_config(60, rng));
  for (int sweep = 0; sweep < 3000; ++sweep) {
    parallel_step(sys, {0.3, 0.5}, rng);
    if (sweep % 1000 == 999) CHECK(sys.resync() <= 1e-9);
  }
  CHECK(sys.energy() == doctest::Approx(energy(m, sys.config())));
  for (std::size_t i = 0; i < 60; ++i) {
    const std::uint32_t z[] = {std::uint32_t(i)};
    CHECK(sys.flip_delta(i) == doctest::Approx(energy_delta(m, sys.config(), z)));
  }
  CHECK_THROWS_AS(SpinSystem(IsingModel(3, {{1.0, {0, 1, 2}}}), SpinConfig(3)), std::invalid_argument);
}

TEST_CASE("frozen and sequential acceptance differ only after interacting flips") {
  std::mt19937_64 seeds(10);
  const auto m = build_chain(8);
  int differing = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::mt19937_64 init(seeds());
    const auto x = random_config(8, init);
    const auto seed = seeds();
    SpinSystem frozen(m, x), sequential(m, x);
    ParallelStepStats fs, ss;
    std::mt19937_64 r1(seed), r2(seed);
    parallel_step(frozen, {0.7, 0.4}, r1, &fs, AcceptanceReference::sweep_start);
    parallel_step(sequential, {0.7, 0.4}, r2, &ss, AcceptanceReference::current);
    if (!(frozen.config() == sequential.config())) {
      ++differing;
      CHECK((fs.stale_proposals > 0 || ss.stale_proposals > 0));
    }
    if (fs.stale_proposals == 0) CHECK(frozen.config() == sequential.config());
  }
  CHECK(differing > 0);
}

TEST_CASE("the parallel walk is not reversible") {
  const auto m = build_complete_binary(3, 1);
  const auto r = parallel_reversibility(m, {0.5, 1.0});
  double total = 0;
  for (double p : r.stationary) total += p;
  CHECK(total == doctest::Approx(1.0));
  CHECK(r.detailed_balance_residual > 1e-6);

  const auto w = parallel_transition_matrix(m, {0.5, 1.0});
  for (Eigen::Index x = 0; x < 8; ++x) CHECK(w.col(x).sum() == doctest::Approx(1.0));
  Eigen::VectorXd pi(8);
  for (int i = 0; i < 8; ++i) pi(i) = r.stationary[std::size_t(i)];
  CHECK((w * pi - pi).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("energy traces") {
  const auto m = build_complete_binary(10, 3);
  const auto a = energy_trace(m, WalkKind::parallel, 0.25, 3.0, 20000, 5, 100);
  const auto b = energy_trace(m, WalkKind::parallel, 0.25, 3.0, 20000, 5, 100);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].energy == b.points[i].energy);
  for (std::size_t i = 1; i < a.points.size(); ++i) CHECK(a.points[i].normalized_step >= a.points[i - 1].normalized_step);
  CHECK(a.points.back().normalized_step == 20000.0);
  CHECK(a.min_energy <= a.final_energy());

  // Effectively zero temperature: once a local minimum is reached nothing moves.
  const auto cold = energy_trace(m, WalkKind::standard, 1.0, 1e6, 50000, 3, 1000);
  const double tail = cold.points[cold.points.size() / 2].energy;
  for (std::size_t i = cold.points.size() / 2; i < cold.points.size(); ++i) CHECK(cold.points[i].energy == tail);
  CHECK(to_string(WalkKind::parallel) == "parallel");
  CHECK_THROWS_AS(energy_trace(m, WalkKind::standard, 1.0, 1.0, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("standard walk samples the Boltzmann energy") {
  const auto m = build_complete_binary(10, 7);
  const double beta = 1.0;
  const auto e = oracle::naive_energies(m);
  const auto pi = oracle::dense_boltzmann(m, beta);
  double mean = 0;
  for (std::size_t x = 0; x < e.size(); ++x) mean += pi[x] * e[x];

  // One sample per sweep, after burn-in, with batch means for the standard error.
  const auto tr = energy_trace(m, WalkKind::standard, 1.0, beta, 4'000'000, 13, 10);
  std::vector<double> samples;
  for (std::size_t i = tr.points.size() / 10; i < tr.points.size(); ++i) samples.push_back(tr.points[i].energy);
  const std::size_t batches = 50, per = samples.size() / batches;
  std::vector<double> bm(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < per; ++i) bm[b] += samples[b * per + i];
    bm[b] /= double(per);
  }
  double avg = 0, var = 0;
  for (double v : bm) avg += v / double(batches);
  for (double v : bm) var += (v - avg) * (v - avg) / double(batches - 1);
  const double se = std::sqrt(var / double(batches));
  CAPTURE(avg);
  CAPTURE(mean);
  CAPTURE(se);
  CHECK(std::abs(avg - mean) <= 3.0 * se);
}

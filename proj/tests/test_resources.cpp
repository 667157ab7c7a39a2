#include <doctest.h>

#include <cmath>

#include "qwalk/resources.hpp"

using namespace qwalk;

namespace {

bool within_factor(double got, double want, double factor) { return got <= want * factor && got >= want / factor; }

} // namespace

TEST_CASE("closed-form component cells") {
  const auto r = component_costs(16, 16, 2, 1e-3);
  CHECK(r.component("V").depth_3l == 5.0);
  CHECK(r.component("V").count_3l == 32.0);
  CHECK(r.component("V").qubits == 32);
  CHECK(r.component("F").depth_3l == 1.0);
  CHECK(r.component("F").count_3l == 16.0);
  CHECK(r.component("F").qubits == 48);
  CHECK(r.component("R").depth_3l == 8.0);
  CHECK(r.component("R").count_3l == 64.0);
  CHECK(r.component("B").bound);
  CHECK_FALSE(r.component("V").bound);
  CHECK(r.component("B").depth_3l == doctest::Approx(4.0 * std::log2(1e3)));

  // One move: log2 N = 0.
  const auto one = component_costs(1, 1, 0, 0.5);
  CHECK(one.component("R").count_3l == 4.0);
  CHECK(one.component("R").depth_3l == 0.0);
  CHECK(one.component("V").depth_3l == 1.0);
  CHECK_THROWS_AS(one.component("T"), std::invalid_argument);
}

TEST_CASE("padding to a power of two") {
  const auto a = component_costs(10, 10, 3, 1e-4);
  const auto b = component_costs(10, 16, 3, 1e-4);
  CHECK(a.padded_moves == 16);
  CHECK(a.moves == 10);
  for (const char* c : {"V", "F", "R", "B"}) {
    CHECK(a.component(c).depth_3l == b.component(c).depth_3l);
    CHECK(a.component(c).count_3l == b.component(c).count_3l);
  }
  CHECK(component_costs(10, 17, 3, 1e-4).component("V").count_3l == 64.0);
}

TEST_CASE("coin rotation depth at the large-lattice point") {
  const std::uint64_t n = 80 * 80 * 80;
  const auto r = component_costs(n, n, 6, 1e-16);
  // ceil(log2 512000) = 19, times 2^6.
  CHECK(r.rotation_depth == 19.0 * 64.0);
  CHECK(within_factor(r.rotation_depth, 1000.0, 1.5));
  CHECK(r.total_depth_3l > r.component("B").depth_3l);
}

TEST_CASE("rotation synthesis count") {
  const auto s = synthesis_count(1e-16);
  CHECK(s >= 200);
  CHECK(s <= 220);
  CHECK(synthesis_count(0.5) == 4);
  CHECK(synthesis_count(std::ldexp(1.0, -10)) == 40);
  CHECK_THROWS_AS(synthesis_count(0.0), std::invalid_argument);
  CHECK_THROWS_AS(synthesis_count(1.0), std::invalid_argument);
}

TEST_CASE("invalid cost inputs") {
  CHECK_THROWS_AS(component_costs(0, 4, 2, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(component_costs(4, 0, 2, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(component_costs(4, 4, 2, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(component_costs(4, 4, 63, 1e-3), std::invalid_argument);
}

TEST_CASE("gate-speed scenarios") {
  for (const auto& p : published_gate_times()) {
    ScenarioInputs in;
    in.alpha = p.alpha;
    const auto r = scenario(in);
    CAPTURE(p.alpha);
    CHECK(r.classical_steps == doctest::Approx(2.6e18));
    CHECK(r.quantum_steps == doctest::Approx(std::pow(2.6e18, p.alpha)));
    CHECK(r.gate_time_offline == doctest::Approx(200.0 * r.gate_time_online));
    CHECK(within_factor(r.gate_time_online, p.online, 30.0));
    CHECK(within_factor(r.gate_time_offline, p.offline, 30.0));
  }
  ScenarioInputs fast;
  fast.alpha = 0.75;
  CHECK(within_factor(scenario(fast).gate_time_online, 0.5e-12, 3.0));
  ScenarioInputs slow;
  slow.alpha = 0.42;
  CHECK(within_factor(scenario(slow).gate_time_online, 0.5e-6, 3.0));

  ScenarioInputs id;
  id.alpha = 1.0;
  const auto r1 = scenario(id);
  CHECK(r1.quantum_steps == doctest::Approx(r1.classical_steps));

  double prev = 0;
  for (double a : {1.0, 0.9, 0.75, 0.6, 0.5, 0.42, 0.3}) {
    ScenarioInputs in;
    in.alpha = a;
    const double t = scenario(in).gate_time_online;
    CHECK(t > prev);
    prev = t;
  }
  ScenarioInputs bad;
  bad.classical_rate = 0;
  CHECK_THROWS_AS(scenario(bad), std::invalid_argument);
  CHECK(to_json(scenario(ScenarioInputs{}))["quantum_steps"].get<double>() > 0);
}

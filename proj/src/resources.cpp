#include "qwalk/resources.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace qwalk {

namespace {

double ceil_log2(std::uint64_t v) { return v <= 1 ? 0.0 : std::ceil(std::log2(double(v)) - 1e-12); }

} // namespace

const ComponentCost& CostReport::component(const std::string& name) const {
  for (const auto& c : components)
    if (c.name == name) return c;
  throw std::invalid_argument("CostReport: no component " + name);
}

CostReport component_costs(std::uint64_t n, std::uint64_t moves, std::uint64_t degree, double epsilon) {
  if (n < 1 || moves < 1) throw std::invalid_argument("component_costs: n and N must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("component_costs: epsilon must lie in (0, 1)");
  if (degree > 62) throw std::invalid_argument("component_costs: degree too large for 2^d");
  // The unary register always holds the padded power-of-two move count.
  const std::uint64_t padded_from = moves;
  moves = std::bit_ceil(moves);
  const double big_n = double(moves);
  const double lg = ceil_log2(moves);
  const double coin = std::ldexp(1.0, int(degree)) * std::log2(1.0 / epsilon);

  CostReport r{n, padded_from, moves, degree, epsilon, {}, 0.0, 0.0, 0.0};
  r.components = {
      {"V", lg + 1, 2 * big_n, lg + 1, 2 * moves, false, "depth log2N+1, count 2N, qubits 2N"},
      {"F", 1, big_n, lg + 1, 2 * moves + n, false, "depth 1, count N, total depth log2N+1, qubits 2N+n"},
      {"R", 2 * lg, 4 * big_n, 2 * lg, 2 * moves, false, "depth 2log2N, count 4N, qubits 2N"},
      {"B", coin, big_n * coin, lg * coin, 2 * moves + n + 2, true,
       "O(2^d log2(1/eps)), O(N 2^d log2(1/eps)), O(log2N 2^d log2(1/eps)), qubits 2N+n+2"},
  };
  r.rotation_depth = lg * std::ldexp(1.0, int(degree));
  for (const auto& c : r.components) {
    r.total_depth_3l += c.depth_3l;
    r.total_count_3l += c.count_3l;
  }
  return r;
}

std::uint64_t synthesis_count(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("synthesis_count: epsilon must lie in (0, 1)");
  return static_cast<std::uint64_t>(std::ceil(4.0 * std::log2(1.0 / epsilon) - 1e-9));
}

ScenarioReport scenario(const ScenarioInputs& in) {
  if (!(in.alpha > 0.0) || !(in.classical_rate > 0.0) || !(in.duration_s > 0.0) || !(in.per_step_depth > 0.0) ||
      !(in.synthesis_factor > 0.0))
    throw std::invalid_argument("scenario: all inputs must be positive");
  ScenarioReport r;
  r.inputs = in;
  r.classical_steps = in.classical_rate * in.duration_s;
  r.quantum_steps = std::pow(r.classical_steps, in.alpha);
  r.gate_time_online = in.duration_s / (r.quantum_steps * in.per_step_depth * in.synthesis_factor);
  r.gate_time_offline = r.gate_time_online * in.synthesis_factor;
  return r;
}

const std::vector<PublishedScenario>& published_gate_times() {
  static const std::vector<PublishedScenario> table = {
      {0.75, 0.5e-12, 0.1e-9},
      {0.5, 1e-9, 20e-6},
      {0.42, 0.5e-6, 1e-3},
  };
  return table;
}

nlohmann::json to_json(const CostReport& r) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : r.components)
    comps.push_back({{"name", c.name},
                     {"depth_3l", c.depth_3l},
                     {"count_3l", c.count_3l},
                     {"total_depth", c.total_depth},
                     {"qubits", c.qubits},
                     {"bound", c.bound},
                     {"formula", c.formula}});
  return {{"n", r.n},
          {"N", r.moves},
          {"N_padded", r.padded_moves},
          {"d", r.degree},
          {"epsilon", r.epsilon},
          {"components", comps},
          {"rotation_depth", r.rotation_depth},
          {"total_depth_3l", r.total_depth_3l},
          {"total_count_3l", r.total_count_3l}};
}

nlohmann::json to_json(const ScenarioReport& r) {
  return {{"alpha", r.inputs.alpha},
          {"classical_rate", r.inputs.classical_rate},
          {"duration_s", r.inputs.duration_s},
          {"per_step_depth", r.inputs.per_step_depth},
          {"synthesis_factor", r.inputs.synthesis_factor},
          {"classical_steps", r.classical_steps},
          {"quantum_steps", r.quantum_steps},
          {"gate_time_online_s", r.gate_time_online},
          {"gate_time_offline_s", r.gate_time_offline}};
}

} // namespace qwalk

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qwalk {

/// Cost of one walk-operator component, in gates of the third level of the Clifford hierarchy.
struct ComponentCost {
  std::string name;
  double depth_3l = 0.0;
  double count_3l = 0.0;
  double total_depth = 0.0;
  std::uint64_t qubits = 0;
  bool bound = false;  // big-O cell evaluated with constant factor 1
  std::string formula;
};

struct CostReport {
  std::uint64_t n = 0;
  std::uint64_t moves = 0;
  std::uint64_t padded_moves = 0;  // 2^ceil(log2 N); every cell is evaluated here
  std::uint64_t degree = 0;
  double epsilon = 0.0;
  std::vector<ComponentCost> components;  // V, F, R, B
  /// ceil(log2 N) * 2^d: depth of the coin's multiplexed rotations before synthesis.
  double rotation_depth = 0.0;
  double total_depth_3l = 0.0;
  double total_count_3l = 0.0;

  const ComponentCost& component(const std::string& name) const;
};

CostReport component_costs(std::uint64_t n, std::uint64_t moves, std::uint64_t degree, double epsilon);

/// ceil(4 log2(1/epsilon)) T gates per synthesized rotation.
std::uint64_t synthesis_count(double epsilon);

struct ScenarioInputs {
  double alpha = 0.5;
  double classical_rate = 1e12;   // spin updates per second
  double duration_s = 2.6e6;      // about one month
  double per_step_depth = 1000.0;
  double synthesis_factor = 200.0;
};

struct ScenarioReport {
  ScenarioInputs inputs;
  double classical_steps = 0.0;
  double quantum_steps = 0.0;
  double gate_time_online = 0.0;   // seconds per logical gate
  double gate_time_offline = 0.0;
};

ScenarioReport scenario(const ScenarioInputs& inputs);

/// Published logical gate times for the three speedup exponents (online, offline), seconds.
struct PublishedScenario {
  double alpha;
  double online;
  double offline;
};
const std::vector<PublishedScenario>& published_gate_times();

nlohmann::json to_json(const CostReport& r);
nlohmann::json to_json(const ScenarioReport& r);

} // namespace qwalk

#include "qwalk/annealing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace qwalk {

std::vector<double> Schedule::betas() const {
  std::vector<double> b(steps);
  for (std::size_t j = 1; j <= steps; ++j) b[j - 1] = beta(j);
  return b;
}

double TargetSet::mass(std::span<const double> p) const {
  double m = 0.0;
  for (auto x : configs) m += p[x];
  return m;
}

std::string to_string(TargetMode m) { return m == TargetMode::single ? "single" : "all"; }

TargetMode target_mode_from_string(const std::string& s) {
  if (s == "single") return TargetMode::single;
  if (s == "all") return TargetMode::all;
  throw std::invalid_argument("unknown target mode: " + s);
}

TargetSet find_target_set(std::span<const double> energies, TargetMode mode) {
  if (energies.empty()) throw std::invalid_argument("find_target_set: no configurations");
  TargetSet t;
  t.min_energy = *std::min_element(energies.begin(), energies.end());
  const double tol = 1e-9 * std::max(1.0, std::abs(t.min_energy));
  for (std::uint64_t x = 0; x < energies.size(); ++x)
    if (energies[x] - t.min_energy <= tol) {
      t.configs.push_back(x);
      if (mode == TargetMode::single) break;
    }
  return t;
}

double tts(double duration_cost, double p, double confidence) {
  if (!(duration_cost > 0.0) || !(p >= 0.0 && p <= 1.0) || !(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("tts: arguments out of range");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  if (p >= confidence) return duration_cost;
  const double repetitions = std::log1p(-confidence) / std::log1p(-p);
  return duration_cost * std::max(1.0, repetitions);
}

TTSCurve scan_min_tts(const DurationEvaluator& eval, const ScanOptions& options) {
  std::map<std::size_t, TTSRow> rows;
  auto run = [&](std::size_t t) {
    if (!rows.count(t)) rows[t] = eval(t);
    return rows[t].tts;
  };

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_t = 1;
  for (std::size_t t = 1; t <= options.max_duration;) {
    const double v = run(t);
    if (v < best) {
      best = v;
      best_t = t;
    } else if (std::isfinite(best) && v >= options.stop_factor * best) {
      break;
    }
    t = std::max(t + 1, static_cast<std::size_t>(std::llround(double(t) * options.growth)));
  }

  const auto lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(double(best_t) * (1.0 - options.refine_fraction))));
  const auto hi = std::min(options.max_duration,
                           static_cast<std::size_t>(std::floor(double(best_t) * (1.0 + options.refine_fraction))));
  const std::size_t stride = std::max<std::size_t>(1, (hi - lo + options.refine_points - 1) / options.refine_points);
  for (std::size_t t = lo; t <= hi; t += stride) run(t);

  TTSCurve curve;
  for (const auto& [t, row] : rows) curve.rows.push_back(row);
  for (std::size_t i = 0; i < curve.rows.size(); ++i)
    if (curve.rows[i].tts < curve.rows[curve.argmin].tts) curve.argmin = i;
  return curve;
}

double classical_success_prob(const WalkTablePtr& table, const TargetSet& target, const HeuristicConfig& cfg,
                              std::size_t t) {
  const auto schedule = linear_schedule(table, cfg.beta_final, t, cfg.rule, cfg.classical_padded);
  return target.mass(evolve(schedule, uniform_distribution(table->dim())).p);
}

TTSCurve classical_min_tts(const WalkTablePtr& table, const HeuristicConfig& cfg) {
  const TargetSet target = find_target_set(table->energies(), cfg.target);
  return scan_min_tts(
      [&](std::size_t t) {
        const double p = std::min(1.0, classical_success_prob(table, target, cfg, t));
        return TTSRow{double(t), p, tts(double(t), p, cfg.confidence)};
      },
      cfg.scan);
}

double rewind_level_cost(double f_squared, double cost_prev, double cost_cur) {
  if (f_squared >= 1.0) return cost_cur;
  if (f_squared <= 0.0) return std::numeric_limits<double>::infinity();
  // E_a = c_j + (1-F^2) E_b;  E_b = c_{j-1} + (1-F^2) E_a + F^2 E_c;  E_c = c_j + F^2 E_b.
  // Eliminating E_a and E_c gives E_b = (c_{j-1} + c_j) / (2 F^2 (1 - F^2)).
  const double eb = (cost_prev + cost_cur) / (2.0 * f_squared * (1.0 - f_squared));
  return cost_cur + (1.0 - f_squared) * eb;
}

ZenoEvaluator::ZenoEvaluator(WalkTablePtr table, HeuristicConfig cfg)
    : table_(std::move(table)), cfg_(std::move(cfg)), target_(find_target_set(table_->energies(), cfg_.target)) {}

double ZenoEvaluator::phase_gap(double beta) {
  auto it = gaps_.find(beta);
  if (it != gaps_.end()) return it->second;
  const double d = spectral(WalkSpec{table_, beta, cfg_.rule, /*padded=*/true}).phase_gap;
  gaps_.emplace(beta, d);
  return d;
}

double boltzmann_overlap(std::span<const double> energies, double beta_a, double beta_b) {
  const DistVec a = boltzmann_from_energies(energies, beta_a);
  const DistVec b = boltzmann_from_energies(energies, beta_b);
  double f = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) f += std::sqrt(a[x] * b[x]);
  return std::min(1.0, f);
}

ZenoEvaluator::Result ZenoEvaluator::evaluate(std::size_t levels, bool rewind) {
  if (levels == 0) throw std::invalid_argument("zeno_tts: needs at least one level");
  const Schedule schedule{cfg_.beta_final, levels};
  const auto energies = table_->energies();
  DistVec prev = boltzmann_from_energies(energies, 0.0);
  double cost = 0.0, product = 1.0;
  double cost_prev = 1.0 / phase_gap(0.0);
  for (std::size_t j = 1; j <= levels; ++j) {
    const double beta = schedule.beta(j);
    DistVec cur = boltzmann_from_energies(energies, beta);
    double f = 0.0;
    for (std::size_t x = 0; x < cur.size(); ++x) f += std::sqrt(prev[x] * cur[x]);
    const double f2 = std::min(1.0, f * f);
    const double cost_cur = 1.0 / phase_gap(beta);
    cost += rewind ? rewind_level_cost(f2, cost_prev, cost_cur) : cost_cur;
    product *= f2;
    prev = std::move(cur);
    cost_prev = cost_cur;
  }
  Result r;
  r.cost = cost;
  const double final_mass = target_.mass(prev);
  r.success_prob = std::min(1.0, rewind ? final_mass : final_mass * product);
  r.tts = std::isfinite(cost) ? tts(cost, r.success_prob, cfg_.confidence) : std::numeric_limits<double>::infinity();
  return r;
}

double zeno_tts(const WalkTablePtr& table, const HeuristicConfig& cfg, std::size_t levels, bool rewind) {
  ZenoEvaluator z(table, cfg);
  return z.evaluate(levels, rewind).tts;
}

TTSCurve zeno_min_tts(const WalkTablePtr& table, const HeuristicConfig& cfg, bool rewind) {
  ZenoEvaluator z(table, cfg);
  return scan_min_tts(
      [&](std::size_t levels) {
        const auto r = z.evaluate(levels, rewind);
        return TTSRow{double(levels), r.success_prob, r.tts};
      },
      cfg.scan);
}

std::string to_string(UnitaryDuration d) { return d == UnitaryDuration::walk_steps ? "walk_steps" : "unit"; }

UnitaryDuration unitary_duration_from_string(const std::string& s) {
  if (s == "walk_steps") return UnitaryDuration::walk_steps;
  if (s == "unit") return UnitaryDuration::unit;
  throw std::invalid_argument("unknown unitary duration convention: " + s);
}

double unitary_sequence_success(const WalkTablePtr& table, std::span<const double> betas, std::span<const double> p0,
                                const TargetSet& target, AcceptanceRule rule, VCompletion completion) {
  // The state shape depends only on the padded move count, so any operator can seed it.
  WalkOperator first(WalkSpec{table, betas.empty() ? 0.0 : betas.front(), rule, /*padded=*/true}, completion);
  QState state = init_state(first, p0);
  for (std::size_t j = 0; j < betas.size(); ++j) {
    if (j == 0) {
      apply_walk(state, first);
    } else {
      const WalkOperator op(WalkSpec{table, betas[j], rule, /*padded=*/true}, completion);
      apply_walk(state, op);
    }
  }
  return target.mass(measure_system_marginal(state));
}

double unitary_success_prob(const WalkTablePtr& table, const HeuristicConfig& cfg, std::size_t levels) {
  const TargetSet target = find_target_set(table->energies(), cfg.target);
  const auto betas = Schedule{cfg.beta_final, levels}.betas();
  return std::min(1.0, unitary_sequence_success(table, betas, uniform_distribution(table->dim()), target, cfg.rule,
                                                cfg.completion));
}

TTSCurve unitary_min_tts(const WalkTablePtr& table, const HeuristicConfig& cfg) {
  const TargetSet target = find_target_set(table->energies(), cfg.target);
  const DistVec uniform = uniform_distribution(table->dim());
  return scan_min_tts(
      [&](std::size_t levels) {
        const auto betas = Schedule{cfg.beta_final, levels}.betas();
        const double p =
            std::min(1.0, unitary_sequence_success(table, betas, uniform, target, cfg.rule, cfg.completion));
        const double cost = cfg.unitary_duration == UnitaryDuration::walk_steps ? double(levels) : 1.0;
        return TTSRow{double(levels), p, tts(cost, p, cfg.confidence)};
      },
      cfg.scan);
}

SpeedupFit fit_speedup(std::vector<std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("fit_speedup: needs at least 3 pairs");
  double sx = 0, sy = 0;
  for (const auto& [c, q] : pairs) {
    if (!(c > 0.0) || !(q > 0.0) || !std::isfinite(c) || !std::isfinite(q))
      throw std::invalid_argument("fit_speedup: values must be positive and finite");
    sx += std::log(c);
    sy += std::log(q);
  }
  const double n = double(pairs.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [c, q] : pairs) {
    sxx += (std::log(c) - mx) * (std::log(c) - mx);
    sxy += (std::log(c) - mx) * (std::log(q) - my);
  }
  if (sxx <= 1e-24) throw std::invalid_argument("fit_speedup: classical values have no spread");
  SpeedupFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0;
  for (const auto& [c, q] : pairs) {
    const double r = std::log(q) - (fit.intercept + fit.exponent * std::log(c));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.pairs = std::move(pairs);
  return fit;
}

} // namespace qwalk

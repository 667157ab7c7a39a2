#include "qwalk/parallel_walk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qwalk/classical_walk.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

void ParallelWalkConfig::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("ParallelWalkConfig: q must lie in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("ParallelWalkConfig: beta must be finite and >= 0");
}

std::string to_string(WalkKind k) { return k == WalkKind::standard ? "standard" : "parallel"; }

SpinSystem::SpinSystem(const IsingModel& model, SpinConfig x)
    : model_(&model), x_(std::move(x)), field_(model.num_spins(), 0.0), neighbors_(model.num_spins()),
      onsite_(model.num_spins(), 0.0) {
  if (x_.size() != model.num_spins()) throw std::invalid_argument("SpinSystem: configuration length mismatch");
  if (model.arity() > 2) throw std::invalid_argument("SpinSystem: local fields need terms of arity <= 2");
  for (const auto& t : model.terms()) {
    if (t.support.size() == 1) {
      onsite_[t.support[0]] += t.coupling;
    } else {
      neighbors_[t.support[0]].emplace_back(t.support[1], t.coupling);
      neighbors_[t.support[1]].emplace_back(t.support[0], t.coupling);
    }
  }
  resync();
}

double SpinSystem::resync() {
  double worst = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    double h = onsite_[i];
    for (const auto& [k, j] : neighbors_[i]) h += j * x_.spin(k);
    worst = std::max(worst, std::abs(h - field_[i]));
    field_[i] = h;
  }
  const double e = qwalk::energy(*model_, x_);
  worst = std::max(worst, std::abs(e - energy_));
  energy_ = e;
  return worst;
}

void SpinSystem::flip(std::size_t i) {
  energy_ += flip_delta(i);
  x_.flip(i);
  const double twice = 2.0 * x_.spin(i);
  for (const auto& [k, j] : neighbors_[i]) field_[k] += j * twice;
}

bool SpinSystem::interacts(std::size_t i, std::size_t k) const {
  return std::any_of(neighbors_[i].begin(), neighbors_[i].end(), [k](const auto& nb) { return nb.first == k; });
}

std::vector<double> sweep_flip_probabilities(const IsingModel& model, const SpinConfig& x,
                                             const ParallelWalkConfig& cfg) {
  cfg.validate();
  std::vector<double> p(model.num_spins());
  for (std::uint32_t i = 0; i < model.num_spins(); ++i) {
    const std::uint32_t z[] = {i};
    p[i] = cfg.q * acceptance(AcceptanceRule::metropolis, energy_delta(model, x, z), cfg.beta);
  }
  return p;
}

void parallel_step(SpinSystem& system, const ParallelWalkConfig& cfg, std::mt19937_64& rng, ParallelStepStats* stats,
                   AcceptanceReference reference) {
  const std::size_t n = system.num_spins();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  thread_local std::vector<double> frozen;
  if (reference == AcceptanceReference::sweep_start) {
    frozen.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      frozen[i] = acceptance(AcceptanceRule::metropolis, system.flip_delta(i), cfg.beta);
  }
  std::vector<std::uint32_t> flipped;
  for (std::size_t i = 0; i < n; ++i) {
    // Both uniforms are drawn for every spin so the two acceptance references share one random stream.
    const double u_propose = unit(rng);
    const double u_accept = unit(rng);
    if (u_propose >= cfg.q) continue;
    if (stats) {
      ++stats->proposed;
      if (std::any_of(flipped.begin(), flipped.end(), [&](std::uint32_t k) { return system.interacts(i, k); }))
        ++stats->stale_proposals;
    }
    const double a = reference == AcceptanceReference::sweep_start
                         ? frozen[i]
                         : acceptance(AcceptanceRule::metropolis, system.flip_delta(i), cfg.beta);
    if (u_accept < a) {
      system.flip(i);
      if (stats) {
        ++stats->accepted;
        flipped.push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
}

SpinConfig parallel_step(const IsingModel& model, const SpinConfig& x, const ParallelWalkConfig& cfg,
                         std::mt19937_64& rng) {
  cfg.validate();
  SpinSystem system(model, x);
  parallel_step(system, cfg, rng);
  return system.config();
}

std::vector<double> parallel_sweep_distribution(const IsingModel& model, const SpinConfig& x,
                                                const ParallelWalkConfig& cfg) {
  const std::size_t n = model.num_spins();
  if (n > 16) throw CapacityError("parallel_sweep_distribution: limited to n <= 16");
  cfg.validate();
  std::vector<double> accept(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t z[] = {i};
    accept[i] = acceptance(AcceptanceRule::metropolis, energy_delta(model, x, z), cfg.beta);
  }
  std::vector<double> out(std::size_t{1} << n, 0.0);
  // Three branches per spin: not proposed, proposed and rejected, proposed and accepted.
  std::function<void(std::size_t, std::uint64_t, double)> walk = [&](std::size_t i, std::uint64_t y, double w) {
    if (w == 0.0) return;
    if (i == n) {
      out[y] += w;
      return;
    }
    walk(i + 1, y, w * (1.0 - cfg.q));
    walk(i + 1, y, w * cfg.q * (1.0 - accept[i]));
    walk(i + 1, y ^ (std::uint64_t{1} << i), w * cfg.q * accept[i]);
  };
  walk(0, x.to_index(), 1.0);
  return out;
}

Eigen::MatrixXd parallel_transition_matrix(const IsingModel& model, const ParallelWalkConfig& cfg) {
  const std::size_t n = model.num_spins();
  if (n > 10) throw CapacityError("parallel_transition_matrix: limited to n <= 10");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Eigen::MatrixXd w(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    const auto col = parallel_sweep_distribution(model, SpinConfig::from_index(std::uint64_t(x), n), cfg);
    for (Eigen::Index y = 0; y < dim; ++y) w(y, x) = col[std::size_t(y)];
  }
  return w;
}

ReversibilityReport parallel_reversibility(const IsingModel& model, const ParallelWalkConfig& cfg) {
  if (model.num_spins() > 4) throw CapacityError("parallel_reversibility: limited to n <= 4");
  const Eigen::MatrixXd w = parallel_transition_matrix(model, cfg);
  Eigen::EigenSolver<Eigen::MatrixXd> es(w);
  Eigen::Index top = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(top) - 1.0)) top = i;
  Eigen::VectorXd v = es.eigenvectors().col(top).real();
  v /= v.sum();
  ReversibilityReport r;
  r.stationary.assign(v.data(), v.data() + v.size());
  r.detailed_balance_residual = check_detailed_balance(w, r.stationary);
  return r;
}

EnergyTrace energy_trace(const IsingModel& model, WalkKind kind, double q, double beta, std::uint64_t budget,
                         std::uint64_t seed, std::uint64_t sample_stride) {
  if (budget == 0) throw std::invalid_argument("energy_trace: budget must be positive");
  if (sample_stride == 0) throw std::invalid_argument("energy_trace: sample stride must be positive");
  const std::size_t n = model.num_spins();
  const ParallelWalkConfig cfg{kind == WalkKind::parallel ? q : 1.0, beta};
  cfg.validate();

  std::mt19937_64 rng(seed);
  SpinConfig x0(n);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i)
    if (coin(rng)) x0.flip(i);
  SpinSystem system(model, std::move(x0));

  EnergyTrace trace;
  trace.kind = kind;
  trace.q = cfg.q;
  trace.beta = beta;
  trace.seed = seed;
  trace.min_energy = system.energy();
  trace.points.push_back({0.0, system.energy()});

  std::uint64_t next_sample = sample_stride;
  auto record = [&](std::uint64_t step) {
    trace.min_energy = std::min(trace.min_energy, system.energy());
    if (step >= next_sample || step >= budget) {
      trace.points.push_back({double(step), system.energy()});
      while (next_sample <= step) next_sample += sample_stride;
    }
  };

  if (kind == WalkKind::standard) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::uint64_t resync_every = 1000 * std::uint64_t(n);
    for (std::uint64_t step = 1; step <= budget; ++step) {
      const std::size_t i = pick(rng);
      if (unit(rng) < acceptance(AcceptanceRule::metropolis, system.flip_delta(i), beta)) system.flip(i);
      record(step);
      if (step % resync_every == 0) trace.max_resync_error = std::max(trace.max_resync_error, system.resync());
    }
  } else {
    const std::uint64_t sweeps = (budget + n - 1) / n;
    for (std::uint64_t s = 1; s <= sweeps; ++s) {
      parallel_step(system, cfg, rng);
      record(std::min(budget, s * n));
      if (s % 1000 == 0) trace.max_resync_error = std::max(trace.max_resync_error, system.resync());
    }
  }
  trace.max_resync_error = std::max(trace.max_resync_error, system.resync());
  return trace;
}

} // namespace qwalk

#include "qwalk/classical_walk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "qwalk/errors.hpp"
#include "qwalk/lanczos.hpp"

namespace qwalk {

std::string to_string(AcceptanceRule rule) {
  return rule == AcceptanceRule::metropolis ? "metropolis" : "glauber";
}

AcceptanceRule acceptance_rule_from_string(const std::string& s) {
  if (s == "metropolis") return AcceptanceRule::metropolis;
  if (s == "glauber") return AcceptanceRule::glauber;
  throw std::invalid_argument("unknown acceptance rule: " + s);
}

double acceptance(AcceptanceRule rule, double delta_energy, double beta) {
  const double x = beta * delta_energy;
  if (rule == AcceptanceRule::metropolis) return x <= 0.0 ? 1.0 : std::exp(-x);
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

WalkTable::WalkTable(IsingModel model, MoveSet moves) : model_(std::move(model)), moves_(std::move(moves)) {
  const std::size_t n = model_.num_spins();
  if (moves_.num_spins() != n) throw std::invalid_argument("WalkTable: move set and model disagree on n");
  if (moves_.size() == 0) throw std::invalid_argument("WalkTable: empty move set");
  if (n > 26 || (std::uint64_t{1} << n) * moves_.size() > kMaxEntries)
    throw CapacityError("WalkTable: 2^n * N exceeds the enumeration guard");
  dim_ = std::uint64_t{1} << n;
  for (std::size_t j = 0; j < moves_.size(); ++j) masks_.push_back(moves_.mask(j));
  energies_ = all_energies(model_);
  const std::size_t nm = masks_.size();
  deltas_.resize(dim_ * nm);
  for (std::uint64_t x = 0; x < dim_; ++x)
    for (std::size_t j = 0; j < nm; ++j) deltas_[x * nm + j] = energies_[x ^ masks_[j]] - energies_[x];
}

WalkTablePtr make_walk_table(IsingModel model, MoveSet moves) {
  return std::make_shared<const WalkTable>(std::move(model), std::move(moves));
}

std::size_t WalkSpec::move_slots() const {
  const std::size_t n_moves = table->num_moves();
  return padded ? std::bit_ceil(n_moves) : n_moves;
}

void WalkSpec::validate() const {
  if (!table) throw std::invalid_argument("WalkSpec: missing walk table");
  if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("WalkSpec: beta must be finite and >= 0");
}

TransitionMatrix::TransitionMatrix(const WalkSpec& spec) { rebuild(spec); }

void TransitionMatrix::rebuild(const WalkSpec& spec) {
  spec.validate();
  const WalkTable& t = *spec.table;
  dim_ = t.dim();
  masks_.assign(t.masks().begin(), t.masks().end());
  const std::size_t nm = masks_.size();
  const double weight = 1.0 / static_cast<double>(spec.move_slots());
  off_.resize(dim_ * nm);
  diag_.resize(dim_);
  const auto deltas = t.deltas();
  for (std::uint64_t x = 0; x < dim_; ++x) {
    double out = 0.0;
    for (std::size_t j = 0; j < nm; ++j) {
      const double w = weight * acceptance(spec.rule, deltas[x * nm + j], spec.beta);
      off_[x * nm + j] = w;
      out += w;
    }
    diag_[x] = 1.0 - out;
  }
}

double TransitionMatrix::entry(std::uint64_t y, std::uint64_t x) const {
  if (x == y) return diag_[x];
  for (std::size_t j = 0; j < masks_.size(); ++j)
    if ((x ^ masks_[j]) == y) return off_diagonal(x, j);
  return 0.0;
}

void TransitionMatrix::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t nm = masks_.size();
  for (std::uint64_t y = 0; y < dim_; ++y) {
    double acc = diag_[y] * in[y];
    for (std::size_t j = 0; j < nm; ++j) {
      const std::uint64_t x = y ^ masks_[j];
      acc += off_[x * nm + j] * in[x];
    }
    out[y] = acc;
  }
}

Eigen::MatrixXd TransitionMatrix::to_dense() const {
  if (dim_ > 8192) throw CapacityError("TransitionMatrix::to_dense: dimension too large");
  const auto d = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  for (std::uint64_t x = 0; x < dim_; ++x) {
    w(x, x) += diag_[x];
    for (std::size_t j = 0; j < masks_.size(); ++j) w(x ^ masks_[j], x) += off_diagonal(x, j);
  }
  return w;
}

double TransitionMatrix::stochasticity_error() const {
  double worst = 0.0;
  for (std::uint64_t x = 0; x < dim_; ++x) {
    double s = diag_[x];
    for (std::size_t j = 0; j < masks_.size(); ++j) s += off_diagonal(x, j);
    worst = std::max(worst, std::abs(1.0 - s));
  }
  return worst;
}

DistVec boltzmann_from_energies(std::span<const double> energies, double beta) {
  if (energies.empty()) throw std::invalid_argument("boltzmann: empty energy list");
  const double e_min = *std::min_element(energies.begin(), energies.end());
  DistVec p(energies.size());
  double z = 0.0;
  for (std::size_t x = 0; x < energies.size(); ++x) {
    p[x] = std::exp(-beta * (energies[x] - e_min));
    z += p[x];
  }
  for (auto& v : p) v /= z;
  return p;
}

DistVec boltzmann(const IsingModel& model, double beta) { return boltzmann_from_energies(all_energies(model), beta); }

DistVec boltzmann(const WalkTable& table, double beta) { return boltzmann_from_energies(table.energies(), beta); }

DistVec uniform_distribution(std::uint64_t dim) { return DistVec(dim, 1.0 / static_cast<double>(dim)); }

double check_detailed_balance(const TransitionMatrix& w, std::span<const double> pi) {
  if (pi.size() != w.dim()) throw std::invalid_argument("check_detailed_balance: dimension mismatch");
  double worst = 0.0;
  for (std::uint64_t x = 0; x < w.dim(); ++x)
    for (std::size_t j = 0; j < w.num_moves(); ++j) {
      const std::uint64_t y = x ^ w.mask(j);
      const double forward = w.off_diagonal(x, j) * pi[x];
      const double backward = w.off_diagonal(y, j) * pi[y];
      worst = std::max(worst, std::abs(forward - backward));
    }
  return worst;
}

double check_detailed_balance(const Eigen::MatrixXd& w, std::span<const double> pi) {
  if (static_cast<std::size_t>(w.rows()) != pi.size() || w.rows() != w.cols())
    throw std::invalid_argument("check_detailed_balance: dimension mismatch");
  double worst = 0.0;
  for (Eigen::Index x = 0; x < w.cols(); ++x)
    for (Eigen::Index y = 0; y < w.rows(); ++y)
      worst = std::max(worst, std::abs(w(y, x) * pi[x] - w(x, y) * pi[y]));
  return worst;
}

Eigen::MatrixXd symmetrized_dense(const TransitionMatrix& w) {
  const auto d = static_cast<Eigen::Index>(w.dim());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (std::uint64_t x = 0; x < w.dim(); ++x) {
    s(x, x) = w.diagonal(x);
    for (std::size_t j = 0; j < w.num_moves(); ++j) {
      const std::uint64_t y = x ^ w.mask(j);
      s(y, x) = std::sqrt(w.off_diagonal(x, j) * w.off_diagonal(y, j));
    }
  }
  return s;
}

namespace {

SpectralReport finish_report(double lambda1, double residual, std::string method, std::size_t iterations) {
  SpectralReport r;
  r.lambda1 = lambda1;
  r.gap = 1.0 - lambda1;
  r.phase_gap = std::acos(std::clamp(lambda1, -1.0, 1.0));
  r.method = std::move(method);
  r.residual = residual;
  r.iterations = iterations;
  return r;
}

} // namespace

SpectralReport spectral(const WalkSpec& spec, SpectralMethod method) {
  const TransitionMatrix w(spec);
  const std::size_t n = spec.table->num_spins();
  if (method == SpectralMethod::automatic) method = n <= 8 ? SpectralMethod::dense : SpectralMethod::iterative;

  if (method == SpectralMethod::dense) {
    const Eigen::MatrixXd s = symmetrized_dense(w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return finish_report(ev(ev.size() - 2), 0.0, "dense", 0);
  }

  // Off-diagonal entries of S, sqrt(W_{y,x} W_{x,y}), laid out like W.
  const std::size_t nm = w.num_moves();
  const std::uint64_t dim = w.dim();
  std::vector<double> sym(dim * nm);
  for (std::uint64_t x = 0; x < dim; ++x)
    for (std::size_t j = 0; j < nm; ++j)
      sym[x * nm + j] = std::sqrt(w.off_diagonal(x, j) * w.off_diagonal(x ^ w.mask(j), j));

  SymmetricOperator op = [&](std::span<const double> in, std::span<double> out) {
    for (std::uint64_t y = 0; y < dim; ++y) {
      double acc = w.diagonal(y) * in[y];
      for (std::size_t j = 0; j < nm; ++j) acc += sym[y * nm + j] * in[y ^ w.mask(j)];
      out[y] = acc;
    }
  };
  const DistVec pi = boltzmann(*spec.table, spec.beta);
  std::vector<std::vector<double>> top(1, std::vector<double>(dim));
  for (std::uint64_t x = 0; x < dim; ++x) top[0][x] = std::sqrt(pi[x]);

  const EigenPair ep = lanczos_largest(op, dim, top);
  if (!ep.converged)
    throw NumericalFailure("spectral: Lanczos did not reach residual 1e-9", ep.residual);
  return finish_report(ep.value, ep.residual, "iterative", ep.iterations);
}

EvolveResult evolve(std::span<const WalkSpec> schedule, DistVec p0) {
  EvolveResult r{std::move(p0), 0.0};
  if (schedule.empty()) return r;
  TransitionMatrix w;
  DistVec next(r.p.size());
  for (const auto& spec : schedule) {
    w.rebuild(spec);
    if (w.dim() != r.p.size()) throw std::invalid_argument("evolve: distribution/schedule dimension mismatch");
    w.apply(r.p, next);
    double total = 0.0;
    for (double v : next) total += v;
    r.drift += std::abs(1.0 - total);
    for (auto& v : next) v /= total;
    r.p.swap(next);
  }
  return r;
}

Trajectory sample_trajectory(std::span<const WalkSpec> schedule, SpinConfig x0, std::uint64_t seed) {
  constexpr std::uint64_t kResync = std::uint64_t{1} << 16;
  Trajectory tr;
  tr.final_config = std::move(x0);
  if (schedule.empty()) return tr;
  const IsingModel& model = schedule.front().table->model();
  const MoveSet& moves = schedule.front().table->moves();
  if (tr.final_config.size() != model.num_spins())
    throw std::invalid_argument("sample_trajectory: initial configuration length mismatch");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpinConfig& x = tr.final_config;
  double e = energy(model, x);
  tr.energies.reserve(schedule.size());
  std::uint64_t step = 0;
  for (const auto& spec : schedule) {
    std::uniform_int_distribution<std::size_t> slot_dist(0, spec.move_slots() - 1);
    const std::size_t slot = slot_dist(rng);
    const double u = unit(rng);
    if (slot < moves.size()) {
      const auto& z = moves.move(slot);
      const double de = energy_delta(model, x, z);
      if (u < acceptance(spec.rule, de, spec.beta)) {
        x.flip_all(z);
        e += de;
        ++tr.accepted;
      }
    }
    tr.energies.push_back(e);
    if (++step % kResync == 0) {
      const double exact = energy(model, x);
      tr.max_resync_error = std::max(tr.max_resync_error, std::abs(exact - e));
      e = exact;
    }
  }
  return tr;
}

std::vector<WalkSpec> linear_schedule(const WalkTablePtr& table, double beta_final, std::size_t steps,
                                      AcceptanceRule rule, bool padded) {
  std::vector<WalkSpec> s;
  s.reserve(steps);
  for (std::size_t j = 1; j <= steps; ++j)
    s.push_back({table, beta_final * static_cast<double>(j) / static_cast<double>(steps), rule, padded});
  return s;
}

} // namespace qwalk

#include "qwalk/szegedy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qwalk/errors.hpp"

namespace qwalk {

std::string to_string(VCompletion v) { return v == VCompletion::householder ? "householder" : "rotation_tree"; }

VCompletion v_completion_from_string(const std::string& s) {
  if (s == "householder") return VCompletion::householder;
  if (s == "rotation_tree") return VCompletion::rotation_tree;
  throw std::invalid_argument("unknown V completion: " + s);
}

Component component_from_string(const std::string& s) {
  if (s == "V") return Component::V;
  if (s == "Vdag" || s == "V_dagger") return Component::V_dagger;
  if (s == "B") return Component::B;
  if (s == "Bdag" || s == "B_dagger") return Component::B_dagger;
  if (s == "F") return Component::F;
  if (s == "R") return Component::R;
  throw std::invalid_argument("unknown walk component: " + s);
}

QState::QState(std::uint64_t num_configs, std::size_t move_slots)
    : configs_(num_configs), slots_(move_slots + 1), amps_(num_configs * (move_slots + 1) * 2) {}

double QState::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

double QState::distance(const QState& other) const {
  if (other.size() != size()) throw std::invalid_argument("QState::distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) s += std::norm(amps_[i] - other.amps_[i]);
  return std::sqrt(s);
}

namespace {

Eigen::MatrixXd householder_preparation(std::size_t m) {
  const auto d = static_cast<Eigen::Index>(m + 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(d, -1.0 / std::sqrt(double(m)));
  w(0) = 1.0;
  w.normalize();
  return Eigen::MatrixXd::Identity(d, d) - 2.0 * w * w.transpose();
}

Eigen::MatrixXd rotation_tree_preparation(std::size_t m) {
  if (!std::has_single_bit(m))
    throw std::invalid_argument("rotation_tree V completion needs a power-of-two move count");
  const auto d = static_cast<Eigen::Index>(m + 1);
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d);
  // Swap null <-> slot 1 first.
  v.row(0).swap(v.row(1));
  std::vector<std::size_t> active{1};
  for (std::size_t span = m / 2; span >= 1; span /= 2) {
    std::vector<std::size_t> next;
    for (auto a : active) {
      const auto i = static_cast<Eigen::Index>(a), k = static_cast<Eigen::Index>(a + span);
      const Eigen::RowVectorXd ri = v.row(i), rk = v.row(k);
      v.row(i) = (ri - rk) / std::sqrt(2.0);
      v.row(k) = (ri + rk) / std::sqrt(2.0);
      next.push_back(a);
      next.push_back(a + span);
    }
    active = std::move(next);
    if (span == 1) break;
  }
  return v;
}

} // namespace

WalkOperator::WalkOperator(WalkSpec spec, VCompletion completion)
    : spec_(std::move(spec)), completion_(completion) {
  spec_.validate();
  slots_ = spec_.move_slots();
  const std::uint64_t dim = spec_.table->dim();
  const std::size_t nm = spec_.table->num_moves();
  reject_.resize(dim * nm);
  accept_.resize(dim * nm);
  const auto deltas = spec_.table->deltas();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double a = acceptance(spec_.rule, deltas[i], spec_.beta);
    accept_[i] = std::sqrt(a);
    reject_[i] = std::sqrt(1.0 - a);
  }
  v_ = completion_ == VCompletion::householder ? householder_preparation(slots_) : rotation_tree_preparation(slots_);
}

void WalkOperator::apply_v(QState& s, bool transpose) const {
  const std::size_t slots = slots_ + 1;
  auto amps = s.amplitudes();
  if (completion_ == VCompletion::householder) {
    // V v = v - (e0 - u)((e0 - u) . v), u uniform over the move slots.
    const double inv = 1.0 / std::sqrt(double(slots_));
    for (std::uint64_t x = 0; x < s.num_configs(); ++x)
      for (int c = 0; c < 2; ++c) {
        const std::size_t base = s.index(x, 0, c);
        QState::amplitude sum = 0.0;
        for (std::size_t m = 1; m < slots; ++m) sum += amps[base + 2 * m];
        const QState::amplitude proj = amps[base] - inv * sum;
        amps[base] -= proj;
        const QState::amplitude shift = inv * proj;
        for (std::size_t m = 1; m < slots; ++m) amps[base + 2 * m] += shift;
      }
    return;
  }
  std::vector<QState::amplitude> tmp(slots);
  for (std::uint64_t x = 0; x < s.num_configs(); ++x)
    for (int c = 0; c < 2; ++c) {
      const std::size_t base = s.index(x, 0, c);
      for (std::size_t r = 0; r < slots; ++r) {
        QState::amplitude acc = 0.0;
        for (std::size_t k = 0; k < slots; ++k) {
          const double e = transpose ? v_(k, r) : v_(r, k);
          acc += e * amps[base + 2 * k];
        }
        tmp[r] = acc;
      }
      for (std::size_t r = 0; r < slots; ++r) amps[base + 2 * r] = tmp[r];
    }
}

void WalkOperator::apply_b(QState& s, bool transpose) const {
  const std::size_t nm = num_moves();
  const double sign = transpose ? -1.0 : 1.0;
  for (std::uint64_t x = 0; x < s.num_configs(); ++x)
    for (std::size_t j = 0; j < nm; ++j) {
      const double a = reject_[x * nm + j];
      const double b = sign * accept_[x * nm + j];
      auto& c0 = s.at(x, j + 1, 0);
      auto& c1 = s.at(x, j + 1, 1);
      const QState::amplitude u = c0, v = c1;
      c0 = a * u - b * v;
      c1 = b * u + a * v;
    }
}

void WalkOperator::apply_f(QState& s) const {
  const std::size_t nm = num_moves();
  for (std::size_t j = 0; j < nm; ++j) {
    const std::uint64_t mask = spec_.table->mask(j);
    for (std::uint64_t x = 0; x < s.num_configs(); ++x) {
      const std::uint64_t y = x ^ mask;
      if (y > x) std::swap(s.at(x, j + 1, 1), s.at(y, j + 1, 1));
    }
  }
}

void WalkOperator::apply_r(QState& s) const {
  // Reflection 2|null,0><null,0| - I.
  for (std::uint64_t x = 0; x < s.num_configs(); ++x) {
    const std::size_t keep = s.index(x, 0, 0);
    const std::size_t end = s.index(x + 1, 0, 0);
    auto amps = s.amplitudes();
    for (std::size_t i = keep + 1; i < end; ++i) amps[i] = -amps[i];
  }
}

namespace {

void check_shape(const QState& s, const WalkOperator& op) {
  if (s.num_configs() != op.num_configs() || s.move_slots() != op.move_slots())
    throw std::invalid_argument("walk operator and state dimensions differ");
}

} // namespace

QState init_state(const WalkOperator& op, std::span<const double> p) {
  if (p.size() != op.num_configs()) throw std::invalid_argument("init_state: distribution length mismatch");
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0) throw std::invalid_argument("init_state: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("init_state: distribution is not normalized");
  QState s = op.make_state();
  for (std::uint64_t x = 0; x < p.size(); ++x) s.at(x, 0, 0) = std::sqrt(p[x]);
  return s;
}

QState init_state(const WalkOperator& op, const SpinConfig& x) {
  if (x.size() != op.spec().table->num_spins()) throw std::invalid_argument("init_state: configuration length mismatch");
  QState s = op.make_state();
  s.at(x.to_index(), 0, 0) = 1.0;
  return s;
}

void apply_component(QState& state, Component which, const WalkOperator& op) {
  check_shape(state, op);
  switch (which) {
    case Component::V: op.apply_v(state, false); break;
    case Component::V_dagger: op.apply_v(state, true); break;
    case Component::B: op.apply_b(state, false); break;
    case Component::B_dagger: op.apply_b(state, true); break;
    case Component::F: op.apply_f(state); break;
    case Component::R: op.apply_r(state); break;
    default: throw std::invalid_argument("apply_component: unknown component");
  }
}

void apply_walk(QState& state, const WalkOperator& op) {
  for (Component c : {Component::V, Component::B, Component::F, Component::B_dagger, Component::V_dagger, Component::R})
    apply_component(state, c, op);
}

Eigen::MatrixXd extract_X(const WalkOperator& op) {
  if (op.spec().table->num_spins() > 8) throw CapacityError("extract_X: limited to n <= 8");
  const std::uint64_t dim = op.num_configs();
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd x_op(d, d);
  for (std::uint64_t x = 0; x < dim; ++x) {
    QState s = op.make_state();
    s.at(x, 0, 0) = 1.0;
    for (Component c : {Component::V, Component::B, Component::F, Component::B_dagger, Component::V_dagger})
      apply_component(s, c, op);
    for (std::uint64_t y = 0; y < dim; ++y) x_op(y, x) = s.at(y, 0, 0).real();
  }
  return x_op;
}

Eigen::MatrixXd dense_walk_operator(const WalkOperator& op) {
  const std::size_t total = op.make_state().size();
  if (total > 4096) throw CapacityError("dense_walk_operator: compact space larger than 4096");
  const auto d = static_cast<Eigen::Index>(total);
  Eigen::MatrixXd u(d, d);
  for (std::size_t col = 0; col < total; ++col) {
    QState s = op.make_state();
    s.amplitudes()[col] = 1.0;
    apply_walk(s, op);
    for (std::size_t row = 0; row < total; ++row) u(row, col) = s.amplitudes()[row].real();
  }
  return u;
}

std::vector<double> eigenphases_small(const WalkOperator& op) {
  if (op.spec().table->num_spins() > 4) throw CapacityError("eigenphases_small: limited to n <= 4");
  const Eigen::MatrixXd u = dense_walk_operator(op);
  Eigen::EigenSolver<Eigen::MatrixXd> es(u, false);
  std::vector<double> phases;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) phases.push_back(std::abs(std::arg(es.eigenvalues()(i))));
  std::sort(phases.begin(), phases.end());
  return phases;
}

DistVec measure_system_marginal(const QState& state) {
  DistVec p(state.num_configs(), 0.0);
  const std::size_t per = state.size() / state.num_configs();
  const auto amps = state.amplitudes();
  for (std::uint64_t x = 0; x < state.num_configs(); ++x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < per; ++i) acc += std::norm(amps[x * per + i]);
    p[x] = acc;
  }
  return p;
}

} // namespace qwalk

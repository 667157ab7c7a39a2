#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qwalk {

struct LanczosOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 0;  // 0: 50 * sqrt(dim) + 2000
  std::size_t max_basis = 400;     // restart when the Krylov basis reaches this size
  std::uint64_t seed = 0x5eed;
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

using SymmetricOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Algebraically largest eigenpair of a real symmetric operator restricted to the
/// orthogonal complement of `deflate` (orthonormal vectors). Full reorthogonalization
/// with restarts from the current Ritz vector.
EigenPair lanczos_largest(const SymmetricOperator& op, std::size_t dim,
                          std::span<const std::vector<double>> deflate, const LanczosOptions& options = {});

} // namespace qwalk

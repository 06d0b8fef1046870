#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mxdd/linalg.hpp"

namespace mxdd {

/// y = Op(x); x and y never alias.
using LinearMap = std::function<void(std::span<const Complex>, std::span<Complex>)>;

enum class Side { left, right };
enum class InitialGuess { zero, random };

LinearMap as_linear_map(const SparseComplexMatrix& a);

struct KrylovConfig {
  double tol = 1e-6;
  int maxit = 200;
  Side side = Side::right;
  InitialGuess initial = InitialGuess::random;
  std::uint64_t seed = 0;
  /// Inner-product weight D (real SPD). Null means the Euclidean product.
  const SparseRealMatrix* weight = nullptr;
  /// Measure max |<v_i, v_j>_D - delta_ij| over the Krylov basis after the solve.
  bool check_orthogonality = true;
  double orthogonality_tol = 1e-8;
};

struct KrylovReport {
  CVector solution;
  /// ||r_m||_D / ||r_0||_D for m = 0..iterations of the minimized residual
  /// (preconditioned residual under left preconditioning).
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;
  double solve_time_s = 0.0;
  double orthogonality_error = 0.0;
  bool orthogonality_warning = false;
  /// ||b - A x||_D / ||b - A x0||_D recomputed from the returned solution.
  double true_relative_residual = 0.0;
  std::uint64_t seed = 0;
};

/// Entries i.i.d. uniform on [0,1) + i [0,1).
CVector random_vector(Index n, std::uint64_t seed);

/// Full GMRES (no restarts) with modified Gram-Schmidt and one
/// reorthogonalization pass, in the D inner product. `precond` applies B^{-1};
/// pass an empty function for the unpreconditioned solve.
KrylovReport gmres(const LinearMap& op, std::span<const Complex> rhs, const LinearMap& precond,
                   const KrylovConfig& config);

}  // namespace mxdd

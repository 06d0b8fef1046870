#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mxdd/decomp.hpp"
#include "mxdd/fem.hpp"
#include "mxdd/krylov.hpp"
#include "mxdd/linalg.hpp"
#include "mxdd/precond.hpp"

namespace mxdd {

struct ZTheta {
  Complex z;
  Complex theta;
};

/// z = sqrt(k^2 + i xi) with the branch cut on the positive real axis
/// (Im z >= 0; z = k for xi = 0) and theta = -conj(z)/|z|.
ZTheta z_theta(double k, double xi);

/// |z|/k and (Im z/|z|) / (|xi|/k^2).
std::pair<double, double> absorption_ratios(double k, double xi);

/// Max over probes of the relative violation of
/// Im(theta v*(S - z^2 M)v) = (Im z/|z|)(v*Sv + |z|^2 v*Mv).
double coercivity_check(const SparseRealMatrix& S, const SparseRealMatrix& M, double k, double xi,
                        std::span<const CVector> probes);

std::vector<CVector> random_probes(Index n, int count, std::uint64_t seed);

struct FovResult {
  std::vector<Complex> boundary_points;
  /// Distance from 0 to the convex hull of the boundary points.
  double dist_to_origin = 0.0;
  /// max(0, max_theta -lambda_max(theta)): distance from 0 to the
  /// circumscribing polygon of support lines, never above the true distance.
  double dist_lower_bound = 0.0;
  double norm_D = 0.0;
  int n_angles = 0;
  /// Largest |boundary point - independently recomputed Rayleigh quotient|.
  double rayleigh_mismatch = 0.0;
};

struct FovOptions {
  int n_angles = 32;
  Index dense_cap = 2000;
};

/// Field of values of C in the D inner product <x, y>_D = y* D x.
FovResult fov(const DenseMatrix& C, const Eigen::MatrixXd& D, const FovOptions& options = {});

/// Distance from 0 to the convex hull of a planar point set.
double hull_distance_to_origin(std::span<const Complex> points);

struct ElmanBound {
  double beta = 0.0;
  double gamma_beta = 0.0;
  double bound(int m) const;
  /// Smallest m with bound(m) <= a, or nullopt if the bound never decays
  /// (or only beyond 1e9 steps).
  std::optional<int> m_for_target(double a) const;
};

ElmanBound elman(double norm_D, double dist);

Eigen::MatrixXd dense_real(const SparseRealMatrix& a);

/// Columns Op(e_j) of a linear map on n unknowns.
DenseMatrix dense_operator(const LinearMap& op, Index n);

/// Max relative deviation between <V, B^{-1} A V>_Dk from the preconditioner
/// and from dense local/coarse inverses assembled independently.
double projection_consistency(const SystemBundle& system, const Decomposition& decomp,
                              const SchwarzPreconditioner& precond, std::span<const CVector> probes,
                              Index dense_cap = 2000);

struct ErrorSweepPoint {
  double xi;
  double ratio;
};

/// ||E_0 - E_xi||_Dk / ||E_0||_Dk for the impedance problem on the cube.
std::vector<ErrorSweepPoint> relative_error_sweep(double k, std::span<const double> xi_list, int n);

}  // namespace mxdd

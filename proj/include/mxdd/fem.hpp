#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mxdd/linalg.hpp"
#include "mxdd/mesh.hpp"

namespace mxdd {

enum class BoundaryCondition { pec, impedance };

/// Lowest-order edge element space: one DOF per retained mesh edge. Under
/// PEC the boundary edges are eliminated; under impedance every edge is a DOF.
class EdgeSpace {
 public:
  EdgeSpace(std::shared_ptr<const Mesh> mesh, BoundaryCondition bc);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  BoundaryCondition bc() const { return bc_; }
  const std::vector<Index>& kept_edges() const { return kept_; }
  /// DOF index of a mesh edge, -1 if eliminated.
  Index dof(Index edge) const { return edge_to_dof_[edge]; }
  const std::vector<Index>& edge_to_dof() const { return edge_to_dof_; }
  Index size() const { return static_cast<Index>(kept_.size()); }

 private:
  std::shared_ptr<const Mesh> mesh_;
  BoundaryCondition bc_;
  std::vector<Index> kept_;
  std::vector<Index> edge_to_dof_;
};

/// Material data and the global wavenumber/absorption pair. Empty per-tet
/// arrays mean eps = mu = 1, sigma = 0.
struct Coefficients {
  double k = 1.0;
  double xi = 0.0;
  std::vector<double> eps;
  std::vector<double> mu;
  std::vector<double> sigma;

  static Coefficients homogeneous(double k, double xi) { return {k, xi, {}, {}, {}}; }
  bool is_homogeneous() const { return eps.empty() && mu.empty() && sigma.empty(); }
  Coefficients with_xi(double new_xi) const {
    Coefficients c = *this;
    c.xi = new_xi;
    return c;
  }
  double eps_at(Index t) const { return eps.empty() ? 1.0 : eps[t]; }
  double mu_at(Index t) const { return mu.empty() ? 1.0 : mu[t]; }
  double sigma_at(Index t) const { return sigma.empty() ? 0.0 : sigma[t]; }
  /// Throws on wrong lengths or nonpositive eps/mu.
  void validate(Index num_tets) const;
};

/// Sign of the impedance term: sign(xi), with +1 for xi = 0.
inline double impedance_sign(double xi) { return xi < 0.0 ? -1.0 : 1.0; }

struct ElementMatrices {
  std::array<std::array<double, 6>, 6> stiffness{};
  std::array<std::array<double, 6>, 6> mass{};
};

std::array<Point, 4> barycentric_gradients(const std::array<Point, 4>& p);

/// Curl-curl and mass matrices of the six Whitney functions of a tet, with
/// local edge k oriented kTetEdgeVertices[k][0] -> [1].
ElementMatrices element_matrices(const std::array<Point, 4>& p);

/// Whitney function of local edge `le` at barycentric point `lambda`.
Point whitney_value(const std::array<Point, 4>& grads, const std::array<double, 4>& lambda, int le);

/// Real operator pieces on a set of tets with a given edge numbering. The
/// complex system is S - (k^2 + i xi) M - i k Msigma - i s k Mb.
struct OperatorParts {
  SparseRealMatrix stiffness;     // 1/mu weighted
  SparseRealMatrix mass;          // eps weighted
  SparseRealMatrix sigma_mass;    // sigma weighted
  SparseRealMatrix boundary_mass; // tangential trace mass on the listed faces
};

/// A triangle carrying an impedance term.
using Triangle = std::array<Index, 3>;

OperatorParts assemble_parts(const Mesh& mesh, std::span<const Index> tets,
                             std::span<const Index> edge_to_dof, Index ndof,
                             const Coefficients& coeffs, std::span<const Triangle> impedance_faces);

SparseComplexMatrix combine_parts(const OperatorParts& parts, double k, double xi,
                                  double boundary_sign);

SparseRealMatrix assemble_boundary_mass(const Mesh& mesh, std::span<const Triangle> faces,
                                        std::span<const Index> edge_to_dof, Index ndof);

struct SystemBundle {
  EdgeSpace space;
  Coefficients coefficients;
  SparseComplexMatrix A;
  SparseRealMatrix S;
  SparseRealMatrix M;
  SparseRealMatrix Msigma;
  std::optional<SparseRealMatrix> Mb;
  SparseRealMatrix Dk;  // S + k^2 M
  CVector rhs;
};

using VectorField = std::function<Point(const Point&)>;

/// The Gaussian point source F = (f, f, f), f = -exp(-400 |x - c|^2).
Point point_source(const Point& x);

SystemBundle assemble(const EdgeSpace& space, const Coefficients& coeffs,
                      const VectorField& source = point_source);

/// Boundary tangential mass of the whole of dOmega; requires impedance.
SparseRealMatrix assemble_boundary_mass(const EdgeSpace& space);

/// rhs_i = int F . w_i with the 4-point degree-2 tet rule.
CVector assemble_rhs(const EdgeSpace& space, const VectorField& source);

/// Signed edge differences phi(high) - phi(low) of a vertex function.
CVector discrete_gradient(const EdgeSpace& space, std::span<const double> vertex_values);

/// Edge moments int_e F . t ds (2-point Gauss) of a vector field.
CVector edge_interpolant(const EdgeSpace& space, const VectorField& field);

std::vector<Triangle> boundary_triangles(const Mesh& mesh);

}  // namespace mxdd

#pragma once

// Dense explicit formulas for the Schwarz preconditioners, built from the
// assembled operator pieces without going through the preconditioner class.

#include <Eigen/Dense>

#include "mxdd/decomp.hpp"
#include "mxdd/fem.hpp"
#include "mxdd/precond.hpp"

namespace oracle {

using mxdd::Complex;
using mxdd::DenseMatrix;
using mxdd::Index;

inline DenseMatrix dense(const mxdd::SparseRealMatrix& a) { return a.cast<Complex>().to_dense(); }

/// S - (k^2 + i xi) M - i k Msigma - i s k Mb.
inline DenseMatrix system_at(const mxdd::SystemBundle& sys, double xi) {
  const double k = sys.coefficients.k;
  const Complex I(0.0, 1.0);
  DenseMatrix a = dense(sys.S) - Complex(k * k, xi) * dense(sys.M) - I * k * dense(sys.Msigma);
  if (sys.Mb) a -= I * mxdd::impedance_sign(xi) * k * dense(*sys.Mb);
  return a;
}

/// Local impedance matrix summed element by element on the submesh.
inline DenseMatrix impedance_local(const mxdd::SystemBundle& sys, const std::vector<Index>& tets,
                                   const std::vector<Index>& dofs, double xi) {
  const mxdd::Mesh& mesh = sys.space.mesh();
  const auto& c = sys.coefficients;
  const double k = c.k;
  const auto nl = static_cast<Index>(dofs.size());
  std::vector<Index> dof_to_local(static_cast<std::size_t>(sys.space.size()), -1);
  for (Index r = 0; r < nl; ++r) dof_to_local[dofs[r]] = r;
  std::vector<Index> edge_map(static_cast<std::size_t>(mesh.num_edges()), -1);
  for (Index e = 0; e < mesh.num_edges(); ++e)
    if (sys.space.dof(e) >= 0) edge_map[e] = dof_to_local[sys.space.dof(e)];
  DenseMatrix a = DenseMatrix::Zero(nl, nl);
  for (Index t : tets) {
    const auto em = mxdd::element_matrices(mesh.tet_points(t));
    const auto& te = mesh.tet_edges()[t];
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const Index r = edge_map[te[i].edge], s = edge_map[te[j].edge];
        if (r < 0 || s < 0) continue;
        const double sg = te[i].sign * te[j].sign;
        a(r, s) += sg * (em.stiffness[i][j] / c.mu_at(t) - Complex(k * k, xi) * c.eps_at(t) * em.mass[i][j] -
                         Complex(0, k) * c.sigma_at(t) * em.mass[i][j]);
      }
  }
  std::vector<mxdd::Triangle> faces = mxdd::internal_boundary_faces(mesh, tets);
  if (sys.space.bc() == mxdd::BoundaryCondition::impedance) {
    std::vector<char> in(static_cast<std::size_t>(mesh.num_tets()), 0);
    for (Index t : tets) in[t] = 1;
    for (const auto& bf : mesh.boundary_faces())
      if (in[bf.tet]) faces.push_back(bf.vertices);
  }
  const auto mb = mxdd::assemble_boundary_mass(mesh, faces, edge_map, nl);
  a -= Complex(0, mxdd::impedance_sign(xi) * k) * dense(mb);
  return a;
}

struct DenseSchwarz {
  DenseMatrix B1;
  DenseMatrix G;
  DenseMatrix B;
};

inline DenseSchwarz schwarz(const mxdd::SystemBundle& sys, const mxdd::Decomposition& d,
                            const mxdd::PreconditionerSpec& spec) {
  using mxdd::Family;
  const Index n = sys.space.size();
  const DenseMatrix ap = system_at(sys, spec.xi_prec);
  const DenseMatrix a = spec.correction_uses_prec_matrix ? ap : sys.A.to_dense();
  DenseSchwarz out{DenseMatrix::Zero(n, n), DenseMatrix::Zero(n, n), DenseMatrix::Zero(n, n)};

  mxdd::DofSets sets = d.subdomain_dofs;
  if (spec.family == Family::impras) sets = mxdd::closed_dof_sets(sys.space, d.subdomain_elements);
  // multiplicity weights recomputed from scratch
  std::vector<int> mult(static_cast<std::size_t>(n), 0);
  for (const auto& s : sets)
    for (Index j : s) ++mult[j];

  for (std::size_t l = 0; l < sets.size(); ++l) {
    const auto& s = sets[l];
    const auto nl = static_cast<Index>(s.size());
    DenseMatrix R = DenseMatrix::Zero(nl, n);
    DenseMatrix W = DenseMatrix::Zero(nl, nl);
    for (Index r = 0; r < nl; ++r) {
      R(r, s[r]) = 1.0;
      W(r, r) = spec.family == Family::as ? 1.0 : 1.0 / mult[s[r]];
    }
    const DenseMatrix al = spec.family == Family::impras ? impedance_local(sys, d.subdomain_elements[l], s, spec.xi_prec)
                                                         : DenseMatrix(R * ap * R.transpose());
    out.B1 += R.transpose() * W * al.inverse() * R;
  }
  if (spec.levels == mxdd::Levels::two) {
    const DenseMatrix R0 = dense(d.coarse->R0);
    const DenseMatrix a0 = R0 * ap * R0.transpose();
    out.G = R0.transpose() * a0.inverse() * R0;
  }
  const DenseMatrix I = DenseMatrix::Identity(n, n);
  switch (spec.correction) {
    case mxdd::Correction::none: out.B = out.B1; break;
    case mxdd::Correction::additive: out.B = out.B1 + out.G; break;
    case mxdd::Correction::adef1: out.B = out.B1 * (I - a * out.G) + out.G; break;
    case mxdd::Correction::hybrid: out.B = (I - out.G * a) * out.B1 * (I - a * out.G) + out.G; break;
  }
  return out;
}

}  // namespace oracle

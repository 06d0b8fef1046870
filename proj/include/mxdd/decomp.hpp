#pragma once

#include <optional>
#include <vector>

#include "mxdd/fem.hpp"
#include "mxdd/linalg.hpp"
#include "mxdd/mesh.hpp"

namespace mxdd {

using ElementSets = std::vector<std::vector<Index>>;
using DofSets = std::vector<std::vector<Index>>;

/// Non-overlapping partition into p_axis^3 axis-aligned boxes, assigning each
/// tet by its barycenter. Subdomain index is i + p (j + p k).
ElementSets box_partition(const Mesh& mesh, int p_axis);

/// Applies `layers` steps of "add every tet sharing a vertex with the set".
ElementSets extend_overlap(const Mesh& mesh, const ElementSets& sets, int layers);

/// Triangles of the set's boundary that are not on the boundary of the cube.
std::vector<Triangle> internal_boundary_faces(const Mesh& mesh, const std::vector<Index>& tets);

/// Global DOFs carried by edges of each set that do not touch the set's
/// internal boundary (zero tangential trace there). Sorted ascending.
DofSets subdomain_dof_sets(const EdgeSpace& space, const ElementSets& sets);

/// Global DOFs carried by any edge of each set, internal boundary included.
/// These are the unknowns of the impedance-transmission local problems.
DofSets closed_dof_sets(const EdgeSpace& space, const ElementSets& sets);

/// Multiplicity weights D^l_jj = 1 / #{subdomains containing j}. Throws if a
/// DOF is uncovered.
std::vector<std::vector<double>> build_pou(const DofSets& dofs, Index ndof);

/// Indices of DOFs not contained in any set.
std::vector<Index> uncovered_dofs(const DofSets& dofs, Index ndof);

/// (R0)_pj = edge moment of the coarse basis function p along fine edge j.
SparseRealMatrix coarse_restriction(const EdgeSpace& fine, const EdgeSpace& coarse,
                                    const std::vector<Index>& nesting);

struct CoarseLink {
  EdgeSpace space;
  SparseRealMatrix R0;  // coarse DOFs x fine DOFs
};

struct Decomposition {
  int p_axis = 1;
  int overlap_layers = 0;
  double H_sub = 0.0;  // largest box diagonal, before overlap
  ElementSets partition;
  ElementSets subdomain_elements;
  DofSets subdomain_dofs;
  std::vector<std::vector<double>> pou;
  std::optional<CoarseLink> coarse;

  std::size_t num_subdomains() const { return subdomain_elements.size(); }
};

/// Box partition, overlap, DOF sets and weights; plus the nested coarse
/// space when coarse_cells > 0.
Decomposition make_decomposition(const EdgeSpace& space, int p_axis, int layers, int coarse_cells = 0);

}  // namespace mxdd

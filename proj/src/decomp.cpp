#include "mxdd/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace mxdd {

ElementSets box_partition(const Mesh& mesh, int p_axis) {
  const int n = mesh.cells_per_axis();
  if (p_axis < 1 || n % p_axis != 0)
    throw std::invalid_argument("box_partition: " + std::to_string(p_axis) +
                                " boxes per axis do not divide " + std::to_string(n) + " cells");
  ElementSets sets(static_cast<std::size_t>(p_axis) * p_axis * p_axis);
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const Point b = mesh.barycenter(t);
    std::array<int, 3> box{};
    for (int d = 0; d < 3; ++d)
      box[d] = std::clamp(static_cast<int>(std::floor(b[d] * p_axis)), 0, p_axis - 1);
    sets[box[0] + p_axis * (box[1] + p_axis * box[2])].push_back(t);
  }
  return sets;
}

ElementSets extend_overlap(const Mesh& mesh, const ElementSets& sets, int layers) {
  if (layers < 0) throw std::invalid_argument("extend_overlap: negative layer count");
  const auto v2t = mesh.vertex_to_tets();
  ElementSets out;
  out.reserve(sets.size());
  std::vector<char> in_set(static_cast<std::size_t>(mesh.num_tets()));
  std::vector<char> touched(static_cast<std::size_t>(mesh.num_vertices()));
  for (const auto& s : sets) {
    std::fill(in_set.begin(), in_set.end(), 0);
    for (Index t : s) in_set[t] = 1;
    std::vector<Index> current = s;
    for (int step = 0; step < layers; ++step) {
      std::fill(touched.begin(), touched.end(), 0);
      for (Index t : current)
        for (Index v : mesh.tets()[t]) touched[v] = 1;
      for (Index v = 0; v < mesh.num_vertices(); ++v) {
        if (!touched[v]) continue;
        for (Index t : v2t[v]) {
          if (!in_set[t]) {
            in_set[t] = 1;
            current.push_back(t);
          }
        }
      }
    }
    std::sort(current.begin(), current.end());
    out.push_back(std::move(current));
  }
  return out;
}

namespace {

// Faces with exactly one owning tet inside the set, split by whether they lie
// on the cube boundary.
void set_boundary_faces(const Mesh& mesh, const std::vector<Index>& tets,
                        std::vector<Index>& internal, std::vector<Index>& external) {
  std::map<Index, int> count;
  for (Index t : tets)
    for (Index f : mesh.tet_faces()[t]) ++count[f];
  for (const auto& [f, c] : count) {
    if (c != 1) continue;
    (mesh.face_tets()[f][1] < 0 ? external : internal).push_back(f);
  }
}

}  // namespace

std::vector<Triangle> internal_boundary_faces(const Mesh& mesh, const std::vector<Index>& tets) {
  std::vector<Index> internal, external;
  set_boundary_faces(mesh, tets, internal, external);
  std::vector<Triangle> out;
  out.reserve(internal.size());
  for (Index f : internal) out.push_back(mesh.faces()[f]);
  return out;
}

DofSets subdomain_dof_sets(const EdgeSpace& space, const ElementSets& sets) {
  const Mesh& mesh = space.mesh();
  DofSets out;
  out.reserve(sets.size());
  std::vector<char> excluded(static_cast<std::size_t>(mesh.num_edges()));
  std::vector<char> present(static_cast<std::size_t>(mesh.num_edges()));
  for (const auto& s : sets) {
    std::fill(excluded.begin(), excluded.end(), 0);
    std::fill(present.begin(), present.end(), 0);
    std::vector<Index> internal, external;
    set_boundary_faces(mesh, s, internal, external);
    for (Index f : internal) {
      const auto& tri = mesh.faces()[f];
      for (int i = 0; i < 3; ++i) excluded[mesh.find_edge(tri[i], tri[(i + 1) % 3])] = 1;
    }
    for (Index t : s)
      for (const auto& te : mesh.tet_edges()[t]) present[te.edge] = 1;
    std::vector<Index> dofs;
    for (Index e = 0; e < mesh.num_edges(); ++e)
      if (present[e] && !excluded[e] && space.dof(e) >= 0) dofs.push_back(space.dof(e));
    std::sort(dofs.begin(), dofs.end());
    out.push_back(std::move(dofs));
  }
  return out;
}

DofSets closed_dof_sets(const EdgeSpace& space, const ElementSets& sets) {
  const Mesh& mesh = space.mesh();
  DofSets out;
  std::vector<char> present(static_cast<std::size_t>(mesh.num_edges()));
  for (const auto& s : sets) {
    std::fill(present.begin(), present.end(), 0);
    for (Index t : s)
      for (const auto& te : mesh.tet_edges()[t]) present[te.edge] = 1;
    std::vector<Index> dofs;
    for (Index e = 0; e < mesh.num_edges(); ++e)
      if (present[e] && space.dof(e) >= 0) dofs.push_back(space.dof(e));
    std::sort(dofs.begin(), dofs.end());
    out.push_back(std::move(dofs));
  }
  return out;
}

std::vector<Index> uncovered_dofs(const DofSets& dofs, Index ndof) {
  std::vector<char> seen(static_cast<std::size_t>(ndof), 0);
  for (const auto& s : dofs)
    for (Index j : s) seen[j] = 1;
  std::vector<Index> out;
  for (Index j = 0; j < ndof; ++j)
    if (!seen[j]) out.push_back(j);
  return out;
}

std::vector<std::vector<double>> build_pou(const DofSets& dofs, Index ndof) {
  std::vector<int> mult(static_cast<std::size_t>(ndof), 0);
  for (const auto& s : dofs)
    for (Index j : s) ++mult[j];
  for (Index j = 0; j < ndof; ++j)
    if (mult[j] == 0)
      throw std::runtime_error("build_pou: DOF " + std::to_string(j) +
                               " is not covered by any subdomain (insufficient overlap)");
  std::vector<std::vector<double>> w;
  w.reserve(dofs.size());
  for (const auto& s : dofs) {
    std::vector<double> d(s.size());
    for (std::size_t r = 0; r < s.size(); ++r) d[r] = 1.0 / mult[s[r]];
    w.push_back(std::move(d));
  }
  return w;
}

SparseRealMatrix coarse_restriction(const EdgeSpace& fine, const EdgeSpace& coarse,
                                    const std::vector<Index>& nesting) {
  const Mesh& fm = fine.mesh();
  const Mesh& cm = coarse.mesh();
  if (static_cast<Index>(nesting.size()) != fm.num_tets())
    throw std::invalid_argument("coarse_restriction: nesting map has wrong length");
  const double gp = 0.5 / std::sqrt(3.0);
  std::map<std::pair<Index, Index>, double> entries;
  for (Index t = 0; t < fm.num_tets(); ++t) {
    const Index ct = nesting[t];
    const auto cp = cm.tet_points(ct);
    const auto cg = barycentric_gradients(cp);
    const auto& cte = cm.tet_edges()[ct];
    for (const auto& fte : fm.tet_edges()[t]) {
      const Index j = fine.dof(fte.edge);
      if (j < 0) continue;
      const auto& ev = fm.edges()[fte.edge];
      const Point& a = fm.vertices()[ev[0]];
      const Point& b = fm.vertices()[ev[1]];
      const Point tan{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
      for (int le = 0; le < 6; ++le) {
        const Index p = coarse.dof(cte[le].edge);
        if (p < 0) continue;
        double v = 0.0;
        for (double u : {0.5 - gp, 0.5 + gp}) {
          const Point x{a[0] + u * tan[0], a[1] + u * tan[1], a[2] + u * tan[2]};
          const Point w = whitney_value(cg, barycentric(cp, x), le);
          v += 0.5 * (w[0] * tan[0] + w[1] * tan[1] + w[2] * tan[2]);
        }
        v *= cte[le].sign;
        auto [it, inserted] = entries.emplace(std::make_pair(p, j), v);
        if (!inserted && std::abs(it->second - v) > 1e-10)
          throw std::runtime_error("coarse_restriction: tangential trace of coarse DOF " +
                                   std::to_string(p) + " is discontinuous along fine DOF " +
                                   std::to_string(j));
      }
    }
  }
  std::vector<Triplet<double>> trips;
  for (const auto& [key, v] : entries)
    if (std::abs(v) > 1e-14) trips.push_back({key.first, key.second, v});
  return SparseRealMatrix::from_triplets(coarse.size(), fine.size(), std::move(trips));
}

Decomposition make_decomposition(const EdgeSpace& space, int p_axis, int layers, int coarse_cells) {
  const Mesh& mesh = space.mesh();
  Decomposition d;
  d.p_axis = p_axis;
  d.overlap_layers = layers;
  d.H_sub = std::sqrt(3.0) / p_axis;
  d.partition = box_partition(mesh, p_axis);
  d.subdomain_elements = extend_overlap(mesh, d.partition, layers);
  d.subdomain_dofs = subdomain_dof_sets(space, d.subdomain_elements);
  d.pou = build_pou(d.subdomain_dofs, space.size());
  if (coarse_cells > 0) {
    auto cmesh = std::make_shared<const Mesh>(Mesh::cube(coarse_cells));
    EdgeSpace cspace(cmesh, space.bc());
    const auto nest = nesting_map(*cmesh, mesh);
    SparseRealMatrix r0 = coarse_restriction(space, cspace, nest);
    d.coarse = CoarseLink{std::move(cspace), std::move(r0)};
  }
  return d;
}

}  // namespace mxdd

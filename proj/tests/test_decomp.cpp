#include <doctest.h>

#include <random>
#include <set>

#include "mxdd/decomp.hpp"
#include "mxdd/precond.hpp"

using namespace mxdd;

namespace {

std::shared_ptr<const Mesh> cube(int n) { return std::make_shared<const Mesh>(Mesh::cube(n)); }

// One layer of vertex adjacency by brute force over all tet pairs.
std::set<Index> grow_once(const Mesh& m, const std::set<Index>& s) {
  std::set<Index> out = s;
  for (Index t = 0; t < m.num_tets(); ++t) {
    if (s.count(t)) continue;
    for (Index u : s) {
      bool share = false;
      for (Index a : m.tets()[t])
        for (Index b : m.tets()[u]) share = share || a == b;
      if (share) {
        out.insert(t);
        break;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("box partition") {
  const Mesh m = Mesh::cube(4);
  const auto parts = box_partition(m, 2);
  REQUIRE(parts.size() == 8);
  std::vector<int> owner(static_cast<std::size_t>(m.num_tets()), 0);
  for (std::size_t l = 0; l < parts.size(); ++l) {
    CHECK(parts[l].size() == 48);
    const int i = static_cast<int>(l % 2), j = static_cast<int>(l / 2 % 2), k = static_cast<int>(l / 4);
    for (Index t : parts[l]) {
      ++owner[t];
      const Point b = m.barycenter(t);
      CHECK(b[0] > 0.5 * i);
      CHECK(b[0] < 0.5 * (i + 1));
      CHECK(b[1] > 0.5 * j);
      CHECK(b[2] > 0.5 * k);
    }
  }
  for (int c : owner) CHECK(c == 1);
  CHECK(box_partition(m, 1)[0].size() == static_cast<std::size_t>(m.num_tets()));
  CHECK_THROWS(box_partition(m, 3));
}

TEST_CASE("overlap extension matches brute-force adjacency") {
  const Mesh m = Mesh::cube(4);
  const auto parts = box_partition(m, 2);
  for (int layers = 0; layers <= 2; ++layers) {
    const auto ext = extend_overlap(m, parts, layers);
    for (std::size_t l = 0; l < parts.size(); ++l) {
      std::set<Index> s(parts[l].begin(), parts[l].end());
      for (int i = 0; i < layers; ++i) s = grow_once(m, s);
      CHECK(std::vector<Index>(s.begin(), s.end()) == ext[l]);
    }
  }
  CHECK_THROWS(extend_overlap(m, parts, -1));
}

TEST_CASE("internal boundary faces of a box") {
  const Mesh m = Mesh::cube(4);
  const auto parts = box_partition(m, 2);
  // An unextended corner box has three interior sides of 2x2 cells, two triangles each.
  CHECK(internal_boundary_faces(m, parts[0]).size() == 3 * 4 * 2);
  const std::vector<Index> all = box_partition(m, 1)[0];
  CHECK(internal_boundary_faces(m, all).empty());
}

TEST_CASE("partition of unity is exact") {
  int configs = 0;
  for (auto [n, p, layers] : {std::tuple{4, 2, 1}, std::tuple{4, 2, 2}, std::tuple{6, 3, 1}, std::tuple{6, 2, 2},
                              std::tuple{6, 3, 2}, std::tuple{4, 4, 1}}) {
    for (auto bc : {BoundaryCondition::pec, BoundaryCondition::impedance}) {
      EdgeSpace space(cube(n), bc);
      const auto d = make_decomposition(space, p, layers);
      std::vector<double> diag(static_cast<std::size_t>(space.size()), 0.0);
      for (std::size_t l = 0; l < d.num_subdomains(); ++l)
        for (std::size_t r = 0; r < d.subdomain_dofs[l].size(); ++r) diag[d.subdomain_dofs[l][r]] += d.pou[l][r];
      for (double x : diag) CHECK(std::abs(x - 1.0) <= 4 * std::numeric_limits<double>::epsilon());
      // Off-diagonals vanish since each term is diagonal in the global numbering.
      for (const auto& s : d.subdomain_dofs) CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
      ++configs;
    }
  }
  CHECK(configs >= 5);
}

TEST_CASE("zero overlap leaves interface DOFs uncovered under PEC") {
  EdgeSpace space(cube(4), BoundaryCondition::pec);
  const auto sets = subdomain_dof_sets(space, box_partition(space.mesh(), 2));
  CHECK(!uncovered_dofs(sets, space.size()).empty());
  try {
    build_pou(sets, space.size());
    FAIL("expected an uncovered DOF");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("insufficient overlap") != std::string::npos);
  }
  const auto closed = closed_dof_sets(space, box_partition(space.mesh(), 2));
  CHECK(uncovered_dofs(closed, space.size()).empty());
}

TEST_CASE("Galerkin minors equal direct subdomain assembly") {
  for (auto bc : {BoundaryCondition::pec, BoundaryCondition::impedance}) {
    auto mesh = cube(4);
    EdgeSpace space(mesh, bc);
    const double k = 3.0, xi = 9.0;
    const SystemBundle sys = assemble(space, Coefficients::homogeneous(k, xi));
    const auto d = make_decomposition(space, 2, 2);
    for (std::size_t l = 0; l < d.num_subdomains(); ++l) {
      const auto& dofs = d.subdomain_dofs[l];
      const auto minor = principal_minor(sys.A, dofs);
      std::vector<Index> dof_to_local(static_cast<std::size_t>(space.size()), -1);
      for (std::size_t r = 0; r < dofs.size(); ++r) dof_to_local[dofs[r]] = static_cast<Index>(r);
      std::vector<Index> local_map(static_cast<std::size_t>(mesh->num_edges()), -1);
      for (Index e = 0; e < mesh->num_edges(); ++e)
        if (space.dof(e) >= 0) local_map[e] = dof_to_local[space.dof(e)];
      std::vector<Triangle> faces;
      if (bc == BoundaryCondition::impedance)
        for (Index t : d.subdomain_elements[l])
          for (Index f : mesh->tet_faces()[t])
            if (mesh->face_tets()[f][1] < 0) faces.push_back(mesh->faces()[f]);
      const auto parts = assemble_parts(*mesh, d.subdomain_elements[l], local_map,
                                        static_cast<Index>(dofs.size()), sys.coefficients, faces);
      const auto direct = combine_parts(parts, k, xi, 1.0);
      const DenseMatrix a = minor.to_dense(), b = direct.to_dense();
      const double scale = a.cwiseAbs().maxCoeff();
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-13 * scale);
    }
  }
}

TEST_CASE("coarse restriction") {
  for (auto bc : {BoundaryCondition::pec, BoundaryCondition::impedance}) {
    // Identical meshes give the identity.
    EdgeSpace s2(cube(2), bc);
    const auto id = coarse_restriction(s2, s2, nesting_map(s2.mesh(), s2.mesh()));
    const DenseMatrix idd = id.cast<Complex>().to_dense();
    CHECK((idd - DenseMatrix::Identity(s2.size(), s2.size())).cwiseAbs().maxCoeff() <= 1e-14);

    auto cm = cube(2), fm = cube(6);
    EdgeSpace cs(cm, bc), fs(fm, bc);
    const auto r0 = coarse_restriction(fs, cs, nesting_map(*cm, *fm));
    if (bc == BoundaryCondition::impedance) {
      // Prolonging the coarse interpolant of a constant field gives the fine interpolant.
      const Point F{0.3, -1.0, 2.0};
      const auto field = [&](const Point&) { return F; };
      const CVector ci = edge_interpolant(cs, field);
      const CVector fi = edge_interpolant(fs, field);
      const CVector pro = spmv(r0.transpose(), ci);
      double err = 0.0;
      for (Index j = 0; j < fs.size(); ++j) err = std::max(err, std::abs(pro[j] - fi[j]));
      CHECK(err <= 1e-13);
    }

    // Energy is preserved: (R0^T c)^* A_fine (R0^T c) = c^* A_coarse c.
    const SystemBundle fsys = assemble(fs, Coefficients::homogeneous(2.0, 4.0));
    const SystemBundle csys = assemble(cs, Coefficients::homogeneous(2.0, 4.0));
    const auto galerkin = triple_product(r0, fsys.A, r0.transpose());
    const DenseMatrix g = galerkin.to_dense(), c = csys.A.to_dense();
    CHECK((g - c).cwiseAbs().maxCoeff() <= 1e-12 * c.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("decomposition bookkeeping") {
  EdgeSpace space(cube(6), BoundaryCondition::pec);
  const auto d = make_decomposition(space, 3, 1, 3);
  CHECK(d.num_subdomains() == 27);
  CHECK(d.H_sub == doctest::Approx(std::sqrt(3.0) / 3));
  REQUIRE(d.coarse.has_value());
  CHECK(d.coarse->R0.rows() == d.coarse->space.size());
  CHECK(d.coarse->R0.cols() == space.size());
  CHECK_THROWS(make_decomposition(space, 3, 1, 4));
  CHECK_THROWS(make_decomposition(space, 3, 0));
}

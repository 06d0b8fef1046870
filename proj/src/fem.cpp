#include "mxdd/fem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mxdd {

namespace {

double dot3(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Point cross3(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Degree-2 tet rule: 4 points, equal weights.
constexpr double kQa = 0.5854101966249685;
constexpr double kQb = 0.1381966011250105;
constexpr std::array<std::array<double, 4>, 4> kTetRule{{{kQa, kQb, kQb, kQb},
                                                         {kQb, kQa, kQb, kQb},
                                                         {kQb, kQb, kQa, kQb},
                                                         {kQb, kQb, kQb, kQa}}};

Point at_barycentric(const std::array<Point, 4>& p, const std::array<double, 4>& l) {
  Point x{0.0, 0.0, 0.0};
  for (int v = 0; v < 4; ++v)
    for (int d = 0; d < 3; ++d) x[d] += l[v] * p[v][d];
  return x;
}

}  // namespace

EdgeSpace::EdgeSpace(std::shared_ptr<const Mesh> mesh, BoundaryCondition bc)
    : mesh_(std::move(mesh)), bc_(bc) {
  if (!mesh_) throw std::invalid_argument("EdgeSpace: null mesh");
  const auto& flags = mesh_->boundary_edge_flags();
  edge_to_dof_.assign(static_cast<std::size_t>(mesh_->num_edges()), -1);
  for (Index e = 0; e < mesh_->num_edges(); ++e) {
    if (bc_ == BoundaryCondition::pec && flags[e]) continue;
    edge_to_dof_[e] = static_cast<Index>(kept_.size());
    kept_.push_back(e);
  }
}

void Coefficients::validate(Index num_tets) const {
  auto check = [num_tets](const std::vector<double>& v, const char* name) {
    if (!v.empty() && static_cast<Index>(v.size()) != num_tets)
      throw std::invalid_argument(std::string("Coefficients: ") + name + " has " +
                                  std::to_string(v.size()) + " entries, mesh has " +
                                  std::to_string(num_tets) + " tets");
  };
  check(eps, "eps");
  check(mu, "mu");
  check(sigma, "sigma");
  for (double e : eps)
    if (!(e > 0.0)) throw std::invalid_argument("Coefficients: eps must be positive");
  for (double m : mu)
    if (!(m > 0.0)) throw std::invalid_argument("Coefficients: mu must be positive");
  for (double s : sigma)
    if (!(s >= 0.0)) throw std::invalid_argument("Coefficients: sigma must be nonnegative");
  if (!(k > 0.0)) throw std::invalid_argument("Coefficients: k must be positive");
}

std::array<Point, 4> barycentric_gradients(const std::array<Point, 4>& p) {
  Eigen::Matrix3d j;
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) j(d, c) = p[c + 1][d] - p[0][d];
  const double det = j.determinant();
  if (!(det > 0.0)) throw std::invalid_argument("barycentric_gradients: degenerate or inverted tet");
  const Eigen::Matrix3d inv = j.inverse();
  std::array<Point, 4> g{};
  for (int i = 0; i < 3; ++i) g[i + 1] = {inv(i, 0), inv(i, 1), inv(i, 2)};
  for (int d = 0; d < 3; ++d) g[0][d] = -(g[1][d] + g[2][d] + g[3][d]);
  return g;
}

ElementMatrices element_matrices(const std::array<Point, 4>& p) {
  const double vol = tet_signed_volume(p);
  if (!(vol > 0.0)) throw std::invalid_argument("element_matrices: nonpositive tet volume");
  const auto g = barycentric_gradients(p);
  auto lam = [vol](int i, int j) { return vol * (i == j ? 2.0 : 1.0) / 20.0; };

  std::array<Point, 6> curl{};
  for (int e = 0; e < 6; ++e)
    curl[e] = cross3(g[kTetEdgeVertices[e][0]], g[kTetEdgeVertices[e][1]]);

  ElementMatrices em;
  for (int e = 0; e < 6; ++e) {
    const int a = kTetEdgeVertices[e][0], b = kTetEdgeVertices[e][1];
    for (int f = e; f < 6; ++f) {
      const int c = kTetEdgeVertices[f][0], d = kTetEdgeVertices[f][1];
      em.stiffness[e][f] = 4.0 * vol * dot3(curl[e], curl[f]);
      em.mass[e][f] = lam(a, c) * dot3(g[b], g[d]) - lam(a, d) * dot3(g[b], g[c]) -
                      lam(b, c) * dot3(g[a], g[d]) + lam(b, d) * dot3(g[a], g[c]);
      // Mirror so both triangles are bit-identical.
      em.stiffness[f][e] = em.stiffness[e][f];
      em.mass[f][e] = em.mass[e][f];
    }
  }
  return em;
}

Point whitney_value(const std::array<Point, 4>& grads, const std::array<double, 4>& lambda, int le) {
  const int a = kTetEdgeVertices[le][0], b = kTetEdgeVertices[le][1];
  Point w{};
  for (int d = 0; d < 3; ++d) w[d] = lambda[a] * grads[b][d] - lambda[b] * grads[a][d];
  return w;
}

SparseRealMatrix assemble_boundary_mass(const Mesh& mesh, std::span<const Triangle> faces,
                                        std::span<const Index> edge_to_dof, Index ndof) {
  std::vector<Triplet<double>> trips;
  trips.reserve(faces.size() * 9);
  const auto& x = mesh.vertices();
  for (const auto& tri : faces) {
    const Point p0 = x[tri[0]], p1 = x[tri[1]], p2 = x[tri[2]];
    Eigen::Matrix<double, 3, 2> jac;
    for (int d = 0; d < 3; ++d) {
      jac(d, 0) = p1[d] - p0[d];
      jac(d, 1) = p2[d] - p0[d];
    }
    const Eigen::Matrix2d metric = jac.transpose() * jac;
    const double area = 0.5 * std::sqrt(metric.determinant());
    // Surface gradients of the triangle's barycentric coordinates.
    const Eigen::Matrix<double, 3, 2> gsurf = jac * metric.inverse();
    std::array<Point, 3> g{};
    for (int d = 0; d < 3; ++d) {
      g[1][d] = gsurf(d, 0);
      g[2][d] = gsurf(d, 1);
      g[0][d] = -(g[1][d] + g[2][d]);
    }
    // Triangle edges as (local low, local high) in global vertex order.
    std::array<std::array<int, 2>, 3> le{{{0, 1}, {0, 2}, {1, 2}}};
    std::array<Index, 3> dofs{};
    for (int e = 0; e < 3; ++e) {
      const Index edge = mesh.find_edge(tri[le[e][0]], tri[le[e][1]]);
      if (edge < 0) throw std::logic_error("assemble_boundary_mass: triangle edge not in mesh");
      dofs[e] = edge_to_dof[edge];
      if (tri[le[e][0]] > tri[le[e][1]]) std::swap(le[e][0], le[e][1]);
    }
    // Edge-midpoint rule, exact for the quadratic integrand.
    constexpr std::array<std::array<double, 3>, 3> pts{{{0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}}};
    std::array<std::array<double, 3>, 3> local{};
    for (const auto& l : pts) {
      std::array<Point, 3> w{};
      for (int e = 0; e < 3; ++e)
        for (int d = 0; d < 3; ++d)
          w[e][d] = l[le[e][0]] * g[le[e][1]][d] - l[le[e][1]] * g[le[e][0]][d];
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) local[i][j] += area / 3.0 * dot3(w[i], w[j]);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) local[i][j] = local[j][i];
    for (int i = 0; i < 3; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < 3; ++j)
        if (dofs[j] >= 0) trips.push_back({dofs[i], dofs[j], local[i][j]});
    }
  }
  return SparseRealMatrix::from_triplets(ndof, ndof, std::move(trips));
}

OperatorParts assemble_parts(const Mesh& mesh, std::span<const Index> tets,
                             std::span<const Index> edge_to_dof, Index ndof,
                             const Coefficients& coeffs, std::span<const Triangle> impedance_faces) {
  coeffs.validate(mesh.num_tets());
  if (static_cast<Index>(edge_to_dof.size()) != mesh.num_edges())
    throw std::invalid_argument("assemble_parts: edge map has wrong length");
  std::vector<Triplet<double>> ts, tm, tsig;
  ts.reserve(tets.size() * 36);
  tm.reserve(tets.size() * 36);
  const bool has_sigma = !coeffs.sigma.empty();
  for (Index t : tets) {
    const auto em = element_matrices(mesh.tet_points(t));
    const double inv_mu = 1.0 / coeffs.mu_at(t);
    const double eps = coeffs.eps_at(t);
    const double sig = coeffs.sigma_at(t);
    const auto& te = mesh.tet_edges()[t];
    for (int i = 0; i < 6; ++i) {
      const Index di = edge_to_dof[te[i].edge];
      if (di < 0) continue;
      for (int j = 0; j < 6; ++j) {
        const Index dj = edge_to_dof[te[j].edge];
        if (dj < 0) continue;
        const double s = te[i].sign * te[j].sign;
        ts.push_back({di, dj, s * inv_mu * em.stiffness[i][j]});
        tm.push_back({di, dj, s * eps * em.mass[i][j]});
        if (has_sigma && sig != 0.0) tsig.push_back({di, dj, s * sig * em.mass[i][j]});
      }
    }
  }
  OperatorParts parts;
  parts.stiffness = SparseRealMatrix::from_triplets(ndof, ndof, std::move(ts));
  parts.mass = SparseRealMatrix::from_triplets(ndof, ndof, std::move(tm));
  parts.sigma_mass = SparseRealMatrix::from_triplets(ndof, ndof, std::move(tsig));
  parts.boundary_mass = assemble_boundary_mass(mesh, impedance_faces, edge_to_dof, ndof);
  return parts;
}

SparseComplexMatrix combine_parts(const OperatorParts& parts, double k, double xi,
                                  double boundary_sign) {
  const Complex one(1.0, 0.0);
  SparseComplexMatrix a = sparse_add(one, parts.stiffness.cast<Complex>(), -Complex(k * k, xi),
                                     parts.mass.cast<Complex>());
  if (parts.sigma_mass.nnz() > 0)
    a = sparse_add(one, a, Complex(0.0, -k), parts.sigma_mass.cast<Complex>());
  if (parts.boundary_mass.nnz() > 0)
    a = sparse_add(one, a, Complex(0.0, -boundary_sign * k), parts.boundary_mass.cast<Complex>());
  return a;
}

std::vector<Triangle> boundary_triangles(const Mesh& mesh) {
  std::vector<Triangle> out;
  out.reserve(mesh.boundary_faces().size());
  for (const auto& bf : mesh.boundary_faces()) out.push_back(bf.vertices);
  return out;
}

Point point_source(const Point& x) {
  const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5) +
                    (x[2] - 0.5) * (x[2] - 0.5);
  const double f = -std::exp(-400.0 * r2);
  return {f, f, f};
}

CVector assemble_rhs(const EdgeSpace& space, const VectorField& source) {
  const Mesh& mesh = space.mesh();
  CVector rhs(static_cast<std::size_t>(space.size()), Complex(0.0, 0.0));
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto p = mesh.tet_points(t);
    const double vol = tet_signed_volume(p);
    const auto g = barycentric_gradients(p);
    const auto& te = mesh.tet_edges()[t];
    std::array<double, 6> local{};
    for (const auto& l : kTetRule) {
      const Point f = source(at_barycentric(p, l));
      for (int e = 0; e < 6; ++e) local[e] += 0.25 * vol * dot3(f, whitney_value(g, l, e));
    }
    for (int e = 0; e < 6; ++e) {
      const Index d = space.dof(te[e].edge);
      if (d >= 0) rhs[d] += te[e].sign * local[e];
    }
  }
  return rhs;
}

SparseRealMatrix assemble_boundary_mass(const EdgeSpace& space) {
  if (space.bc() != BoundaryCondition::impedance)
    throw std::logic_error("assemble_boundary_mass: space has PEC boundary condition");
  const auto tris = boundary_triangles(space.mesh());
  return assemble_boundary_mass(space.mesh(), tris, space.edge_to_dof(), space.size());
}

SystemBundle assemble(const EdgeSpace& space, const Coefficients& coeffs, const VectorField& source) {
  const Mesh& mesh = space.mesh();
  std::vector<Index> all(static_cast<std::size_t>(mesh.num_tets()));
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<Triangle> tris;
  if (space.bc() == BoundaryCondition::impedance) tris = boundary_triangles(mesh);
  OperatorParts parts = assemble_parts(mesh, all, space.edge_to_dof(), space.size(), coeffs, tris);

  const double k = coeffs.k;
  SparseComplexMatrix a = combine_parts(parts, k, coeffs.xi, impedance_sign(coeffs.xi));
  SparseRealMatrix dk = sparse_add(1.0, parts.stiffness, k * k, parts.mass);
  std::optional<SparseRealMatrix> mb;
  if (space.bc() == BoundaryCondition::impedance) mb = std::move(parts.boundary_mass);
  return SystemBundle{space,
                      coeffs,
                      std::move(a),
                      std::move(parts.stiffness),
                      std::move(parts.mass),
                      std::move(parts.sigma_mass),
                      std::move(mb),
                      std::move(dk),
                      assemble_rhs(space, source)};
}

CVector discrete_gradient(const EdgeSpace& space, std::span<const double> vertex_values) {
  const Mesh& mesh = space.mesh();
  if (static_cast<Index>(vertex_values.size()) != mesh.num_vertices())
    throw std::invalid_argument("discrete_gradient: wrong number of vertex values");
  CVector g(static_cast<std::size_t>(space.size()));
  for (Index d = 0; d < space.size(); ++d) {
    const auto& e = mesh.edges()[space.kept_edges()[d]];
    g[d] = vertex_values[e[1]] - vertex_values[e[0]];
  }
  return g;
}

CVector edge_interpolant(const EdgeSpace& space, const VectorField& field) {
  const Mesh& mesh = space.mesh();
  const double gp = 0.5 / std::sqrt(3.0);
  CVector out(static_cast<std::size_t>(space.size()));
  for (Index d = 0; d < space.size(); ++d) {
    const auto& e = mesh.edges()[space.kept_edges()[d]];
    const Point& a = mesh.vertices()[e[0]];
    const Point& b = mesh.vertices()[e[1]];
    const Point t{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    double s = 0.0;
    for (double u : {0.5 - gp, 0.5 + gp}) {
      const Point x{a[0] + u * t[0], a[1] + u * t[1], a[2] + u * t[2]};
      s += 0.5 * dot3(field(x), t);
    }
    out[d] = s;
  }
  return out;
}

}  // namespace mxdd

#include "mxdd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace mxdd {

namespace {

// Axis orderings of the Kuhn split; tet 6*cell + p walks the cell diagonal
// along kPermutations[p].
constexpr std::array<std::array<int, 3>, 6> kPermutations{
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double det3(const Point& a, const Point& b, const Point& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

int kuhn_permutation_index(const std::array<double, 3>& frac) {
  std::array<int, 3> order{0, 1, 2};
  // Descending fractional coordinate; ties broken by axis for determinism.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frac[a] > frac[b]; });
  for (int p = 0; p < 6; ++p)
    if (kPermutations[p] == order) return p;
  return 0;
}

}  // namespace

double tet_signed_volume(const std::array<Point, 4>& p) {
  return det3(sub(p[1], p[0]), sub(p[2], p[0]), sub(p[3], p[0])) / 6.0;
}

Mesh Mesh::cube(int n) {
  if (n < 1) throw std::invalid_argument("Mesh::cube: cells per axis must be >= 1");
  Mesh m;
  m.n_ = n;
  const Index np = n + 1;
  auto vid = [np](Index i, Index j, Index k) { return i + np * (j + np * k); };

  m.vertices_.reserve(static_cast<std::size_t>(np * np * np));
  for (Index k = 0; k <= n; ++k)
    for (Index j = 0; j <= n; ++j)
      for (Index i = 0; i <= n; ++i)
        m.vertices_.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n,
                               static_cast<double>(k) / n});

  m.tets_.reserve(static_cast<std::size_t>(6 * n * n * n));
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        for (const auto& perm : kPermutations) {
          std::array<Index, 3> c{i, j, k};
          std::array<Index, 4> tet{};
          tet[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[perm[s]];
            tet[s + 1] = vid(c[0], c[1], c[2]);
          }
          m.tets_.push_back(tet);
          if (m.volume(m.num_tets() - 1) < 0.0) {
            std::swap(m.tets_.back()[2], m.tets_.back()[3]);
          }
        }

  // Edges: unique sorted vertex pairs.
  std::vector<std::array<Index, 2>> pairs;
  pairs.reserve(m.tets_.size() * 6);
  for (const auto& t : m.tets_)
    for (const auto& le : kTetEdgeVertices)
      pairs.push_back({std::min(t[le[0]], t[le[1]]), std::max(t[le[0]], t[le[1]])});
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  m.edges_ = std::move(pairs);

  m.vertex_edges_.assign(m.vertices_.size(), {});
  for (Index e = 0; e < m.num_edges(); ++e)
    m.vertex_edges_[m.edges_[e][0]].push_back({m.edges_[e][1], e});

  m.tet_edges_.resize(m.tets_.size());
  for (Index t = 0; t < m.num_tets(); ++t) {
    const auto& tv = m.tets_[t];
    for (int le = 0; le < 6; ++le) {
      const Index a = tv[kTetEdgeVertices[le][0]];
      const Index b = tv[kTetEdgeVertices[le][1]];
      m.tet_edges_[t][le] = {m.find_edge(a, b), a < b ? 1 : -1};
    }
  }

  // Faces: unique sorted triples with their tets.
  std::vector<std::tuple<std::array<Index, 3>, Index, int>> tf;
  tf.reserve(m.tets_.size() * 4);
  for (Index t = 0; t < m.num_tets(); ++t)
    for (int f = 0; f < 4; ++f) {
      std::array<Index, 3> tri{};
      for (int s = 0; s < 3; ++s) tri[s] = m.tets_[t][kTetFaceVertices[f][s]];
      std::sort(tri.begin(), tri.end());
      tf.emplace_back(tri, t, f);
    }
  std::sort(tf.begin(), tf.end());
  m.tet_faces_.assign(m.tets_.size(), {-1, -1, -1, -1});
  for (std::size_t i = 0; i < tf.size();) {
    std::size_t j = i;
    while (j < tf.size() && std::get<0>(tf[j]) == std::get<0>(tf[i])) ++j;
    if (j - i > 2) throw std::logic_error("Mesh::cube: face shared by more than two tets");
    const Index fid = m.num_faces();
    m.faces_.push_back(std::get<0>(tf[i]));
    std::array<Index, 2> owners{std::get<1>(tf[i]), j - i == 2 ? std::get<1>(tf[i + 1]) : -1};
    m.face_tets_.push_back(owners);
    for (std::size_t q = i; q < j; ++q) m.tet_faces_[std::get<1>(tf[q])][std::get<2>(tf[q])] = fid;
    i = j;
  }

  m.boundary_edge_.assign(m.edges_.size(), false);
  for (Index f = 0; f < m.num_faces(); ++f) {
    if (m.face_tets_[f][1] >= 0) continue;
    const auto& tri = m.faces_[f];
    int side = -1;
    for (int axis = 0; axis < 3 && side < 0; ++axis)
      for (int end = 0; end < 2 && side < 0; ++end) {
        const double c = end;
        bool on = true;
        for (Index v : tri) on = on && m.vertices_[v][axis] == c;
        if (on) side = 2 * axis + end;
      }
    if (side < 0) throw std::logic_error("Mesh::cube: unmatched boundary face");
    m.boundary_faces_.push_back({tri, m.face_tets_[f][0], side});
    for (int s = 0; s < 3; ++s)
      m.boundary_edge_[m.find_edge(tri[s], tri[(s + 1) % 3])] = true;
  }
  return m;
}

double Mesh::diameter() const { return std::sqrt(3.0) / n_; }

std::array<Point, 4> Mesh::tet_points(Index t) const {
  const auto& tv = tets_[t];
  return {vertices_[tv[0]], vertices_[tv[1]], vertices_[tv[2]], vertices_[tv[3]]};
}

Point Mesh::barycenter(Index t) const {
  Point c{0.0, 0.0, 0.0};
  for (Index v : tets_[t])
    for (int d = 0; d < 3; ++d) c[d] += 0.25 * vertices_[v][d];
  return c;
}

double Mesh::volume(Index t) const { return tet_signed_volume(tet_points(t)); }

Index Mesh::find_edge(Index a, Index b) const {
  if (a > b) std::swap(a, b);
  if (a < 0 || a >= num_vertices()) return -1;
  for (const auto& [other, e] : vertex_edges_[a])
    if (other == b) return e;
  return -1;
}

std::vector<std::vector<Index>> Mesh::vertex_to_tets() const {
  std::vector<std::vector<Index>> out(vertices_.size());
  for (Index t = 0; t < num_tets(); ++t)
    for (Index v : tets_[t]) out[v].push_back(t);
  return out;
}

std::array<double, 4> barycentric(const std::array<Point, 4>& p, const Point& x) {
  const double vol = det3(sub(p[1], p[0]), sub(p[2], p[0]), sub(p[3], p[0]));
  std::array<double, 4> l{};
  l[1] = det3(sub(x, p[0]), sub(p[2], p[0]), sub(p[3], p[0])) / vol;
  l[2] = det3(sub(p[1], p[0]), sub(x, p[0]), sub(p[3], p[0])) / vol;
  l[3] = det3(sub(p[1], p[0]), sub(p[2], p[0]), sub(x, p[0])) / vol;
  l[0] = 1.0 - l[1] - l[2] - l[3];
  return l;
}

std::vector<Index> nesting_map(const Mesh& coarse, const Mesh& fine) {
  const int nc = coarse.cells_per_axis();
  const int nf = fine.cells_per_axis();
  if (nf % nc != 0)
    throw std::invalid_argument("nesting_map: fine resolution " + std::to_string(nf) +
                                " is not a multiple of coarse resolution " +
                                std::to_string(nc));
  constexpr double tol = 1e-12;
  std::vector<Index> map(static_cast<std::size_t>(fine.num_tets()));
  for (Index t = 0; t < fine.num_tets(); ++t) {
    const Point b = fine.barycenter(t);
    std::array<Index, 3> cell{};
    std::array<double, 3> frac{};
    for (int d = 0; d < 3; ++d) {
      const double s = b[d] * nc;
      cell[d] = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, nc - 1);
      frac[d] = s - static_cast<double>(cell[d]);
    }
    const Index c = cell[0] + nc * (cell[1] + static_cast<Index>(nc) * cell[2]);
    const Index ct = 6 * c + kuhn_permutation_index(frac);
    const auto cp = coarse.tet_points(ct);
    for (const Point& x : fine.tet_points(t)) {
      const auto l = barycentric(cp, x);
      for (double li : l)
        if (li < -tol)
          throw std::runtime_error("nesting_map: fine tet " + std::to_string(t) +
                                   " is not contained in coarse tet " + std::to_string(ct));
    }
    map[t] = ct;
  }
  return map;
}

void write_mesh_text(const Mesh& mesh, std::ostream& os) {
  os << "VERTICES " << mesh.num_vertices() << '\n';
  for (const auto& v : mesh.vertices()) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  os << "TETS " << mesh.num_tets() << '\n';
  for (const auto& t : mesh.tets()) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  os << "EDGES " << mesh.num_edges() << '\n';
  for (Index e = 0; e < mesh.num_edges(); ++e)
    os << mesh.edges()[e][0] << ' ' << mesh.edges()[e][1] << ' '
       << (mesh.boundary_edge_flags()[e] ? 1 : 0) << '\n';
}

}  // namespace mxdd

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mxdd {

using Index = std::int64_t;
using Point = std::array<double, 3>;

/// Local edge k of a tet joins local vertices kTetEdgeVertices[k][0] -> [1].
inline constexpr std::array<std::array<int, 2>, 6> kTetEdgeVertices{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Local face f of a tet is opposite local vertex f.
inline constexpr std::array<std::array<int, 3>, 4> kTetFaceVertices{
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

struct TetEdge {
  Index edge;
  int sign;  // +1 if the local edge direction matches the global one
};

struct BoundaryFace {
  std::array<Index, 3> vertices;  // ascending
  Index tet;
  int side;  // 0..5: x=0, x=1, y=0, y=1, z=0, z=1
};

/// Structured Kuhn triangulation of the unit cube: every one of the n^3
/// cells is split into 6 tets around its (0,0,0)-(1,1,1) diagonal.
///
/// Global edges run from the lower to the higher vertex index. Faces are
/// stored as ascending vertex triples with the adjacent tets.
class Mesh {
 public:
  static Mesh cube(int n);

  int cells_per_axis() const { return n_; }
  double h_axis() const { return 1.0 / n_; }
  double diameter() const;

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<Index, 4>>& tets() const { return tets_; }
  const std::vector<std::array<Index, 2>>& edges() const { return edges_; }
  const std::vector<std::array<TetEdge, 6>>& tet_edges() const { return tet_edges_; }
  const std::vector<std::array<Index, 3>>& faces() const { return faces_; }
  /// Per face: the one or two tets sharing it (second is -1 on the boundary).
  const std::vector<std::array<Index, 2>>& face_tets() const { return face_tets_; }
  const std::vector<std::array<Index, 4>>& tet_faces() const { return tet_faces_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }
  const std::vector<bool>& boundary_edge_flags() const { return boundary_edge_; }

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_tets() const { return static_cast<Index>(tets_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index num_faces() const { return static_cast<Index>(faces_.size()); }

  std::array<Point, 4> tet_points(Index t) const;
  Point barycenter(Index t) const;
  /// Signed volume under the stored vertex order.
  double volume(Index t) const;

  /// Edge index for a vertex pair (any order), or -1.
  Index find_edge(Index a, Index b) const;

  /// Tets sharing at least one vertex, per vertex.
  std::vector<std::vector<Index>> vertex_to_tets() const;

 private:
  int n_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::array<Index, 4>> tets_;
  std::vector<std::array<Index, 2>> edges_;
  std::vector<std::array<TetEdge, 6>> tet_edges_;
  std::vector<std::array<Index, 3>> faces_;
  std::vector<std::array<Index, 2>> face_tets_;
  std::vector<std::array<Index, 4>> tet_faces_;
  std::vector<BoundaryFace> boundary_faces_;
  std::vector<bool> boundary_edge_;
  std::vector<std::vector<std::pair<Index, Index>>> vertex_edges_;  // (other vertex, edge)
};

double tet_signed_volume(const std::array<Point, 4>& p);

/// Maps each fine tet to the coarse tet containing it. Both meshes must come
/// from Mesh::cube with fine resolution a multiple of the coarse one; the
/// containment of every fine vertex is checked to 1e-12.
std::vector<Index> nesting_map(const Mesh& coarse, const Mesh& fine);

/// Barycentric coordinates of x with respect to the tet p.
std::array<double, 4> barycentric(const std::array<Point, 4>& p, const Point& x);

/// Debug dump: VERTICES/TETS/EDGES sections, one entity per line.
void write_mesh_text(const Mesh& mesh, std::ostream& os);

}  // namespace mxdd

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "steklov/error.hpp"
#include "steklov/types.hpp"

namespace steklov {

/// How boundary vertices are treated by refine_uniform.
enum class MeshKind { Generic, Cube, Ball };

/// Local vertex pairs of the six tetrahedron edges. The order is fixed and shared by all
/// element routines.
inline constexpr std::array<std::array<int, 2>, 6> kTetEdges{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Tetrahedral volume mesh.
///
/// `vertices`, `tets` and `region` are the primary data; everything else is derived by
/// build_topology(). Edges are sorted vertex pairs (low, high) in lexicographic order, so
/// the intrinsic direction of an edge is low index to high index. `tet_edge_sign[t][k]` is
/// +1 when local edge k of tet t runs low to high in global numbering and -1 otherwise.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<int> region;
  MeshKind kind = MeshKind::Generic;

  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 6>> tet_edges;
  std::vector<std::array<signed char, 6>> tet_edge_sign;
  std::vector<std::array<int, 3>> boundary_faces;  // outward oriented
  std::vector<int> boundary_face_tet;
  std::vector<char> boundary_edge;   // per global edge: lies on ∂Ω
  std::vector<char> boundary_vertex;  // per vertex: lies on ∂Ω

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  /// Global index of edge (a, b), in either order; -1 if absent.
  int find_edge(int a, int b) const {
    const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    return (it != edges.end() && *it == key) ? static_cast<int>(it - edges.begin()) : -1;
  }
};

/// Closed triangulated boundary surface extracted from a Mesh.
struct SurfaceMesh {
  std::vector<int> volume_vertex;       // surface vertex -> volume vertex
  std::vector<int> surface_vertex;      // volume vertex -> surface vertex, -1 for interior
  std::vector<std::array<int, 3>> triangles;  // surface vertex indices, outward oriented
  std::vector<Vec3> normal;             // unit outward normal per triangle
  std::vector<Vec3> tangent1, tangent2; // orthonormal tangent frame, t1 x t2 = normal
  std::vector<double> area;
  std::vector<std::array<int, 3>> tri_edges;  // global (volume) edge index of each triangle side
  std::vector<int> edges;               // sorted global indices of all boundary edges

  int num_vertices() const { return static_cast<int>(volume_vertex.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }
};

inline double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

inline double tet_volume(const Mesh& mesh, int t) {
  const auto& v = mesh.tets[t];
  return signed_volume(mesh.vertices[v[0]], mesh.vertices[v[1]], mesh.vertices[v[2]], mesh.vertices[v[3]]);
}

inline Vec3 tet_centroid(const Mesh& mesh, int t) {
  const auto& v = mesh.tets[t];
  return 0.25 * (mesh.vertices[v[0]] + mesh.vertices[v[1]] + mesh.vertices[v[2]] + mesh.vertices[v[3]]);
}

inline double total_volume(const Mesh& mesh) {
  double sum = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) sum += tet_volume(mesh, t);
  return sum;
}

namespace detail {

inline std::array<int, 3> sorted3(int a, int b, int c) {
  std::array<int, 3> f{a, b, c};
  std::sort(f.begin(), f.end());
  return f;
}

}  // namespace detail

/// Recomputes orientation, edges and boundary from vertices/tets/region.
/// Negatively oriented tetrahedra are flipped; degenerate ones and faces shared by more
/// than two tetrahedra raise malformed-mesh.
inline void build_topology(Mesh& mesh) {
  const int nt = mesh.num_tets();
  const int nv = mesh.num_vertices();
  require(static_cast<int>(mesh.region.size()) == nt, ErrorKind::MalformedMesh, "region list length differs from tet count");

  for (int t = 0; t < nt; ++t) {
    auto& v = mesh.tets[t];
    for (int k = 0; k < 4; ++k)
      require(v[k] >= 0 && v[k] < nv, ErrorKind::MalformedMesh, "tet " + std::to_string(t) + " references a missing vertex");
    double vol = tet_volume(mesh, t);
    if (vol < 0) {
      std::swap(v[2], v[3]);
      vol = -vol;
    }
    const Vec3 span = mesh.vertices[v[1]] - mesh.vertices[v[0]];
    require(vol > 1e-14 * std::pow(span.norm(), 3), ErrorKind::MalformedMesh, "tet " + std::to_string(t) + " is degenerate");
  }

  // edges
  std::vector<std::array<int, 2>> all;
  all.reserve(6 * static_cast<std::size_t>(nt));
  for (const auto& v : mesh.tets)
    for (const auto& [i, j] : kTetEdges) all.push_back({std::min(v[i], v[j]), std::max(v[i], v[j])});
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  mesh.edges = std::move(all);

  mesh.tet_edges.assign(nt, {});
  mesh.tet_edge_sign.assign(nt, {});
  for (int t = 0; t < nt; ++t) {
    const auto& v = mesh.tets[t];
    for (int k = 0; k < 6; ++k) {
      const int a = v[kTetEdges[k][0]], b = v[kTetEdges[k][1]];
      mesh.tet_edges[t][k] = mesh.find_edge(a, b);
      mesh.tet_edge_sign[t][k] = a < b ? 1 : -1;
    }
  }

  // faces: (sorted vertices, tet, local opposite vertex)
  std::vector<std::tuple<std::array<int, 3>, int, int>> faces;
  faces.reserve(4 * static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const auto& v = mesh.tets[t];
    for (int k = 0; k < 4; ++k)
      faces.emplace_back(detail::sorted3(v[(k + 1) % 4], v[(k + 2) % 4], v[(k + 3) % 4]), t, k);
  }
  std::sort(faces.begin(), faces.end());

  mesh.boundary_faces.clear();
  mesh.boundary_face_tet.clear();
  mesh.boundary_vertex.assign(nv, 0);
  for (std::size_t i = 0; i < faces.size();) {
    std::size_t j = i;
    while (j < faces.size() && std::get<0>(faces[j]) == std::get<0>(faces[i])) ++j;
    require(j - i <= 2, ErrorKind::MalformedMesh, "face shared by more than two tetrahedra");
    if (j - i == 1) {
      auto [f, t, k] = faces[i];
      const Vec3& opposite = mesh.vertices[mesh.tets[t][k]];
      const Vec3& a = mesh.vertices[f[0]];
      const Vec3 n = (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a);
      if (n.dot(a - opposite) < 0) std::swap(f[1], f[2]);
      mesh.boundary_faces.push_back(f);
      mesh.boundary_face_tet.push_back(t);
      for (int x : f) mesh.boundary_vertex[x] = 1;
    }
    i = j;
  }

  mesh.boundary_edge.assign(mesh.edges.size(), 0);
  for (const auto& f : mesh.boundary_faces)
    for (int k = 0; k < 3; ++k) mesh.boundary_edge[mesh.find_edge(f[k], f[(k + 1) % 3])] = 1;
}

/// Unit cube [0,1]³ cut into n³ subcubes of six tetrahedra each (Kuhn triangulation).
inline Mesh generate_cube_mesh(int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "cube mesh needs n >= 1");
  Mesh mesh;
  mesh.kind = MeshKind::Cube;
  const int m = n + 1;
  auto id = [m](int i, int j, int k) { return i + m * (j + m * k); };
  mesh.vertices.reserve(static_cast<std::size_t>(m) * m * m);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) mesh.vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);

  static constexpr std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            tet[s + 1] = id(c[0], c[1], c[2]);
          }
          mesh.tets.push_back(tet);
        }
  mesh.region.assign(mesh.tets.size(), 0);
  build_topology(mesh);
  return mesh;
}

/// Red (1:8) refinement. The interior octahedron of each tet is cut along its shortest
/// diagonal. For ball meshes, midpoints of boundary edges are projected to the unit sphere.
inline Mesh refine_uniform(const Mesh& coarse) {
  Mesh fine;
  fine.kind = coarse.kind;
  fine.vertices = coarse.vertices;
  const int nv = coarse.num_vertices();
  fine.vertices.reserve(nv + coarse.edges.size());
  for (std::size_t e = 0; e < coarse.edges.size(); ++e) {
    const auto [a, b] = coarse.edges[e];
    Vec3 mid = 0.5 * (coarse.vertices[a] + coarse.vertices[b]);
    if (coarse.kind == MeshKind::Ball && coarse.boundary_edge[e]) mid.normalize();
    fine.vertices.push_back(mid);
  }

  fine.tets.reserve(8 * coarse.tets.size());
  fine.region.reserve(8 * coarse.tets.size());
  for (int t = 0; t < coarse.num_tets(); ++t) {
    const auto& v = coarse.tets[t];
    // m[i][j]: fine vertex at the midpoint of local edge (i, j)
    std::array<std::array<int, 4>, 4> m{};
    for (int k = 0; k < 6; ++k) {
      const auto [i, j] = kTetEdges[k];
      m[i][j] = m[j][i] = nv + coarse.tet_edges[t][k];
    }
    const std::array<std::array<int, 4>, 4> corners{{
        {v[0], m[0][1], m[0][2], m[0][3]},
        {m[0][1], v[1], m[1][2], m[1][3]},
        {m[0][2], m[1][2], v[2], m[2][3]},
        {m[0][3], m[1][3], m[2][3], v[3]},
    }};
    for (const auto& c : corners) fine.tets.push_back(c);

    // Octahedron diagonals joining midpoints of opposite edges.
    const std::array<std::array<int, 2>, 3> diag{{{m[0][1], m[2][3]}, {m[0][2], m[1][3]}, {m[0][3], m[1][2]}}};
    int best = 0;
    double best_len = 1e300;
    for (int d = 0; d < 3; ++d) {
      const double len = (fine.vertices[diag[d][0]] - fine.vertices[diag[d][1]]).squaredNorm();
      if (len < best_len * (1.0 - 1e-12)) {
        best_len = len;
        best = d;
      }
    }
    // The four remaining octahedron vertices, in cyclic order around the chosen diagonal.
    std::array<int, 4> ring{};
    if (best == 0) ring = {m[0][2], m[0][3], m[1][3], m[1][2]};
    if (best == 1) ring = {m[0][1], m[0][3], m[2][3], m[1][2]};
    if (best == 2) ring = {m[0][1], m[0][2], m[2][3], m[1][3]};
    for (int r = 0; r < 4; ++r)
      fine.tets.push_back({diag[best][0], diag[best][1], ring[r], ring[(r + 1) % 4]});
    for (int k = 0; k < 8; ++k) fine.region.push_back(coarse.region[t]);
  }
  build_topology(fine);
  return fine;
}

/// Red refinements applied to the eight-tet octahedron to form the level-0 ball.
inline constexpr int kBallSeedRefinements = 2;

/// Unit ball from red refinements of an eight-tet octahedron, boundary vertices re-projected
/// to the sphere after each refinement. Level 0 is the seed refined kBallSeedRefinements
/// times (129 vertices); each level multiplies the tet count by 8.
inline Mesh generate_ball_mesh(int level) {
  require(level >= 0, ErrorKind::InvalidArgument, "ball mesh level must be >= 0");
  Mesh mesh;
  mesh.kind = MeshKind::Ball;
  mesh.vertices = {Vec3::Zero(), Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  for (int sx : {1, 2})
    for (int sy : {3, 4})
      for (int sz : {5, 6}) mesh.tets.push_back({0, sx, sy, sz});
  mesh.region.assign(mesh.tets.size(), 0);
  build_topology(mesh);
  for (int l = 0; l < level + kBallSeedRefinements; ++l) mesh = refine_uniform(mesh);
  return mesh;
}

/// Boundary surface with tangent frames and boundary-edge bookkeeping.
inline SurfaceMesh extract_boundary(const Mesh& mesh) {
  SurfaceMesh s;
  s.surface_vertex.assign(mesh.num_vertices(), -1);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.boundary_vertex[v]) {
      s.surface_vertex[v] = static_cast<int>(s.volume_vertex.size());
      s.volume_vertex.push_back(v);
    }
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.boundary_edge[e]) s.edges.push_back(e);

  std::vector<int> edge_use(mesh.num_edges(), 0);
  const auto nf = mesh.boundary_faces.size();
  s.triangles.reserve(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& face = mesh.boundary_faces[f];
    const Vec3& a = mesh.vertices[face[0]];
    const Vec3& b = mesh.vertices[face[1]];
    const Vec3& c = mesh.vertices[face[2]];
    const Vec3 cross = (b - a).cross(c - a);
    const double twice_area = cross.norm();
    require(twice_area > 0, ErrorKind::MalformedMesh, "boundary triangle with zero area");
    const Vec3 n = cross / twice_area;
    const Vec3 t1 = (b - a).normalized();
    s.triangles.push_back({s.surface_vertex[face[0]], s.surface_vertex[face[1]], s.surface_vertex[face[2]]});
    s.normal.push_back(n);
    s.tangent1.push_back(t1);
    s.tangent2.push_back(n.cross(t1));
    s.area.push_back(0.5 * twice_area);
    std::array<int, 3> te{};
    for (int k = 0; k < 3; ++k) {
      te[k] = mesh.find_edge(face[k], face[(k + 1) % 3]);
      ++edge_use[te[k]];
    }
    s.tri_edges.push_back(te);
  }
  for (int e : s.edges)
    require(edge_use[e] == 2, ErrorKind::MalformedMesh, "boundary surface is not closed (edge " + std::to_string(e) + ")");
  return s;
}

}  // namespace steklov

#pragma once

#include <cmath>
#include <vector>

#include "steklov/assembly.hpp"
#include "steklov/error.hpp"
#include "steklov/linalg.hpp"
#include "steklov/materials.hpp"
#include "steklov/mesh.hpp"

namespace steklov {

/// P1 discretization of
///   -div(mu^{-1} grad u) - omega^2 eps u = 0 in Ω,   nu . mu^{-1} grad u = lambda u on ∂Ω
/// as the pencil (K - omega^2 M) u = lambda B_bd u on vertex dofs.
///
/// B_bd is the boundary mass matrix; its kernel is the set of interior vertices, so the
/// pencil is singular and carries infinite eigenvalues.
struct ScalarPencil {
  CSparse K;
  CSparse M;
  RSparse B_bd;
  double omega = 0.0;
  std::vector<int> interior_dofs;
  std::vector<int> boundary_dofs;

  Eigen::Index size() const { return K.rows(); }
  CSparse A0() const { return K - (omega * omega) * M; }
};

namespace detail {

/// Scalar value of an isotropic tensor; the scalar problem accepts only multiples of I.
inline cplx isotropic_value(const CMat3& a) {
  const cplx s = a.trace() / 3.0;
  const double scale = std::max(a.norm(), 1e-300);
  require((a - s * CMat3::Identity()).norm() <= 1e-12 * scale, ErrorKind::ConfigError,
          "scalar problem needs an isotropic eps (multiple of the identity)");
  return s;
}

}  // namespace detail

inline ScalarPencil assemble_scalar(const Mesh& mesh, const MaterialField& mu_inv, const MaterialField& eps, double omega) {
  require(mu_inv.size() == mesh.tets.size() && eps.size() == mesh.tets.size(), ErrorKind::ConfigError,
          "material fields do not match the mesh");
  const auto nv = mesh.num_vertices();
  ScalarPencil p;
  p.omega = omega;

  auto k_trip = collect_triplets<cplx>(mesh.tets.size(), 16, [&](std::size_t t, Triplets<cplx>& out) {
    const auto& v = mesh.tets[t];
    const auto g = barycentric_gradients(mesh.vertices[v[0]], mesh.vertices[v[1]], mesh.vertices[v[2]], mesh.vertices[v[3]]);
    const double vol = tet_volume(mesh, static_cast<int>(t));
    const CMat3& a = mu_inv[t];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const cplx kij = vol * (g[i].cast<cplx>().transpose() * a * g[j].cast<cplx>()).value();
        out.emplace_back(v[i], v[j], kij);
      }
  });
  auto m_trip = collect_triplets<cplx>(mesh.tets.size(), 16, [&](std::size_t t, Triplets<cplx>& out) {
    const auto& v = mesh.tets[t];
    const double vol = tet_volume(mesh, static_cast<int>(t));
    const cplx e = detail::isotropic_value(eps[t]);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out.emplace_back(v[i], v[j], e * vol * (i == j ? 2.0 : 1.0) / 20.0);
  });
  auto b_trip = collect_triplets<double>(mesh.boundary_faces.size(), 9, [&](std::size_t f, Triplets<double>& out) {
    const auto& face = mesh.boundary_faces[f];
    const double area =
        0.5 * (mesh.vertices[face[1]] - mesh.vertices[face[0]]).cross(mesh.vertices[face[2]] - mesh.vertices[face[0]]).norm();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.emplace_back(face[i], face[j], area * (i == j ? 2.0 : 1.0) / 12.0);
  });
  p.K = from_triplets<cplx>(nv, nv, k_trip);
  p.M = from_triplets<cplx>(nv, nv, m_trip);
  p.B_bd = from_triplets<double>(nv, nv, b_trip);
  for (int v = 0; v < nv; ++v) (mesh.boundary_vertex[v] ? p.boundary_dofs : p.interior_dofs).push_back(v);
  return p;
}

/// sigma_min / sigma_max of (K - omega^2 M) restricted to interior vertices: the discrete
/// Dirichlet problem. Values near zero mean omega^2 sits on a Dirichlet eigenvalue.
inline SingularEstimate scalar_dirichlet_diagnostic(const ScalarPencil& pencil) {
  const CSparse a_ii = restrict_square(CSparse(pencil.A0()), pencil.interior_dofs);
  return extreme_singular_values(a_ii);
}

}  // namespace steklov

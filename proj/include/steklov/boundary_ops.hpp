#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "steklov/assembly.hpp"
#include "steklov/error.hpp"
#include "steklov/linalg.hpp"
#include "steklov/mesh.hpp"

namespace steklov {

/// Surface field S u: one constant tangential vector per boundary triangle, plus the
/// mean-zero surface potential p with S u = grad_Γ p.
struct SurfaceField {
  std::vector<Eigen::Vector3cd> field;
  CVec potential;
};

/// Discrete S = -grad_Γ Δ_Γ^{-1} div_Γ (nu x .) on a closed triangulated boundary.
///
/// With surface hat functions q_j and edge basis functions phi_i:
///   L[j,k] = <grad_Γ q_j, grad_Γ q_k>             (surface stiffness, kernel = constants)
///   D[j,i] = -<(nu x phi_i), grad_Γ q_j>          (rows: surface vertices, cols: edges)
/// S u is grad_Γ p where L p = D u and sum_j w_j p_j = 0 for the lumped surface mass w.
/// This sign choice reproduces the leading minus of S; the boundary form
/// B = D^T L^+ D = <S u, S u'> does not depend on it.
///
/// L is factored once with one surface vertex pinned. Pinning gives a solution that differs
/// from the mean-zero one by a constant, which is then removed by the rank-one projection
/// onto mean zero. Since 1^T D = 0, the pinned inverse already gives the exact B.
class SurfaceOperatorSet {
 public:
  SurfaceOperatorSet(const Mesh& mesh, SurfaceMesh surface) : surface_(std::move(surface)) {
    require(!surface_.triangles.empty(), ErrorKind::MalformedMesh, "mesh has no boundary surface");
    const int ns = surface_.num_vertices();
    num_edges_ = mesh.num_edges();
    std::vector<int> edge_use(num_edges_, 0);
    for (const auto& te : surface_.tri_edges)
      for (int e : te) {
        require(e >= 0 && e < num_edges_, ErrorKind::MalformedMesh, "surface edge not in the volume mesh");
        ++edge_use[e];
      }
    for (int u : edge_use) require(u == 0 || u == 2, ErrorKind::MalformedMesh, "boundary surface is not closed");

    grad_.resize(surface_.triangles.size());
    for (std::size_t t = 0; t < surface_.triangles.size(); ++t) {
      const auto& tri = surface_.triangles[t];
      const Vec3& n = surface_.normal[t];
      const double twice_area = 2.0 * surface_.area[t];
      std::array<Vec3, 3> x;
      for (int k = 0; k < 3; ++k) x[k] = mesh.vertices[surface_.volume_vertex[tri[k]]];
      for (int k = 0; k < 3; ++k) grad_[t][k] = n.cross(x[(k + 2) % 3] - x[(k + 1) % 3]) / twice_area;
    }

    auto l_trip = collect_triplets<double>(surface_.triangles.size(), 9, [&](std::size_t t, Triplets<double>& out) {
      const auto& tri = surface_.triangles[t];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.emplace_back(tri[i], tri[j], surface_.area[t] * grad_[t][i].dot(grad_[t][j]));
    });
    L_ = from_triplets<double>(ns, ns, l_trip);

    auto d_trip = collect_triplets<double>(surface_.triangles.size(), 9, [&](std::size_t t, Triplets<double>& out) {
      const auto& tri = surface_.triangles[t];
      const Vec3& n = surface_.normal[t];
      for (int k = 0; k < 3; ++k) {
        // side k joins local vertices k and k+1; orient it low -> high volume index
        int a = k, b = (k + 1) % 3;
        if (surface_.volume_vertex[tri[a]] > surface_.volume_vertex[tri[b]]) std::swap(a, b);
        // ∫_T phi_e = |T|/3 (grad λ_b - grad λ_a) for phi_e = λ_a grad λ_b - λ_b grad λ_a
        const Vec3 mean_phi = surface_.area[t] / 3.0 * (grad_[t][b] - grad_[t][a]);
        const Vec3 rotated = n.cross(mean_phi);
        for (int j = 0; j < 3; ++j) out.emplace_back(tri[j], surface_.tri_edges[t][k], -rotated.dot(grad_[t][j]));
      }
    });
    D_ = from_triplets<double>(ns, num_edges_, d_trip);

    weights_ = RVec::Zero(ns);
    for (std::size_t t = 0; t < surface_.triangles.size(); ++t)
      for (int k = 0; k < 3; ++k) weights_(surface_.triangles[t][k]) += surface_.area[t] / 3.0;

    // pinned factorization: drop surface vertex 0
    keep_.resize(ns - 1);
    for (int j = 1; j < ns; ++j) keep_[j - 1] = j;
    L_rr_ = restrict_square(L_, keep_);
    ldlt_ = std::make_shared<Eigen::SimplicialLDLT<RSparse>>(L_rr_);
    require(ldlt_->info() == Eigen::Success, ErrorKind::MalformedMesh, "surface Laplacian is singular beyond constants");
    const double dmin = ldlt_->vectorD().minCoeff();
    const double dmax = ldlt_->vectorD().maxCoeff();
    require(dmin > 1e-13 * dmax, ErrorKind::MalformedMesh, "surface Laplacian is singular beyond constants (disconnected boundary?)");

    RSparse sel(ns - 1, ns);
    for (int j = 1; j < ns; ++j) sel.insert(j - 1, j) = 1.0;
    D_r_ = sel * D_;
    D_r_.makeCompressed();
  }

  const SurfaceMesh& surface() const { return surface_; }
  const RSparse& L() const { return L_; }
  const RSparse& D() const { return D_; }
  const RVec& lumped_weights() const { return weights_; }
  int num_edges() const { return num_edges_; }
  int num_surface_vertices() const { return surface_.num_vertices(); }
  /// Surface gradients of the three hat functions of triangle t.
  const std::array<Vec3, 3>& hat_gradients(int t) const { return grad_[t]; }

  /// Mean-zero p with L p = f (f must be orthogonal to constants).
  CVec solve_surface(const CVec& f) const {
    const int ns = num_surface_vertices();
    CVec p = CVec::Zero(ns);
    RVec re(ns - 1), im(ns - 1);
    for (int j = 1; j < ns; ++j) {
      re(j - 1) = f(j).real();
      im(j - 1) = f(j).imag();
    }
    const RVec xr = ldlt_->solve(re), xi = ldlt_->solve(im);
    for (int j = 1; j < ns; ++j) p(j) = cplx(xr(j - 1), xi(j - 1));
    const cplx mean = (weights_.cast<cplx>().dot(p)) / weights_.sum();
    p.array() -= mean;
    return p;
  }

  SurfaceField apply_S(const CVec& u) const {
    require(u.size() == num_edges_, ErrorKind::InvalidArgument, "edge vector has wrong length");
    SurfaceField out;
    out.potential = solve_surface(D_.cast<cplx>() * u);
    out.field.resize(surface_.triangles.size());
    for (std::size_t t = 0; t < surface_.triangles.size(); ++t) {
      Eigen::Vector3cd g = Eigen::Vector3cd::Zero();
      for (int k = 0; k < 3; ++k) g += out.potential(surface_.triangles[t][k]) * grad_[t][k].cast<cplx>();
      out.field[t] = g;
    }
    return out;
  }

  /// Bilinear <S u, S v>_{L^2(∂Ω)} from two applications of S (no conjugation).
  cplx pairing(const SurfaceField& su, const SurfaceField& sv) const {
    cplx sum = 0.0;
    for (std::size_t t = 0; t < surface_.triangles.size(); ++t) sum += surface_.area[t] * (su.field[t].transpose() * sv.field[t]).value();
    return sum;
  }

  /// B x = D^T L^+ D x, matrix-free.
  CVec apply(const CVec& x) const {
    const CVec p = solve_surface(D_.cast<cplx>() * x);
    return D_.transpose().cast<cplx>() * p;
  }

  /// Explicit B as a dense matrix on all edges; only for small meshes.
  RMat dense(int limit = 5000) const {
    require(num_edges_ <= limit, ErrorKind::InvalidArgument, "dense boundary form requested above the dense limit");
    const RMat d = RMat(D_r_);
    const RMat x = ldlt_->solve(d);
    return d.transpose() * x;
  }

  /// Explicit B as a sparse matrix (dense block on boundary edges).
  RSparse sparse(int limit = 5000) const {
    require(surface_.num_edges() <= limit, ErrorKind::InvalidArgument, "boundary form too large to assemble explicitly");
    const auto& be = surface_.edges;
    const int nb = static_cast<int>(be.size());
    RSparse d_b(D_r_.rows(), nb);
    {
      Triplets<double> t;
      for (int c = 0; c < nb; ++c)
        for (RSparse::InnerIterator it(D_r_, be[c]); it; ++it) t.emplace_back(it.row(), c, it.value());
      d_b.setFromTriplets(t.begin(), t.end());
    }
    const RMat db = RMat(d_b);
    const RMat blk = db.transpose() * ldlt_->solve(db);
    Triplets<double> t;
    t.reserve(static_cast<std::size_t>(nb) * nb);
    for (int j = 0; j < nb; ++j)
      for (int i = 0; i < nb; ++i)
        if (blk(i, j) != 0.0) t.emplace_back(be[i], be[j], 0.5 * (blk(i, j) + blk(j, i)));
    return from_triplets<double>(num_edges_, num_edges_, t);
  }

  /// Sparse saddle-point matrix whose leading block solve equals (A - sigma B)^{-1}:
  ///   [ A          -D_r^T ] [x]   [f]
  ///   [ sigma D_r  -L_rr  ] [y] = [0]
  /// eliminates to y = sigma L_rr^{-1} D_r x and (A - sigma D_r^T L_rr^{-1} D_r) x = f.
  CSparse augmented_shifted(const CSparse& a, cplx sigma) const {
    const Eigen::Index n = a.rows();
    const Eigen::Index m = L_rr_.rows();
    Triplets<cplx> t;
    t.reserve(a.nonZeros() + 2 * D_r_.nonZeros() + L_rr_.nonZeros());
    for (int k = 0; k < a.outerSize(); ++k)
      for (CSparse::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < D_r_.outerSize(); ++k)
      for (RSparse::InnerIterator it(D_r_, k); it; ++it) {
        t.emplace_back(it.col(), n + it.row(), -it.value());
        t.emplace_back(n + it.row(), it.col(), sigma * it.value());
      }
    for (int k = 0; k < L_rr_.outerSize(); ++k)
      for (RSparse::InnerIterator it(L_rr_, k); it; ++it) t.emplace_back(n + it.row(), n + it.col(), -it.value());
    return from_triplets<cplx>(n + m, n + m, t);
  }

  Eigen::Index augmented_extra() const { return L_rr_.rows(); }

 private:
  SurfaceMesh surface_;
  int num_edges_ = 0;
  std::vector<std::array<Vec3, 3>> grad_;
  RSparse L_, D_, D_r_, L_rr_;
  RVec weights_;
  std::vector<int> keep_;
  std::shared_ptr<Eigen::SimplicialLDLT<RSparse>> ldlt_;
};

inline SurfaceOperatorSet assemble_surface_operators(const SurfaceMesh& surface, const Mesh& mesh) {
  return SurfaceOperatorSet(mesh, surface);
}

inline SurfaceField apply_S(const SurfaceOperatorSet& ops, const CVec& u) { return ops.apply_S(u); }

/// B = D^T L^+ D as an explicit sparse matrix.
inline RSparse assemble_boundary_form(const SurfaceOperatorSet& ops, int limit = 5000) { return ops.sparse(limit); }

/// Discrete gradient: edges x vertices, +1 at the high end, -1 at the low end.
inline RSparse discrete_gradient(const Mesh& mesh) {
  Triplets<double> t;
  t.reserve(2 * mesh.edges.size());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    t.emplace_back(e, mesh.edges[e][0], -1.0);
    t.emplace_back(e, mesh.edges[e][1], 1.0);
  }
  return from_triplets<double>(mesh.num_edges(), mesh.num_vertices(), t);
}

/// Surface discrete gradient restricted to boundary edges: (all edges) x (surface vertices).
inline RSparse surface_gradient(const Mesh& mesh, const SurfaceMesh& surface) {
  Triplets<double> t;
  for (int e : surface.edges) {
    t.emplace_back(e, surface.surface_vertex[mesh.edges[e][0]], -1.0);
    t.emplace_back(e, surface.surface_vertex[mesh.edges[e][1]], 1.0);
  }
  return from_triplets<double>(mesh.num_edges(), surface.num_vertices(), t);
}

}  // namespace steklov

#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include "steklov/assembly.hpp"
#include "steklov/boundary_ops.hpp"
#include "steklov/error.hpp"
#include "steklov/linalg.hpp"
#include "steklov/materials.hpp"
#include "steklov/mesh.hpp"

namespace steklov {

/// Lowest-order edge-element discretization of
///   curl mu^{-1} curl u - omega^2 eps u = 0 in Ω,   nu x mu^{-1} curl u + lambda S u = 0 on ∂Ω
/// as (K_curl - omega^2 M_eps) u = lambda B u with B = <S u, S u'>.
struct MaxwellPencil {
  CSparse K;   // <mu^{-1} curl u, curl u'>
  CSparse M;   // <eps u, u'>, bilinear
  RSparse G;   // discrete gradient, edges x vertices
  std::shared_ptr<const SurfaceOperatorSet> ops;
  double omega = 0.0;
  std::vector<int> interior_edges;
  std::vector<double> vertex_weights;  // lumped vertex volumes, for mean-zero potentials

  Eigen::Index size() const { return K.rows(); }
  CSparse A0() const { return K - (omega * omega) * M; }
  const SurfaceOperatorSet& B() const { return *ops; }
};

namespace detail {

/// Element matrices of the six Whitney functions of one tet, in local orientation.
inline void whitney_element(const std::array<Vec3, 4>& x, const CMat3& mu_inv, const CMat3& eps,
                            Eigen::Matrix<cplx, 6, 6>& k, Eigen::Matrix<cplx, 6, 6>& m) {
  const auto g = barycentric_gradients(x[0], x[1], x[2], x[3]);
  const double vol = signed_volume(x[0], x[1], x[2], x[3]);
  std::array<Eigen::Vector3cd, 6> curl;
  for (int e = 0; e < 6; ++e) curl[e] = (2.0 * g[kTetEdges[e][0]].cross(g[kTetEdges[e][1]])).cast<cplx>();
  // ∫ λ_a λ_b = vol (1 + δ_ab) / 20
  auto mass = [vol](int a, int b) { return vol * (a == b ? 2.0 : 1.0) / 20.0; };
  // eg(a, b) = g_a^T eps g_b
  Eigen::Matrix<cplx, 4, 4> eg;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) eg(a, b) = (g[a].cast<cplx>().transpose() * eps * g[b].cast<cplx>()).value();
  for (int r = 0; r < 6; ++r) {
    const int i = kTetEdges[r][0], j = kTetEdges[r][1];
    for (int c = 0; c < 6; ++c) {
      const int p = kTetEdges[c][0], q = kTetEdges[c][1];
      k(r, c) = vol * (curl[r].transpose() * mu_inv * curl[c]).value();
      m(r, c) = mass(i, p) * eg(j, q) - mass(i, q) * eg(j, p) - mass(j, p) * eg(i, q) + mass(j, q) * eg(i, p);
    }
  }
}

}  // namespace detail

inline MaxwellPencil assemble_maxwell(const Mesh& mesh, const MaterialField& mu_inv, const MaterialField& eps, double omega,
                                      std::shared_ptr<const SurfaceOperatorSet> ops) {
  require(omega != 0.0, ErrorKind::InvalidArgument, "Maxwell Steklov problem needs omega != 0");
  require(mu_inv.size() == mesh.tets.size() && eps.size() == mesh.tets.size(), ErrorKind::ConfigError,
          "material fields do not match the mesh");
  require(ops && ops->num_edges() == mesh.num_edges(), ErrorKind::ConfigError, "surface operators built for another mesh");

  MaxwellPencil p;
  p.omega = omega;
  p.ops = std::move(ops);
  const auto ne = mesh.num_edges();

  Triplets<cplx> k_all, m_all;
  {
    auto both = collect_triplets<cplx>(mesh.tets.size(), 72, [&](std::size_t t, Triplets<cplx>& out) {
      const auto& v = mesh.tets[t];
      const std::array<Vec3, 4> x{mesh.vertices[v[0]], mesh.vertices[v[1]], mesh.vertices[v[2]], mesh.vertices[v[3]]};
      Eigen::Matrix<cplx, 6, 6> ke, me;
      detail::whitney_element(x, mu_inv[t], eps[t], ke, me);
      const auto& dof = mesh.tet_edges[t];
      const auto& sgn = mesh.tet_edge_sign[t];
      // stiffness entries first, then mass entries, tagged by an offset row index
      for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
          const double s = double(sgn[r]) * double(sgn[c]);
          out.emplace_back(dof[r], dof[c], s * ke(r, c));
          out.emplace_back(ne + dof[r], dof[c], s * me(r, c));
        }
    });
    k_all.reserve(both.size() / 2);
    m_all.reserve(both.size() / 2);
    for (const auto& t : both) {
      if (t.row() < ne)
        k_all.push_back(t);
      else
        m_all.emplace_back(t.row() - ne, t.col(), t.value());
    }
  }
  p.K = from_triplets<cplx>(ne, ne, k_all);
  p.M = from_triplets<cplx>(ne, ne, m_all);
  p.G = discrete_gradient(mesh);
  for (int e = 0; e < ne; ++e)
    if (!mesh.boundary_edge[e]) p.interior_edges.push_back(e);
  p.vertex_weights.assign(mesh.num_vertices(), 0.0);
  for (int t = 0; t < mesh.num_tets(); ++t)
    for (int v : mesh.tets[t]) p.vertex_weights[v] += tet_volume(mesh, t) / 4.0;
  return p;
}

/// Result of P_{V_h} u = u - grad w.
struct ProjectionResult {
  CVec projected;
  CVec potential;        // w, vertex values, volume-weighted mean zero
  double residual = 0.0; // relative residual of the scalar solve
};

/// Projection onto discretely eps-divergence-free fields:
///   G^T M G w = G^T M u,   P u = u - G w.
/// The scalar matrix is factored once (one vertex pinned) and reused.
class VhProjector {
 public:
  explicit VhProjector(const MaxwellPencil& pencil, double tol = 1e-10) : pencil_(&pencil), tol_(tol) {
    const CSparse gc = pencil.G.cast<cplx>();
    S_ = CSparse(gc.transpose() * pencil.M * gc);
    const auto nv = S_.rows();
    keep_.resize(nv - 1);
    for (int j = 1; j < nv; ++j) keep_[j - 1] = j;
    lu_.factor(restrict_square(S_, keep_), ErrorKind::SolverFailure);
    s_norm_ = norm_bound(S_);
    gm_norm_ = norm_bound(CSparse(gc.transpose() * pencil.M));
  }

  ProjectionResult operator()(const CVec& u) const {
    const MaxwellPencil& p = *pencil_;
    require(u.size() == p.size(), ErrorKind::InvalidArgument, "edge vector has wrong length");
    const CSparse gc = p.G.cast<cplx>();
    const CVec rhs = gc.transpose() * (p.M * u);
    CVec r(keep_.size());
    for (std::size_t i = 0; i < keep_.size(); ++i) r(i) = rhs(keep_[i]);
    const CVec sol = lu_.solve(r);
    ProjectionResult out;
    out.potential = CVec::Zero(S_.rows());
    for (std::size_t i = 0; i < keep_.size(); ++i) out.potential(keep_[i]) = sol(i);
    double wsum = 0.0;
    cplx mean = 0.0;
    for (Eigen::Index v = 0; v < out.potential.size(); ++v) {
      mean += p.vertex_weights[v] * out.potential(v);
      wsum += p.vertex_weights[v];
    }
    out.potential.array() -= mean / wsum;
    const CVec res = S_ * out.potential - rhs;
    const double scale = s_norm_ * out.potential.norm() + gm_norm_ * u.norm();
    out.residual = scale > 0 ? res.norm() / scale : 0.0;
    require(out.residual <= tol_, ErrorKind::SolverFailure, "scalar potential solve did not reach tolerance");
    out.projected = u - gc * out.potential;
    return out;
  }

 private:
  const MaxwellPencil* pencil_;
  double tol_;
  CSparse S_;
  double s_norm_ = 0.0, gm_norm_ = 0.0;
  std::vector<int> keep_;
  SparseLUSolver lu_;
};

inline ProjectionResult project_Vh(const MaxwellPencil& pencil, const CVec& u) { return VhProjector(pencil)(u); }

/// Outcome of the ker S injectivity check.
struct KernelDiagnostic {
  SingularEstimate singular;
  int subspace_dim = 0;      // interior edges + (surface vertices - 1) gradients
  int kernel_dim = -1;       // dim ker D computed from rank(D); -1 when skipped
  int missing_dim() const { return kernel_dim < 0 ? -1 : kernel_dim - subspace_dim; }
};

/// Basis of the tested subspace of ker S: interior-edge unit vectors followed by surface
/// gradients (one surface vertex dropped to remove the constant).
inline RSparse kernel_subspace_basis(const MaxwellPencil& pencil) {
  const auto& ops = pencil.B();
  const auto& s = ops.surface();
  const int ni = static_cast<int>(pencil.interior_edges.size());
  const int ns = s.num_vertices();
  Triplets<double> t;
  for (int i = 0; i < ni; ++i) t.emplace_back(pencil.interior_edges[i], i, 1.0);
  // boundary rows of G restricted to boundary vertices
  for (int k = 0; k < pencil.G.outerSize(); ++k)
    for (RSparse::InnerIterator it(pencil.G, k); it; ++it) {
      const int col = static_cast<int>(it.col());
      const int e = static_cast<int>(it.row());
      // keep entries on boundary edges only (interior parts are spanned by the unit vectors)
      if (std::binary_search(s.edges.begin(), s.edges.end(), e)) {
        const int sv = s.surface_vertex[col];
        if (sv > 0) t.emplace_back(e, ni + sv - 1, it.value());
      }
    }
  return from_triplets<double>(pencil.size(), ni + ns - 1, t);
}

/// Discrete check that (K - omega^2 M) is injective on ker S: smallest singular value of
/// the operator compressed to the subspace spanned by interior edges and gradients.
inline KernelDiagnostic kernelS_diagnostic(const MaxwellPencil& pencil, int rank_limit = 3000) {
  KernelDiagnostic out;
  const RSparse z = kernel_subspace_basis(pencil);
  const CSparse zc = z.cast<cplx>();
  const CSparse c = CSparse(zc.transpose() * pencil.A0() * zc);
  const RSparse w = RSparse(z.transpose() * z);
  out.singular = extreme_singular_values(c, &w);
  out.subspace_dim = static_cast<int>(z.cols());
  const auto& ops = pencil.B();
  if (ops.num_surface_vertices() <= rank_limit) {
    const RMat dd = RMat(ops.D() * ops.D().transpose());
    Eigen::ColPivHouseholderQR<RMat> qr(dd);
    qr.setThreshold(1e-10);
    out.kernel_dim = static_cast<int>(pencil.size() - qr.rank());
  }
  return out;
}

}  // namespace steklov

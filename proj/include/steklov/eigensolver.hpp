#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "steklov/boundary_ops.hpp"
#include "steklov/dense_eig.hpp"
#include "steklov/error.hpp"
#include "steklov/linalg.hpp"
#include "steklov/types.hpp"

namespace steklov {

/// Eigenpairs of A0 x = lambda B x with bookkeeping.
///
/// Every stored pair passed the backward-error certificate
///   ||A0 x - lambda B x|| / ((||A0|| + |lambda| ||B||) ||x||) <= tolerance,
/// with matrix norms bounded by sqrt(||.||_1 ||.||_inf) or estimated by power iteration.
/// Infinite eigenvalues of the singular pencil are never stored.
struct EigenResult {
  std::vector<cplx> values;
  CMat vectors;                  // columns, unit 2-norm
  std::vector<double> residuals;
  std::vector<int> cluster_id;   // filled by label_clusters
  std::vector<int> cluster_size;

  cplx shift = 0.0;
  int krylov_dim = 0;
  int restarts = 0;
  int operator_applications = 0;
  int discarded_infinite = 0;
  bool exhausted = false;  // fewer finite eigenvalues exist than requested
  bool converged = true;   // false: partial result after the iteration limit

  std::size_t size() const { return values.size(); }
};

// ---------------------------------------------------------------------------
// Boundary forms: explicit sparse B or the matrix-free surface operator.

inline CVec apply_form(const RSparse& b, const CVec& x) { return b.cast<cplx>() * x; }
inline CVec apply_form(const SurfaceOperatorSet& b, const CVec& x) { return b.apply(x); }

/// Factorization of A0 - sigma B. For the surface operator the factored matrix is the
/// sparse saddle-point system, and only the leading block of the solution is returned.
class ShiftedSolver {
 public:
  ShiftedSolver(const CSparse& m, Eigen::Index n, Eigen::Index extra) : n_(n), extra_(extra) {
    lu_.factor(m, ErrorKind::ShiftAtEigenvalue);
  }

  CVec solve(const CVec& b) const {
    if (extra_ == 0) return lu_.solve(b);
    CVec padded = CVec::Zero(n_ + extra_);
    padded.head(n_) = b;
    return lu_.solve(padded).head(n_);
  }

 private:
  Eigen::Index n_, extra_;
  SparseLUSolver lu_;
};

inline ShiftedSolver shifted_solver(const CSparse& a0, const RSparse& b, cplx sigma) {
  return ShiftedSolver(CSparse(a0 - sigma * b.cast<cplx>()), a0.rows(), 0);
}

inline ShiftedSolver shifted_solver(const CSparse& a0, const SurfaceOperatorSet& b, cplx sigma) {
  return ShiftedSolver(b.augmented_shifted(a0, sigma), a0.rows(), b.augmented_extra());
}

inline double form_norm(const RSparse& b) { return norm_bound(b); }

/// ||B|| of the surface form by power iteration (B is symmetric positive semidefinite).
inline double form_norm(const SurfaceOperatorSet& b) {
  UniformSource rng(11);
  CVec x = rng.complex_vector(b.num_edges());
  double est = 0.0;
  for (int it = 0; it < 30 && x.norm() > 0; ++it) {
    x /= x.norm();
    x = b.apply(x);
    est = x.norm();
  }
  return est;
}

template <typename B>
concept BoundaryForm = requires(const B& b, const CVec& x, const CSparse& a, cplx s) {
  { apply_form(b, x) } -> std::convertible_to<CVec>;
  { shifted_solver(a, b, s) } -> std::same_as<ShiftedSolver>;
  { form_norm(b) } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------

/// Normwise backward error of (lambda, x).
inline double pencil_residual(const CVec& ax, const CVec& bx, cplx lambda, double xnorm, double anorm, double bnorm) {
  const double denom = (anorm + std::abs(lambda) * bnorm) * xnorm;
  return denom > 0 ? (ax - lambda * bx).norm() / denom : 0.0;
}

/// Unit 2-norm with the largest-modulus entry made real positive (first one on ties).
inline void normalize_phase(Eigen::Ref<CVec> x) {
  const double nrm = x.norm();
  if (nrm == 0.0) return;
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) > best * (1.0 + 1e-12)) {
      best = std::abs(x(i));
      imax = i;
    }
  x *= std::conj(x(imax)) / (std::abs(x(imax)) * nrm);
}

struct DenseOracleOptions {
  cplx shift = 0.0;           // eigenvalues theta of (A0 - shift B)^{-1} B, lambda = shift + 1/theta
  double theta_cut = 1e-10;   // relative to max |theta|
  int dense_limit = 3000;
  double certificate = 1e-10; // pairs above this residual are dropped
};

/// Brute force: all eigenvalues of (A0 - shift B)^{-1} B by LAPACK, infinite modes cut.
/// Pairs are ordered by distance to the shift.
inline EigenResult solve_dense_oracle(const CMat& a0, const CMat& b, const DenseOracleOptions& opt = {}) {
  const Eigen::Index n = a0.rows();
  require(a0.cols() == n && b.rows() == n && b.cols() == n, ErrorKind::InvalidArgument, "pencil matrices must be square and equal size");
  require(n <= opt.dense_limit, ErrorKind::InvalidArgument, "pencil larger than the dense limit");
  EigenResult res;
  res.shift = opt.shift;
  if (n == 0) return res;

  const CMat shifted = a0 - opt.shift * b;
  Eigen::PartialPivLU<CMat> lu(shifted);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    if (opt.shift == cplx(0.0))
      fail(ErrorKind::AssumptionViolation, "A0 is numerically singular (lambda = 0 is an eigenvalue)");
    fail(ErrorKind::ShiftAtEigenvalue, "A0 - shift*B is numerically singular");
  }
  const CMat t = lu.solve(b);
  const double anorm = norm_bound(a0), bnorm = norm_bound(b);
  DenseEigen eig = dense_eigen(t, true);

  double theta_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) theta_max = std::max(theta_max, std::abs(eig.values(i)));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(eig.values(i)) > opt.theta_cut * theta_max)
      keep.push_back(i);
    else
      ++res.discarded_infinite;
  }
  std::stable_sort(keep.begin(), keep.end(), [&](Eigen::Index i, Eigen::Index j) { return std::abs(eig.values(i)) > std::abs(eig.values(j)); });

  std::vector<cplx> vals;
  std::vector<CVec> vecs;
  for (Eigen::Index i : keep) {
    const cplx lambda = opt.shift + 1.0 / eig.values(i);
    CVec x = eig.vectors.col(i);
    normalize_phase(x);
    const double r = pencil_residual(a0 * x, b * x, lambda, x.norm(), anorm, bnorm);
    if (r > opt.certificate) continue;
    vals.push_back(lambda);
    vecs.push_back(std::move(x));
    res.residuals.push_back(r);
  }
  res.values = std::move(vals);
  res.vectors.resize(n, static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t c = 0; c < vecs.size(); ++c) res.vectors.col(static_cast<Eigen::Index>(c)) = vecs[c];
  res.krylov_dim = static_cast<int>(n);
  return res;
}

inline EigenResult solve_dense_oracle(const CSparse& a0, const RSparse& b, const DenseOracleOptions& opt = {}) {
  return solve_dense_oracle(to_dense_complex(a0), to_dense_complex(b), opt);
}

// ---------------------------------------------------------------------------
// Shift-invert Krylov-Schur

struct ShiftInvertOptions {
  cplx sigma = cplx(1.0, 0.0);
  int k = 6;
  double tol = 1e-10;          // residual certificate
  int krylov_dim = 0;          // 0: max(2k + 20, 40), capped by n
  int max_restarts = 300;
  std::uint64_t seed = 1;
  double theta_cut = 1e-10;    // Ritz values below this (relative) are infinite modes
  bool symmetric_rayleigh = false;  // refine lambda by x^T A0 x / x^T B x (complex symmetric pencils)
};

namespace detail {

/// Swap adjacent diagonal entries i, i+1 of the upper triangular T (T = U^H H U kept).
inline void schur_swap(CMat& t, CMat& u, Eigen::Index i) {
  const cplx a = t(i, i), b = t(i + 1, i + 1), c = t(i, i + 1);
  Eigen::Vector2cd x(c, b - a);
  const double nx = x.norm();
  if (nx == 0.0) return;
  x /= nx;
  Eigen::Matrix2cd q;
  q << x(0), -std::conj(x(1)), x(1), std::conj(x(0));
  t.middleCols(i, 2) = t.middleCols(i, 2) * q;
  t.middleRows(i, 2) = q.adjoint() * t.middleRows(i, 2);
  u.middleCols(i, 2) = u.middleCols(i, 2) * q;
  t(i + 1, i) = 0.0;
  t(i, i) = b;
  t(i + 1, i + 1) = a;
}

/// Eigenvector y of the leading (j+1)x(j+1) block of upper triangular T for eigenvalue T(j,j).
inline CVec triangular_eigenvector(const CMat& t, Eigen::Index j) {
  CVec y = CVec::Zero(t.rows());
  y(j) = 1.0;
  const cplx theta = t(j, j);
  const double small = std::numeric_limits<double>::epsilon() * std::max(std::abs(theta), 1e-300);
  for (Eigen::Index r = j - 1; r >= 0; --r) {
    cplx s = 0.0;
    for (Eigen::Index l = r + 1; l <= j; ++l) s += t(r, l) * y(l);
    cplx d = t(r, r) - theta;
    if (std::abs(d) < small) d = small;
    y(r) = -s / d;
  }
  return y;
}

}  // namespace detail

/// k eigenvalues of A0 x = lambda B x nearest sigma, by Krylov-Schur on (A0 - sigma B)^{-1} B
/// with full (two-pass) reorthogonalization. The start vector is pushed through the
/// operator twice so that infinite-eigenvalue components are purged.
template <BoundaryForm Form>
EigenResult solve_shift_invert(const CSparse& a0, const Form& b, const ShiftInvertOptions& opt = {}) {
  const Eigen::Index n = a0.rows();
  require(opt.k >= 1, ErrorKind::InvalidArgument, "k must be positive");
  EigenResult res;
  res.shift = opt.sigma;
  if (n == 0) {
    res.exhausted = true;
    return res;
  }
  const ShiftedSolver solver = shifted_solver(a0, b, opt.sigma);
  const double anorm = norm_bound(a0), bnorm = form_norm(b);
  auto op = [&](const CVec& x) {
    ++res.operator_applications;
    return CVec(solver.solve(apply_form(b, x)));
  };

  const Eigen::Index m = std::min<Eigen::Index>(n, opt.krylov_dim > 0 ? opt.krylov_dim : std::max(2 * opt.k + 20, 40));
  res.krylov_dim = static_cast<int>(m);
  // a full-space Krylov basis ends in breakdown with exact Ritz pairs; otherwise keep one spare column
  const int want = m == n ? std::min<int>(opt.k, static_cast<int>(m)) : std::min<int>(opt.k, std::max<int>(static_cast<int>(m) - 1, 1));

  UniformSource rng(opt.seed);
  CVec v0 = op(op(rng.complex_vector(n)));
  if (v0.norm() == 0.0) {
    res.exhausted = true;
    return res;
  }

  CMat V = CMat::Zero(n, m + 1);
  CMat H = CMat::Zero(m + 1, m);
  V.col(0) = v0 / v0.norm();
  Eigen::Index p = 0;  // columns already in the Krylov-Schur decomposition
  double ritz_factor = 1.0;
  double op_scale = 0.0;

  std::vector<cplx> final_vals;
  std::vector<CVec> final_vecs;
  std::vector<double> final_res;

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    res.restarts = restart;
    // expand to m columns
    Eigen::Index m_eff = m;
    bool breakdown = false;
    for (Eigen::Index j = p; j < m; ++j) {
      CVec w = op(V.col(j));
      const double wnorm0 = w.norm();
      op_scale = std::max(op_scale, wnorm0);
      for (int pass = 0; pass < 2; ++pass) {
        const CVec h = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * h;
        H.col(j).head(j + 1) += h;
      }
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta <= 1e-13 * std::max(op_scale, 1e-300)) {
        m_eff = j + 1;
        breakdown = true;
        H(j + 1, j) = 0.0;
        break;
      }
      V.col(j + 1) = w / beta;
    }

    Eigen::ComplexSchur<CMat> schur(H.topLeftCorner(m_eff, m_eff));
    CMat T = schur.matrixT();
    CMat U = schur.matrixU();
    const CVec last = H.row(m_eff).head(m_eff).transpose();  // residual coupling row

    // order: finite Ritz values by decreasing |theta|, infinite ones last
    double tmax = 0.0;
    for (Eigen::Index i = 0; i < m_eff; ++i) tmax = std::max(tmax, std::abs(T(i, i)));
    auto rank_of = [&](cplx th) { return std::abs(th) > opt.theta_cut * tmax ? std::abs(th) : -1.0; };
    for (Eigen::Index pos = 0; pos < m_eff; ++pos) {
      Eigen::Index best = pos;
      for (Eigen::Index i = pos + 1; i < m_eff; ++i)
        if (rank_of(T(i, i)) > rank_of(T(best, best))) best = i;
      for (Eigen::Index i = best; i > pos; --i) detail::schur_swap(T, U, i - 1);
    }
    int finite = 0;
    for (Eigen::Index i = 0; i < m_eff; ++i)
      if (rank_of(T(i, i)) > 0) ++finite;
    res.discarded_infinite = static_cast<int>(m_eff) - finite;

    // leading wanted Ritz pairs, accepted in order until the first one that fails
    const int nwant = std::min(want, finite);
    std::vector<cplx> vals;
    std::vector<CVec> vecs;
    std::vector<double> resid;
    bool certificate_failed = false;
    for (int i = 0; i < nwant; ++i) {
      const CVec y = detail::triangular_eigenvector(T, i);
      const cplx theta = T(i, i);
      // op x - theta x = v_{m+1} (h_row U y) for x = V U y
      const double ritz_est = std::abs((last.transpose() * (U * y)).value()) / y.norm();
      if (!breakdown && ritz_est > opt.tol * ritz_factor * std::abs(theta)) break;
      CVec x = V.leftCols(m_eff) * (U * y);
      normalize_phase(x);
      cplx lambda = opt.sigma + 1.0 / theta;
      const CVec ax = a0 * x;
      const CVec bx = apply_form(b, x);
      if (opt.symmetric_rayleigh) {
        const cplx xbx = (x.transpose() * bx).value();
        if (std::abs(xbx) > 0) lambda = (x.transpose() * ax).value() / xbx;
      }
      const double r = pencil_residual(ax, bx, lambda, x.norm(), anorm, bnorm);
      if (r > opt.tol) {
        certificate_failed = true;
        break;
      }
      vals.push_back(lambda);
      vecs.push_back(std::move(x));
      resid.push_back(r);
    }
    const bool done = static_cast<int>(vals.size()) == nwant;
    if (done || breakdown || restart == opt.max_restarts) {
      final_vals = std::move(vals);
      final_vecs = std::move(vecs);
      final_res = std::move(resid);
      res.exhausted = (breakdown || m_eff == n) && finite < opt.k;
      res.converged = done;
      break;
    }
    // Ritz estimate small but certificate not met: demand a smaller estimate
    if (certificate_failed) ritz_factor = std::max(ritz_factor * 0.1, 1e-6);

    // restart: keep the leading pk Schur vectors
    const Eigen::Index pk = std::clamp<Eigen::Index>(want + (m_eff - want) / 2, 1, m_eff - 1);
    CMat Vk = V.leftCols(m_eff) * U.leftCols(pk);
    const CVec vnext = V.col(m_eff);
    V.setZero();
    V.leftCols(pk) = Vk;
    V.col(pk) = vnext;
    H.setZero();
    H.topLeftCorner(pk, pk) = T.topLeftCorner(pk, pk);
    H.row(pk).head(pk) = last.transpose() * U.leftCols(pk);
    p = pk;
  }

  res.values = std::move(final_vals);
  res.residuals = std::move(final_res);
  res.vectors.resize(n, static_cast<Eigen::Index>(final_vecs.size()));
  for (std::size_t c = 0; c < final_vecs.size(); ++c) res.vectors.col(static_cast<Eigen::Index>(c)) = final_vecs[c];
  if (res.values.size() < static_cast<std::size_t>(std::min(opt.k, static_cast<int>(n))) && !res.exhausted) res.converged = false;
  return res;
}

// ---------------------------------------------------------------------------
// Clusters and sector census

struct Cluster {
  std::vector<int> members;  // indices into the value list
  cplx mean = 0.0;           // multiplicity-weighted mean
  double diameter = 0.0;
  int size() const { return static_cast<int>(members.size()); }
};

struct ClusterResult {
  std::vector<int> id;           // cluster index per value
  std::vector<Cluster> clusters; // ordered by (Re mean, Im mean)
};

/// Single-linkage clustering: values a, b are linked when
/// |a - b| <= reltol * max(|a|, |b|, scale).
inline ClusterResult cluster(const std::vector<cplx>& values, double reltol = 1e-6, double scale = 0.0) {
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double ref = std::max({std::abs(values[i]), std::abs(values[j]), scale});
      if (std::abs(values[i] - values[j]) <= reltol * ref) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  std::vector<int> root_to_cluster(n, -1);
  ClusterResult out;
  std::vector<Cluster> raw;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_to_cluster[r] < 0) {
      root_to_cluster[r] = static_cast<int>(raw.size());
      raw.emplace_back();
    }
    raw[root_to_cluster[r]].members.push_back(i);
  }
  for (auto& c : raw) {
    cplx s = 0.0;
    for (int i : c.members) s += values[i];
    c.mean = s / double(c.members.size());
    for (int i : c.members)
      for (int j : c.members) c.diameter = std::max(c.diameter, std::abs(values[i] - values[j]));
  }
  std::vector<int> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (raw[a].mean.real() != raw[b].mean.real()) return raw[a].mean.real() < raw[b].mean.real();
    return raw[a].mean.imag() < raw[b].mean.imag();
  });
  out.id.assign(n, -1);
  for (std::size_t c = 0; c < order.size(); ++c) {
    out.clusters.push_back(raw[order[c]]);
    for (int i : out.clusters.back().members) out.id[i] = static_cast<int>(c);
  }
  return out;
}

inline ClusterResult label_clusters(EigenResult& r, double reltol = 1e-6, double scale = 0.0) {
  ClusterResult c = cluster(r.values, reltol, scale);
  r.cluster_id = c.id;
  r.cluster_size.resize(r.values.size());
  for (std::size_t i = 0; i < r.values.size(); ++i) r.cluster_size[i] = c.clusters[c.id[i]].size();
  return c;
}

struct SectorCensus {
  int inside = 0;   // |arg λ| < delta, |λ| <= R
  int outside = 0;  // |arg λ| >= delta, |λ| <= R
  int beyond = 0;   // |λ| > R
};

inline SectorCensus sector_census(const std::vector<cplx>& values, double delta, double radius) {
  require(delta > 0 && delta < std::numbers::pi, ErrorKind::InvalidArgument, "sector angle must lie in (0, pi)");
  SectorCensus c;
  for (const cplx& z : values) {
    if (std::abs(z) > radius) {
      ++c.beyond;
      continue;
    }
    const double arg = z == cplx(0.0) ? 0.0 : std::abs(std::arg(z));
    (arg < delta ? c.inside : c.outside)++;
  }
  return c;
}

}  // namespace steklov

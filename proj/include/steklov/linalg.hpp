#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "steklov/error.hpp"
#include "steklov/types.hpp"

namespace steklov {

/// Reproducible uniform doubles in [-1, 1) from a 64-bit Mersenne twister. Avoids the
/// implementation-defined std distributions so the same seed gives the same vector
/// everywhere.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}

  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-52 - 1.0; }

  CVec complex_vector(Eigen::Index n) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = next();
      v(i) = cplx(re, next());
    }
    return v;
  }

  RVec real_vector(Eigen::Index n) {
    RVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = next();
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

/// Complex sparse LU that reports factorization failure through steklov::Error.
class SparseLUSolver {
 public:
  SparseLUSolver() = default;

  explicit SparseLUSolver(const CSparse& a, ErrorKind on_failure = ErrorKind::SolverFailure) { factor(a, on_failure); }

  void factor(const CSparse& a, ErrorKind on_failure = ErrorKind::SolverFailure) {
    lu_ = std::make_unique<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>>();
    lu_->analyzePattern(a);
    lu_->factorize(a);
    if (lu_->info() != Eigen::Success) fail(on_failure, "sparse LU failed: " + lu_->lastErrorMessage());
    n_ = a.rows();
  }

  CVec solve(const CVec& b) const { return lu_->solve(b); }
  CVec solve_adjoint(const CVec& b) const { return lu_->adjoint().solve(b); }
  CVec solve_transpose(const CVec& b) const { return lu_->transpose().solve(b); }
  Eigen::Index size() const { return n_; }

 private:
  std::unique_ptr<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>> lu_;
  Eigen::Index n_ = 0;
};

/// Extreme singular values of C measured in a weighted norm:
///   sigma(C; W) = sqrt of the generalized eigenvalues of  C^H W^{-1} C x = s^2 W x.
/// With W = Z^T Z for a basis Z of a subspace, these are the singular values of
/// Q^H A Q for the orthonormalized basis Q (when C = Z^T A Z). W = I if omitted.
/// Upper bound sqrt(||A||_1 ||A||_inf) on the spectral norm.
template <typename Derived>
double norm_bound(const Eigen::SparseMatrixBase<Derived>& a) {
  RVec col = RVec::Zero(a.cols()), row = RVec::Zero(a.rows());
  const auto& m = a.derived();
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (typename Derived::InnerIterator it(m, k); it; ++it) {
      col(it.col()) += std::abs(it.value());
      row(it.row()) += std::abs(it.value());
    }
  return std::sqrt((col.size() ? col.maxCoeff() : 0.0) * (row.size() ? row.maxCoeff() : 0.0));
}

template <typename Derived>
double norm_bound(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  return std::sqrt(a.cwiseAbs().colwise().sum().maxCoeff() * a.cwiseAbs().rowwise().sum().maxCoeff());
}

struct SingularEstimate {
  double smallest = 0.0;
  double largest = 0.0;
  int iterations = 0;
  double relative() const { return largest > 0 ? smallest / largest : 0.0; }
};

inline SingularEstimate extreme_singular_values(const CSparse& c, const RSparse* weight = nullptr, std::uint64_t seed = 7,
                                                int max_iter = 500, double tol = 1e-12) {
  const Eigen::Index n = c.rows();
  SingularEstimate est;
  if (n == 0) return est;

  std::unique_ptr<Eigen::SimplicialLDLT<RSparse>> w_inv;
  if (weight) {
    w_inv = std::make_unique<Eigen::SimplicialLDLT<RSparse>>(*weight);
    require(w_inv->info() == Eigen::Success, ErrorKind::SolverFailure, "weight matrix is not positive definite");
  }
  auto apply_w = [&](const CVec& x) -> CVec { return weight ? CVec((*weight).cast<cplx>() * x) : x; };
  auto solve_w = [&](const CVec& x) -> CVec {
    if (!weight) return x;
    CVec out(x.size());
    out.real() = w_inv->solve(RVec(x.real()));
    out.imag() = w_inv->solve(RVec(x.imag()));
    return out;
  };
  auto w_norm = [&](const CVec& x) { return std::sqrt(std::abs(x.dot(apply_w(x)))); };
  // s^2 for the Rayleigh quotient at x
  auto quotient = [&](const CVec& x) {
    const CVec cx = c * x;
    return std::sqrt(std::abs(cx.dot(solve_w(cx))) / std::abs(x.dot(apply_w(x))));
  };

  UniformSource rng(seed);

  // largest: power iteration on W^{-1} C^H W^{-1} C
  {
    CVec x = rng.complex_vector(n);
    x /= w_norm(x);
    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      CVec y = solve_w(c.adjoint() * solve_w(c * x));
      const double nrm = w_norm(y);
      if (nrm == 0.0) break;
      x = y / nrm;
      const double s = std::sqrt(nrm);
      if (std::abs(s - prev) <= 1e-6 * s) {
        prev = s;
        break;
      }
      prev = s;
    }
    est.largest = prev;
  }

  // smallest: inverse iteration x <- C^{-1} W C^{-H} W x
  Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(c);
  lu.factorize(c);
  if (lu.info() != Eigen::Success) {
    est.smallest = 0.0;
    return est;
  }
  CVec x = rng.complex_vector(n);
  x /= w_norm(x);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    CVec y = lu.solve(apply_w(CVec(lu.adjoint().solve(apply_w(x)))));
    const double nrm = w_norm(y);
    if (!std::isfinite(nrm) || nrm == 0.0) {
      est.smallest = 0.0;
      return est;
    }
    x = y / nrm;
    const double s = quotient(x);
    est.iterations = it + 1;
    if (std::abs(s - prev) <= tol * std::max(s, est.largest * 1e-300)) {
      prev = s;
      break;
    }
    prev = s;
  }
  est.smallest = prev;
  return est;
}

/// Dense complex matrix from a sparse one.
template <typename Scalar>
CMat to_dense_complex(const Eigen::SparseMatrix<Scalar>& a) {
  return CMat(a.template cast<cplx>());
}

/// Keeps the listed rows and columns of a square sparse matrix (in the given order).
template <typename Scalar>
Eigen::SparseMatrix<Scalar> restrict_square(const Eigen::SparseMatrix<Scalar>& a, const std::vector<int>& keep) {
  std::vector<int> pos(a.rows(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<int>(i);
  Triplets<Scalar> t;
  for (int k = 0; k < a.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a, k); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) t.emplace_back(pos[it.row()], pos[it.col()], it.value());
  Eigen::SparseMatrix<Scalar> out(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

}  // namespace steklov

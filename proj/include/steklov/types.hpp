#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace steklov {

using real = double;
using cplx = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;

using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

using RSparse = Eigen::SparseMatrix<double>;
using CSparse = Eigen::SparseMatrix<cplx>;

template <typename Scalar>
using Triplets = std::vector<Eigen::Triplet<Scalar>>;

/// Complex number tolerant of -0.0 in output and comparisons.
inline cplx clean(cplx z) { return {z.real() + 0.0, z.imag() + 0.0}; }

/// Bilinear (unconjugated) product xᵀy.
template <typename A, typename B>
auto bilinear(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  return (x.transpose() * y).value();
}

}  // namespace steklov

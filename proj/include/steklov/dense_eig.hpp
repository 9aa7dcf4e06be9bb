#pragma once

#include <complex>
#include <vector>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "steklov/error.hpp"
#include "steklov/types.hpp"

namespace steklov {

/// Eigenvalues and right eigenvectors of a general complex matrix (LAPACK zgeev).
struct DenseEigen {
  CVec values;
  CMat vectors;
};

inline DenseEigen dense_eigen(CMat a, bool want_vectors = true) {
  const auto n = static_cast<lapack_int>(a.rows());
  DenseEigen out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  if (n == 0) return out;
  std::complex<double> dummy;
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n, out.values.data(),
                                        &dummy, 1, want_vectors ? out.vectors.data() : &dummy, n);
  require(info == 0, ErrorKind::SolverFailure, "zgeev failed with info " + std::to_string(info));
  return out;
}

}  // namespace steklov

#pragma once

#include <cstddef>
#include <vector>

#include "steklov/parallel.hpp"
#include "steklov/types.hpp"

namespace steklov {

/// Runs `element(e, out)` for every element and returns all triplets in element order.
/// Each worker fills a private buffer; buffers are concatenated in chunk order, so the
/// triplet sequence (and hence every summed matrix entry) is independent of thread count.
template <typename Scalar, typename ElementFn>
Triplets<Scalar> collect_triplets(std::size_t num_elements, std::size_t per_element, ElementFn&& element) {
  std::vector<Triplets<Scalar>> buffers(static_cast<std::size_t>(thread_count()));
  const int used = parallel_chunks(num_elements, [&](int chunk, std::size_t begin, std::size_t end) {
    auto& out = buffers[chunk];
    out.reserve((end - begin) * per_element);
    for (std::size_t e = begin; e < end; ++e) element(e, out);
  });
  Triplets<Scalar> all;
  std::size_t total = 0;
  for (int c = 0; c < used; ++c) total += buffers[c].size();
  all.reserve(total);
  for (int c = 0; c < used; ++c) all.insert(all.end(), buffers[c].begin(), buffers[c].end());
  return all;
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets<Scalar>& t) {
  Eigen::SparseMatrix<Scalar> m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

/// Gradients of the four barycentric coordinates of a tetrahedron.
inline std::array<Vec3, 4> barycentric_gradients(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3) {
  Mat3 jac;
  jac.col(0) = x1 - x0;
  jac.col(1) = x2 - x0;
  jac.col(2) = x3 - x0;
  const Mat3 inv = jac.inverse();
  std::array<Vec3, 4> g;
  g[1] = inv.row(0).transpose();
  g[2] = inv.row(1).transpose();
  g[3] = inv.row(2).transpose();
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

}  // namespace steklov

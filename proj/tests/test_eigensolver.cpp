#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "steklov/eigensolver.hpp"
#include "steklov/fem_maxwell.hpp"

using namespace steklov;

namespace {

CSparse diag_sparse(std::initializer_list<cplx> d) {
  Triplets<cplx> t;
  int i = 0;
  for (cplx v : d) {
    t.emplace_back(i, i, v);
    ++i;
  }
  return from_triplets<cplx>(i, i, t);
}

RSparse diag_real(std::initializer_list<double> d) {
  Triplets<double> t;
  int i = 0;
  for (double v : d) {
    if (v != 0.0) t.emplace_back(i, i, v);
    ++i;
  }
  return from_triplets<double>(i, i, t);
}

std::vector<cplx> sorted_by_real(std::vector<cplx> v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  return v;
}

// Random sparse complex symmetric A0 (diagonally shifted so it is well conditioned) and
// a real symmetric positive semidefinite B with a kernel of dimension n / 4.
struct RandomPencil {
  CSparse a0;
  RSparse b;
};

RandomPencil random_pencil(int n, std::uint64_t seed) {
  UniformSource rng(seed);
  Triplets<cplx> ta;
  for (int i = 0; i < n; ++i) {
    ta.emplace_back(i, i, cplx(4.0 + rng.next(), rng.next()));
    for (int k = 0; k < 3; ++k) {
      const int j = static_cast<int>((rng.next() + 1.0) * 0.5 * n) % n;
      if (j == i) continue;
      const cplx v(rng.next(), 0.3 * rng.next());
      ta.emplace_back(i, j, v);
      ta.emplace_back(j, i, v);
    }
  }
  const int nb = n - n / 4;
  RMat f(nb, nb);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) f(i, j) = rng.next();
  const RMat g = f * f.transpose() / nb + RMat::Identity(nb, nb);
  Triplets<double> tb;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) tb.emplace_back(i, j, g(i, j));
  return {from_triplets<cplx>(n, n, ta), from_triplets<double>(n, n, tb)};
}

}  // namespace

TEST(DenseOracle, DiagonalPencil) {
  const auto r = solve_dense_oracle(diag_sparse({2.0, 3.0}), diag_real({1.0, 1.0}));
  const auto v = sorted_by_real(r.values);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(std::abs(v[0] - 2.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(v[1] - 3.0), 0.0, 1e-14);
}

TEST(DenseOracle, InfiniteModesDiscarded) {
  const auto r = solve_dense_oracle(diag_sparse({1.0, 2.0, 3.0}), diag_real({1.0, 1.0, 0.0}));
  EXPECT_EQ(r.size(), 2u);
  EXPECT_EQ(r.discarded_infinite, 1);
  const auto v = sorted_by_real(r.values);
  EXPECT_NEAR(std::abs(v[0] - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(v[1] - 2.0), 0.0, 1e-14);
}

TEST(DenseOracle, CertificateOnRandomPencil) {
  const auto p = random_pencil(6, 3);
  const auto r = solve_dense_oracle(p.a0, p.b);
  ASSERT_GT(r.size(), 0u);
  const CMat a = to_dense_complex(p.a0), b = to_dense_complex(p.b);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const CVec x = r.vectors.col(i);
    EXPECT_NEAR(x.norm(), 1.0, 1e-12);
    const double res = (a * x - r.values[i] * (b * x)).norm() / (norm_bound(a) + std::abs(r.values[i]) * norm_bound(b));
    EXPECT_LE(res, 1e-10);
    EXPECT_NEAR(res, r.residuals[i], 1e-15);
  }
}

TEST(DenseOracle, SingularA0IsAnAssumptionViolation) {
  try {
    solve_dense_oracle(diag_sparse({0.0, 1.0}), diag_real({1.0, 1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AssumptionViolation);
  }
}

TEST(ShiftInvert, ShiftOnEigenvalueRejected) {
  ShiftInvertOptions o;
  o.sigma = 2.0;
  try {
    solve_shift_invert(diag_sparse({2.0, 3.0}), diag_real({1.0, 1.0}), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShiftAtEigenvalue);
  }
}

TEST(ShiftInvert, DiagonalPencilAtZeroShift) {
  ShiftInvertOptions o;
  o.sigma = 0.0;
  o.k = 2;
  const auto r = solve_shift_invert(diag_sparse({2.0, 3.0}), diag_real({1.0, 1.0}), o);
  const auto v = sorted_by_real(r.values);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(std::abs(v[0] - 2.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v[1] - 3.0), 0.0, 1e-12);
  EXPECT_TRUE(r.converged);
}

TEST(ShiftInvert, RequestBeyondFiniteSpectrumIsExhausted) {
  ShiftInvertOptions o;
  o.sigma = 0.0;
  o.k = 3;
  const auto r = solve_shift_invert(diag_sparse({1.0, 2.0, 3.0}), diag_real({1.0, 1.0, 0.0}), o);
  EXPECT_EQ(r.size(), 2u);
  EXPECT_TRUE(r.exhausted);
}

TEST(ShiftInvert, AgreesWithDenseOracle) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int n = 40 + 10 * static_cast<int>(seed);
    const auto p = random_pencil(n, seed);
    ShiftInvertOptions o;
    o.sigma = cplx(3.0, 0.5);
    o.k = 6;
    o.seed = seed;
    const auto r = solve_shift_invert(p.a0, p.b, o);
    ASSERT_TRUE(r.converged) << "seed " << seed;
    ASSERT_EQ(r.size(), 6u);
    DenseOracleOptions d;
    d.shift = o.sigma;
    const auto all = solve_dense_oracle(p.a0, p.b, d);
    // the oracle orders by distance to the shift
    for (int i = 0; i < 6; ++i) {
      double best = 1e300;
      for (cplx v : r.values) best = std::min(best, std::abs(v - all.values[i]));
      EXPECT_LE(best, 1e-8 * std::abs(all.values[i])) << "seed " << seed << " value " << all.values[i];
    }
    for (double res : r.residuals) EXPECT_LE(res, 1e-10);
  }
}

TEST(ShiftInvert, ComplexSymmetricEigenvectorsAreBilinearlyBOrthogonal) {
  const auto p = random_pencil(80, 12);
  ShiftInvertOptions o;
  o.sigma = cplx(2.0, 0.2);
  o.k = 5;
  const auto r = solve_shift_invert(p.a0, p.b, o);
  ASSERT_EQ(r.size(), 5u);
  const CMat b = to_dense_complex(p.b);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      if (std::abs(r.values[i] - r.values[j]) < 1e-6) continue;
      const cplx xij = bilinear(r.vectors.col(i), b * r.vectors.col(j));
      EXPECT_LE(std::abs(xij), 1e-8) << i << "," << j;
    }
}

TEST(ShiftInvert, DeterministicForFixedSeed) {
  const auto p = random_pencil(90, 4);
  ShiftInvertOptions o;
  o.k = 4;
  const auto a = solve_shift_invert(p.a0, p.b, o);
  const auto b = solve_shift_invert(p.a0, p.b, o);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.values[i], b.values[i]);
  EXPECT_EQ(a.vectors, b.vectors);
}

TEST(ShiftInvert, MatrixFreeBoundaryFormMatchesExplicit) {
  const Mesh m = generate_ball_mesh(0);
  auto ops = std::make_shared<SurfaceOperatorSet>(m, extract_boundary(m));
  const auto p = assemble_maxwell(m, uniform_field(m, FieldTag::MuInv, 1.0), uniform_field(m, FieldTag::Eps, cplx(4, 1)), 1.0, ops);
  ShiftInvertOptions o;
  o.sigma = 1.5;
  o.k = 8;
  const CSparse a0 = p.A0();
  const auto free = solve_shift_invert(a0, p.B(), o);
  const auto expl = solve_shift_invert(a0, ops->sparse(), o);
  DenseOracleOptions d;
  d.shift = o.sigma;
  const auto dense = solve_dense_oracle(to_dense_complex(a0), CMat(ops->dense().cast<cplx>()), d);
  ASSERT_EQ(free.size(), 8u);
  ASSERT_EQ(expl.size(), 8u);
  for (int i = 0; i < 8; ++i) {
    double bf = 1e300, be = 1e300;
    for (cplx v : free.values) bf = std::min(bf, std::abs(v - dense.values[i]));
    for (cplx v : expl.values) be = std::min(be, std::abs(v - dense.values[i]));
    EXPECT_LE(bf, 1e-8 * std::abs(dense.values[i]));
    EXPECT_LE(be, 1e-8 * std::abs(dense.values[i]));
  }
}

TEST(Clusters, LinkedByRelativeDistance) {
  const std::vector<cplx> v{2.0, 1.0, 1.0 + 1e-8, cplx(1.0, 5e-7)};
  const auto c = cluster(v, 1e-6);
  ASSERT_EQ(c.clusters.size(), 2u);
  EXPECT_EQ(c.clusters[0].size(), 3);
  EXPECT_EQ(c.clusters[1].size(), 1);
  EXPECT_EQ(c.id[0], 1);
  EXPECT_EQ(c.id[1], 0);
  EXPECT_NEAR(std::abs(c.clusters[1].mean - 2.0), 0.0, 1e-15);
  EXPECT_LE(c.clusters[0].diameter, 1e-6);
}

TEST(Clusters, SingleLinkageChains) {
  // 1 ~ 1.05 ~ 1.1 chain together at 6% although the ends differ by 10%
  const auto c = cluster({1.0, 1.05, 1.1, 3.0}, 0.06);
  ASSERT_EQ(c.clusters.size(), 2u);
  EXPECT_EQ(c.clusters[0].size(), 3);
}

TEST(Clusters, ScaleFloorsTheReference) {
  EXPECT_EQ(cluster({0.0, 1e-9}, 1e-6).clusters.size(), 2u);
  EXPECT_EQ(cluster({0.0, 1e-9}, 1e-6, 1.0).clusters.size(), 1u);
}

TEST(Clusters, LabelsWrittenIntoResult) {
  EigenResult r;
  r.values = {3.0, 1.0, 1.0};
  label_clusters(r);
  EXPECT_EQ(r.cluster_id, (std::vector<int>{1, 0, 0}));
  EXPECT_EQ(r.cluster_size, (std::vector<int>{1, 2, 2}));
}

TEST(SectorCensus, CountsByArgumentAndModulus) {
  const std::vector<cplx> v{1.0, cplx(0, 1), -1.0, cplx(1, 0.5), 0.0, 100.0};
  const auto c = sector_census(v, std::numbers::pi / 3, 10.0);
  EXPECT_EQ(c.inside, 3);
  EXPECT_EQ(c.outside, 2);
  EXPECT_EQ(c.beyond, 1);
  EXPECT_THROW(sector_census(v, 0.0, 1.0), Error);
}

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "steklov/eigensolver.hpp"
#include "steklov/fem_scalar.hpp"

using namespace steklov;

namespace {

Mesh reference_tet() {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.tets = {{0, 1, 2, 3}};
  m.region = {0};
  build_topology(m);
  return m;
}

MaterialField random_spd_mu(const Mesh& m, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  MaterialField f;
  f.tag = FieldTag::MuInv;
  for (int t = 0; t < m.num_tets(); ++t) {
    RMat a(3, 3);
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = u(gen);
    const RMat s = a * a.transpose() + RMat::Identity(3, 3);
    f.values.push_back(s.cast<cplx>());
  }
  return f;
}

}  // namespace

TEST(AssembleScalar, ConstantsInStiffnessKernel) {
  const Mesh m = generate_ball_mesh(0);
  const auto p = assemble_scalar(m, random_spd_mu(m, 3), uniform_field(m, FieldTag::Eps, 1.0), 0.0);
  const CVec one = CVec::Ones(m.num_vertices());
  EXPECT_LE((p.K * one).norm(), 1e-12);
}

TEST(AssembleScalar, ReferenceTetHandIntegrated) {
  const Mesh m = reference_tet();
  const auto p = assemble_scalar(m, uniform_field(m, FieldTag::MuInv, 1.0), uniform_field(m, FieldTag::Eps, 1.0), 0.0);
  // grad λ = (-1,-1,-1), e1, e2, e3 on a tet of volume 1/6
  RMat k(4, 4);
  k << 3, -1, -1, -1, -1, 1, 0, 0, -1, 0, 1, 0, -1, 0, 0, 1;
  k /= 6.0;
  EXPECT_LE((CMat(p.K) - k.cast<cplx>()).cwiseAbs().maxCoeff(), 1e-15);
  // ∫ λ_i λ_j = vol (1 + δ_ij) / 20
  RMat mm = RMat::Constant(4, 4, 1.0 / 120.0);
  mm.diagonal().setConstant(2.0 / 120.0);
  EXPECT_LE((CMat(p.M) - mm.cast<cplx>()).cwiseAbs().maxCoeff(), 1e-15);
  // every vertex is on the boundary; total boundary mass is the surface area
  const double area = 1.5 + std::sqrt(3.0) / 2.0;
  EXPECT_NEAR(RMat(p.B_bd).sum(), area, 1e-14);
  EXPECT_TRUE(p.interior_dofs.empty());
}

TEST(AssembleScalar, StiffnessIsLinearInMu) {
  const Mesh m = generate_cube_mesh(2);
  const auto mu = random_spd_mu(m, 5);
  MaterialField mu2 = mu;
  for (auto& v : mu2.values) v *= 2.0;
  const auto eps = uniform_field(m, FieldTag::Eps, 1.0);
  const auto a = assemble_scalar(m, mu, eps, 0.0), b = assemble_scalar(m, mu2, eps, 0.0);
  EXPECT_EQ((CMat(b.K) - 2.0 * CMat(a.K)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssembleScalar, SymmetryAndBoundaryKernel) {
  const Mesh m = generate_cube_mesh(3);
  const auto p = assemble_scalar(m, random_spd_mu(m, 9), uniform_field(m, FieldTag::Eps, cplx(2, 1)), 1.3);
  const CMat k(p.K), mm(p.M);
  const RMat b(p.B_bd);
  EXPECT_LE((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(k.imag().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((mm - mm.transpose()).cwiseAbs().maxCoeff(), 1e-16);
  EXPECT_LE((b - b.transpose()).cwiseAbs().maxCoeff(), 1e-16);
  // interior vertices span the kernel of B_bd; the boundary block is positive definite
  ASSERT_EQ(p.interior_dofs.size(), 8u);
  for (int v : p.interior_dofs) EXPECT_EQ(b.row(v).cwiseAbs().sum(), 0.0);
  RMat bb(p.boundary_dofs.size(), p.boundary_dofs.size());
  for (std::size_t i = 0; i < p.boundary_dofs.size(); ++i)
    for (std::size_t j = 0; j < p.boundary_dofs.size(); ++j) bb(i, j) = b(p.boundary_dofs[i], p.boundary_dofs[j]);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<RMat>(bb).eigenvalues().minCoeff(), 0.0);
  EXPECT_NEAR(b.sum(), 6.0, 1e-13);
}

TEST(AssembleScalar, AnisotropicEpsRejected) {
  const Mesh m = generate_cube_mesh(1);
  CMat3 e = CMat3::Identity();
  e(2, 2) = 3.0;
  try {
    assemble_scalar(m, uniform_field(m, FieldTag::MuInv, 1.0), build_field(m, FieldTag::Eps, {{0, e}}, {}, Validation::Skip), 0.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ConfigError);
  }
}

TEST(AssembleScalar, MismatchedFieldRejected) {
  const Mesh a = generate_cube_mesh(1), b = generate_cube_mesh(2);
  try {
    assemble_scalar(a, uniform_field(b, FieldTag::MuInv, 1.0), uniform_field(a, FieldTag::Eps, 1.0), 0.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ConfigError);
  }
}

TEST(DirichletDiagnostic, PositiveAtZeroFrequency) {
  const Mesh m = generate_ball_mesh(0);
  const auto s = scalar_dirichlet_diagnostic(
      assemble_scalar(m, random_spd_mu(m, 1), uniform_field(m, FieldTag::Eps, cplx(3, 0.5)), 0.0));
  EXPECT_GT(s.smallest, 0.0);
  EXPECT_GT(s.relative(), 1e-4);
}

TEST(DirichletDiagnostic, VanishesAtDirichletEigenvalue) {
  const Mesh m = generate_ball_mesh(0);
  const auto mu = uniform_field(m, FieldTag::MuInv, 1.0);
  const auto eps = uniform_field(m, FieldTag::Eps, 1.0);
  const auto p0 = assemble_scalar(m, mu, eps, 0.0);
  // Dirichlet eigenvalues: K_II x = w^2 M_II x, from the dense oracle
  const CSparse kii = restrict_square(p0.K, p0.interior_dofs);
  const CSparse mii = restrict_square(p0.M, p0.interior_dofs);
  const EigenResult dir = solve_dense_oracle(to_dense_complex(kii), to_dense_complex(mii));
  double w2 = 1e300;
  for (cplx v : dir.values) w2 = std::min(w2, v.real());
  ASSERT_GT(w2, 0.0);
  const double base = scalar_dirichlet_diagnostic(p0).smallest;
  const double at = scalar_dirichlet_diagnostic(assemble_scalar(m, mu, eps, std::sqrt(w2))).smallest;
  EXPECT_LT(at, 1e-8 * base);
}

TEST(DirichletDiagnostic, AbsorptionKeepsAwayFromZero) {
  const Mesh m = generate_ball_mesh(0);
  const auto mu = uniform_field(m, FieldTag::MuInv, 1.0);
  const auto eps = uniform_field(m, FieldTag::Eps, cplx(1.0, 0.5));
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.5, 8.0);
  for (int i = 0; i < 10; ++i) {
    const double w = u(gen);
    EXPECT_GT(scalar_dirichlet_diagnostic(assemble_scalar(m, mu, eps, w)).relative(), 1e-6) << "omega " << w;
  }
}

TEST(ScalarSpectrum, RealEpsGivesRealEigenvalues) {
  const Mesh m = generate_ball_mesh(0);
  const auto p = assemble_scalar(m, uniform_field(m, FieldTag::MuInv, 1.0), uniform_field(m, FieldTag::Eps, 2.0), 1.0);
  ShiftInvertOptions o;
  o.k = 10;
  const auto r = solve_shift_invert(p.A0(), p.B_bd, o);
  ASSERT_EQ(r.size(), 10u);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE(std::abs(r.values[i].imag()), 1e-8 * std::max(1.0, std::abs(r.values[i])));
}

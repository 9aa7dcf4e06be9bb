#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "steklov/stability.hpp"

using namespace steklov;

namespace {

CSparse dense_to_sparse(const CMat& a) { return a.sparseView(); }

RSparse identity(int n) {
  RSparse i(n, n);
  i.setIdentity();
  return i;
}

StudyConfig scalar_study_config() {
  StudyConfig cfg;
  cfg.mu_inv = {{0, isotropic(1.0)}};
  cfg.eps = {{0, isotropic(cplx(2.0, 0.5))}};
  cfg.center = Vec3(0.2, 0.1, 0.0);
  cfg.target = FieldTag::Eps;
  cfg.p_list = {2.0, 4.0};
  // the isolated lowest mode; the next cluster is mesh-split and needs a wider reltol
  cfg.target_lambda = -0.7;
  cfg.cluster_reltol = 1e-6;
  cfg.solver.k = 8;
  return cfg;
}

std::shared_ptr<const Mesh> ball0() { return std::make_shared<const Mesh>(generate_ball_mesh(0)); }

}  // namespace

TEST(FitRate, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double x : {1e-3, 2e-3, 4e-3, 8e-3}) pts.emplace_back(x, 3.0 * x * x);
  const RateFit f = fit_rate(pts);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
  EXPECT_LE(f.residual, 1e-12);
  EXPECT_EQ(f.points, 4);
  // drift/norm = 3x is largest at the coarsest point
  EXPECT_NEAR(f.bound_ratio, 1.0, 1e-12);
  EXPECT_TRUE(f.bound_ok());
}

TEST(FitRate, SublinearDriftBreaksTheBound) {
  std::vector<std::pair<double, double>> pts;
  for (double x : {1e-4, 1e-3, 1e-2}) pts.emplace_back(x, std::sqrt(x));
  const RateFit f = fit_rate(pts);
  EXPECT_NEAR(f.slope, 0.5, 1e-12);
  EXPECT_NEAR(f.bound_ratio, 10.0, 1e-9);
  EXPECT_FALSE(f.bound_ok());
}

TEST(FitRate, NonPositivePointsIgnored) {
  const std::vector<std::pair<double, double>> pts{{1.0, 1.0}, {2.0, 2.0}, {0.0, 1.0}, {3.0, 0.0}, {4.0, 4.0}};
  EXPECT_EQ(fit_rate(pts).points, 3);
}

TEST(FitRate, TooFewPoints) {
  try {
    fit_rate(std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 2.0}, {3.0, 0.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
  }
}

TEST(Nondegeneracy, RealVectorsAreNondegenerate) {
  RSparse b(2, 2);
  b.insert(0, 0) = 1.0;
  CMat x(2, 1);
  x << 1.0, 0.0;
  const auto c = nondegeneracy(b, x);
  EXPECT_EQ(c.c, cplx(1.0));
  EXPECT_EQ(c.relative(), 1.0);
}

TEST(Nondegeneracy, IsotropicVectorIsDegenerate) {
  CMat x(2, 1);
  x << 1.0, cplx(0.0, 1.0);
  const auto c = nondegeneracy(identity(2), x);
  EXPECT_EQ(std::abs(c.c), 0.0);
  EXPECT_DOUBLE_EQ(c.scale, 2.0);
  EXPECT_EQ(c.relative(), 0.0);
}

TEST(Nondegeneracy, GramNormalization) {
  CMat x(2, 1);
  x << 3.0, 0.0;
  const CSparse gram = dense_to_sparse(4.0 * CMat::Identity(2, 2));
  const auto c = nondegeneracy(identity(2), x, &gram);
  EXPECT_NEAR(c.c.real(), 0.25, 1e-15);
}

TEST(Nondegeneracy, EmptyClusterRejected) { EXPECT_THROW(nondegeneracy(identity(2), CMat(2, 0)), Error); }

TEST(FirstOrderPrediction, DiagonalPerturbationIsExact) {
  CMat a(2, 2), x(2, 1);
  a << 1.0, 0.0, 0.0, 3.0;
  x << 1.0, 0.0;
  const double eta = 1e-3;
  CMat da = CMat::Zero(2, 2);
  da(0, 0) = cplx(eta, 2 * eta);
  const auto fo = first_order_prediction(dense_to_sparse(a), dense_to_sparse(a + da), identity(2), x);
  EXPECT_NEAR(std::abs(fo.shift - cplx(eta, 2 * eta)), 0.0, 1e-15);
}

TEST(FirstOrderPrediction, SecondOrderRemainder) {
  CMat a(2, 2), x(2, 1), e(2, 2);
  a << 1.0, 0.0, 0.0, 3.0;
  x << 1.0, 0.0;
  e << 1.0, 1.0, 1.0, 0.0;
  std::vector<double> errs;
  for (double eta : {1e-2, 5e-3}) {
    const CMat ap = a + eta * e;
    const auto fo = first_order_prediction(dense_to_sparse(a), dense_to_sparse(ap), identity(2), x);
    // smaller root of the perturbed 2x2 matrix
    const cplx tr = ap.trace(), det = ap.determinant();
    const cplx exact = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
    errs.push_back(std::abs(1.0 + fo.shift - exact));
  }
  // remainder is eta^2 / (1 - 3) + O(eta^3)
  EXPECT_NEAR(errs[0], 0.5e-4, 0.05e-4);
  EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.2);
}

TEST(FirstOrderPrediction, AveragesOverACluster) {
  CMat a = CMat::Zero(3, 3);
  a.diagonal() << 1.0, 1.0, 4.0;
  const CMat x = CMat::Identity(3, 3).leftCols(2);
  CMat da = CMat::Zero(3, 3);
  da(0, 0) = 0.02;
  da(1, 1) = 0.04;
  const auto fo = first_order_prediction(dense_to_sparse(a), dense_to_sparse(a + da), identity(3), x);
  EXPECT_NEAR(std::abs(fo.shift - 0.03), 0.0, 1e-15);
}

TEST(FirstOrderPrediction, ZeroPerturbationPredictsNoShift) {
  const CMat a = CMat::Identity(2, 2);
  const CMat x = CMat::Identity(2, 2).leftCols(1);
  EXPECT_EQ(first_order_prediction(dense_to_sparse(a), dense_to_sparse(a), identity(2), x).shift, cplx(0.0));
}

TEST(FirstOrderPrediction, DegenerateClusterRefused) {
  const CMat a = CMat::Identity(2, 2);
  CMat x(2, 1);
  x << 1.0, cplx(0.0, 1.0);
  try {
    first_order_prediction(dense_to_sparse(a), dense_to_sparse(2.0 * a), identity(2), x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateCluster);
  }
}

TEST(LabProblem, MaxwellNeedsNonzeroFrequency) {
  try {
    LabProblem p(ProblemKind::Maxwell, ball0(), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
  EXPECT_EQ(parse_problem_kind("maxwell"), ProblemKind::Maxwell);
  EXPECT_THROW(parse_problem_kind("acoustic"), Error);
}

TEST(RunStudy, EmptyScheduleGivesBaselineOnly) {
  const LabProblem problem(ProblemKind::Scalar, ball0(), 1.0);
  const auto r = run_study(problem, scalar_study_config());
  EXPECT_TRUE(r.records.empty());
  ASSERT_EQ(r.fits.size(), 2u);
  EXPECT_FALSE(r.fits[0].has_value());
  EXPECT_FALSE(r.baseline.values.empty());
  EXPECT_GT(r.baseline.guard, 0.0);
  EXPECT_GT(r.baseline.diagnostic, 1e-6);
}

TEST(RunStudy, DriftIsLinearInDelta) {
  const LabProblem problem(ProblemKind::Scalar, ball0(), 1.0);
  auto cfg = scalar_study_config();
  cfg.steps = {{0.5, cplx(0, 2e-2)}, {0.5, cplx(0, 1e-2)}, {0.5, cplx(0, 5e-3)}};
  const auto r = run_study(problem, cfg);
  ASSERT_EQ(r.records.size(), 3u);
  for (const auto& rec : r.records) {
    ASSERT_FALSE(rec.flagged) << rec.note;
    EXPECT_GT(rec.elements, 0);
  }
  // ascending |delta| after sorting
  EXPECT_DOUBLE_EQ(std::abs(r.records[0].delta), 5e-3);
  EXPECT_NEAR(r.records[1].drift / r.records[0].drift, 2.0, 0.4);
  EXPECT_NEAR(r.records[2].drift / r.records[1].drift, 2.0, 0.4);
  // first-order prediction captures the mean shift at small delta
  ASSERT_TRUE(r.records[0].predicted);
  EXPECT_NEAR(r.records[0].predicted_drift / r.records[0].mean_drift, 1.0, 0.05);
}

TEST(RunStudy, NormsOfABallPerturbation) {
  const LabProblem problem(ProblemKind::Scalar, ball0(), 1.0);
  auto cfg = scalar_study_config();
  cfg.steps = {{0.7, 1e-2}, {0.4, 1e-2}, {0.55, 1e-2}};
  const auto r = run_study(problem, cfg);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_LT(r.records[0].h, r.records[1].h);
  EXPECT_LT(r.records[1].h, r.records[2].h);
  for (const auto& rec : r.records) {
    for (std::size_t k = 0; k < cfg.p_list.size(); ++k) {
      EXPECT_EQ(rec.mu_norms[k], 0.0);
      EXPECT_NEAR(rec.eps_norms[k], 1e-2 * std::pow(rec.ball_volume, 1.0 / cfg.p_list[k]), 1e-14);
    }
  }
  ASSERT_TRUE(r.fits[0].has_value());
  EXPECT_EQ(r.fits[0]->points, 3);
}

TEST(RunStudy, EmptyBallCopiesBaseline) {
  const LabProblem problem(ProblemKind::Scalar, ball0(), 1.0);
  auto cfg = scalar_study_config();
  cfg.center = Vec3(5, 5, 5);
  cfg.steps = {{0.1, 1.0}};
  const auto r = run_study(problem, cfg);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].elements, 0);
  EXPECT_EQ(r.records[0].drift, 0.0);
  EXPECT_EQ(r.records[0].lambda_h, r.baseline.values);
}

TEST(RunStudy, AssumptionViolatingStepIsFlagged) {
  const LabProblem problem(ProblemKind::Scalar, ball0(), 1.0);
  auto cfg = scalar_study_config();
  cfg.steps = {{0.5, -5.0}};
  const auto r = run_study(problem, cfg);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_TRUE(r.records[0].flagged);
  EXPECT_FALSE(r.records[0].note.empty());
}

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "steklov/boundary_ops.hpp"
#include "steklov/eigensolver.hpp"
#include "steklov/error.hpp"
#include "steklov/fem_maxwell.hpp"
#include "steklov/fem_scalar.hpp"
#include "steklov/materials.hpp"
#include "steklov/mesh.hpp"

namespace steklov {

enum class ProblemKind { Scalar, Maxwell };

inline std::string to_string(ProblemKind k) { return k == ProblemKind::Scalar ? "scalar" : "maxwell"; }

inline ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "scalar") return ProblemKind::Scalar;
  if (s == "maxwell") return ProblemKind::Maxwell;
  fail(ErrorKind::ConfigError, "unknown problem '" + s + "' (expected scalar or maxwell)");
}

/// A mesh with its coefficient-independent operators (boundary form, surface solver).
/// Assembling a new pair of material fields only rebuilds K and M.
class LabProblem {
 public:
  LabProblem(ProblemKind kind, std::shared_ptr<const Mesh> mesh, double omega)
      : kind_(kind), mesh_(std::move(mesh)), omega_(omega) {
    require(mesh_ != nullptr, ErrorKind::InvalidArgument, "no mesh");
    if (kind_ == ProblemKind::Maxwell) {
      require(omega_ != 0.0, ErrorKind::ConfigError, "Maxwell Steklov problem needs omega != 0");
      ops_ = std::make_shared<SurfaceOperatorSet>(*mesh_, extract_boundary(*mesh_));
    } else {
      const auto unit = uniform_field(*mesh_, FieldTag::Eps, 1.0);
      b_ = assemble_scalar(*mesh_, uniform_field(*mesh_, FieldTag::MuInv, 1.0), unit, 0.0).B_bd;
    }
  }

  ProblemKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }
  double omega() const { return omega_; }
  std::shared_ptr<const SurfaceOperatorSet> surface_operators() const { return ops_; }
  const RSparse& boundary_mass() const { return b_; }

  ScalarPencil scalar_pencil(const MaterialField& mu_inv, const MaterialField& eps) const {
    return assemble_scalar(*mesh_, mu_inv, eps, omega_);
  }
  MaxwellPencil maxwell_pencil(const MaterialField& mu_inv, const MaterialField& eps) const {
    return assemble_maxwell(*mesh_, mu_inv, eps, omega_, ops_);
  }

  /// A0 = K - omega^2 M for the given coefficients.
  CSparse assemble(const MaterialField& mu_inv, const MaterialField& eps) const {
    return kind_ == ProblemKind::Scalar ? scalar_pencil(mu_inv, eps).A0() : maxwell_pencil(mu_inv, eps).A0();
  }

  EigenResult solve(const CSparse& a0, const ShiftInvertOptions& opt) const {
    return kind_ == ProblemKind::Scalar ? solve_shift_invert(a0, b_, opt) : solve_shift_invert(a0, *ops_, opt);
  }

  CVec apply_B(const CVec& x) const { return kind_ == ProblemKind::Scalar ? apply_form(b_, x) : apply_form(*ops_, x); }

  /// Normalized sigma_min of the injectivity diagnostic (Dirichlet problem or ker S).
  double diagnostic(const MaterialField& mu_inv, const MaterialField& eps) const {
    if (kind_ == ProblemKind::Scalar) return scalar_dirichlet_diagnostic(scalar_pencil(mu_inv, eps)).relative();
    return kernelS_diagnostic(maxwell_pencil(mu_inv, eps), 0).singular.relative();
  }

  /// Gram matrix of the discrete V inner product: curl (or gradient) seminorm plus mass, unit coefficients.
  CSparse v_gram() const {
    const auto mu = uniform_field(*mesh_, FieldTag::MuInv, 1.0);
    const auto eps = uniform_field(*mesh_, FieldTag::Eps, 1.0);
    if (kind_ == ProblemKind::Scalar) {
      const auto p = scalar_pencil(mu, eps);
      return CSparse(p.K + p.M);
    }
    const auto p = maxwell_pencil(mu, eps);
    return CSparse(p.K + p.M);
  }

 private:
  ProblemKind kind_;
  std::shared_ptr<const Mesh> mesh_;
  double omega_;
  std::shared_ptr<SurfaceOperatorSet> ops_;
  RSparse b_;
};

// ---------------------------------------------------------------------------

/// c = (1/N) sum_n u_n^T B u_n (bilinear) and its sesquilinear counterpart as scale.
struct Nondegeneracy {
  cplx c = 0.0;
  double scale = 0.0;  // (1/N) sum_n u_n^H B u_n
  int count = 0;
  double relative() const { return scale > 0 ? std::abs(c) / scale : 0.0; }
};

/// Nondegeneracy coefficient of a cluster. With a Gram matrix W, every vector is first
/// scaled to u^H W u = 1.
template <BoundaryForm Form>
Nondegeneracy nondegeneracy(const Form& b, const CMat& vectors, const CSparse* gram = nullptr) {
  require(vectors.cols() > 0, ErrorKind::InvalidArgument, "nondegeneracy needs at least one vector");
  Nondegeneracy out;
  out.count = static_cast<int>(vectors.cols());
  cplx c = 0.0;
  double s = 0.0;
  for (Eigen::Index n = 0; n < vectors.cols(); ++n) {
    CVec u = vectors.col(n);
    if (gram) {
      const double w = std::sqrt(std::abs(u.dot(*gram * u)));
      if (w > 0) u /= w;
    }
    const CVec bu = apply_form(b, u);
    c += (u.transpose() * bu).value();
    s += std::abs(u.dot(bu));
  }
  out.c = c / double(out.count);
  out.scale = s / double(out.count);
  return out;
}

struct FirstOrder {
  cplx shift = 0.0;  // predicted mean of lambda_h - lambda_0 over the cluster
  Nondegeneracy c;
};

/// First-order shift of the cluster mean for A0 -> A0 + dA with B fixed:
///   (1/N) tr((X^T B X)^{-1} X^T dA X),
/// which for N = 1 is x^T dA x / x^T B x. Left eigenvectors are the unconjugated right ones
/// because A0 and B are complex symmetric.
template <BoundaryForm Form>
FirstOrder first_order_prediction(const CSparse& a_base, const CSparse& a_pert, const Form& b, const CMat& vectors,
                                  double threshold = 1e-8) {
  FirstOrder out;
  out.c = nondegeneracy(b, vectors);
  require(out.c.relative() > threshold, ErrorKind::DegenerateCluster,
          "nondegeneracy coefficient below threshold; first-order prediction refused");
  const auto n = vectors.cols();
  const CSparse da = a_pert - a_base;
  CMat bx(vectors.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) bx.col(j) = apply_form(b, CVec(vectors.col(j)));
  const CMat gram = vectors.transpose() * bx;
  const CMat h = vectors.transpose() * (da * vectors);
  out.shift = Eigen::PartialPivLU<CMat>(gram).solve(h).trace() / double(n);
  return out;
}

// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;     // rms of log-log residuals
  double bound_ratio = 0.0;  // max_i (drift_i / norm_i) / (drift / norm at the largest norm)
  int points = 0;
  bool bound_ok(double tol = 1e-9) const { return bound_ratio <= 1.0 + tol; }
};

/// Least squares fit of log drift = slope * log norm + intercept.
inline RateFit fit_rate(std::span<const std::pair<double, double>> pairs) {
  std::vector<std::pair<double, double>> usable;
  for (const auto& [x, y] : pairs)
    if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) usable.emplace_back(x, y);
  require(usable.size() >= 3, ErrorKind::InsufficientData, "rate fit needs at least 3 points with positive norm and drift");
  RateFit fit;
  fit.points = static_cast<int>(usable.size());
  const double n = double(usable.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : usable) {
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : usable) {
    sxx += (std::log(x) - mx) * (std::log(x) - mx);
    sxy += (std::log(x) - mx) * (std::log(y) - my);
  }
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (const auto& [x, y] : usable) {
    const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  const auto coarse = std::max_element(usable.begin(), usable.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const double c0 = coarse->second / coarse->first;
  for (const auto& [x, y] : usable) fit.bound_ratio = std::max(fit.bound_ratio, (y / x) / c0);
  return fit;
}

inline RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  return fit_rate(std::span<const std::pair<double, double>>(pairs));
}

// ---------------------------------------------------------------------------

struct StudyStep {
  double h = 0.0;
  cplx delta = 0.0;
};

struct StudyConfig {
  RegionTable mu_inv;
  RegionTable eps;
  Vec3 center = Vec3::Zero();
  FieldTag target = FieldTag::Eps;
  std::vector<StudyStep> steps;
  std::vector<double> p_list{4.0};
  cplx target_lambda = 1.0;  // guess for lambda_0; the nearest baseline cluster is tracked
  ShiftInvertOptions solver;
  double cluster_reltol = 1e-6;
  double degeneracy_threshold = 1e-8;
  double diagnostic_threshold = 1e-6;
  bool run_diagnostics = true;
};

struct StudyRecord {
  double h = 0.0;
  cplx delta = 0.0;
  int elements = 0;
  double ball_volume = 0.0;
  std::vector<double> mu_norms;   // ||mu_0^{-1} - mu_h^{-1}||_{L^p}, one per p
  std::vector<double> eps_norms;  // ||eps_0 - eps_h||_{L^p}, one per p
  std::vector<cplx> lambda_h;
  cplx mean = 0.0;
  double drift = 0.0;       // max over the cluster of the distance to the nearest baseline value
  double mean_drift = 0.0;  // |lambda_0 mean - lambda_h mean|
  bool predicted = false;
  cplx predicted_shift = 0.0;
  double predicted_drift = 0.0;
  double diagnostic = -1.0;  // -1: not run
  bool flagged = false;
  std::string note;
};

struct TrackedCluster {
  std::vector<cplx> values;
  cplx mean = 0.0;
  double guard = 0.0;  // half the gap to the nearest other baseline eigenvalue
  Nondegeneracy c;     // with V-normalized vectors
  double diagnostic = -1.0;
};

struct StudyReport {
  ProblemKind problem = ProblemKind::Scalar;
  double omega = 0.0;
  FieldTag target = FieldTag::Eps;
  std::vector<double> p_list;
  TrackedCluster baseline;
  std::vector<StudyRecord> records;  // ascending h, then ascending |delta|
  std::vector<std::optional<RateFit>> fits;       // drift against mu + eps norm, per p
  std::vector<std::optional<RateFit>> mean_fits;  // mean drift, per p
};

namespace detail {

inline PerturbationSpec step_perturbation(const StudyConfig& cfg, const StudyStep& s) {
  PerturbationSpec p;
  p.center = cfg.center;
  p.radius = s.h;
  p.delta = s.delta;
  p.target = cfg.target;
  return p;
}

inline EigenResult solve_near(const LabProblem& problem, const CSparse& a0, ShiftInvertOptions opt, double guard) {
  try {
    return problem.solve(a0, opt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ShiftAtEigenvalue) throw;
    opt.sigma += cplx(0.1 * guard, 0.0);
    return problem.solve(a0, opt);
  }
}

}  // namespace detail

/// Perturbation study on a fixed mesh: baseline cluster near cfg.target_lambda, then one
/// ball perturbation per step, re-solved with the shift at the baseline cluster mean.
inline StudyReport run_study(const LabProblem& problem, const StudyConfig& cfg) {
  for (double p : cfg.p_list) require(p >= 1.0, ErrorKind::ConfigError, "p values must be >= 1");
  for (const auto& s : cfg.steps) require(s.h > 0, ErrorKind::ConfigError, "study radii must be positive");
  const Mesh& mesh = problem.mesh();

  StudyReport report;
  report.problem = problem.kind();
  report.omega = problem.omega();
  report.target = cfg.target;
  report.p_list = cfg.p_list;

  const MaterialField mu0 = build_field(mesh, FieldTag::MuInv, cfg.mu_inv);
  const MaterialField eps0 = build_field(mesh, FieldTag::Eps, cfg.eps);
  if (cfg.run_diagnostics) {
    report.baseline.diagnostic = problem.diagnostic(mu0, eps0);
    require(report.baseline.diagnostic >= cfg.diagnostic_threshold, ErrorKind::AssumptionViolation,
            "baseline injectivity diagnostic below threshold");
  }
  const CSparse a_base = problem.assemble(mu0, eps0);

  ShiftInvertOptions opt = cfg.solver;
  opt.sigma = cfg.target_lambda;
  EigenResult base = problem.solve(a_base, opt);
  require(!base.values.empty(), ErrorKind::SolverFailure, "no baseline eigenvalues near the target");
  const ClusterResult cl = cluster(base.values, cfg.cluster_reltol);
  int tracked = 0;
  for (int i = 1; i < static_cast<int>(cl.clusters.size()); ++i)
    if (std::abs(cl.clusters[i].mean - cfg.target_lambda) < std::abs(cl.clusters[tracked].mean - cfg.target_lambda)) tracked = i;
  const Cluster& tc = cl.clusters[tracked];
  TrackedCluster& tb = report.baseline;
  tb.mean = tc.mean;
  CMat x0(base.vectors.rows(), tc.size());
  for (int j = 0; j < tc.size(); ++j) {
    tb.values.push_back(base.values[tc.members[j]]);
    x0.col(j) = base.vectors.col(tc.members[j]);
  }
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < base.values.size(); ++i)
    if (cl.id[i] != tracked) gap = std::min(gap, std::abs(base.values[i] - tc.mean));
  tb.guard = std::isfinite(gap) ? 0.5 * gap : 0.5 * std::max(std::abs(tc.mean), 1.0);
  const CSparse gram = problem.v_gram();
  tb.c = problem.kind() == ProblemKind::Scalar ? nondegeneracy(problem.boundary_mass(), x0, &gram)
                                                : nondegeneracy(*problem.surface_operators(), x0, &gram);
  const bool nondegenerate = tb.c.relative() > cfg.degeneracy_threshold;

  for (const auto& step : cfg.steps) {
    StudyRecord rec;
    rec.h = step.h;
    rec.delta = step.delta;
    const auto elems = ball_elements(mesh, cfg.center, step.h);
    rec.elements = static_cast<int>(elems.size());
    for (int t : elems) rec.ball_volume += tet_volume(mesh, t);

    const PerturbationSpec pert = detail::step_perturbation(cfg, step);
    MaterialField mu_h, eps_h;
    try {
      mu_h = build_field(mesh, FieldTag::MuInv, cfg.mu_inv, std::span<const PerturbationSpec>(&pert, 1));
      eps_h = build_field(mesh, FieldTag::Eps, cfg.eps, std::span<const PerturbationSpec>(&pert, 1));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AssumptionViolation) throw;
      rec.flagged = true;
      rec.note = "perturbed field violates assumptions";
      report.records.push_back(std::move(rec));
      continue;
    }
    for (double p : cfg.p_list) {
      rec.mu_norms.push_back(lp_diff_norm(mesh, mu0, mu_h, p));
      rec.eps_norms.push_back(lp_diff_norm(mesh, eps0, eps_h, p));
    }
    const bool unchanged = rec.elements == 0 || step.delta == cplx(0.0);
    if (cfg.run_diagnostics && !unchanged) {
      rec.diagnostic = problem.diagnostic(mu_h, eps_h);
      if (rec.diagnostic < cfg.diagnostic_threshold) {
        rec.flagged = true;
        rec.note = "diagnostic below threshold; step aborted";
        report.records.push_back(std::move(rec));
        continue;
      }
    }
    if (unchanged) {
      rec.lambda_h = tb.values;
      rec.mean = tb.mean;
      rec.predicted = nondegenerate;
      report.records.push_back(std::move(rec));
      continue;
    }

    const CSparse a_pert = problem.assemble(mu_h, eps_h);
    ShiftInvertOptions sopt = cfg.solver;
    sopt.sigma = tb.mean;
    sopt.k = static_cast<int>(tb.values.size()) + 4;
    const EigenResult res = detail::solve_near(problem, a_pert, sopt, tb.guard);
    for (const cplx v : res.values)
      if (std::abs(v - tb.mean) <= tb.guard) rec.lambda_h.push_back(v);
    if (rec.lambda_h.size() != tb.values.size()) {
      rec.flagged = true;
      rec.note = "tracking ambiguity: " + std::to_string(rec.lambda_h.size()) + " eigenvalues inside the guard radius, expected " +
                 std::to_string(tb.values.size());
    } else {
      std::sort(rec.lambda_h.begin(), rec.lambda_h.end(),
                [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
      cplx s = 0.0;
      for (const cplx v : rec.lambda_h) {
        s += v;
        double nearest = std::numeric_limits<double>::infinity();
        for (const cplx w : tb.values) nearest = std::min(nearest, std::abs(v - w));
        rec.drift = std::max(rec.drift, nearest);
      }
      rec.mean = s / double(rec.lambda_h.size());
      rec.mean_drift = std::abs(rec.mean - tb.mean);
    }
    if (nondegenerate) {
      const FirstOrder fo = problem.kind() == ProblemKind::Scalar
                                ? first_order_prediction(a_base, a_pert, problem.boundary_mass(), x0, cfg.degeneracy_threshold)
                                : first_order_prediction(a_base, a_pert, *problem.surface_operators(), x0, cfg.degeneracy_threshold);
      rec.predicted = true;
      rec.predicted_shift = fo.shift;
      rec.predicted_drift = std::abs(fo.shift);
    } else if (rec.note.empty()) {
      rec.note = "degenerate cluster: no first-order prediction";
    }
    report.records.push_back(std::move(rec));
  }

  std::stable_sort(report.records.begin(), report.records.end(), [](const StudyRecord& a, const StudyRecord& b) {
    return a.h != b.h ? a.h < b.h : std::abs(a.delta) < std::abs(b.delta);
  });

  for (std::size_t k = 0; k < cfg.p_list.size(); ++k) {
    std::vector<std::pair<double, double>> d, m;
    for (const auto& r : report.records) {
      if (r.flagged || r.mu_norms.size() != cfg.p_list.size()) continue;
      const double norm = r.mu_norms[k] + r.eps_norms[k];
      d.emplace_back(norm, r.drift);
      m.emplace_back(norm, r.mean_drift);
    }
    auto try_fit = [](const std::vector<std::pair<double, double>>& pts) -> std::optional<RateFit> {
      try {
        return fit_rate(pts);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientData) throw;
        return std::nullopt;
      }
    };
    report.fits.push_back(try_fit(d));
    report.mean_fits.push_back(try_fit(m));
  }
  return report;
}

}  // namespace steklov

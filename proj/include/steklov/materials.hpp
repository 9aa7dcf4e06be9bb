#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "steklov/error.hpp"
#include "steklov/mesh.hpp"
#include "steklov/types.hpp"

namespace steklov {

/// Which coefficient a field or perturbation refers to.
enum class FieldTag { MuInv, Eps };

inline std::string to_string(FieldTag tag) { return tag == FieldTag::MuInv ? "mu_inv" : "eps"; }

inline FieldTag parse_field_tag(const std::string& s) {
  if (s == "mu_inv") return FieldTag::MuInv;
  if (s == "eps") return FieldTag::Eps;
  fail(ErrorKind::ConfigError, "unknown field tag '" + s + "'");
}

/// Piecewise-constant complex 3x3 tensor per tetrahedron.
struct MaterialField {
  FieldTag tag = FieldTag::Eps;
  std::vector<CMat3> values;

  std::size_t size() const { return values.size(); }
  const CMat3& operator[](std::size_t t) const { return values[t]; }
};

/// Ball perturbation delta * I on the elements whose centroid lies in B_radius(center).
struct PerturbationSpec {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  cplx delta = 0.0;
  FieldTag target = FieldTag::Eps;
};

using RegionTable = std::map<int, CMat3>;

inline CMat3 isotropic(cplx value) { return value * CMat3::Identity(); }

/// Assigns region tags from tet centroids.
inline void tag_regions(Mesh& mesh, const std::function<int(const Vec3&)>& region_of) {
  for (int t = 0; t < mesh.num_tets(); ++t) mesh.region[t] = region_of(tet_centroid(mesh, t));
}

/// Elements selected by a ball perturbation (centroid strictly inside the ball).
inline std::vector<int> ball_elements(const Mesh& mesh, const Vec3& center, double radius) {
  std::vector<int> out;
  for (int t = 0; t < mesh.num_tets(); ++t)
    if ((tet_centroid(mesh, t) - center).norm() < radius) out.push_back(t);
  return out;
}

inline double ball_volume(const Mesh& mesh, const Vec3& center, double radius) {
  double v = 0.0;
  for (int t : ball_elements(mesh, center, radius)) v += tet_volume(mesh, t);
  return v;
}

/// Assumption check for one field.
struct FieldReport {
  FieldTag tag = FieldTag::Eps;
  double omega = 0.0;
  /// mu_inv: min eigenvalue (mu_-). eps: min over elements of min Re(xi* eps xi) (eps_-).
  double coercivity = 0.0;
  /// eps only: min over elements of min Re(xi* eps^{-1} xi).
  double inverse_coercivity = 0.0;
  double normality_defect = 0.0;     // max ||A A* - A* A|| / ||A||^2
  double symmetry_defect = 0.0;      // max ||A - A^T|| / ||A||
  double imaginary_part = 0.0;       // max ||Im A|| / ||A||  (mu_inv must be real)
  bool absorbing = true;             // Im(eps) * sign(omega) positive semidefinite
  bool pass = false;
};

namespace detail {

inline double hermitian_min_eig(const CMat3& a) {
  const CMat3 h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat3> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double fro(const CMat3& a) { return a.norm(); }

}  // namespace detail

/// Tolerance for the normality and symmetry invariants.
inline constexpr double kStructureTol = 1e-12;

inline FieldReport validate(const MaterialField& field, double omega = 0.0) {
  FieldReport r;
  r.tag = field.tag;
  r.omega = omega;
  r.coercivity = std::numeric_limits<double>::infinity();
  r.inverse_coercivity = std::numeric_limits<double>::infinity();
  for (const CMat3& a : field.values) {
    const double scale = std::max(detail::fro(a), std::numeric_limits<double>::min());
    r.coercivity = std::min(r.coercivity, detail::hermitian_min_eig(a));
    r.normality_defect = std::max(r.normality_defect, detail::fro(a * a.adjoint() - a.adjoint() * a) / (scale * scale));
    r.symmetry_defect = std::max(r.symmetry_defect, detail::fro(a - a.transpose()) / scale);
    r.imaginary_part = std::max(r.imaginary_part, a.imag().norm() / scale);
    if (field.tag == FieldTag::Eps) {
      const Eigen::FullPivLU<CMat3> lu(a);
      if (lu.isInvertible())
        r.inverse_coercivity = std::min(r.inverse_coercivity, detail::hermitian_min_eig(lu.inverse()));
      else
        r.inverse_coercivity = -std::numeric_limits<double>::infinity();
      const CMat3 im = (a - a.adjoint()) / cplx(0.0, 2.0);
      const double s = omega < 0 ? -1.0 : 1.0;
      if (detail::hermitian_min_eig(s * im) < -kStructureTol * scale) r.absorbing = false;
    }
  }
  if (field.values.empty()) r.coercivity = r.inverse_coercivity = 0.0;
  if (field.tag == FieldTag::MuInv) {
    r.inverse_coercivity = 0.0;
    r.pass = r.coercivity > 0 && r.imaginary_part <= kStructureTol && r.symmetry_defect <= kStructureTol;
  } else {
    r.pass = r.coercivity > 0 && r.inverse_coercivity > 0 && r.normality_defect <= kStructureTol;
  }
  return r;
}

/// Whether a field must satisfy its assumptions at construction time.
enum class Validation { Enforce, Skip };

/// Element values from a per-region table plus ball perturbations that target this field.
inline MaterialField build_field(const Mesh& mesh, FieldTag tag, const RegionTable& base,
                                 std::span<const PerturbationSpec> perturbations = {},
                                 Validation check = Validation::Enforce) {
  MaterialField field;
  field.tag = tag;
  field.values.reserve(mesh.tets.size());
  for (int t = 0; t < mesh.num_tets(); ++t) {
    auto it = base.find(mesh.region[t]);
    require(it != base.end(), ErrorKind::ConfigError,
            "region " + std::to_string(mesh.region[t]) + " has no " + to_string(tag) + " entry");
    field.values.push_back(it->second);
  }
  for (const auto& p : perturbations) {
    if (p.target != tag) continue;
    require(p.radius > 0, ErrorKind::InvalidArgument, "perturbation radius must be positive");
    for (int t : ball_elements(mesh, p.center, p.radius)) field.values[t] += isotropic(p.delta);
  }
  if (check == Validation::Enforce) {
    const FieldReport r = validate(field);
    require(r.pass, ErrorKind::AssumptionViolation, to_string(tag) + " field violates its coercivity/structure assumptions");
  }
  return field;
}

/// value * I on every element, whatever the region tags.
inline MaterialField uniform_field(const Mesh& mesh, FieldTag tag, cplx value) {
  MaterialField field;
  field.tag = tag;
  field.values.assign(mesh.tets.size(), isotropic(value));
  return field;
}

/// Sum in a fixed binary-tree order, independent of thread count.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

/// Exact L^p norm of a nonnegative piecewise-constant function; p = +inf gives the max.
inline double lp_norm(const Mesh& mesh, std::span<const double> abs_values, double p) {
  require(p >= 1.0, ErrorKind::InvalidArgument, "L^p norm needs p >= 1");
  require(abs_values.size() == mesh.tets.size(), ErrorKind::ConfigError, "field/mesh size mismatch");
  double peak = 0.0;
  for (std::size_t t = 0; t < abs_values.size(); ++t)
    if (tet_volume(mesh, static_cast<int>(t)) > 0) peak = std::max(peak, abs_values[t]);
  if (std::isinf(p) || peak == 0.0) return peak;
  std::vector<double> terms(abs_values.size());
  for (std::size_t t = 0; t < abs_values.size(); ++t)
    terms[t] = tet_volume(mesh, static_cast<int>(t)) * std::pow(abs_values[t] / peak, p);
  return peak * std::pow(pairwise_sum(terms), 1.0 / p);
}

/// ||f - g||_{L^p(Ω)} with the pointwise spectral norm of the tensor difference.
inline double lp_diff_norm(const Mesh& mesh, const MaterialField& f, const MaterialField& g, double p) {
  require(p >= 1.0, ErrorKind::InvalidArgument, "L^p norm needs p >= 1");
  require(f.size() == g.size() && f.size() == mesh.tets.size(), ErrorKind::ConfigError, "fields live on different meshes");
  std::vector<double> pointwise(f.size());
  for (std::size_t t = 0; t < f.size(); ++t) {
    const CMat3 d = f[t] - g[t];
    pointwise[t] = d.isZero(0.0) ? 0.0 : Eigen::JacobiSVD<CMat3>(d).singularValues()(0);
  }
  return lp_norm(mesh, pointwise, p);
}

}  // namespace steklov

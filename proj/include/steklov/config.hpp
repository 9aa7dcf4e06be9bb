#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "steklov/eigensolver.hpp"
#include "steklov/error.hpp"
#include "steklov/io.hpp"
#include "steklov/materials.hpp"
#include "steklov/mesh.hpp"
#include "steklov/stability.hpp"

namespace steklov {

/// Region tag assigned to every element whose centroid lies in a box or ball.
struct RegionRule {
  int tag = 0;
  bool is_ball = false;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();  // box
  Vec3 center = Vec3::Zero();                 // ball
  double radius = 0.0;

  bool contains(const Vec3& x) const {
    if (is_ball) return (x - center).norm() < radius;
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

struct MeshSpec {
  std::string kind = "cube";  // cube | ball | file
  int n = 2;
  int level = 0;
  int refine = 0;  // extra uniform refinements after generation or load
  std::string file;
  std::vector<RegionRule> regions;
};

struct SolverSpec {
  std::string method = "shift-invert";  // shift-invert | dense
  ShiftInvertOptions shift_invert;
  int dense_limit = 3000;
  double cluster_reltol = 1e-6;
};

struct CensusSpec {
  double delta = std::numbers::pi / 3.0;
  double radius = 0.0;  // 0: 10 x median |lambda|
};

struct StudySpec {
  bool present = false;
  Vec3 center = Vec3::Zero();
  FieldTag target = FieldTag::Eps;
  std::vector<double> radii;
  std::vector<cplx> deltas;
  std::vector<double> p_list{4.0};
  cplx lambda0 = 1.0;
  double cluster_reltol = 1e-6;
  double degeneracy_threshold = 1e-8;
};

struct RunConfig {
  ProblemKind problem = ProblemKind::Scalar;
  MeshSpec mesh;
  double omega = 0.0;
  RegionTable mu_inv{{0, CMat3::Identity()}};
  RegionTable eps{{0, CMat3::Identity()}};
  std::vector<PerturbationSpec> perturbations;
  SolverSpec solver;
  CensusSpec census;
  double diagnostic_threshold = 1e-6;
  StudySpec study;
  std::string output_dir;
};

namespace detail {

inline Vec3 parse_vec3(const json& j, const std::string& what) {
  require(j.is_array() && j.size() == 3, ErrorKind::ConfigError, what + " must be a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline cplx parse_complex(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  require(j.is_object(), ErrorKind::ConfigError, what + " must be a number or {re, im}");
  return cplx(j.value("re", 0.0), j.value("im", 0.0));
}

inline RMat parse_real_part(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>() * RMat::Identity(3, 3);
  require(j.is_array() && j.size() == 3, ErrorKind::ConfigError, what + " must be a number or a 3x3 array");
  RMat m(3, 3);
  for (int r = 0; r < 3; ++r) {
    require(j[r].is_array() && j[r].size() == 3, ErrorKind::ConfigError, what + " must be a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

/// Tensor from a number, {re, im} with numbers (isotropic), or {re: 3x3, im: 3x3}.
inline CMat3 parse_tensor(const json& j, const std::string& what) {
  if (j.is_number()) return isotropic(j.get<double>());
  require(j.is_object(), ErrorKind::ConfigError, what + " must be a number or {re, im}");
  RMat re = j.contains("re") ? parse_real_part(j["re"], what + ".re") : RMat::Zero(3, 3);
  RMat im = j.contains("im") ? parse_real_part(j["im"], what + ".im") : RMat::Zero(3, 3);
  CMat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) = cplx(re(r, c), im(r, c));
  return out;
}

inline RegionTable parse_region_table(const json& j, const std::string& what) {
  require(j.is_object(), ErrorKind::ConfigError, what + " must map region tags to tensors");
  RegionTable t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    int tag = 0;
    try {
      tag = std::stoi(it.key());
    } catch (...) {
      fail(ErrorKind::ConfigError, what + ": region key '" + it.key() + "' is not an integer");
    }
    t[tag] = parse_tensor(it.value(), what + "." + it.key());
  }
  return t;
}

inline MeshSpec parse_mesh_spec(const json& j) {
  MeshSpec m;
  require(j.is_object(), ErrorKind::ConfigError, "mesh must be an object");
  if (j.contains("file")) {
    m.kind = "file";
    m.file = j["file"].get<std::string>();
  } else {
    m.kind = j.value("kind", std::string("cube"));
    require(m.kind == "cube" || m.kind == "ball", ErrorKind::ConfigError, "mesh.kind must be cube or ball");
  }
  m.n = j.value("n", 2);
  m.level = j.value("level", 0);
  m.refine = j.value("refine", 0);
  require(m.refine >= 0 && m.level >= 0, ErrorKind::ConfigError, "mesh level/refine must be >= 0");
  if (j.contains("regions"))
    for (const auto& r : j["regions"]) {
      RegionRule rule;
      rule.tag = r.at("tag").get<int>();
      if (r.contains("ball")) {
        rule.is_ball = true;
        rule.center = parse_vec3(r["ball"].at("center"), "regions.ball.center");
        rule.radius = r["ball"].at("radius").get<double>();
      } else {
        rule.lo = parse_vec3(r.at("box").at("min"), "regions.box.min");
        rule.hi = parse_vec3(r.at("box").at("max"), "regions.box.max");
      }
      m.regions.push_back(rule);
    }
  return m;
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  RunConfig c;
  require(j.is_object(), ErrorKind::ConfigError, "config must be a JSON object");
  try {
    c.problem = parse_problem_kind(j.value("problem", std::string("scalar")));
    if (j.contains("mesh")) c.mesh = detail::parse_mesh_spec(j["mesh"]);
    c.omega = j.value("omega", 0.0);
    if (c.problem == ProblemKind::Maxwell) require(c.omega != 0.0, ErrorKind::ConfigError, "maxwell problem needs omega != 0");

    if (j.contains("materials")) {
      const json& m = j["materials"];
      if (m.contains("mu_inv")) c.mu_inv = detail::parse_region_table(m["mu_inv"], "materials.mu_inv");
      if (m.contains("eps")) c.eps = detail::parse_region_table(m["eps"], "materials.eps");
      // conductivity: eps = eps~ + (i / omega) sigma
      if (m.contains("sigma")) {
        require(c.omega != 0.0, ErrorKind::ConfigError, "conductivity needs omega != 0");
        const RegionTable sigma = detail::parse_region_table(m["sigma"], "materials.sigma");
        for (const auto& [tag, s] : sigma) {
          auto it = c.eps.find(tag);
          require(it != c.eps.end(), ErrorKind::ConfigError, "conductivity given for region without eps");
          it->second += cplx(0.0, 1.0 / c.omega) * s;
        }
      }
    }
    if (j.contains("perturbations"))
      for (const auto& p : j["perturbations"]) {
        PerturbationSpec s;
        s.center = detail::parse_vec3(p.at("center"), "perturbations.center");
        s.radius = p.at("h").get<double>();
        s.delta = cplx(p.value("delta_re", 0.0), p.value("delta_im", 0.0));
        s.target = parse_field_tag(p.value("target", std::string("eps")));
        require(s.radius > 0, ErrorKind::ConfigError, "perturbation h must be positive");
        c.perturbations.push_back(s);
      }
    if (j.contains("solver")) {
      const json& s = j["solver"];
      c.solver.method = s.value("method", c.solver.method);
      require(c.solver.method == "shift-invert" || c.solver.method == "dense", ErrorKind::ConfigError,
              "solver.method must be shift-invert or dense");
      if (s.contains("sigma")) c.solver.shift_invert.sigma = detail::parse_complex(s["sigma"], "solver.sigma");
      c.solver.shift_invert.k = s.value("k", c.solver.shift_invert.k);
      c.solver.shift_invert.tol = s.value("tol", c.solver.shift_invert.tol);
      c.solver.shift_invert.krylov_dim = s.value("krylov_dim", c.solver.shift_invert.krylov_dim);
      c.solver.shift_invert.max_restarts = s.value("max_restarts", c.solver.shift_invert.max_restarts);
      c.solver.shift_invert.theta_cut = s.value("theta_cut", c.solver.shift_invert.theta_cut);
      c.solver.shift_invert.symmetric_rayleigh = s.value("rayleigh", false);
      c.solver.dense_limit = s.value("dense_limit", c.solver.dense_limit);
      c.solver.cluster_reltol = s.value("cluster_reltol", c.solver.cluster_reltol);
      require(c.solver.shift_invert.k >= 1, ErrorKind::ConfigError, "solver.k must be >= 1");
      require(c.solver.shift_invert.tol > 0, ErrorKind::ConfigError, "solver.tol must be positive");
    }
    if (j.contains("census")) {
      c.census.delta = j["census"].value("delta", c.census.delta);
      c.census.radius = j["census"].value("radius", c.census.radius);
      require(c.census.delta > 0 && c.census.delta < std::numbers::pi, ErrorKind::ConfigError, "census.delta must lie in (0, pi)");
    }
    if (j.contains("diagnostics")) c.diagnostic_threshold = j["diagnostics"].value("threshold", c.diagnostic_threshold);
    if (j.contains("study")) {
      const json& s = j["study"];
      StudySpec& st = c.study;
      st.present = true;
      st.center = detail::parse_vec3(s.at("center"), "study.center");
      st.target = parse_field_tag(s.value("target", std::string("eps")));
      st.radii = s.at("radii").get<std::vector<double>>();
      for (const auto& d : s.at("deltas")) st.deltas.push_back(detail::parse_complex(d, "study.deltas"));
      if (s.contains("p")) st.p_list = s["p"].get<std::vector<double>>();
      for (double p : st.p_list) require(p >= 1.0, ErrorKind::ConfigError, "study p values must be >= 1");
      if (s.contains("lambda0")) st.lambda0 = detail::parse_complex(s["lambda0"], "study.lambda0");
      st.cluster_reltol = s.value("cluster_reltol", st.cluster_reltol);
      st.degeneracy_threshold = s.value("degeneracy_threshold", st.degeneracy_threshold);
    }
    if (j.contains("outputs")) c.output_dir = j["outputs"].value("dir", std::string());
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig read_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

inline Mesh build_mesh(const MeshSpec& spec) {
  Mesh mesh = spec.kind == "file" ? read_mesh(spec.file)
              : spec.kind == "ball" ? generate_ball_mesh(spec.level)
                                    : generate_cube_mesh(spec.n);
  for (int r = 0; r < spec.refine; ++r) mesh = refine_uniform(mesh);
  // later rules win
  for (int t = 0; t < mesh.num_tets() && !spec.regions.empty(); ++t) {
    const Vec3 x = tet_centroid(mesh, t);
    for (const auto& rule : spec.regions)
      if (rule.contains(x)) mesh.region[t] = rule.tag;
  }
  return mesh;
}

inline StudyConfig study_config(const RunConfig& c) {
  StudyConfig s;
  s.mu_inv = c.mu_inv;
  s.eps = c.eps;
  s.center = c.study.center;
  s.target = c.study.target;
  for (double h : c.study.radii)
    for (cplx d : c.study.deltas) s.steps.push_back({h, d});
  s.p_list = c.study.p_list;
  s.target_lambda = c.study.lambda0;
  s.solver = c.solver.shift_invert;
  s.cluster_reltol = c.study.cluster_reltol;
  s.degeneracy_threshold = c.study.degeneracy_threshold;
  s.diagnostic_threshold = c.diagnostic_threshold;
  return s;
}

}  // namespace steklov

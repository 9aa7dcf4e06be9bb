#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "steklov/config.hpp"
#include "steklov/eigensolver.hpp"
#include "steklov/error.hpp"
#include "steklov/fem_maxwell.hpp"
#include "steklov/fem_scalar.hpp"
#include "steklov/io.hpp"
#include "steklov/materials.hpp"
#include "steklov/mesh.hpp"
#include "steklov/parallel.hpp"
#include "steklov/stability.hpp"

namespace steklov::cli {

enum ExitCode { kOk = 0, kConfig = 1, kAssumption = 2, kSolver = 3 };

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AssumptionViolation: return kAssumption;
    case ErrorKind::SolverFailure:
    case ErrorKind::ShiftAtEigenvalue:
    case ErrorKind::InsufficientData:
    case ErrorKind::DegenerateCluster: return kSolver;
    default: return kConfig;
  }
}

/// One line on stderr: "steklov: error <kind>: <message>".
inline void report_error(std::ostream& err, ErrorKind kind, const std::string& message) {
  std::string line = message;
  std::replace(line.begin(), line.end(), '\n', ' ');
  err << "steklov: error " << to_string(kind) << ": " << line << "\n";
}

struct Diagnostics {
  json block;
  bool pass = true;
};

inline json field_json(const FieldReport& r) {
  json j{{"coercivity", r.coercivity},
         {"normality_defect", r.normality_defect},
         {"symmetry_defect", r.symmetry_defect},
         {"imaginary_part", r.imaginary_part},
         {"pass", r.pass}};
  if (r.tag == FieldTag::Eps) {
    j["inverse_coercivity"] = r.inverse_coercivity;
    j["absorbing"] = r.absorbing;
  }
  return j;
}

inline json singular_json(const SingularEstimate& s, double threshold) {
  return json{{"sigma_min", s.smallest},
              {"sigma_max", s.largest},
              {"relative", s.relative()},
              {"threshold", threshold},
              {"pass", s.relative() >= threshold}};
}

/// Material assumption checks, then the injectivity diagnostic of the selected problem.
inline Diagnostics run_diagnostics(const RunConfig& cfg, const Mesh& mesh, const MaterialField& mu, const MaterialField& eps) {
  Diagnostics d;
  const FieldReport rm = validate(mu, cfg.omega);
  const FieldReport re = validate(eps, cfg.omega);
  d.block["mu_inv"] = field_json(rm);
  d.block["eps"] = field_json(re);
  d.pass = rm.pass && re.pass;
  if (!d.pass) {
    d.block["injectivity"] = nullptr;
    d.block["pass"] = false;
    return d;
  }
  if (cfg.problem == ProblemKind::Scalar) {
    const SingularEstimate s = scalar_dirichlet_diagnostic(assemble_scalar(mesh, mu, eps, cfg.omega));
    d.block["injectivity"] = singular_json(s, cfg.diagnostic_threshold);
    d.block["injectivity"]["kind"] = "dirichlet";
    d.pass = s.relative() >= cfg.diagnostic_threshold;
  } else {
    auto ops = std::make_shared<SurfaceOperatorSet>(mesh, extract_boundary(mesh));
    const KernelDiagnostic k = kernelS_diagnostic(assemble_maxwell(mesh, mu, eps, cfg.omega, ops));
    json j = singular_json(k.singular, cfg.diagnostic_threshold);
    j["kind"] = "kernel_S";
    j["subspace_dim"] = k.subspace_dim;
    j["kernel_dim"] = k.kernel_dim;
    j["missing_dim"] = k.missing_dim();
    d.block["injectivity"] = j;
    d.pass = k.singular.relative() >= cfg.diagnostic_threshold;
  }
  d.block["pass"] = d.pass;
  return d;
}

inline json mesh_summary(const Mesh& mesh) {
  const SurfaceMesh s = extract_boundary(mesh);
  return json{{"vertices", mesh.num_vertices()},
              {"tets", mesh.num_tets()},
              {"edges", mesh.num_edges()},
              {"boundary_triangles", s.num_triangles()},
              {"boundary_euler", s.euler_characteristic()},
              {"volume", total_volume(mesh)}};
}

inline std::string output_dir(const RunConfig& cfg, const std::string& flag) {
  std::string dir = !flag.empty() ? flag : (!cfg.output_dir.empty() ? cfg.output_dir : std::string("."));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::ConfigError, "cannot create output directory " + dir);
  return dir;
}

inline double median_abs(const std::vector<cplx>& v) {
  if (v.empty()) return 0.0;
  std::vector<double> a;
  for (cplx z : v) a.push_back(std::abs(z));
  std::sort(a.begin(), a.end());
  const std::size_t m = a.size() / 2;
  return a.size() % 2 ? a[m] : 0.5 * (a[m - 1] + a[m]);
}

inline EigenResult solve_config(const RunConfig& cfg, const Mesh& mesh, const MaterialField& mu, const MaterialField& eps) {
  const auto& si = cfg.solver.shift_invert;
  if (cfg.problem == ProblemKind::Scalar) {
    const ScalarPencil p = assemble_scalar(mesh, mu, eps, cfg.omega);
    if (cfg.solver.method == "dense") {
      DenseOracleOptions o;
      o.shift = si.sigma;
      o.dense_limit = cfg.solver.dense_limit;
      o.theta_cut = si.theta_cut;
      o.certificate = si.tol;
      return solve_dense_oracle(p.A0(), p.B_bd, o);
    }
    return solve_shift_invert(p.A0(), p.B_bd, si);
  }
  auto ops = std::make_shared<SurfaceOperatorSet>(mesh, extract_boundary(mesh));
  const MaxwellPencil p = assemble_maxwell(mesh, mu, eps, cfg.omega, ops);
  if (cfg.solver.method == "dense") {
    DenseOracleOptions o;
    o.shift = si.sigma;
    o.dense_limit = cfg.solver.dense_limit;
    o.theta_cut = si.theta_cut;
    o.certificate = si.tol;
    return solve_dense_oracle(p.A0(), ops->sparse(cfg.solver.dense_limit), o);
  }
  return solve_shift_invert(p.A0(), *ops, si);
}

struct Options {
  std::string config;
  std::string output;
  long long seed = -1;
  int threads = 0;
  // mesh subcommand
  std::string kind = "cube";
  int n = 2;
  int level = 0;
  int refine = 0;
};

inline RunConfig load(const Options& o) {
  require(!o.config.empty(), ErrorKind::ConfigError, "--config is required");
  RunConfig cfg = read_run_config(o.config);
  if (o.seed >= 0) cfg.solver.shift_invert.seed = static_cast<std::uint64_t>(o.seed);
  // relative mesh file paths are taken relative to the config file
  if (cfg.mesh.kind == "file" && std::filesystem::path(cfg.mesh.file).is_relative())
    cfg.mesh.file = (std::filesystem::path(o.config).parent_path() / cfg.mesh.file).string();
  return cfg;
}

inline int cmd_mesh(const Options& o, std::ostream& out) {
  MeshSpec spec;
  if (!o.config.empty()) {
    spec = load(o).mesh;
  } else {
    require(o.kind == "cube" || o.kind == "ball", ErrorKind::ConfigError, "--kind must be cube or ball");
    spec.kind = o.kind;
    spec.n = o.n;
    spec.level = o.level;
    spec.refine = o.refine;
  }
  require(spec.kind != "cube" || spec.n >= 1, ErrorKind::ConfigError, "--n must be >= 1");
  const Mesh mesh = build_mesh(spec);
  const std::string text = mesh_to_json(mesh).dump() + "\n";
  if (o.output.empty()) {
    out << text;
  } else {
    std::error_code ec;
    std::filesystem::create_directories(o.output, ec);
    write_text_file((std::filesystem::path(o.output) / "mesh.json").string(), text);
  }
  return kOk;
}

inline int cmd_diagnose(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const Mesh mesh = build_mesh(cfg.mesh);
  const MaterialField mu = build_field(mesh, FieldTag::MuInv, cfg.mu_inv, cfg.perturbations, Validation::Skip);
  const MaterialField eps = build_field(mesh, FieldTag::Eps, cfg.eps, cfg.perturbations, Validation::Skip);
  const Diagnostics d = run_diagnostics(cfg, mesh, mu, eps);
  json j{{"problem", to_string(cfg.problem)}, {"omega", cfg.omega}, {"mesh", mesh_summary(mesh)}, {"diagnostics", d.block}};
  out << j.dump(2) << "\n";
  if (!o.output.empty() || !cfg.output_dir.empty())
    write_text_file((std::filesystem::path(output_dir(cfg, o.output)) / "diagnostics.json").string(), j.dump(2) + "\n");
  require(d.pass, ErrorKind::AssumptionViolation, "assumption diagnostics failed");
  return kOk;
}

inline int cmd_solve(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const std::string dir = output_dir(cfg, o.output);
  const Mesh mesh = build_mesh(cfg.mesh);
  const MaterialField mu = build_field(mesh, FieldTag::MuInv, cfg.mu_inv, cfg.perturbations, Validation::Skip);
  const MaterialField eps = build_field(mesh, FieldTag::Eps, cfg.eps, cfg.perturbations, Validation::Skip);
  const Diagnostics d = run_diagnostics(cfg, mesh, mu, eps);
  json meta{{"problem", to_string(cfg.problem)}, {"omega", cfg.omega}, {"mesh", mesh_summary(mesh)}, {"diagnostics", d.block}};
  const auto meta_path = (std::filesystem::path(dir) / "solve.json").string();
  if (!d.pass) {
    write_text_file(meta_path, meta.dump(2) + "\n");
    fail(ErrorKind::AssumptionViolation, "assumption diagnostics failed; no eigenvalues written");
  }

  EigenResult r = solve_config(cfg, mesh, mu, eps);
  const ClusterResult cl = label_clusters(r, cfg.solver.cluster_reltol);
  const double radius = cfg.census.radius > 0 ? cfg.census.radius : 10.0 * median_abs(r.values);
  const SectorCensus census = sector_census(r.values, cfg.census.delta, radius);

  meta["solver"] = json{{"method", cfg.solver.method},
                        {"shift", complex_json(r.shift)},
                        {"requested", cfg.solver.shift_invert.k},
                        {"found", r.values.size()},
                        {"krylov_dim", r.krylov_dim},
                        {"restarts", r.restarts},
                        {"operator_applications", r.operator_applications},
                        {"discarded_infinite", r.discarded_infinite},
                        {"exhausted", r.exhausted},
                        {"converged", r.converged},
                        {"tol", cfg.solver.shift_invert.tol},
                        {"seed", cfg.solver.shift_invert.seed}};
  json clusters = json::array();
  for (const auto& c : cl.clusters)
    clusters.push_back(json{{"mean", complex_json(c.mean)}, {"size", c.size()}, {"diameter", c.diameter}});
  meta["clusters"] = clusters;
  meta["census"] = json{{"delta", cfg.census.delta},
                        {"radius", radius},
                        {"inside", census.inside},
                        {"outside", census.outside},
                        {"beyond", census.beyond}};
  write_text_file(meta_path, meta.dump(2) + "\n");
  write_text_file((std::filesystem::path(dir) / "eigenvalues.csv").string(), eigen_csv(r));
  out << "solve: " << r.values.size() << " eigenvalues in " << cl.clusters.size() << " clusters -> " << dir << "\n";
  require(r.converged, ErrorKind::SolverFailure, "iteration limit reached; partial result written");
  return kOk;
}

inline int cmd_study(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  require(cfg.study.present, ErrorKind::ConfigError, "config has no study section");
  const std::string dir = output_dir(cfg, o.output);
  auto mesh = std::make_shared<const Mesh>(build_mesh(cfg.mesh));
  const LabProblem problem(cfg.problem, mesh, cfg.omega);
  const StudyReport report = run_study(problem, study_config(cfg));
  write_text_file((std::filesystem::path(dir) / "study.json").string(), study_to_json(report).dump(2) + "\n");
  std::ostringstream csv;
  write_study_csv(csv, report);
  write_text_file((std::filesystem::path(dir) / "study.csv").string(), csv.str());
  out << "study: " << report.records.size() << " records -> " << dir << "\n";
  return kOk;
}

/// Entry point of the steklov executable; returns the process exit code.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Steklov eigenvalue lab for absorbing media"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run config (JSON)");
    sub->add_option("--output", o.output, "output directory");
    sub->add_option("--seed", o.seed, "start-vector seed");
    sub->add_option("--threads", o.threads, "worker threads (fallback: STEKLOV_THREADS)");
  };
  auto* mesh = app.add_subcommand("mesh", "generate a cube or ball mesh as JSON");
  common(mesh);
  mesh->add_option("--kind", o.kind, "cube | ball");
  mesh->add_option("--n", o.n, "cube subdivisions per axis");
  mesh->add_option("--level", o.level, "ball refinement level");
  mesh->add_option("--refine", o.refine, "extra uniform refinements");
  auto* solve = app.add_subcommand("solve", "eigenvalues near the shift, with diagnostics and census");
  common(solve);
  auto* study = app.add_subcommand("study", "ball perturbation study");
  common(study);
  auto* diagnose = app.add_subcommand("diagnose", "assumption checks only");
  common(diagnose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, ErrorKind::ConfigError, e.what());
    return kConfig;
  }
  if (o.threads > 0) set_thread_count(o.threads);

  try {
    if (mesh->parsed()) return cmd_mesh(o, out);
    if (solve->parsed()) return cmd_solve(o, out);
    if (study->parsed()) return cmd_study(o, out);
    return cmd_diagnose(o, out);
  } catch (const Error& e) {
    const std::string what = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    report_error(err, e.kind(), what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what);
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error(err, ErrorKind::SolverFailure, e.what());
    return kSolver;
  }
}

}  // namespace steklov::cli

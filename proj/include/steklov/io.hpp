#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "steklov/eigensolver.hpp"
#include "steklov/error.hpp"
#include "steklov/mesh.hpp"
#include "steklov/stability.hpp"

namespace steklov {

using nlohmann::json;

/// Shortest decimal text that round-trips a double.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Mesh JSON, version 1. Edges and boundary data are recomputed on load.

inline json mesh_to_json(const Mesh& mesh) {
  json j;
  j["version"] = 1;
  json v = json::array();
  for (const auto& x : mesh.vertices) v.push_back({x.x(), x.y(), x.z()});
  json t = json::array();
  for (const auto& tet : mesh.tets) t.push_back({tet[0], tet[1], tet[2], tet[3]});
  j["vertices"] = std::move(v);
  j["tets"] = std::move(t);
  j["region"] = mesh.region;
  return j;
}

inline Mesh mesh_from_json(const json& j) {
  require(j.is_object() && j.value("version", 0) == 1, ErrorKind::ConfigError, "mesh JSON must have \"version\": 1");
  Mesh mesh;
  try {
    for (const auto& v : j.at("vertices")) {
      require(v.size() == 3, ErrorKind::MalformedMesh, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    for (const auto& t : j.at("tets")) {
      require(t.size() == 4, ErrorKind::MalformedMesh, "tet needs 4 vertex indices");
      std::array<int, 4> tet{};
      for (int k = 0; k < 4; ++k) {
        tet[k] = t[k].get<int>();
        require(tet[k] >= 0 && tet[k] < mesh.num_vertices(), ErrorKind::MalformedMesh, "tet vertex index out of range");
      }
      mesh.tets.push_back(tet);
    }
    if (j.contains("region"))
      mesh.region = j.at("region").get<std::vector<int>>();
    else
      mesh.region.assign(mesh.tets.size(), 0);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("mesh JSON: ") + e.what());
  }
  require(mesh.region.size() == mesh.tets.size(), ErrorKind::MalformedMesh, "region list length differs from tet count");
  build_topology(mesh);
  return mesh;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::ConfigError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::ConfigError, "cannot write " + path);
  out << text;
  require(out.good(), ErrorKind::ConfigError, "write failed for " + path);
}

inline void write_mesh(const std::string& path, const Mesh& mesh) { write_text_file(path, mesh_to_json(mesh).dump() + "\n"); }
inline Mesh read_mesh(const std::string& path) { return mesh_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Eigenvalue CSV

inline void write_eigen_csv(std::ostream& out, const EigenResult& r) {
  out << "index,re,im,residual,cluster_id,cluster_size\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    out << i << ',' << format_real(r.values[i].real()) << ',' << format_real(r.values[i].imag()) << ','
        << format_real(i < r.residuals.size() ? r.residuals[i] : 0.0) << ',' << (i < r.cluster_id.size() ? r.cluster_id[i] : -1) << ','
        << (i < r.cluster_size.size() ? r.cluster_size[i] : 1) << '\n';
  }
}

inline std::string eigen_csv(const EigenResult& r) {
  std::ostringstream s;
  write_eigen_csv(s, r);
  return s.str();
}

// ---------------------------------------------------------------------------
// Matrix Market coordinate dump (1-based)

template <typename Scalar>
void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<Scalar>& a) {
  constexpr bool is_complex = !std::is_same_v<Scalar, double>;
  out << "%%MatrixMarket matrix coordinate " << (is_complex ? "complex" : "real") << " general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a, k); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ';
      if constexpr (is_complex)
        out << format_real(it.value().real()) << ' ' << format_real(it.value().imag()) << '\n';
      else
        out << format_real(it.value()) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Study reports

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return json{{"slope", f->slope},
              {"intercept", f->intercept},
              {"residual", f->residual},
              {"bound_ratio", f->bound_ratio},
              {"bound_ok", f->bound_ok()},
              {"points", f->points}};
}

inline json study_to_json(const StudyReport& r) {
  json j;
  j["problem"] = to_string(r.problem);
  j["omega"] = r.omega;
  j["target"] = to_string(r.target);
  j["p"] = r.p_list;
  json base;
  json vals = json::array();
  for (cplx v : r.baseline.values) vals.push_back(complex_json(v));
  base["values"] = vals;
  base["mean"] = complex_json(r.baseline.mean);
  base["multiplicity"] = r.baseline.values.size();
  base["guard_radius"] = r.baseline.guard;
  base["nondegeneracy"] = complex_json(r.baseline.c.c);
  base["nondegeneracy_relative"] = r.baseline.c.relative();
  base["diagnostic"] = r.baseline.diagnostic;
  j["baseline"] = base;
  json recs = json::array();
  for (const auto& s : r.records) {
    json e;
    e["h"] = s.h;
    e["delta"] = complex_json(s.delta);
    e["elements"] = s.elements;
    e["ball_volume"] = s.ball_volume;
    e["mu_norms"] = s.mu_norms;
    e["eps_norms"] = s.eps_norms;
    json lh = json::array();
    for (cplx v : s.lambda_h) lh.push_back(complex_json(v));
    e["lambda_h"] = lh;
    e["mean"] = complex_json(s.mean);
    e["drift"] = s.drift;
    e["mean_drift"] = s.mean_drift;
    e["predicted"] = s.predicted;
    e["predicted_shift"] = complex_json(s.predicted_shift);
    e["predicted_drift"] = s.predicted_drift;
    e["diagnostic"] = s.diagnostic;
    e["flagged"] = s.flagged;
    e["note"] = s.note;
    recs.push_back(std::move(e));
  }
  j["records"] = recs;
  json fits = json::array();
  for (std::size_t k = 0; k < r.p_list.size(); ++k)
    fits.push_back({{"p", r.p_list[k]}, {"drift", fit_json(r.fits[k])}, {"mean_drift", fit_json(r.mean_fits[k])}});
  j["fits"] = fits;
  return j;
}

/// One row per record and exponent p.
inline void write_study_csv(std::ostream& out, const StudyReport& r) {
  out << "h,delta_re,delta_im,p,mu_norm,eps_norm,drift,mean_drift,predicted_drift,flagged\n";
  for (const auto& s : r.records)
    for (std::size_t k = 0; k < r.p_list.size(); ++k) {
      const bool has = k < s.eps_norms.size();
      out << format_real(s.h) << ',' << format_real(s.delta.real()) << ',' << format_real(s.delta.imag()) << ','
          << format_real(r.p_list[k]) << ',' << format_real(has ? s.mu_norms[k] : 0.0) << ','
          << format_real(has ? s.eps_norms[k] : 0.0) << ',' << format_real(s.drift) << ',' << format_real(s.mean_drift) << ','
          << format_real(s.predicted_drift) << ',' << (s.flagged ? 1 : 0) << '\n';
    }
}

}  // namespace steklov

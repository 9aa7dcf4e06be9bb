#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "steklov/cli.hpp"

using namespace steklov;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "steklov");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("steklov_test_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

fs::path write_json(const fs::path& p, const json& j) {
  write_text_file(p.string(), j.dump(2));
  return p;
}

json scalar_ball_config() {
  return json::parse(R"({
    "problem": "scalar",
    "mesh": {"kind": "ball", "level": 1},
    "omega": 0.0,
    "solver": {"sigma": 1.5, "k": 16, "cluster_reltol": 0.1}
  })");
}

}  // namespace

TEST(MeshJson, RoundTrip) {
  Mesh m = generate_cube_mesh(2);
  m.region[3] = 7;
  const Mesh back = mesh_from_json(json::parse(mesh_to_json(m).dump()));
  EXPECT_EQ(back.vertices, m.vertices);
  EXPECT_EQ(back.tets, m.tets);
  EXPECT_EQ(back.region, m.region);
  EXPECT_EQ(back.edges, m.edges);
  EXPECT_EQ(back.boundary_faces.size(), m.boundary_faces.size());
}

TEST(MeshJson, RejectsBadInput) {
  json j = mesh_to_json(generate_cube_mesh(1));
  j["version"] = 2;
  EXPECT_THROW(mesh_from_json(j), Error);
  j["version"] = 1;
  j["tets"][0][2] = 1000;
  try {
    mesh_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedMesh);
  }
}

TEST(Config, TensorsConductivityAndStudy) {
  const json j = json::parse(R"({
    "problem": "maxwell",
    "omega": 2.0,
    "mesh": {"kind": "cube", "n": 3, "regions": [{"tag": 1, "ball": {"center": [0.5, 0.5, 0.5], "radius": 0.3}}]},
    "materials": {
      "mu_inv": {"0": 1.0, "1": 2.0},
      "eps": {"0": {"re": 4.0, "im": 1.0}, "1": {"re": [[1,0,0],[0,2,0],[0,0,3]]}},
      "sigma": {"1": 0.5}
    },
    "solver": {"sigma": {"re": 1.0, "im": 0.5}, "k": 5, "rayleigh": true},
    "study": {"center": [0.5, 0.5, 0.5], "radii": [0.1, 0.2], "deltas": [0.01, {"im": 0.02}], "p": [2, 4]}
  })");
  const RunConfig c = parse_run_config(j);
  EXPECT_EQ(c.problem, ProblemKind::Maxwell);
  EXPECT_EQ(c.eps.at(0), isotropic(cplx(4.0, 1.0)));
  EXPECT_EQ(c.eps.at(1)(1, 1), cplx(2.0, 0.25));
  EXPECT_EQ(c.mu_inv.at(1), isotropic(2.0));
  EXPECT_EQ(c.solver.shift_invert.sigma, cplx(1.0, 0.5));
  EXPECT_TRUE(c.solver.shift_invert.symmetric_rayleigh);
  const StudyConfig s = study_config(c);
  ASSERT_EQ(s.steps.size(), 4u);
  EXPECT_EQ(s.steps[1].delta, cplx(0.0, 0.02));
  EXPECT_EQ(s.steps[2].h, 0.2);
  const Mesh m = build_mesh(c.mesh);
  int tagged = 0;
  for (int r : m.region) tagged += r == 1;
  EXPECT_GT(tagged, 0);
  EXPECT_LT(tagged, m.num_tets());
}

TEST(Config, Errors) {
  auto kind_of = [](const char* text) {
    try {
      parse_run_config(json::parse(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  EXPECT_EQ(kind_of(R"({"problem": "maxwell"})"), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of(R"({"problem": "heat"})"), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of(R"({"mesh": {"kind": "torus"}})"), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of(R"({"materials": {"eps": {"a": 1.0}}})"), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of(R"({"solver": {"k": 0}})"), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of(R"({"solver": {"k": "many"}})"), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of(R"({"census": {"delta": 4.0}})"), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of(R"({"study": {"center": [0, 0, 0], "radii": [0.1], "deltas": [0.1], "p": [0.5]}})"), ErrorKind::ConfigError);
}

TEST(Cli, MeshToStdout) {
  const CliRun r = run_cli({"mesh", "--kind", "cube", "--n", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Mesh m = mesh_from_json(json::parse(r.out));
  EXPECT_EQ(m.num_tets(), 48);
}

TEST(Cli, MeshFileRoundTripThroughConfig) {
  TempDir dir("meshfile");
  ASSERT_EQ(run_cli({"mesh", "--kind", "ball", "--level", "0", "--output", dir.path().string()}).code, 0);
  json cfg{{"problem", "scalar"}, {"mesh", {{"file", "mesh.json"}}}, {"omega", 0.5}};
  const auto path = write_json(dir / "cfg.json", cfg);
  const CliRun r = run_cli({"diagnose", "--config", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json d = json::parse(r.out);
  EXPECT_EQ(d["mesh"]["vertices"], 129);
  EXPECT_TRUE(d["diagnostics"]["pass"].get<bool>());
}

TEST(Cli, MissingConfigIsAConfigError) {
  const CliRun r = run_cli({"solve", "--config", "/nonexistent/config.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("steklov: error config-error: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, UnknownFlagIsAConfigError) { EXPECT_EQ(run_cli({"solve", "--frobnicate"}).code, 1); }

TEST(Cli, FailedDiagnosticExitsTwo) {
  TempDir dir("diagfail");
  json cfg = json::parse(R"({"problem": "scalar", "mesh": {"kind": "cube", "n": 2}, "omega": 1.0,
                             "materials": {"eps": {"0": -1.0}}})");
  const auto path = write_json(dir / "cfg.json", cfg);
  const CliRun d = run_cli({"diagnose", "--config", path.string()});
  EXPECT_EQ(d.code, 2);
  EXPECT_EQ(d.err.rfind("steklov: error assumption-violation: ", 0), 0u) << d.err;
  EXPECT_FALSE(json::parse(d.out)["diagnostics"]["eps"]["pass"].get<bool>());
  const CliRun s = run_cli({"solve", "--config", path.string(), "--output", (dir / "out").string()});
  EXPECT_EQ(s.code, 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "solve.json"));
  EXPECT_FALSE(fs::exists(dir / "out" / "eigenvalues.csv"));
}

TEST(Cli, SolveBallFindsHarmonicClusters) {
  TempDir dir("solveball");
  const auto path = write_json(dir / "cfg.json", scalar_ball_config());
  const CliRun r = run_cli({"solve", "--config", path.string(), "--output", (dir / "a").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json meta = json::parse(slurp(dir / "a" / "solve.json"));
  const auto& clusters = meta["clusters"];
  ASSERT_EQ(clusters.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(clusters[k]["size"].get<int>(), 2 * k + 1);
    EXPECT_NEAR(clusters[k]["mean"]["re"].get<double>(), double(k), 0.1 * std::max(k, 1));
  }
  const std::string csv = slurp(dir / "a" / "eigenvalues.csv");
  EXPECT_EQ(csv.rfind("index,re,im,residual,cluster_id,cluster_size\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);

  // same seed, same bytes
  ASSERT_EQ(run_cli({"solve", "--config", path.string(), "--output", (dir / "b").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "b" / "eigenvalues.csv"), csv);
}

TEST(Cli, StudyWritesReports) {
  TempDir dir("study");
  json cfg = json::parse(R"({
    "problem": "scalar", "mesh": {"kind": "ball", "level": 0}, "omega": 1.0,
    "materials": {"eps": {"0": {"re": 2.0, "im": 0.5}}},
    "solver": {"sigma": 0.0, "k": 8},
    "study": {"center": [0.2, 0.1, 0.0], "radii": [0.4, 0.5, 0.6], "deltas": [{"im": 0.01}], "p": [2, 4], "lambda0": -0.7}
  })");
  const auto path = write_json(dir / "cfg.json", cfg);
  const CliRun r = run_cli({"study", "--config", path.string(), "--output", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(dir / "study.json"));
  EXPECT_EQ(j["records"].size(), 3u);
  EXPECT_EQ(j["fits"].size(), 2u);
  const std::string csv = slurp(dir / "study.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 2);
}

TEST(Cli, StudyWithoutSectionIsAConfigError) {
  TempDir dir("nostudy");
  const auto path = write_json(dir / "cfg.json", scalar_ball_config());
  EXPECT_EQ(run_cli({"study", "--config", path.string(), "--output", dir.path().string()}).code, 1);
}

TEST(Cli, Subprocess) {
  TempDir dir("subprocess");
  const std::string cmd = std::string(STEKLOV_CLI_PATH) + " mesh --kind cube --n 1 > " + (dir / "out.json").string() + " 2> " +
                          (dir / "err.txt").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(mesh_from_json(json::parse(slurp(dir / "out.json"))).num_tets(), 6);
  const std::string bad = std::string(STEKLOV_CLI_PATH) + " diagnose --config /nonexistent.json 2> " + (dir / "err.txt").string();
  const int status = std::system(bad.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 1);
  EXPECT_EQ(slurp(dir / "err.txt").rfind("steklov: error config-error:", 0), 0u);
}

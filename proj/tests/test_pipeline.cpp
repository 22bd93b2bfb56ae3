#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <lamina/mesh_io.hpp>
#include <lamina/pipeline.hpp>

using namespace lamina;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lamina_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string s;
  while (std::getline(in, s)) ++n;
  return n;
}

}  // namespace

TEST_CASE("M = {1/2}, K = 2, all certificates: all pass, three meshes") {
  RunConfig cfg;
  cfg.out = scratch("full").string();
  std::ostringstream log;
  const auto res = run_pipeline(cfg, log);
  INFO(log.str());
  CHECK(res.failed == 0);
  CHECK(res.report.entries().size() > 50);

  const fs::path dir(cfg.out);
  for (int k = 0; k <= 2; ++k) {
    for (const char* ext : {"obj", "ply", "csv"}) {
      CHECK(fs::exists(dir / ("mesh_" + std::to_string(k) + "." + ext)));
    }
  }
  CHECK_FALSE(fs::exists(dir / "mesh_3.obj"));
  CHECK(res.mesh_files.size() == 9);
  for (const char* f : {"nets.csv", "traces.csv", "recursion.csv", "report.json", "report.csv", "blowup.csv",
                        "bounded.csv", "spiral.csv", "cauchy.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(lines(dir / "report.csv") == res.report.entries().size() + 1);
  CHECK(lines(dir / "traces.csv") == 3 * cfg.nx + 1);

  // Every certificate family ran.
  for (const char* id : {"nets.separation", "level_planes", "fiber.angle", "radius.dichotomy", "curvature.blowup_slope",
                         "curvature.bounded", "spiral.endpoint_slope", "convergence.cauchy_decay", "mesh.embedding",
                         "fiber.graph_sheets"}) {
    bool seen = false;
    for (const auto& e : res.report.entries()) seen = seen || e.claim_id == id;
    CHECK(seen);
  }

  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j["failed"] == 0);
  CHECK(j["header"]["params"]["gamma"] == 2.0);
  CHECK(j["header"]["derived"].contains("tau"));
  CHECK(log.str().find("failed certificates: 0") != std::string::npos);

  // The exported mesh reloads with the advertised triangle count.
  const SurfaceMesh m2 = read_ply((dir / "mesh_2.ply").string());
  CHECK(m2.triangles.size() > 50'000);
}

TEST_CASE("identical config and seed give identical artifacts") {
  RunConfig cfg;
  cfg.levels = 1;
  cfg.certificates = {"bounded", "nets"};
  cfg.seed = 7;
  cfg.out = scratch("det_a").string();
  std::ostringstream sink;
  run_pipeline(cfg, sink);
  const fs::path a(cfg.out);
  cfg.out = scratch("det_b").string();
  run_pipeline(cfg, sink);
  const fs::path b(cfg.out);
  for (const char* f : {"mesh_1.ply", "mesh_1.obj", "nets.csv", "traces.csv", "bounded.csv", "report.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("empty certificate list writes meshes only") {
  RunConfig cfg;
  cfg.certificates = {};
  cfg.out = scratch("none").string();
  std::ostringstream log;
  const auto res = run_pipeline(cfg, log);
  CHECK(res.failed == 0);
  CHECK(res.report.entries().empty());
  CHECK(fs::exists(fs::path(cfg.out) / "mesh_2.obj"));
  CHECK_FALSE(fs::exists(fs::path(cfg.out) / "blowup.csv"));

  cfg.certificates = certificate_names();
  cfg.out = scratch("build").string();
  const auto built = run_pipeline(cfg, log, true);
  CHECK(built.report.entries().empty());
}

TEST_CASE("pipeline errors are actionable") {
  RunConfig cfg;
  cfg.params.mu = cfg.params.gamma;
  cfg.out = scratch("invalid").string();
  std::ostringstream log;
  CHECK_THROWS_WITH(run_pipeline(cfg, log), Catch::Matchers::ContainsSubstring("must satisfy μ^{2/3} < γ < μ < γ³"));
  CHECK_FALSE(fs::exists(cfg.out));  // aborts before touching the disk

  RunConfig blocked;
  const fs::path file = scratch("blocked");
  std::ofstream(file) << "x";
  blocked.out = (file / "sub").string();
  CHECK_THROWS_AS(run_pipeline(blocked, log), IoError);
  fs::remove(file);
}

TEST_CASE("failed certificates are counted") {
  // A wide window lets the rotation saturate: displacements stop shrinking by 2.
  RunConfig cfg;
  cfg.levels = 0;
  cfg.certificates = {"cauchy"};
  cfg.cauchy_window = 0.5;
  cfg.out = scratch("fail").string();
  std::ostringstream log;
  const auto res = run_pipeline(cfg, log);
  CHECK(res.failed == 1);
  CHECK(log.str().find("FAIL") != std::string::npos);
}

TEST_CASE("complementary intervals include the padded outer pieces") {
  const CompactSet set = materialize_set(PointList{{0.25, 0.5}});
  const auto ivs = detail::complementary_intervals(set, {-0.25, 1.0});
  REQUIRE(ivs.size() == 3);
  CHECK(ivs[0] == Interval{0.25, 0.5});
  CHECK(ivs[1] == Interval{-0.25, 0.25});
  CHECK(ivs[2] == Interval{0.5, 1.0});
}

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include <lamina/mesh_io.hpp>

using namespace lamina;
namespace fs = std::filesystem;

namespace {

SurfaceMesh helicoid_mesh() {
  ParamGrid g;
  const double pi = std::numbers::pi;
  for (int i = 0; i < 24; ++i) {
    g.xs.push_back(-pi + 2 * pi * i / 23.0);
    std::vector<double> col;
    for (int j = 0; j < 8; ++j) col.push_back(-1.0 + 2.0 * j / 7.0);
    g.ys.push_back(col);
  }
  return build_mesh(WeierstrassSurface::helicoid(), g, 1e-12);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lamina_mesh_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("OBJ round-trip keeps 17 significant digits") {
  const auto mesh = helicoid_mesh();
  const auto path = scratch("h.obj");
  export_mesh(mesh, MeshFormat::obj, path.string());
  const auto back = read_obj(path.string());
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  REQUIRE(back.normals.size() == mesh.normals.size());
  CHECK(back.triangles == mesh.triangles);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    CHECK(back.vertices[i] == mesh.vertices[i]);
    CHECK(back.normals[i] == mesh.normals[i]);
  }
}

TEST_CASE("PLY round-trip is exact and deterministic") {
  const auto mesh = helicoid_mesh();
  const auto p1 = scratch("a.ply"), p2 = scratch("b.ply");
  export_mesh(mesh, MeshFormat::ply, p1.string());
  export_mesh(mesh, MeshFormat::ply, p2.string());
  CHECK(slurp(p1) == slurp(p2));
  const auto back = read_ply(p1.string());
  CHECK(back.vertices == mesh.vertices);
  CHECK(back.normals == mesh.normals);
  CHECK(back.curvature == mesh.curvature);
  CHECK(back.params == mesh.params);
  CHECK(back.triangles == mesh.triangles);
}

TEST_CASE("CSV has one row per vertex plus a header") {
  const auto mesh = helicoid_mesh();
  const auto path = scratch("h.csv");
  export_mesh(mesh, MeshFormat::csv, path.string());
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "x,y,x1,x2,x3,K");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == mesh.vertices.size());
}

TEST_CASE("export errors") {
  CHECK_THROWS_AS(write_obj(SurfaceMesh{}, scratch("e.obj").string()), ValidationError);
  CHECK_THROWS_AS(write_ply(SurfaceMesh{}, scratch("e.ply").string()), ValidationError);
  CHECK_THROWS_AS(write_obj(helicoid_mesh(), "/nonexistent-dir/x.obj"), IoError);
  CHECK_THROWS_AS(read_ply("/nonexistent-dir/x.ply"), IoError);
}

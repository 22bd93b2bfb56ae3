#pragma once

// Mesh export: text OBJ, binary little-endian PLY, CSV; readers for round-trips.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "immersion.hpp"

namespace lamina {

enum class MeshFormat { obj, ply, csv };

namespace detail {

inline std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary | std::ios::in : std::ios::in);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

template <class T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  out.write(b.data(), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> b;
  if (!in.read(b.data(), sizeof(T))) throw IoError("truncated PLY body");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

inline void require_nonempty(const SurfaceMesh& mesh, const char* fmt) {
  if (mesh.empty()) throw ValidationError(std::string(fmt) + " export needs a nonempty mesh");
}

}  // namespace detail

/// Positions and normals; faces reference both with 1-based indices.
inline void write_obj(const SurfaceMesh& mesh, const std::string& path) {
  detail::require_nonempty(mesh, "OBJ");
  auto out = detail::open_out(path, false);
  out << std::setprecision(17);
  out << "# lamina surface mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
      << " triangles\n";
  for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& n : mesh.normals) out << "vn " << n.x << ' ' << n.y << ' ' << n.z << '\n';
  const bool with_normals = mesh.normals.size() == mesh.vertices.size();
  for (const auto& t : mesh.triangles) {
    out << 'f';
    for (auto i : t) {
      out << ' ' << i + 1;
      if (with_normals) out << "//" << i + 1;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Minimal OBJ reader: v, vn and triangular f records (v, v/t, v//n, v/t/n).
inline SurfaceMesh read_obj(const std::string& path) {
  auto in = detail::open_in(path, false);
  SurfaceMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw IoError(path + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vn") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) fail("bad " + tag + " record");
      (tag == "v" ? mesh.vertices : mesh.normals).push_back(p);
    } else if (tag == "f") {
      std::array<std::uint32_t, 3> tri{};
      std::string tok;
      int n = 0;
      while (ls >> tok) {
        if (n == 3) fail("only triangular faces are supported");
        const long idx = std::stol(tok.substr(0, tok.find('/')));
        if (idx < 1 || static_cast<std::size_t>(idx) > mesh.vertices.size()) fail("face index out of range");
        tri[static_cast<std::size_t>(n++)] = static_cast<std::uint32_t>(idx - 1);
      }
      if (n != 3) fail("face with fewer than 3 vertices");
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

/// Binary little-endian PLY with per-vertex x y z nx ny nz curvature u v (float64).
inline void write_ply(const SurfaceMesh& mesh, const std::string& path) {
  detail::require_nonempty(mesh, "PLY");
  if (mesh.normals.size() != mesh.vertices.size() || mesh.curvature.size() != mesh.vertices.size() ||
      mesh.params.size() != mesh.vertices.size()) {
    throw ValidationError("PLY export needs normals, curvature and parameters for every vertex");
  }
  auto out = detail::open_out(path, true);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << '\n';
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz", "curvature", "u", "v"}) out << "property double " << p << '\n';
  out << "element face " << mesh.triangles.size() << '\n'
      << "property list uchar uint vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    const auto& n = mesh.normals[i];
    for (double d : {v.x, v.y, v.z, n.x, n.y, n.z, mesh.curvature[i], mesh.params[i][0], mesh.params[i][1]}) {
      detail::put_le(out, d);
    }
  }
  for (const auto& t : mesh.triangles) {
    detail::put_le<std::uint8_t>(out, 3);
    for (auto i : t) detail::put_le<std::uint32_t>(out, i);
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Reads files written by write_ply.
inline SurfaceMesh read_ply(const std::string& path) {
  auto in = detail::open_in(path, true);
  std::string line;
  std::size_t nv = 0, nf = 0;
  std::vector<std::string> props;
  if (!std::getline(in, line) || line != "ply") throw IoError(path + ": not a PLY file");
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string a, b, c;
    ls >> a >> b >> c;
    if (a == "format" && b != "binary_little_endian") throw IoError(path + ": unsupported PLY format " + b);
    if (a == "element" && b == "vertex") nv = std::stoul(c);
    if (a == "element" && b == "face") nf = std::stoul(c);
    if (a == "property" && b == "double") props.push_back(c);
  }
  const std::vector<std::string> expect{"x", "y", "z", "nx", "ny", "nz", "curvature", "u", "v"};
  if (props != expect) throw IoError(path + ": unexpected vertex layout");

  SurfaceMesh mesh;
  mesh.vertices.resize(nv);
  mesh.normals.resize(nv);
  mesh.curvature.resize(nv);
  mesh.params.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::array<double, 9> d;
    for (auto& x : d) x = detail::get_le<double>(in);
    mesh.vertices[i] = {d[0], d[1], d[2]};
    mesh.normals[i] = {d[3], d[4], d[5]};
    mesh.curvature[i] = d[6];
    mesh.params[i] = {d[7], d[8]};
  }
  mesh.triangles.resize(nf);
  for (auto& t : mesh.triangles) {
    if (detail::get_le<std::uint8_t>(in) != 3) throw IoError(path + ": non-triangular face");
    for (auto& i : t) {
      i = detail::get_le<std::uint32_t>(in);
      if (i >= nv) throw IoError(path + ": face index out of range");
    }
  }
  return mesh;
}

/// One row per vertex: x, y, x1, x2, x3, K.
inline void write_mesh_csv(const SurfaceMesh& mesh, const std::string& path) {
  auto out = detail::open_out(path, false);
  out << std::setprecision(17) << "x,y,x1,x2,x3,K\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    out << mesh.params[i][0] << ',' << mesh.params[i][1] << ',' << v.x << ',' << v.y << ',' << v.z << ','
        << (i < mesh.curvature.size() ? mesh.curvature[i] : 0.0) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

inline void export_mesh(const SurfaceMesh& mesh, MeshFormat fmt, const std::string& path) {
  switch (fmt) {
    case MeshFormat::obj: write_obj(mesh, path); break;
    case MeshFormat::ply: write_ply(mesh, path); break;
    case MeshFormat::csv: write_mesh_csv(mesh, path); break;
  }
}

}  // namespace lamina

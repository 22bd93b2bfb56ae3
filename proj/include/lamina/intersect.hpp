#pragma once

// Self-intersection scan for triangle meshes: sort-and-sweep broad phase,
// exact orientation predicates in the narrow phase.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "immersion.hpp"

namespace lamina {

namespace exact {

using rational = boost::multiprecision::cpp_rational;

inline int sign_of(const rational& r) { return r.sign(); }

/// Sign of det[b-a, c-a, d-a]: positive when d lies on the side of the plane abc
/// that sees a, b, c counter-clockwise.
inline int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double bx = b.x - a.x, by = b.y - a.y, bz = b.z - a.z;
  const double cx = c.x - a.x, cy = c.y - a.y, cz = c.z - a.z;
  const double dx = d.x - a.x, dy = d.y - a.y, dz = d.z - a.z;
  const double det = bx * (cy * dz - cz * dy) - by * (cx * dz - cz * dx) + bz * (cx * dy - cy * dx);
  const double perm = std::abs(bx) * (std::abs(cy * dz) + std::abs(cz * dy)) +
                      std::abs(by) * (std::abs(cx * dz) + std::abs(cz * dx)) +
                      std::abs(bz) * (std::abs(cx * dy) + std::abs(cy * dx));
  // Static filter: the double evaluation errs by at most ~7.8e-16 * perm.
  if (std::abs(det) > 1e-15 * perm) return det > 0 ? 1 : -1;
  const rational ax(a.x), ay(a.y), az(a.z);
  const rational Bx = rational(b.x) - ax, By = rational(b.y) - ay, Bz = rational(b.z) - az;
  const rational Cx = rational(c.x) - ax, Cy = rational(c.y) - ay, Cz = rational(c.z) - az;
  const rational Dx = rational(d.x) - ax, Dy = rational(d.y) - ay, Dz = rational(d.z) - az;
  return sign_of(Bx * (Cy * Dz - Cz * Dy) - By * (Cx * Dz - Cz * Dx) + Bz * (Cx * Dy - Cy * Dx));
}

struct P2 {
  double u = 0, v = 0;
};

inline int orient2d(const P2& a, const P2& b, const P2& c) {
  const double l = (b.u - a.u) * (c.v - a.v), r = (b.v - a.v) * (c.u - a.u);
  const double det = l - r;
  if (std::abs(det) > 1e-15 * (std::abs(l) + std::abs(r))) return det > 0 ? 1 : -1;
  const rational d = (rational(b.u) - rational(a.u)) * (rational(c.v) - rational(a.v)) -
                     (rational(b.v) - rational(a.v)) * (rational(c.u) - rational(a.u));
  return sign_of(d);
}

/// Closed segments pq and rs in the plane.
inline bool segments_meet_2d(const P2& p, const P2& q, const P2& r, const P2& s) {
  const int o1 = orient2d(p, q, r), o2 = orient2d(p, q, s), o3 = orient2d(r, s, p), o4 = orient2d(r, s, q);
  auto within = [](const P2& a, const P2& b, const P2& c) {
    // c collinear with ab: inside the bounding box of ab
    return std::min(a.u, b.u) <= c.u && c.u <= std::max(a.u, b.u) && std::min(a.v, b.v) <= c.v &&
           c.v <= std::max(a.v, b.v);
  };
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && within(p, q, r)) return true;
  if (o2 == 0 && within(p, q, s)) return true;
  if (o3 == 0 && within(r, s, p)) return true;
  if (o4 == 0 && within(r, s, q)) return true;
  return false;
}

inline bool point_in_triangle_2d(const P2& p, const P2& a, const P2& b, const P2& c) {
  const int o1 = orient2d(a, b, p), o2 = orient2d(b, c, p), o3 = orient2d(c, a, p);
  return (o1 >= 0 && o2 >= 0 && o3 >= 0) || (o1 <= 0 && o2 <= 0 && o3 <= 0);
}

/// Drop the coordinate along which the triangle's normal is largest.
inline int projection_axis(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = cross(b - a, c - a);
  const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
  return (ax >= ay && ax >= az) ? 0 : (ay >= az ? 1 : 2);
}

inline P2 project(const Vec3& p, int drop) {
  switch (drop) {
    case 0: return {p.y, p.z};
    case 1: return {p.z, p.x};
    default: return {p.x, p.y};
  }
}

/// Closed segment pq against closed triangle abc.
inline bool segment_meets_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const int sp = orient3d(a, b, c, p), sq = orient3d(a, b, c, q);
  if (sp * sq > 0) return false;
  if (sp == 0 && sq == 0) {
    const int drop = projection_axis(a, b, c);
    const P2 P = project(p, drop), Q = project(q, drop);
    const P2 A = project(a, drop), B = project(b, drop), C = project(c, drop);
    return point_in_triangle_2d(P, A, B, C) || point_in_triangle_2d(Q, A, B, C) || segments_meet_2d(P, Q, A, B) ||
           segments_meet_2d(P, Q, B, C) || segments_meet_2d(P, Q, C, A);
  }
  // The line pq meets the plane inside the triangle iff it passes each edge on the same side.
  const int e1 = orient3d(p, q, a, b), e2 = orient3d(p, q, b, c), e3 = orient3d(p, q, c, a);
  return (e1 >= 0 && e2 >= 0 && e3 >= 0) || (e1 <= 0 && e2 <= 0 && e3 <= 0);
}

/// Exact zero-area test: all three coordinate projections are collinear.
inline bool degenerate(const Vec3& a, const Vec3& b, const Vec3& c) {
  for (int drop = 0; drop < 3; ++drop) {
    if (orient2d(project(a, drop), project(b, drop), project(c, drop)) != 0) return false;
  }
  return true;
}

/// Closed triangles intersect iff an edge of one meets the other.
inline bool triangles_intersect(const std::array<Vec3, 3>& s, const std::array<Vec3, 3>& t) {
  for (int i = 0; i < 3; ++i) {
    if (segment_meets_triangle(s[i], s[(i + 1) % 3], t[0], t[1], t[2])) return true;
    if (segment_meets_triangle(t[i], t[(i + 1) % 3], s[0], s[1], s[2])) return true;
  }
  return false;
}

}  // namespace exact

struct EmbeddingScan {
  std::size_t triangles = 0;
  std::size_t degenerate = 0;          // excluded from the scan
  std::size_t candidate_pairs = 0;     // bounding boxes overlap, no shared vertex
  std::size_t intersecting_pairs = 0;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> witness;  // first intersecting pair
};

/// Count intersecting pairs of triangles that share no vertex index.
inline EmbeddingScan mesh_embedding_scan(const SurfaceMesh& mesh) {
  struct Box {
    std::array<double, 3> lo, hi;
    std::uint32_t tri;
  };
  EmbeddingScan out;
  out.triangles = mesh.triangles.size();
  const auto& V = mesh.vertices;

  std::vector<Box> boxes;
  boxes.reserve(mesh.triangles.size());
  std::array<double, 3> glo{INFINITY, INFINITY, INFINITY}, ghi{-INFINITY, -INFINITY, -INFINITY};
  for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (exact::degenerate(V[tri[0]], V[tri[1]], V[tri[2]])) {
      ++out.degenerate;
      continue;
    }
    Box b{{INFINITY, INFINITY, INFINITY}, {-INFINITY, -INFINITY, -INFINITY}, t};
    for (auto vi : tri) {
      const std::array<double, 3> p{V[vi].x, V[vi].y, V[vi].z};
      for (int a = 0; a < 3; ++a) {
        b.lo[a] = std::min(b.lo[a], p[a]);
        b.hi[a] = std::max(b.hi[a], p[a]);
      }
    }
    for (int a = 0; a < 3; ++a) {
      glo[a] = std::min(glo[a], b.lo[a]);
      ghi[a] = std::max(ghi[a], b.hi[a]);
    }
    boxes.push_back(b);
  }
  if (boxes.empty()) return out;

  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (ghi[a] - glo[a] > ghi[axis] - glo[axis]) axis = a;
  }
  std::sort(boxes.begin(), boxes.end(), [axis](const Box& x, const Box& y) {
    return x.lo[axis] < y.lo[axis] || (x.lo[axis] == y.lo[axis] && x.tri < y.tri);
  });

  auto shares_vertex = [&](std::uint32_t s, std::uint32_t t) {
    for (auto i : mesh.triangles[s]) {
      for (auto j : mesh.triangles[t]) {
        if (i == j) return true;
      }
    }
    return false;
  };

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    std::erase_if(active, [&](std::size_t k) { return boxes[k].hi[axis] < b.lo[axis]; });
    for (std::size_t k : active) {
      const Box& o = boxes[k];
      bool overlap = true;
      for (int a = 0; a < 3 && overlap; ++a) overlap = o.lo[a] <= b.hi[a] && b.lo[a] <= o.hi[a];
      if (!overlap || shares_vertex(b.tri, o.tri)) continue;
      ++out.candidate_pairs;
      const auto& s = mesh.triangles[b.tri];
      const auto& t = mesh.triangles[o.tri];
      if (exact::triangles_intersect({V[s[0]], V[s[1]], V[s[2]]}, {V[t[0]], V[t[1]], V[t[2]]})) {
        ++out.intersecting_pairs;
        if (!out.witness) out.witness = std::minmax(b.tri, o.tri);
      }
    }
    active.push_back(i);
  }
  return out;
}

}  // namespace lamina

#pragma once

// Weierstrass representation F(z) = Re \int (1/2 (1/g - g), i/2 (1/g + g), 1) phi
// for the helicoid, the catenoid and the surfaces built from H_k.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <variant>
#include <vector>

#include "analytic.hpp"
#include "error.hpp"
#include "profile.hpp"
#include "quadrature.hpp"

namespace lamina {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
  friend Vec3 operator-(const Vec3& v) { return {-v.x, -v.y, -v.z}; }
  bool operator==(const Vec3&) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

using cplx = std::complex<double>;
using CVec3 = std::array<cplx, 3>;

/// g = e^{iz}, phi = dz
struct Helicoid {};
/// g = z, phi = dz / z on C \ {0}
struct Catenoid {};
/// g = e^{i (H_k - phase)}, phi = dz. The phase rotates the surface about the x3-axis.
/// With `wide` set, H_k - phase is formed in long double: U_k carries constants
/// of size pi / (4 a_k^3) that swamp double precision at small a_k.
struct FieldSurface {
  std::shared_ptr<const HField<double>> field;
  long double phase = 0.0L;
  std::shared_ptr<const HField<long double>> wide;

  /// H_k(z) - phase and H_k'(z).
  FieldValue<double> reduced(cplx z) const {
    if (wide) {
      const auto v = (*wide)(std::complex<long double>(z.real(), z.imag()));
      return {cplx(static_cast<double>(v.H.real() - phase), static_cast<double>(v.H.imag())),
              cplx(static_cast<double>(v.dH.real()), static_cast<double>(v.dH.imag()))};
    }
    const auto v = (*field)(z);
    return {v.H - static_cast<double>(phase), v.dH};
  }
};

class WeierstrassSurface {
public:
  using Data = std::variant<Helicoid, Catenoid, FieldSurface>;

  static WeierstrassSurface helicoid(cplx base = 0.0) { return WeierstrassSurface(Helicoid{}, base); }
  static WeierstrassSurface catenoid(cplx base = 1.0) {
    if (base == 0.0) throw DomainError("catenoid base point must avoid 0");
    return WeierstrassSurface(Catenoid{}, base);
  }
  static WeierstrassSurface from_field(HField<double> field, long double phase = 0.0L, double base = 0.0,
                                       bool wide = false) {
    std::shared_ptr<const HField<long double>> w;
    if (wide) w = std::make_shared<const HField<long double>>(field.profile());
    return WeierstrassSurface(
        FieldSurface{std::make_shared<const HField<double>>(std::move(field)), phase, std::move(w)},
        cplx(base, 0.0));
  }

  const Data& data() const { return data_; }
  cplx base() const { return base_; }
  bool height_is_dz() const { return !std::holds_alternative<Catenoid>(data_); }
  const FieldSurface* field_surface() const { return std::get_if<FieldSurface>(&data_); }

  /// H_k is real on the real axis, so there the integrand's real part is
  /// exactly (0, 0, 1) and F(x, 0) = (0, 0, x - x0).
  bool axis_is_vertical() const { return field_surface() != nullptr && base_.imag() == 0.0; }

  /// The vector-valued one-form coefficient (1/2 (1/g - g) phi, i/2 (1/g + g) phi, phi).
  CVec3 integrand(cplx z) const {
    constexpr cplx I(0.0, 1.0);
    if (const auto* fs = field_surface()) {
      const cplx h = fs->reduced(z).H;
      return {-I * std::sin(h), I * std::cos(h), 1.0};
    }
    const cplx gz = g(z);
    const cplx ph = phi(z);
    return {0.5 * (1.0 / gz - gz) * ph, 0.5 * I * (1.0 / gz + gz) * ph, ph};
  }

  cplx g(cplx z) const {
    constexpr cplx I(0.0, 1.0);
    return std::visit(
        [&](const auto& d) -> cplx {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Helicoid>) return std::exp(I * z);
          else if constexpr (std::is_same_v<T, Catenoid>) return z;
          else return std::exp(I * d.reduced(z).H);
        },
        data_);
  }
  cplx dg(cplx z) const {
    constexpr cplx I(0.0, 1.0);
    return std::visit(
        [&](const auto& d) -> cplx {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Helicoid>) return I * std::exp(I * z);
          else if constexpr (std::is_same_v<T, Catenoid>) return 1.0;
          else {
            const auto v = d.reduced(z);
            return I * v.dH * std::exp(I * v.H);
          }
        },
        data_);
  }
  cplx phi(cplx z) const { return std::holds_alternative<Catenoid>(data_) ? 1.0 / z : cplx(1.0); }

  /// Throws DomainError unless the canonical path base -> (Re z, Im base) -> z
  /// stays inside the working domain.
  void check_path(cplx z) const {
    if (const auto* fs = field_surface()) {
      const auto& prof = fs->field->profile();
      if (!domain_contains(prof, z)) {
        std::ostringstream msg;
        msg << "path leaves Omega_" << prof.k() << " at z = " << z.real() << "+" << z.imag() << "i";
        throw DomainError(msg.str());
      }
    } else if (std::holds_alternative<Catenoid>(data_)) {
      const double tiny = 1e-12;
      const bool real_leg_hits = std::abs(base_.imag()) <= tiny &&
                                 std::min(base_.real(), z.real()) <= tiny && std::max(base_.real(), z.real()) >= -tiny;
      const bool vertical_leg_hits = std::abs(z.real()) <= tiny && std::min(base_.imag(), z.imag()) <= tiny &&
                                     std::max(base_.imag(), z.imag()) >= -tiny;
      if (real_leg_hits || vertical_leg_hits) throw DomainError("catenoid path passes through the pole at 0");
    }
  }

private:
  WeierstrassSurface(Data d, cplx base) : data_(std::move(d)), base_(base) {}
  Data data_;
  cplx base_;
};

enum class HeightMode {
  analytic,    // x3 = Re z - Re z0 whenever phi = dz
  quadrature,  // integrate the third component as well
};

namespace detail {
inline Vec3 real_part(const CVec3& v) { return {v[0].real(), v[1].real(), v[2].real()}; }

inline CVec3 integrate_leg(const WeierstrassSurface& s, cplx a, cplx b, double tol) {
  auto f = [&s](cplx z) { return s.integrand(z); };
  return quadrature::integrate_segment<double>(f, a, b, tol).value;
}
}  // namespace detail

/// F(z) along the canonical path; base point maps to the origin.
inline Vec3 immerse_point(const WeierstrassSurface& s, cplx z, double tol = 1e-10,
                          HeightMode mode = HeightMode::analytic) {
  s.check_path(z);
  const cplx corner(z.real(), s.base().imag());
  CVec3 acc = (mode == HeightMode::analytic && s.axis_is_vertical())
                  ? CVec3{0.0, 0.0, corner.real() - s.base().real()}
                  : detail::integrate_leg(s, s.base(), corner, tol / 2);
  const CVec3 up = detail::integrate_leg(s, corner, z, tol / 2);
  for (int i = 0; i < 3; ++i) acc[i] += up[i];
  Vec3 out = detail::real_part(acc);
  if (mode == HeightMode::analytic && s.height_is_dz()) out.z = z.real() - s.base().real();
  return out;
}

struct TangentFrame {
  Vec3 dx;  // dF/dx
  Vec3 dy;  // dF/dy
};

/// dF/dx = Re W(z), dF/dy = Re(i W(z)) = -Im W(z).
inline TangentFrame tangent_frame(const WeierstrassSurface& s, cplx z) {
  const CVec3 w = s.integrand(z);
  return {{w[0].real(), w[1].real(), w[2].real()}, {-w[0].imag(), -w[1].imag(), -w[2].imag()}};
}

struct GaussData {
  Vec3 normal;
  double K = 0.0;   // Gauss curvature
  double A2 = 0.0;  // |A|^2 = -2K
};

inline GaussData gauss_data(const WeierstrassSurface& s, cplx z) {
  GaussData out;
  if (const auto* fs = s.field_surface()) {
    // With g = e^{iH}: n = (cos U / cosh V, sin U / cosh V, -tanh V) and
    // K = -|H'|^2 / cosh^4 V, written to survive large |V|.
    const auto v = fs->reduced(z);
    const double U = v.H.real(), V = v.H.imag();
    const double sech = 1.0 / std::cosh(V);
    out.normal = {std::cos(U) * sech, std::sin(U) * sech, -std::tanh(V)};
    const double m = std::abs(v.dH) * sech * sech;
    out.K = -m * m;
  } else {
    const cplx gz = s.g(z);
    const double g2 = std::norm(gz);
    out.normal = {2 * gz.real() / (g2 + 1), 2 * gz.imag() / (g2 + 1), (g2 - 1) / (g2 + 1)};
    const double t = 4 * std::abs(s.dg(z)) * std::abs(gz) / (std::abs(s.phi(z)) * (1 + g2) * (1 + g2));
    out.K = -t * t;
  }
  out.A2 = -2.0 * out.K;
  return out;
}

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<double, 2>> params;  // (x, y) parameter of each vertex
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> normals;
  std::vector<double> curvature;              // Gauss curvature K per vertex

  bool empty() const { return vertices.empty(); }
};

/// Immerse every grid node, reusing the real-axis prefix and integrating up
/// each fiber incrementally. Quads split into two counter-clockwise triangles.
inline SurfaceMesh build_mesh(const WeierstrassSurface& s, const ParamGrid& grid, double tol = 1e-10) {
  SurfaceMesh mesh;
  if (grid.empty()) return mesh;
  const std::size_t nc = grid.columns(), nr = grid.rows();
  for (std::size_t i = 1; i < nc; ++i) {
    if (!(grid.xs[i] > grid.xs[i - 1])) throw ValidationError("grid columns must be strictly increasing");
  }
  for (const auto& col : grid.ys) {
    if (col.size() != nr) throw ValidationError("grid columns must have equal row counts");
  }

  const FieldSurface* fs = s.field_surface();
  const double y0 = s.base().imag();
  mesh.vertices.resize(nc * nr);
  mesh.params.resize(nc * nr);

  CVec3 axis{};  // integral from the base to (x_i, y0)
  cplx prev(s.base());
  for (std::size_t i = 0; i < nc; ++i) {
    const cplx foot(grid.xs[i], y0);
    if (s.axis_is_vertical()) {
      axis = {0.0, 0.0, foot.real() - s.base().real()};
    } else {
      const CVec3 leg = detail::integrate_leg(s, prev, foot, tol);
      for (int c = 0; c < 3; ++c) axis[c] += leg[c];
    }
    prev = foot;
    const auto& ys = grid.ys[i];
    for (std::size_t j = 0; j < nr; ++j) s.check_path(cplx(grid.xs[i], ys[j]));

    auto place = [&](std::size_t j, const CVec3& acc) {
      Vec3 p = detail::real_part(acc);
      if (s.height_is_dz()) p.z = grid.xs[i] - s.base().real();
      mesh.vertices[i * nr + j] = p;
      mesh.params[i * nr + j] = {grid.xs[i], ys[j]};
    };

    // Upward from y0.
    CVec3 acc = axis;
    double ycur = y0;
    std::vector<std::size_t> below;
    for (std::size_t j = 0; j < nr; ++j) {
      if (ys[j] < y0) {
        below.push_back(j);
        continue;
      }
      const CVec3 seg = detail::integrate_leg(s, cplx(grid.xs[i], ycur), cplx(grid.xs[i], ys[j]), tol);
      for (int c = 0; c < 3; ++c) acc[c] += seg[c];
      ycur = ys[j];
      place(j, acc);
    }
    // Downward from y0. Field surfaces satisfy H(conj z) = conj H(z), so
    // F(x, -y) is F(x, y) rotated by pi about the x3-axis.
    const bool reflect = fs && y0 == 0.0;
    const Vec3 foot_pt = detail::real_part(axis);
    acc = axis;
    ycur = y0;
    for (auto it = below.rbegin(); it != below.rend(); ++it) {
      const std::size_t j = *it;
      const double ytarget = reflect ? -ys[j] : ys[j];
      const CVec3 seg = detail::integrate_leg(s, cplx(grid.xs[i], ycur), cplx(grid.xs[i], ytarget), tol);
      for (int c = 0; c < 3; ++c) acc[c] += seg[c];
      ycur = ytarget;
      if (reflect) {
        Vec3 p = 2.0 * foot_pt - detail::real_part(acc);
        p.z = grid.xs[i] - s.base().real();
        mesh.vertices[i * nr + j] = p;
        mesh.params[i * nr + j] = {grid.xs[i], ys[j]};
      } else {
        place(j, acc);
      }
    }
  }

  mesh.normals.resize(mesh.vertices.size());
  mesh.curvature.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto gd = gauss_data(s, cplx(mesh.params[v][0], mesh.params[v][1]));
    mesh.normals[v] = gd.normal;
    mesh.curvature[v] = gd.K;
  }

  for (std::size_t i = 0; i + 1 < nc; ++i) {
    for (std::size_t j = 0; j + 1 < nr; ++j) {
      const auto v00 = static_cast<std::uint32_t>(i * nr + j);
      const auto v10 = static_cast<std::uint32_t>((i + 1) * nr + j);
      const auto v11 = static_cast<std::uint32_t>((i + 1) * nr + j + 1);
      const auto v01 = static_cast<std::uint32_t>(i * nr + j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

/// Per-vertex |H| from the cotangent Laplacian with barycentric areas;
/// NaN on boundary vertices. Tends to 0 under refinement of a minimal surface.
inline std::vector<double> discrete_mean_curvature(const SurfaceMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  std::vector<Vec3> lap(n);
  std::vector<double> area(n, 0.0);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use;
  for (const auto& t : mesh.triangles) {
    for (int c = 0; c < 3; ++c) {
      const std::uint32_t i = t[c], j = t[(c + 1) % 3], k = t[(c + 2) % 3];
      const Vec3 u = mesh.vertices[i] - mesh.vertices[k], v = mesh.vertices[j] - mesh.vertices[k];
      const double cot = dot(u, v) / norm(cross(u, v));
      lap[i] += (0.5 * cot) * (mesh.vertices[j] - mesh.vertices[i]);
      lap[j] += (0.5 * cot) * (mesh.vertices[i] - mesh.vertices[j]);
      ++edge_use[{std::min(i, j), std::max(i, j)}];
    }
    const double A = 0.5 * norm(cross(mesh.vertices[t[1]] - mesh.vertices[t[0]], mesh.vertices[t[2]] - mesh.vertices[t[0]]));
    for (auto v : t) area[v] += A / 3.0;
  }
  std::vector<bool> boundary(n, false);
  for (const auto& [e, uses] : edge_use) {
    if (uses == 1) boundary[e.first] = boundary[e.second] = true;
  }
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t v = 0; v < n; ++v) {
    if (!boundary[v] && area[v] > 0.0) out[v] = norm(lap[v]) / (2.0 * area[v]);
  }
  return out;
}

}  // namespace lamina

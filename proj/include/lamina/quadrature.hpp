#pragma once

// Adaptive Gauss–Kronrod (7/15) integration of holomorphic integrands along
// straight segments and polylines in the complex plane.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace lamina::quadrature {

template <class Real>
using Complex = std::complex<Real>;

// Value-type helpers: scalars and fixed-size arrays of complex numbers.
template <class Real>
Real magnitude(const Complex<Real>& v) {
  return std::abs(v);
}
template <class Real, std::size_t N>
Real magnitude(const std::array<Complex<Real>, N>& v) {
  Real m = 0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}
template <class Real>
Complex<Real> zero_like(const Complex<Real>&) {
  return Complex<Real>(0);
}
template <class Real, std::size_t N>
std::array<Complex<Real>, N> zero_like(const std::array<Complex<Real>, N>&) {
  std::array<Complex<Real>, N> z;
  z.fill(Complex<Real>(0));
  return z;
}
template <class Real>
Complex<Real> scale(const Complex<Real>& v, Complex<Real> s) {
  return v * s;
}
template <class Real, std::size_t N>
std::array<Complex<Real>, N> scale(std::array<Complex<Real>, N> v, Complex<Real> s) {
  for (auto& c : v) c *= s;
  return v;
}
template <class Real>
void add_to(Complex<Real>& acc, const Complex<Real>& v) {
  acc += v;
}
template <class Real, std::size_t N>
void add_to(std::array<Complex<Real>, N>& acc, const std::array<Complex<Real>, N>& v) {
  for (std::size_t i = 0; i < N; ++i) acc[i] += v[i];
}
template <class Real>
Complex<Real> diff(const Complex<Real>& a, const Complex<Real>& b) {
  return a - b;
}
template <class Real, std::size_t N>
std::array<Complex<Real>, N> diff(std::array<Complex<Real>, N> a, const std::array<Complex<Real>, N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
  return a;
}

struct Options {
  std::size_t max_segments = 4000;
};

template <class V, class Real>
struct Result {
  V value;
  Real error = 0;
  std::size_t evaluations = 0;
};

namespace detail {

template <class V, class Real>
struct Panel {
  Real t0, t1;  // sub-interval of [0, 1]
  V value;
  Real error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One GK15 panel of f(z(t)) z'(t) on t in [t0, t1], z(t) = z0 + t (z1 - z0).
template <class Real, class F>
auto gk15_panel(F& f, Complex<Real> z0, Complex<Real> dz, Real t0, Real t1, std::size_t& evals) {
  namespace bq = boost::math::quadrature;
  const auto& xk = bq::gauss_kronrod<Real, 15>::abscissa();
  const auto& wk = bq::gauss_kronrod<Real, 15>::weights();
  const auto& wg = bq::gauss<Real, 7>::weights();

  const Real half = (t1 - t0) / 2;
  const Real mid = (t0 + t1) / 2;
  const Complex<Real> jac = dz * half;

  auto at = [&](Real s) { return f(z0 + (mid + half * s) * dz); };

  using V = decltype(f(z0));
  // Nodes x_k for k = 0..7; Gauss nodes sit at even k.
  std::array<V, 8> fp, fm;
  fp[0] = at(Real(0));
  fm[0] = fp[0];
  for (std::size_t k = 1; k < 8; ++k) {
    fp[k] = at(xk[k]);
    fm[k] = at(-xk[k]);
  }
  evals += 15;

  V kron = scale(fp[0], Complex<Real>(wk[0]));
  V gauss = scale(fp[0], Complex<Real>(wg[0]));
  for (std::size_t k = 1; k < 8; ++k) {
    V pair = fp[k];
    add_to(pair, fm[k]);
    add_to(kron, scale(pair, Complex<Real>(wk[k])));
    if (k % 2 == 0) add_to(gauss, scale(pair, Complex<Real>(wg[k / 2])));
  }
  // QUADPACK-style error heuristic with resasc = integral of |f - mean|.
  const V mean = scale(kron, Complex<Real>(Real(0.5)));
  Real resasc = wk[0] * magnitude(diff(fp[0], mean));
  for (std::size_t k = 1; k < 8; ++k) {
    resasc += wk[k] * (magnitude(diff(fp[k], mean)) + magnitude(diff(fm[k], mean)));
  }
  const Real absjac = std::abs(jac);
  resasc *= absjac;
  Real err = magnitude(diff(kron, gauss)) * absjac;
  if (resasc != 0 && err != 0) {
    err = resasc * std::min(Real(1), std::pow(Real(200) * err / resasc, Real(1.5)));
  }
  return Panel<V, Real>{t0, t1, scale(kron, jac), err};
}

}  // namespace detail

/// Integrate f(z) dz along the segment z0 -> z1 to absolute tolerance tol.
template <class Real, class F>
auto integrate_segment(F&& f, Complex<Real> z0, Complex<Real> z1, Real tol, Options opts = {})
    -> Result<decltype(f(z0)), Real> {
  using V = decltype(f(z0));
  Result<V, Real> out;
  out.value = zero_like(f(z0));
  out.evaluations = 1;
  if (z0 == z1) return out;

  const Complex<Real> dz = z1 - z0;
  std::priority_queue<detail::Panel<V, Real>> heap;
  heap.push(detail::gk15_panel<Real>(f, z0, dz, Real(0), Real(1), out.evaluations));
  Real total_err = heap.top().error;
  std::vector<detail::Panel<V, Real>> settled;

  const Real min_width = 64 * std::numeric_limits<Real>::epsilon();
  while (total_err > tol && !heap.empty()) {
    if (heap.size() + settled.size() >= opts.max_segments) break;
    auto worst = heap.top();
    heap.pop();
    if (worst.t1 - worst.t0 < min_width) {
      settled.push_back(worst);
      continue;
    }
    const Real m = (worst.t0 + worst.t1) / 2;
    auto left = detail::gk15_panel<Real>(f, z0, dz, worst.t0, m, out.evaluations);
    auto right = detail::gk15_panel<Real>(f, z0, dz, m, worst.t1, out.evaluations);
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum in parameter order for reproducibility.
  std::vector<detail::Panel<V, Real>> panels = std::move(settled);
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const auto& a, const auto& b) { return a.t0 < b.t0; });
  Real err = 0;
  for (const auto& p : panels) {
    add_to(out.value, p.value);
    err += p.error;
  }
  out.error = err;
  if (!(err <= tol)) {
    std::ostringstream msg;
    msg << "quadrature tolerance " << static_cast<double>(tol) << " not reached; achieved "
        << static_cast<double>(err) << " with " << panels.size() << " panels";
    throw QuadratureError(msg.str(), static_cast<double>(err));
  }
  return out;
}

/// Integrate along the polyline through `vertices`; tol is split evenly over legs.
template <class Real, class F>
auto integrate_path(F&& f, std::span<const Complex<Real>> vertices, Real tol, Options opts = {})
    -> Result<decltype(f(vertices[0])), Real> {
  using V = decltype(f(vertices[0]));
  Result<V, Real> out;
  out.value = zero_like(f(vertices[0]));
  if (vertices.size() < 2) return out;
  std::size_t legs = 0;
  for (std::size_t i = 1; i < vertices.size(); ++i) legs += vertices[i] != vertices[i - 1];
  if (legs == 0) return out;
  const Real leg_tol = tol / static_cast<Real>(legs);
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (vertices[i] == vertices[i - 1]) continue;
    auto r = integrate_segment<Real>(f, vertices[i - 1], vertices[i], leg_tol, opts);
    add_to(out.value, r.value);
    out.error += r.error;
    out.evaluations += r.evaluations;
  }
  return out;
}

}  // namespace lamina::quadrature

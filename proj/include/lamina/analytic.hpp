#pragma once

// Holomorphic data h_a, H_k and the scalar machinery built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "profile.hpp"
#include "quadrature.hpp"

namespace lamina {

/// Relative distance from the branch cut {+-i t : t >= a} treated as "on" it.
inline constexpr double kCutTolerance = 1e-12;

/// Antiderivative of (w^2 + a^2)^{-2} vanishing at 0:
///   w / (2 a^2 (w^2 + a^2)) + arctan(w / a) / (2 a^3), principal branch.
template <class Real>
std::complex<Real> h_eval(Real a, std::complex<Real> w) {
  if (std::abs(w.real()) <= Real(kCutTolerance) * a && std::abs(w.imag()) >= a * (1 - Real(kCutTolerance))) {
    std::ostringstream msg;
    msg << "h_a: point " << static_cast<double>(w.real()) << "+" << static_cast<double>(w.imag())
        << "i lies on the branch cut |Im| >= a = " << static_cast<double>(a);
    throw DomainError(msg.str());
  }
  const Real a2 = a * a;
  const std::complex<Real> q = w * w + a2;
  return w / (2 * a2 * q) + std::atan(w / a) / (2 * a2 * a);
}

template <class Real>
std::complex<Real> h_derivative(Real a, std::complex<Real> w) {
  const std::complex<Real> q = w * w + a * a;
  return Real(1) / (q * q);
}

/// Independent route: integrate (zeta^2 + a^2)^{-2} along 0 -> Re z -> z.
template <class Real>
std::complex<Real> h_quadrature_oracle(Real a, std::complex<Real> z, Real tol) {
  const std::array<std::complex<Real>, 3> path{std::complex<Real>(0), std::complex<Real>(z.real(), 0), z};
  auto f = [a](std::complex<Real> s) { return h_derivative(a, s); };
  return quadrature::integrate_path<Real>(f, path, tol).value;
}

/// Same integrand on the straight chord 0 -> z.
template <class Real>
std::complex<Real> h_quadrature_chord(Real a, std::complex<Real> z, Real tol) {
  auto f = [a](std::complex<Real> s) { return h_derivative(a, s); };
  return quadrature::integrate_segment<Real>(f, std::complex<Real>(0), z, tol).value;
}

template <class Real>
struct FieldValue {
  std::complex<Real> H;   // U + iV
  std::complex<Real> dH;  // dH/dz
};

/// H_k(z) = sum_{l<=k} mu^{-l} sum_{p in m_l} h_{a_k}(z - p).
template <class Real = double>
class HField {
public:
  explicit HField(DomainProfile profile) : profile_(std::move(profile)) {
    a_ = static_cast<Real>(profile_.a());
    const Real mu = static_cast<Real>(profile_.params().mu());
    for (int l = 0; l <= profile_.k(); ++l) {
      const Real w = std::pow(mu, Real(-l));
      for (double p : profile_.net().fresh(l)) {
        points_.push_back(static_cast<Real>(p));
        weights_.push_back(w);
      }
    }
  }

  const DomainProfile& profile() const { return profile_; }
  int k() const { return profile_.k(); }
  Real a() const { return a_; }

  /// Evaluate without a domain check (H_k extends past Omega_k away from the cuts).
  FieldValue<Real> operator()(std::complex<Real> z) const {
    CompensatedSum<std::complex<Real>> h, dh;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const std::complex<Real> w = z - points_[i];
      h.add(weights_[i] * h_eval(a_, w));
      dh.add(weights_[i] * h_derivative(a_, w));
    }
    return {h.value(), dh.value()};
  }

  /// Evaluate inside Omega_k; throws DomainError outside.
  FieldValue<Real> at(std::complex<Real> z) const {
    const std::complex<double> zd(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    if (!domain_contains(profile_, zd)) {
      std::ostringstream msg;
      msg << "field_eval: z = " << zd.real() << "+" << zd.imag() << "i outside Omega_" << k();
      throw DomainError(msg.str());
    }
    return (*this)(z);
  }

private:
  DomainProfile profile_;
  Real a_{};
  std::vector<Real> points_;
  std::vector<Real> weights_;
};

template <class Real>
FieldValue<Real> field_eval(const HField<Real>& field, std::complex<Real> z) {
  return field.at(z);
}

struct FiberBounds {
  double u_osc = 0.0;    // max |U(x,y) - U(x,0)| over fiber samples in [0, Y]
  double v_min = 0.0;    // min V over samples in [Y/2, Y]
  double q = 0.0;        // q_k(x)
  double u_bound = 0.0;  // eps^2 c1'
  double v_bound = 0.0;  // (eps c2 / 2) q
};

/// q_k(x) = sum_l mu^{-l} sum_{p in m_l} (Y_k(x)/y_p(x)) ((x-p)^2 + a^2)^{-3/4}.
inline double q_value(const DomainProfile& prof, double x) {
  const double Y = capital_y(prof, x).Y;
  const double eps = prof.params().eps();
  const double a2 = prof.a() * prof.a();
  CompensatedSum<double> sum;
  for (int l = 0; l <= prof.k(); ++l) {
    const double w = std::pow(prof.params().mu(), -l);
    for (double p : prof.net().fresh(l)) {
      const double rho = (x - p) * (x - p) + a2;
      const double yp = eps * std::pow(rho, 1.25);
      sum.add(w * (Y / yp) * std::pow(rho, -0.75));
    }
  }
  return sum.value();
}

template <class Real>
FiberBounds fiber_bounds(const HField<Real>& field, double x, int fiber_samples = 64) {
  const auto& prof = field.profile();
  const auto& par = prof.params();
  const double Y = capital_y(prof, x).Y;
  const double u0 = static_cast<double>(field(std::complex<Real>(x, 0)).H.real());
  FiberBounds out;
  out.v_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= fiber_samples; ++j) {
    const double y = Y * j / fiber_samples;
    const auto v = field(std::complex<Real>(x, y));
    out.u_osc = std::max(out.u_osc, std::abs(static_cast<double>(v.H.real()) - u0));
    if (2 * j >= fiber_samples) out.v_min = std::min(out.v_min, static_cast<double>(v.H.imag()));
  }
  out.q = q_value(prof, x);
  out.u_bound = par.eps() * par.eps() * par.c1prime();
  out.v_bound = 0.5 * par.eps() * par.c2() * out.q;
  return out;
}

struct Scalars {
  double s = 0.0;      // ((x - p_k)^2 + a_k^2)^{3/4}
  double q = 0.0;      // q_k(x)
  double log_r = 0.0;  // log r_k(x)
  double r = 0.0;      // r_k(x); may be +inf when log_r > ~709
  double p = 0.0;      // p_k(x)
  int e = 0;           // e(p_k(x))
};

/// s_k, q_k and r_k = (eps/2) s^{5/3} exp((eps c2 / 2) q) at level k.
inline Scalars scalars(const DomainProfile& prof, double x) {
  const auto& par = prof.params();
  const NetPoint np = closest_net_point(prof.net(), prof.k(), x);
  Scalars out;
  out.p = np.point;
  out.e = np.origin;
  const double d = x - np.point;
  out.s = std::pow(d * d + prof.a() * prof.a(), 0.75);
  out.q = q_value(prof, x);
  out.log_r = std::log(0.5 * par.eps()) + (5.0 / 3.0) * std::log(out.s) + 0.5 * par.eps() * par.c2() * out.q;
  out.r = std::exp(out.log_r);
  return out;
}

template <class Real>
Scalars scalars(const HField<Real>& field, double x) {
  return scalars(field.profile(), x);
}

struct RecursionConstants {
  std::vector<double> theta;        // theta_k, k = 0..K
  std::vector<double> log_c;        // log c_k
  std::vector<double> log_partial;  // log prod_{l<=k} c_l
  double c = 0.0;                   // constant with 1 - theta_k <= c tau^k for all k
  double log_tail = 0.0;            // log prod_{l>K} c_l
  double log_product = 0.0;         // log prod_{l>=0} c_l
  std::size_t tail_terms = 0;
  /// |prod_{l<=K} / prod_{l<=K-1} - 1| = |c_K - 1|.
  double stabilization = 0.0;
};

namespace detail {
inline double log_theta(const Params& p, int k) {
  const double g = p.gamma(), c0 = p.c0(), tau = p.tau();
  const double t1 = std::pow(c0, -2) * std::pow(g, -2) * std::pow(tau, 2.0 * (k - 1));
  const double t2 = g / c0 * std::pow(tau, k);
  return -1.25 * (std::log1p(t1) + 2.0 * std::log1p(t2));
}
inline double log_base(const Params& p, int k) {
  // (eps/2) c0^{5/2} mu^{-5/3 (1+sigma) k}
  return std::log(0.5 * p.eps()) + 2.5 * std::log(p.c0()) -
         5.0 / 3.0 * (1.0 + p.sigma()) * k * std::log(p.mu());
}
}  // namespace detail

/// theta_k, c_k and their products. All products are carried in log-space.
inline RecursionConstants recursion_constants(const Params& par, int K) {
  const double tau = par.tau();
  if (!(tau < 1.0)) throw ValidationError("recursion constants need τ < 1");
  if (!(par.c0() > 0.0)) throw ValidationError("recursion constants need δ(α) > 0");
  if (K < 1) throw ValidationError("recursion constants need K >= 1");

  // Extent of summation: stop once tau^k * gamma / c0 and tau^k k are negligible.
  int k_end = K;
  while (std::pow(tau, k_end) * std::max(1.0, par.gamma() / par.c0()) * (1.0 + k_end) > 1e-18 &&
         k_end < 2'000'000) {
    k_end += 64;
  }

  RecursionConstants out;
  // c = sup_k (1 - theta_k) / tau^k; the ratio converges as k grows.
  for (int k = 0; k <= k_end; ++k) {
    const double one_minus = -std::expm1(detail::log_theta(par, k));
    out.c = std::max(out.c, one_minus / std::pow(tau, k));
  }

  CompensatedSum<double> partial;
  for (int k = 0; k <= K; ++k) {
    const double lt = detail::log_theta(par, k);
    const double lc = lt + out.c * std::pow(tau, k) * detail::log_base(par, k);
    out.theta.push_back(std::exp(lt));
    out.log_c.push_back(lc);
    partial.add(lc);
    out.log_partial.push_back(partial.value());
  }
  CompensatedSum<double> tail;
  for (int k = K + 1; k <= k_end; ++k) {
    tail.add(detail::log_theta(par, k) + out.c * std::pow(tau, k) * detail::log_base(par, k));
    ++out.tail_terms;
  }
  out.log_tail = tail.value();
  out.log_product = out.log_partial.back() + out.log_tail;
  out.stabilization = std::abs(std::expm1(out.log_c.back()));
  return out;
}

}  // namespace lamina

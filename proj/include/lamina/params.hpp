#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "error.hpp"

namespace lamina {

/// Raw, user-facing parameter values.
struct ParamsInput {
  double gamma = 2.0;
  double mu = 2.5;
  double sigma = 0.1;
  double alpha = 30.0;
  double eps = 0.05;
  double a_coef = 0.5;  // a_k = a_coef * a_base^{-k}
  double a_base = 0.0;  // 0 means "use gamma"
};

/// Scalar parameters with the derived constants. Construct through make()
/// (validated) or unchecked() (for deliberately out-of-range experiments).
class Params {
public:
  static Params make(const ParamsInput& in) {
    Params p = unchecked(in);
    p.validate();
    return p;
  }

  static Params unchecked(const ParamsInput& in) {
    Params p;
    p.in_ = in;
    if (p.in_.a_base == 0.0) p.in_.a_base = in.gamma;
    p.derive();
    return p;
  }

  const ParamsInput& input() const { return in_; }
  double gamma() const { return in_.gamma; }
  double mu() const { return in_.mu; }
  double sigma() const { return in_.sigma; }
  double alpha() const { return in_.alpha; }
  double eps() const { return in_.eps; }

  /// Concentration scale a_k at level k.
  double a(int k) const { return in_.a_coef * std::pow(in_.a_base, -k); }

  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double c1prime() const { return c1prime_; }
  double delta_alpha() const { return delta_alpha_; }
  double c0() const { return c0_; }
  double tau() const { return tau_; }

  /// log Phi(xi) with Phi(xi) = xi^{5/3} exp(c2 eps / (2 xi)).
  double log_phi(double xi) const { return (5.0 / 3.0) * std::log(xi) + 0.5 * c2_ * in_.eps / xi; }

private:
  Params() = default;

  void derive() {
    const double e2 = in_.eps * in_.eps;
    const double lower = (1.0 - e2) * (1.0 - e2) - 4.0 * e2;
    c1_ = 4.0 / (lower * lower);
    c2_ = lower / (1.0 + 16.0 * e2);
    // sum_l (gamma/mu)^l + mu^{-l}, summed to infinity
    const double geo = (in_.mu > in_.gamma && in_.mu > 1.0)
                           ? in_.mu / (in_.mu - in_.gamma) + in_.mu / (in_.mu - 1.0)
                           : INFINITY;
    c1prime_ = c1_ * geo;
    tau_ = std::pow(in_.mu, 2.0 / 3.0 * (1.0 + in_.sigma)) / in_.gamma;
    delta_alpha_ = (lower > 0 && in_.eps > 0) ? compute_delta() : NAN;
    c0_ = std::pow(delta_alpha_, 2.0 / 3.0) / std::sqrt(2.0);
  }

  // Largest xi* <= 1 with Phi(xi) >= xi^{-alpha} for all 0 < xi <= xi*.
  // f(xi) = log Phi + alpha log xi decreases on (0, xi_min) and increases after.
  double compute_delta() const {
    auto f = [&](double xi) { return log_phi(xi) + in_.alpha * std::log(xi); };
    const double b = 0.5 * c2_ * in_.eps;
    const double xi_min = std::min(1.0, b / (5.0 / 3.0 + in_.alpha));
    if (f(xi_min) >= 0.0) return 1.0;  // f >= 0 on all of (0, 1]
    // Bisection in log-space on (0, xi_min): f > 0 near 0, f(xi_min) < 0.
    double lo = std::log(xi_min) - 1.0;
    while (f(std::exp(lo)) < 0.0) lo -= 1.0;
    double hi = std::log(xi_min);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f(std::exp(mid)) >= 0.0 ? lo : hi) = mid;
    }
    return std::exp(lo);
  }

  void validate() const {
    const double g = in_.gamma, mu = in_.mu, s = in_.sigma;
    auto fail = [](const std::string& what) { throw ValidationError(what); };
    if (!(g > 1.0)) fail("parameters must satisfy γ > 1");
    if (!(std::pow(mu, 2.0 / 3.0) < g && g < mu && mu < g * g * g)) {
      std::ostringstream msg;
      msg << "parameters must satisfy μ^{2/3} < γ < μ < γ³ (got γ=" << g << ", μ=" << mu << ")";
      fail(msg.str());
    }
    if (!(s > 0.0 && std::pow(mu, (1.0 + s) * 2.0 / 3.0) < g)) {
      std::ostringstream msg;
      msg << "parameters must satisfy μ^{2/3} < μ^{(1+σ)2/3} < γ with σ > 0 (got σ=" << s << ")";
      fail(msg.str());
    }
    if (!(in_.alpha * s - 5.0 / 3.0 >= 1.0)) fail("parameters must satisfy ασ − 5/3 ≥ 1");
    if (!(in_.a_coef > 0.0 && in_.a_coef <= 1.0 && in_.a_base >= g)) {
      fail("scale rule must satisfy 0 < a_k ≤ γ^{-k} (need 0 < a_coef ≤ 1 and a_base ≥ γ)");
    }
    if (!(in_.eps > 0.0)) fail("parameters must satisfy ε > 0");
    const double e2 = in_.eps * in_.eps;
    if (!((1.0 - e2) * (1.0 - e2) - 4.0 * e2 > 0.0)) fail("parameters must satisfy (1−ε²)² − 4ε² > 0");
    if (!(e2 * c1prime_ < 1.0)) fail("parameters must satisfy ε² c₁′ < 1");
    if (!(tau_ < 1.0)) fail("parameters must satisfy τ = μ^{2/3(1+σ)}/γ < 1");
  }

  ParamsInput in_;
  double c1_ = 0, c2_ = 0, c1prime_ = 0, delta_alpha_ = 0, c0_ = 0, tau_ = 0;
};

}  // namespace lamina

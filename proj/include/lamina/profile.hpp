#pragma once

// Domain heights y_{p,a}, Y_k and the thin domains Omega_k around the real axis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "compactset.hpp"
#include "error.hpp"
#include "params.hpp"

namespace lamina {

/// eps * ((x - p)^2 + a^2)^{5/4}
inline double y_profile(double p, double a, double eps, double x) {
  const double d = x - p;
  return eps * std::pow(d * d + a * a, 1.25);
}

/// Padded hull [min M - 1/gamma, max M + 1/gamma].
inline Interval padded_range(const CompactSet& set, double gamma) {
  return {set.min() - 1.0 / gamma, set.max() + 1.0 / gamma};
}

/// Level-k view of the nets and parameters. Immutable; cheap to copy.
class DomainProfile {
public:
  DomainProfile(std::shared_ptr<const NetHierarchy> net, Params params, int k, Interval x_range,
                std::optional<double> a_override = std::nullopt)
      : net_(std::move(net)), params_(std::move(params)), k_(k), range_(x_range) {
    if (!net_) throw ValidationError("DomainProfile needs a net hierarchy");
    if (k_ < 0 || k_ > net_->depth()) {
      std::ostringstream msg;
      msg << "level k=" << k_ << " outside built net depth " << net_->depth();
      throw ValidationError(msg.str());
    }
    a_ = a_override ? *a_override : params_.a(k_);
    if (!(a_ > 0.0)) throw ValidationError("a_k must be positive");
    // Branch cuts of each h_{p,a} start at p +- i a; the domain crosses
    // Re z = p at height at most eps a^{5/2}, which must stay below a.
    if (!(params_.eps() * std::pow(a_, 1.5) < 1.0)) {
      throw ValidationError("domain would reach the branch points: need ε a_k^{3/2} < 1");
    }
  }

  const NetHierarchy& net() const { return *net_; }
  std::shared_ptr<const NetHierarchy> net_ptr() const { return net_; }
  const Params& params() const { return params_; }
  int k() const { return k_; }
  double a() const { return a_; }
  Interval x_range() const { return range_; }

  /// Same nets and parameters at another level (a_k from the rule).
  DomainProfile at_level(int k) const { return DomainProfile(net_, params_, k, range_); }

private:
  std::shared_ptr<const NetHierarchy> net_;
  Params params_;
  int k_ = 0;
  double a_ = 0.0;
  Interval range_;
};

struct HeightSample {
  double Y = 0.0;  // Y_k(x)
  double p = 0.0;  // achieving net point p_k(x)
  int e = 0;       // its level e(p)
};

/// Y_k(x) = min over l <= k, p in m_l of y_{p,a_k}(x), attained at p_k(x).
inline HeightSample capital_y(const DomainProfile& prof, double x) {
  const NetPoint np = closest_net_point(prof.net(), prof.k(), x);
  return {y_profile(np.point, prof.a(), prof.params().eps(), x), np.point, np.origin};
}

inline bool domain_contains(const DomainProfile& prof, std::complex<double> z) {
  return std::abs(z.imag()) <= capital_y(prof, z.real()).Y;
}

/// |H_k'(x)| on the real axis: every term is real and positive there.
inline double axis_derivative(const DomainProfile& prof, double x) {
  const double a2 = prof.a() * prof.a();
  double total = 0.0;
  for (int l = 0; l <= prof.k(); ++l) {
    const double w = std::pow(prof.params().mu(), -l);
    for (double p : prof.net().fresh(l)) {
      const double r = (x - p) * (x - p) + a2;
      total += w / (r * r);
    }
  }
  return total;
}

/// Upper bound of |H_k'| over the real segment [x0, x1].
inline double axis_derivative_bound(const DomainProfile& prof, double x0, double x1) {
  const double a2 = prof.a() * prof.a();
  double total = 0.0;
  for (int l = 0; l <= prof.k(); ++l) {
    const double w = std::pow(prof.params().mu(), -l);
    for (double p : prof.net().fresh(l)) {
      const double d = p < x0 ? x0 - p : (p > x1 ? p - x1 : 0.0);
      const double r = d * d + a2;
      total += w / (r * r);
    }
  }
  return total;
}

/// Structured parameter grid: column i sits at xs[i] and carries ys[i] (same
/// count per column, ascending).
struct ParamGrid {
  std::vector<double> xs;
  std::vector<std::vector<double>> ys;

  std::size_t columns() const { return xs.size(); }
  std::size_t rows() const { return ys.empty() ? 0 : ys.front().size(); }
  std::size_t size() const { return columns() * rows(); }
  bool empty() const { return size() == 0; }
};

struct Refinement {
  double kappa = 0.0;               // max turning of U per column step; 0 disables
  std::size_t max_points = 4'000'000;
  bool mirror = false;              // also emit rows -ny..-1 (lower half plane)
};

inline ParamGrid sample_domain(const DomainProfile& prof, std::size_t nx, std::size_t ny, Refinement rule = {}) {
  if (nx < 2 || ny < 1) throw ValidationError("sample_domain needs nx >= 2 and ny >= 1");
  const Interval r = prof.x_range();
  const double width = r.hi - r.lo;
  const double base = width / static_cast<double>(nx - 1);
  const std::size_t rows = rule.mirror ? 2 * ny + 1 : ny + 1;

  ParamGrid g;
  double x = r.lo;
  g.xs.push_back(x);
  while (x < r.hi) {
    double h = base;
    if (rule.kappa > 0.0) {
      const double bound = axis_derivative_bound(prof, x, std::min(r.hi, x + h));
      if (h * bound > rule.kappa) {
        h = rule.kappa / bound;
        // The bound over the shorter step is no larger, so one pass suffices.
      }
    }
    x = (r.hi - (x + h) <= 1e-12 * width) ? r.hi : x + h;
    g.xs.push_back(x);
    if (g.xs.size() * rows > rule.max_points) {
      std::ostringstream msg;
      msg << "grid refinement exceeds max_points=" << rule.max_points
          << "; increase kappa (now " << rule.kappa << ") or lower nx/ny";
      throw ValidationError(msg.str());
    }
  }

  g.ys.reserve(g.xs.size());
  for (double xi : g.xs) {
    const double Y = capital_y(prof, xi).Y;
    std::vector<double> col;
    col.reserve(rows);
    if (rule.mirror) {
      for (std::size_t j = ny; j >= 1; --j) col.push_back(-static_cast<double>(j) * Y / static_cast<double>(ny));
    }
    for (std::size_t j = 0; j <= ny; ++j) {
      // The top row is Y itself; j * Y / ny can round above it.
      col.push_back(j == ny ? Y : static_cast<double>(j) * Y / static_cast<double>(ny));
    }
    if (rule.mirror) col[0] = -Y;
    g.ys.push_back(std::move(col));
  }
  return g;
}

}  // namespace lamina

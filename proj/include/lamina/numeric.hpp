#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lamina {

/// Neumaier compensated accumulator. Works for real and std::complex types.
template <class T>
class CompensatedSum {
public:
  void add(T v) {
    if constexpr (is_complex) {
      add_real(sum_re_, c_re_, v.real());
      add_real(sum_im_, c_im_, v.imag());
    } else {
      add_real(sum_re_, c_re_, v);
    }
  }
  T value() const {
    if constexpr (is_complex) {
      return T(sum_re_ + c_re_, sum_im_ + c_im_);
    } else {
      return sum_re_ + c_re_;
    }
  }

private:
  template <class U> struct complex_traits { static constexpr bool value = false; using real = U; };
  template <class U> struct complex_traits<std::complex<U>> { static constexpr bool value = true; using real = U; };
  using Real = typename complex_traits<T>::real;
  static constexpr bool is_complex = complex_traits<T>::value;

  static void add_real(Real& sum, Real& comp, Real v) {
    const Real t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }

  Real sum_re_{0}, c_re_{0}, sum_im_{0}, c_im_{0};
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares fit y = slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need at least two paired samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

/// Fit log(y) = slope * log(x) + intercept.
inline LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace lamina

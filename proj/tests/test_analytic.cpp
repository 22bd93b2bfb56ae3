#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>

#include <lamina/analytic.hpp>

using namespace lamina;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cd = std::complex<double>;
using cld = std::complex<long double>;

namespace {

DomainProfile profile_over(const CompactSetSpec& spec, int K, int k, std::optional<double> a = std::nullopt,
                           ParamsInput in = {}) {
  const Params par = Params::make(in);
  const auto set = materialize_set(spec);
  auto net = std::make_shared<const NetHierarchy>(build_nets(set, par.gamma(), K));
  return DomainProfile(net, par, k, padded_range(set, par.gamma()), a);
}

// Five-point central difference of f along direction dir.
template <class F>
cld stencil(F f, cld z, cld dir, long double h) {
  return (-f(z + 2.0L * h * dir) + 8.0L * f(z + h * dir) - 8.0L * f(z - h * dir) + f(z - 2.0L * h * dir)) /
         (12.0L * h);
}

}  // namespace

TEST_CASE("h_eval closed form matches reference values") {
  const double expect = 0.25 + std::numbers::pi / 8;
  CHECK_THAT(h_eval(1.0, cd(1.0)).real(), WithinAbs(expect, 1e-15));
  CHECK_THAT(std::abs(h_quadrature_oracle(1.0, cd(1.0), 1e-13) - cd(expect)), WithinAbs(0.0, 1e-12));
  CHECK(h_derivative(0.5, cd(0.0)) == cd(16.0));
  for (double y : {-0.4, -0.1, 0.05, 0.3, 0.49}) {
    const cd v = h_eval(0.5, cd(0.0, y));
    CHECK(v.real() == 0.0);
    CHECK(v.imag() != 0.0);
  }
  CHECK(h_quadrature_oracle(0.3, cd(0.0), 1e-12) == cd(0.0));
}

TEST_CASE("h_eval rejects points on the branch cuts") {
  CHECK_THROWS_AS(h_eval(0.5, cd(0.0, 0.5)), DomainError);
  CHECK_THROWS_AS(h_eval(0.5, cd(0.0, -0.9)), DomainError);
  CHECK_NOTHROW(h_eval(0.5, cd(1e-3, 0.9)));
}

TEST_CASE("closed form agrees with quadrature across thin domains") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uf(-1.0, 1.0);
  const double eps = 0.05;
  for (double a : {0.5, 0.1, 0.01}) {
    for (int i = 0; i < 40; ++i) {
      const double x = ux(rng);
      const double y = uf(rng) * y_profile(0, a, eps, x);
      const cld z(x, y);
      const cld closed = h_eval<long double>(a, z);
      const cld quad = h_quadrature_oracle<long double>(a, z, 1e-11L);
      CHECK(std::abs(closed - quad) <= 1e-10L);
    }
  }
}

TEST_CASE("path independence: two-leg path vs chord") {
  for (double a : {0.5, 0.1}) {
    for (cd z : {cd(0.3, 0.002), cd(-0.2, -0.001), cd(0.05, 0.3 * a)}) {
      const cd legs = h_quadrature_oracle(a, z, 1e-12);
      const cd chord = h_quadrature_chord(a, z, 1e-12);
      CHECK(std::abs(legs - chord) <= 1e-10 * std::max(1.0, std::abs(legs)));
    }
  }
}

TEST_CASE("H_k is real on the axis and its derivative matches the sum") {
  auto prof = profile_over(PointList{{0.0}}, 0, 0);
  HField<double> f(prof);
  const double a = prof.a();
  CHECK_THAT(field_eval(f, cd(0.0)).dH.real(), WithinRel(std::pow(a, -4), 1e-15));

  auto cprof = profile_over(CantorSpec{6, 1.0 / 3.0}, 6, 6);
  HField<double> g(cprof);
  for (int i = 0; i <= 200; ++i) {
    const double x = -0.4 + 1.8 * i / 200.0;
    const auto v = field_eval(g, cd(x, 0.0));
    CHECK(std::abs(v.H.imag()) <= 1e-14 * std::max(1.0, std::abs(v.H.real())));
    CHECK_THAT(v.dH.real(), WithinRel(axis_derivative(cprof, x), 1e-12));
  }
  CHECK_THROWS_AS(field_eval(g, cd(0.5, 1.0)), DomainError);
}

TEST_CASE("Cauchy-Riemann residual of H_k") {
  std::mt19937_64 rng(11);
  for (int k : {0, 3, 6}) {
    auto prof = profile_over(CantorSpec{6, 1.0 / 3.0}, 6, k);
    HField<long double> f(prof);
    const auto r = prof.x_range();
    std::uniform_real_distribution<double> ux(r.lo, r.hi), uf(-0.9, 0.9);
    for (int i = 0; i < 30; ++i) {
      const double x = ux(rng);
      const cld z(x, uf(rng) * capital_y(prof, x).Y);
      auto F = [&](cld w) { return f(w).H; };
      const long double h = 1e-5L;
      const cld dx = stencil(F, z, cld(1, 0), h);
      const cld dy = stencil(F, z, cld(0, 1), h);
      // U_x = V_y and U_y = -V_x
      const long double scale = std::abs(dx) + std::abs(dy);
      CHECK(std::abs(dx.real() - dy.imag()) <= 1e-6L * scale);
      CHECK(std::abs(dy.real() + dx.imag()) <= 1e-6L * scale);
    }
  }
}

TEST_CASE("V_k is positive above the axis") {
  auto prof = profile_over(CantorSpec{6, 1.0 / 3.0}, 5, 5);
  HField<double> f(prof);
  for (int i = 0; i <= 300; ++i) {
    const double x = -0.4 + 1.8 * i / 300.0;
    const double Y = capital_y(prof, x).Y;
    for (double t : {0.01, 0.3, 0.7, 1.0}) CHECK(f(cd(x, t * Y)).H.imag() > 0.0);
  }
}

TEST_CASE("Appendix derivative bounds and algebra") {
  const Params par = Params::make({});
  const double eps = par.eps();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-0.49, 0.49), uf(-1.0, 1.0);
  for (double a : {0.45, 0.1, 0.02}) {
    for (int i = 0; i < 200; ++i) {
      const double x = ux(rng);
      const double y = uf(rng) * y_profile(0, a, eps, x);
      const cd dh = h_derivative(a, cd(x, y));
      // d/dy h = i h'
      const double uy = -dh.imag(), vy = dh.real();
      const double rho = x * x + a * a;
      CHECK(std::abs(uy) <= par.c1() * std::abs(x) * std::abs(y) / (rho * rho * rho) * (1 + 1e-12));
      CHECK(vy >= par.c2() / (rho * rho) * (1 - 1e-12));

      const double t = x * x - y * y + a * a;
      const double d = t * t - 4 * x * x * y * y;
      const double b = 4 * x * y * t;
      const cd q = cd(x, y) * cd(x, y) + a * a;
      CHECK_THAT(std::norm(q * q), WithinRel(d * d + b * b, 1e-12));
    }
  }
}

TEST_CASE("fiber bounds on U and V with defaults") {
  const Params par = Params::make({});
  CHECK_THAT(par.eps() * par.eps() * par.c1prime(), WithinAbs(0.0687, 1e-4));
  CHECK(std::cos(par.eps() * par.eps() * par.c1prime()) > 0.997);

  auto single = profile_over(PointList{{0.0}}, 0, 0, 0.1);
  HField<double> fs(single);
  CHECK_THAT(fiber_bounds(fs, 0.0).q, WithinRel(std::pow(0.01, -0.75), 1e-14));
  CHECK_THAT(fiber_bounds(fs, 0.0).q, WithinAbs(31.62, 5e-3));

  auto prof = profile_over(CantorSpec{6, 1.0 / 3.0}, 6, 6);
  HField<double> f(prof);
  for (int i = 0; i < 100; ++i) {
    const double x = -0.4 + 1.8 * i / 99.0;
    const auto cb = fiber_bounds(f, x);
    CHECK(cb.u_osc <= cb.u_bound);
    CHECK(cb.v_min >= cb.v_bound);
  }
}

TEST_CASE("q_k equals s^{5/3} |H_k'| on the axis") {
  auto prof = profile_over(CantorSpec{6, 1.0 / 3.0}, 6, 6);
  for (int i = 0; i <= 500; ++i) {
    const double x = -0.4 + 1.8 * i / 500.0;
    const auto sc = scalars(prof, x);
    CHECK_THAT(sc.q, WithinRel(std::pow(sc.s, 5.0 / 3.0) * axis_derivative(prof, x), 1e-12));
    CHECK_THAT(std::pow(sc.s, 5.0 / 3.0), WithinRel(capital_y(prof, x).Y / prof.params().eps(), 1e-12));
    CHECK(sc.e <= prof.k());
  }
}

TEST_CASE("scalars at a net point") {
  auto prof = profile_over(PointList{{0.0}}, 0, 0, 0.1);
  const auto sc = scalars(prof, 0.0);
  CHECK_THAT(sc.s, WithinRel(std::pow(0.1, 1.5), 1e-14));
  CHECK_THAT(sc.s, WithinAbs(0.03162, 1e-5));

  // Independent recomputation in long double from the raw parameters.
  const long double eps = 0.05L;
  const long double e2 = eps * eps;
  const long double c2 = ((1 - e2) * (1 - e2) - 4 * e2) / (1 + 16 * e2);
  const long double a = 0.1L;
  const long double s = std::pow(a * a, 0.75L);
  const long double q = std::pow(a * a, -0.75L);
  const long double r = eps / 2 * std::pow(s, 5.0L / 3.0L) * std::exp(eps * c2 / 2 * q);
  CHECK_THAT(sc.r, WithinRel(static_cast<double>(r), 1e-13));
  CHECK_THAT(sc.r, WithinRel(1.67e-4, 5e-3));
}

TEST_CASE("recursion constants") {
  const Params par = Params::make({});
  const auto rc = recursion_constants(par, 40);
  REQUIRE(rc.theta.size() == 41);
  for (std::size_t k = 0; k < rc.theta.size(); ++k) {
    CHECK(rc.theta[k] > 0.0);
    CHECK(rc.theta[k] <= 1.0);
    CHECK(-std::expm1(std::log(rc.theta[k])) <= rc.c * std::pow(par.tau(), static_cast<double>(k)) * (1 + 1e-12));
  }
  // theta_k increases towards 1 once tau^k is small.
  const auto far = recursion_constants(par, 3000);
  for (int k = 2000; k < 3000; ++k) CHECK(far.theta[k + 1] >= far.theta[k]);
  CHECK(1.0 - far.theta.back() < 1e-20 + 1e-18);
  // Partial products are finite and decreasing (each c_k < 1).
  for (std::size_t k = 1; k < rc.log_partial.size(); ++k) {
    CHECK(std::isfinite(rc.log_partial[k]));
    CHECK(rc.log_partial[k] < rc.log_partial[k - 1]);
  }
  CHECK(std::isfinite(rc.log_product));
  CHECK_THROWS_AS(recursion_constants(Params::unchecked({2.0, 3.0, 0.1, 30, 0.05}), 10), ValidationError);
}

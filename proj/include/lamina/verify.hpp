#pragma once

// Certificates. Every checked statement becomes one or more report entries
// with a signed margin (>= 0 means satisfied) and, on failure, a witness.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "compactset.hpp"
#include "error.hpp"
#include "immersion.hpp"
#include "intersect.hpp"
#include "numeric.hpp"
#include "profile.hpp"
#include "quadrature.hpp"
#include "report.hpp"

namespace lamina {

/// n evenly spaced points of [lo, hi], both ends included.
inline std::vector<double> uniform_points(Interval r, std::size_t n) {
  if (n < 2) throw ValidationError("uniform_points needs n >= 2");
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  xs.back() = r.hi;
  return xs;
}

namespace detail {

inline std::string witness_x(double x) { return "x = " + fmt_double(x); }
inline std::string witness_z(double x, double y) { return "z = " + fmt_double(x) + " + " + fmt_double(y) + "i"; }

/// Tracks the smallest margin seen and where it occurred.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  std::string where;
  void offer(double m, const std::string& w) {
    if (m < margin || std::isnan(m)) {
      margin = std::isnan(m) ? -std::numeric_limits<double>::infinity() : m;
      where = w;
    }
  }
  std::optional<std::string> witness_if_failed() const {
    return margin < 0 ? std::optional<std::string>(where) : std::nullopt;
  }
};

}  // namespace detail

// ---------------------------------------------------------------- level planes

/// x3(F(x + iy)) = x - x0 with the height integrated rather than short-circuited.
inline std::vector<ReportEntry> check_level_planes(const WeierstrassSurface& s, const ParamGrid& grid,
                                                   double tol = 1e-9, double quad_tol = 1e-12) {
  if (!s.height_is_dz()) throw ValidationError("level-plane check needs phi = dz");
  double worst = 0.0;
  std::string where;
  for (std::size_t i = 0; i < grid.columns(); ++i) {
    for (double y : grid.ys[i]) {
      const double x = grid.xs[i];
      const Vec3 p = immerse_point(s, cplx(x, y), quad_tol, HeightMode::quadrature);
      const double err = std::abs(p.z - (x - s.base().real()));
      if (err > worst || std::isnan(err)) {
        worst = std::isnan(err) ? INFINITY : err;
        where = detail::witness_z(x, y);
      }
    }
  }
  const double margin = tol - worst;
  return {make_entry("level_planes", "x3(F_k(t, y)) = t on the whole domain",
                     {{"grid_points", grid.size()}, {"tol", tol}, {"quad_tol", quad_tol}, {"max_error", worst}}, margin,
                     margin < 0 ? std::optional<std::string>(where) : std::nullopt)};
}

// ---------------------------------------------------------------- fiber graphs

/// U oscillation along vertical fibers and the inner product of dF/dy with its
/// value on the axis, <F_y(x,y), F_y(x,0)> = cosh V cos(U(x,y) - U(x,0)).
inline std::vector<ReportEntry> check_fiber_graphs(const HField<double>& field, std::span<const double> xs,
                                                   int fiber_samples = 64) {
  if (fiber_samples < 1) throw ValidationError("fiber_samples must be >= 1");
  const auto surface = WeierstrassSurface::from_field(field);
  const auto& par = field.profile().params();
  const double bound = par.eps() * par.eps() * par.c1prime();

  double max_osc = 0.0;
  std::string osc_where;
  detail::Worst inner;
  for (double x : xs) {
    const FiberBounds cb = fiber_bounds(field, x, fiber_samples);
    if (cb.u_osc > max_osc || std::isnan(cb.u_osc)) {
      max_osc = std::isnan(cb.u_osc) ? INFINITY : cb.u_osc;
      osc_where = detail::witness_x(x);
    }
    const double Y = capital_y(field.profile(), x).Y;
    const Vec3 dy0 = tangent_frame(surface, cplx(x, 0.0)).dy;
    for (int j = 0; j <= fiber_samples; ++j) {
      const double y = Y * j / fiber_samples;
      const cplx z(x, y);
      const double V = field(z).H.imag();
      // Normalised by cosh V: the claim is <.,.> > cosh(V) / 2.
      const double ratio = dot(tangent_frame(surface, z).dy, dy0) / std::cosh(V);
      inner.offer(ratio - 0.5, detail::witness_z(x, y));
    }
  }
  const nlohmann::json params = {{"k", field.k()},          {"points", xs.size()}, {"fiber_samples", fiber_samples},
                                 {"max_u_osc", max_osc},     {"eps2_c1prime", bound}};
  auto osc_witness = [&](double m) { return m < 0 ? std::optional<std::string>(osc_where) : std::nullopt; };
  std::vector<ReportEntry> out;
  out.push_back(make_entry("fiber.angle", "|U_k(x,y) - U_k(x,0)| < 1 on every fiber, so cos > cos 1 > 1/2", params,
                           1.0 - max_osc, osc_witness(1.0 - max_osc)));
  out.push_back(make_entry("fiber.inner_product", "<F_y(x,y), F_y(x,0)> > cosh(V_k(x,y)) / 2 on every fiber", params,
                           inner.margin, inner.witness_if_failed()));
  out.push_back(make_entry("fiber.oscillation_bound", "|U_k(x,y) - U_k(x,0)| <= eps^2 c1'", params, bound - max_osc,
                           osc_witness(bound - max_osc)));
  return out;
}

// ---------------------------------------------------------------- radius

/// log <F(x,Y) - F(x,0), F_y(x,0)> = log int_0^Y cosh V cos(U - U(x,0)) dy.
/// The integrand is scaled by e^{-V(x,Y)} so large V cannot overflow.
template <class Real>
double log_fiber_projection(const HField<Real>& field, double x, double Y, double rel_tol = 1e-8) {
  using C = std::complex<Real>;
  const Real u0 = field(C(x, 0)).H.real();
  const double vtop = static_cast<double>(field(C(x, Y)).H.imag());
  auto f = [&](cplx t) {
    const auto v = field(C(x, t.real()));
    const double du = static_cast<double>(v.H.real() - u0);
    const double V = static_cast<double>(v.H.imag());
    return cplx(0.5 * (std::exp(V - vtop) + std::exp(-V - vtop)) * std::cos(du), 0.0);
  };
  // The scaled integral is at least ~ Y / (2 (1 + vtop)) when U barely moves.
  const double tol = rel_tol * Y / (2.0 * (1.0 + std::abs(vtop)));
  const double value = quadrature::integrate_segment<double>(f, cplx(0.0), cplx(Y), tol).value.real();
  return value > 0 ? std::log(value) + vtop : -std::numeric_limits<double>::infinity();
}

struct RadiusOptions {
  std::size_t fiber_points = 200;        // x samples (strided from the grid) for the fiber-length check
  double fiber_rel_tol = 1e-8;
  std::optional<double> good_interval_a;  // a_k override for the good-interval check
  std::size_t good_interval_points = 64;  // net points probed per level
};

/// r_k dichotomy, the one-step recursion, the fiber-length lower bound and the
/// good-interval lemma, for every level 0..prof.k().
inline std::vector<ReportEntry> check_radius(const DomainProfile& prof, std::span<const double> xs,
                                             RadiusOptions opt = {}) {
  if (xs.empty()) throw ValidationError("check_radius needs a nonempty x grid");
  const int K = prof.k();
  const Params& par = prof.params();
  const RecursionConstants rc = recursion_constants(par, std::max(K, 1));

  std::vector<std::vector<double>> lr(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    const DomainProfile pk = prof.at_level(k);
    auto& row = lr[static_cast<std::size_t>(k)];
    row.reserve(xs.size());
    for (double x : xs) row.push_back(scalars(pk, x).log_r);
  }
  const auto& lr0 = lr[0];

  std::vector<ReportEntry> out;
  for (int k = 0; k <= K; ++k) {
    const auto& lk = lr[static_cast<std::size_t>(k)];
    detail::Worst dich;
    double min_log_r = INFINITY;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      // Either log r_k >= 0 or log r_k > log prod c_l + log r_0.
      dich.offer(std::max(lk[i], lk[i] - (rc.log_product + lr0[i])), detail::witness_x(xs[i]));
      min_log_r = std::min(min_log_r, lk[i]);
    }
    out.push_back(make_entry("radius.dichotomy", "r_k(x) >= 1 or r_k(x) > (prod_l c_l) r_0(x)",
                             {{"k", k}, {"points", xs.size()}, {"log_prod_c", rc.log_product}, {"min_log_r", min_log_r}},
                             dich.margin, dich.witness_if_failed()));

    if (k >= 1) {
      const auto& lprev = lr[static_cast<std::size_t>(k) - 1];
      const double theta = rc.theta[static_cast<std::size_t>(k)], lc = rc.log_c[static_cast<std::size_t>(k)];
      detail::Worst rec;
      std::size_t active = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (lk[i] >= 0.0) continue;
        ++active;
        rec.offer(lk[i] - (lc + theta * lprev[i]), detail::witness_x(xs[i]));
      }
      const bool vacuous = active == 0;
      out.push_back(make_entry("radius.recursion", "r_k(x) < 1 implies r_k(x) > c_k r_{k-1}(x)^{theta_k}",
                               {{"k", k}, {"points_with_r_below_1", active}, {"vacuous", vacuous},
                                {"theta_k", theta}, {"log_c_k", lc}},
                               vacuous ? 0.0 : rec.margin, rec.witness_if_failed()));
    }

    {
      const DomainProfile pk = prof.at_level(k);
      // U_k - U_k(x, 0) loses the large constants only in long double.
      const HField<long double> field(pk);
      const std::size_t stride = std::max<std::size_t>(1, xs.size() / std::max<std::size_t>(1, opt.fiber_points));
      detail::Worst len;
      std::size_t used = 0;
      for (std::size_t i = 0; i < xs.size(); i += stride, ++used) {
        const double Y = capital_y(pk, xs[i]).Y;
        len.offer(log_fiber_projection(field, xs[i], Y, opt.fiber_rel_tol) - lk[i], detail::witness_x(xs[i]));
      }
      out.push_back(make_entry("radius.fiber_length",
                               "<F_k(x,Y_k) - F_k(x,0), F_y(x,0)> > (eps/2) s_k^{5/3} exp((eps c2/2) q_k(x))",
                               {{"k", k}, {"points", used}, {"min_log_ratio", len.margin}}, len.margin,
                               len.witness_if_failed()));
    }

    {
      const double rho = par.c0() * std::pow(par.mu(), -2.0 / 3.0 * (1.0 + par.sigma()) * k);
      const double a = opt.good_interval_a.value_or(par.a(k));
      nlohmann::json params = {{"k", k}, {"a_k", a}, {"radius", rho}};
      if (!(a <= rho)) {
        params["vacuous"] = true;
        out.push_back(make_entry("radius.good_interval",
                                 "|x - p_k(x)|, a_k <= c0 mu^{-2/3 (1+sigma) k} implies r_k(x) > 1", params, 0.0));
        continue;
      }
      const DomainProfile pa(prof.net_ptr(), par, k, prof.x_range(), a);
      const auto& pts = prof.net().cumulative(k);
      const std::size_t step = std::max<std::size_t>(1, pts.size() / std::max<std::size_t>(1, opt.good_interval_points));
      detail::Worst good;
      std::size_t probes = 0;
      for (std::size_t i = 0; i < pts.size(); i += step) {
        for (double f : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
          const double x = pts[i] + f * rho;
          const Scalars sc = scalars(pa, x);
          if (std::abs(x - sc.p) > rho) continue;
          ++probes;
          good.offer(sc.log_r, detail::witness_x(x));
        }
      }
      params["vacuous"] = false;
      params["probes"] = probes;
      out.push_back(make_entry("radius.good_interval",
                               "|x - p_k(x)|, a_k <= c0 mu^{-2/3 (1+sigma) k} implies r_k(x) > 1", params,
                               probes ? good.margin : 0.0, good.witness_if_failed()));
    }
  }
  return out;
}

// ---------------------------------------------------------------- curvature

struct BlowupOptions {
  std::vector<double> a_values{1e-1, 1e-2, 1e-3};  // at level l the scan uses a * gamma^{-l}
  std::vector<int> levels{0};                       // net levels whose points are probed
  std::size_t points_per_level = 8;
  std::optional<double> offnet_point;  // defaults to the point of M farthest from M_k
};

struct BlowupRow {
  double p = 0.0;
  int level = 0;
  double a = 0.0;
  double A2 = 0.0;     // |A|^2(p) = 2 |H_k'(p)|^2
  double bound = 0.0;  // 2 mu^{-2l} a^{-8}
};

struct BlowupScan {
  std::vector<BlowupRow> rows;
  std::vector<ReportEntry> entries;
};

/// Point of `set` farthest from M_k among piece endpoints and midpoints.
inline std::optional<double> farthest_from_net(const CompactSet& set, const NetHierarchy& net, int k) {
  const auto& m = net.cumulative(k);
  std::optional<double> best;
  double best_d = 0.0;
  for (const auto& piece : set.pieces()) {
    for (double x : {piece.lo, 0.5 * (piece.lo + piece.hi), piece.hi}) {
      auto it = std::lower_bound(m.begin(), m.end(), x);
      double d = INFINITY;
      if (it != m.end()) d = *it - x;
      if (it != m.begin()) d = std::min(d, x - *std::prev(it));
      if (d > best_d) {
        best_d = d;
        best = x;
      }
    }
  }
  return best;
}

/// |A|^2 at net points as a_k shrinks, and the growth of the lower bound at an off-net point of M.
inline BlowupScan curvature_blowup_scan(const DomainProfile& prof, const CompactSet& set, BlowupOptions opt = {}) {
  if (opt.a_values.size() < 2) throw ValidationError("curvature_blowup_scan needs at least two a values");
  const Params& par = prof.params();
  const int k = prof.k();
  BlowupScan out;

  detail::Worst slope_w, bound_w;
  double worst_slope = 0.0;
  std::size_t tested = 0;
  for (int l : opt.levels) {
    if (l < 0 || l > k) throw ValidationError("blowup level " + std::to_string(l) + " outside 0..k");
    const auto& m = prof.net().fresh(l);
    if (m.empty()) continue;
    // a small against the spacing gamma^{-l} of the probed level, so p's own term dominates.
    std::vector<double> as;
    std::vector<HField<double>> fields;
    for (double a0 : opt.a_values) {
      as.push_back(a0 * std::pow(par.gamma(), -l));
      fields.emplace_back(DomainProfile(prof.net_ptr(), par, k, prof.x_range(), as.back()));
    }
    const std::size_t step = std::max<std::size_t>(1, m.size() / std::max<std::size_t>(1, opt.points_per_level));
    for (std::size_t i = 0; i < m.size(); i += step) {
      const double p = m[i];
      std::vector<double> a2s;
      for (std::size_t j = 0; j < fields.size(); ++j) {
        const double a = as[j];
        // V_k(p, 0) = 0, so |A|^2 = 2 |H_k'|^2 there.
        const double d = std::abs(fields[j](cplx(p, 0.0)).dH);
        const double A2 = 2.0 * d * d;
        const double aa = (a * a) * (a * a);
        const double bound = 2.0 * std::pow(par.mu(), -2.0 * l) / (aa * aa);
        out.rows.push_back({p, l, a, A2, bound});
        a2s.push_back(A2);
        // At a single-term point the bound is attained; allow rounding in the ratio only.
        bound_w.offer(std::log(A2 / bound) + 1e-12, "p = " + fmt_double(p) + ", a = " + fmt_double(a));
      }
      const LineFit fit = fit_loglog(as, a2s);
      const double dev = std::abs(fit.slope + 8.0);
      if (dev > worst_slope) worst_slope = dev;
      slope_w.offer(0.2 - dev, "p = " + fmt_double(p) + ", slope = " + fmt_double(fit.slope));
      ++tested;
    }
  }
  const nlohmann::json avals = opt.a_values;
  const nlohmann::json levels = opt.levels;
  out.entries.push_back(make_entry("curvature.blowup_slope", "|A|^2(p) ~ a_k^{-8} at net points (slope -8 +- 0.2)",
                                   {{"k", k}, {"levels", levels}, {"points", tested}, {"a_values", avals}, {"max_slope_deviation", worst_slope}},
                                   slope_w.margin, slope_w.witness_if_failed()));
  out.entries.push_back(make_entry("curvature.blowup_lower_bound", "|A|^2(p) >= 2 mu^{-2l} a_k^{-8} for p in m_l",
                                   {{"k", k}, {"levels", levels}, {"points", tested}, {"a_values", avals}}, bound_w.margin,
                                   bound_w.witness_if_failed()));

  const std::optional<double> xs = opt.offnet_point ? opt.offnet_point : farthest_from_net(set, prof.net(), k);
  const bool vacuous = !xs || std::binary_search(prof.net().cumulative(k).begin(), prof.net().cumulative(k).end(), *xs);
  if (vacuous) {
    nlohmann::json params = {{"k", k}, {"vacuous", true}};
    out.entries.push_back(make_entry("curvature.offnet_bound",
                                     "|H_l'(x)| > mu^{-l} / (gamma^{-2l} + a_l^2)^2 at x in M \\ M_k", params, 0.0));
    out.entries.push_back(make_entry("curvature.offnet_growth", "the off-net lower bound increases with l", params, 0.0));
    return out;
  }
  detail::Worst ob, og;
  double prev_log_bound = -INFINITY;
  for (int l = 1; l <= k; ++l) {
    const DomainProfile pl = prof.at_level(l);
    const double a = pl.a();
    const double lb = -l * std::log(par.mu()) - 2.0 * std::log(std::pow(par.gamma(), -2.0 * l) + a * a);
    const double d = std::abs(HField<double>(pl)(cplx(*xs, 0.0)).dH);
    ob.offer(std::log(d) - lb, "l = " + std::to_string(l));
    if (l > 1) og.offer(lb - prev_log_bound, "l = " + std::to_string(l));
    prev_log_bound = lb;
  }
  const nlohmann::json params = {{"k", k}, {"x", *xs}, {"vacuous", false}};
  out.entries.push_back(make_entry("curvature.offnet_bound",
                                   "|H_l'(x)| > mu^{-l} / (gamma^{-2l} + a_l^2)^2 at x in M \\ M_k", params,
                                   k >= 1 ? ob.margin : 0.0, ob.witness_if_failed()));
  out.entries.push_back(make_entry("curvature.offnet_growth", "the off-net lower bound increases with l", params,
                                   k >= 2 ? og.margin : 0.0, og.witness_if_failed()));
  return out;
}

struct BoundedScan {
  std::vector<double> max_A2;    // per level; 0 where no sample survives
  std::vector<double> majorant;  // 2 (sum_l mu^{-l} (gamma^l + 1))^2 delta^{-8}
  std::vector<std::size_t> samples;
  std::vector<ReportEntry> entries;
};

/// Sup of |A|^2 over seeded samples of Omega_k outside S_delta = {dist(Re z, M) < delta}.
inline BoundedScan bounded_curvature_scan(const DomainProfile& prof, const CompactSet& set, double delta,
                                          std::size_t nx = 400, int fiber_samples = 8, std::uint64_t seed = 0) {
  if (!(delta > 0.0)) throw ValidationError("bounded_curvature_scan needs delta > 0");
  if (fiber_samples < 1) throw ValidationError("fiber_samples must be >= 1");
  const Params& par = prof.params();
  const Interval r = prof.x_range();

  // Half of the abscissae on a uniform grid, half drawn from the seed.
  std::vector<double> xs = uniform_points(r, std::max<std::size_t>(2, nx / 2));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(r.lo, r.hi);
  for (std::size_t i = xs.size(); i < nx; ++i) xs.push_back(ux(rng));
  std::erase_if(xs, [&](double x) { return set.distance(x) < delta; });
  std::sort(xs.begin(), xs.end());

  BoundedScan out;
  CompensatedSum<double> terms;
  for (int k = 0; k <= prof.k(); ++k) {
    terms.add(std::pow(par.mu(), -k) * (std::pow(par.gamma(), k) + 1.0));
    const double maj = 2.0 * terms.value() * terms.value() * std::pow(delta, -8.0);
    const DomainProfile pk = prof.at_level(k);
    const auto surface = WeierstrassSurface::from_field(HField<double>(pk));
    double best = 0.0;
    std::string where;
    std::size_t n = 0;
    for (double x : xs) {
      const double Y = capital_y(pk, x).Y;
      for (int j = 0; j <= fiber_samples; ++j) {
        const double y = Y * j / fiber_samples;
        const auto gd = gauss_data(surface, cplx(x, y));
        ++n;
        if (gd.A2 > best || std::isnan(gd.A2)) {
          best = std::isnan(gd.A2) ? INFINITY : gd.A2;
          where = detail::witness_z(x, y);
        }
      }
    }
    out.max_A2.push_back(best);
    out.majorant.push_back(maj);
    out.samples.push_back(n);
    const double margin = n ? std::log(maj) - std::log(best) : 0.0;
    out.entries.push_back(make_entry(
        "curvature.bounded", "sup |A|^2 on Omega_k outside S_delta stays below 2 (sum_l mu^{-l}(gamma^l+1))^2 delta^{-8}",
        {{"k", k}, {"delta", delta}, {"samples", n}, {"vacuous", n == 0}, {"max_A2", best}, {"majorant", maj},
         {"seed", seed}},
        margin, margin < 0 ? std::optional<std::string>(where) : std::nullopt));
  }
  return out;
}

// ---------------------------------------------------------------- spirals

enum class SpiralMode {
  endpoint_in_net,  // t1 in m_l: windings on [t1 + t, t1 + 2t] scale like t^{-3}
  endpoint_limit,   // t1 outside every net: windings on slabs [t^{l+1}, t^l] grow like (gamma^3/mu)^l
};

/// Which boundary plane of the interval the windings accumulate on.
enum class SpiralEnd { lower, upper };

struct SpiralOptions {
  std::vector<double> ts;          // mode 1 ladder; default (t2 - t1) 2^{-j}, j = 3..8
  int slab_from = 4, slab_to = 9;  // mode 2 slab levels
  SpiralEnd end = SpiralEnd::lower;
};

struct SpiralSample {
  double t = 0.0;        // ladder value (mode 1) or slab level l (mode 2)
  double lo = 0.0, hi = 0.0;  // axis interval whose winding is counted
  double delta_u = 0.0;
  long long turns = 0;   // floor(delta_u / 2 pi)
  Vec3 direction_lo, direction_hi;  // level-set directions (sin U, -cos U, 0)
};

struct SpiralCensus {
  SpiralMode mode{};
  std::vector<SpiralSample> samples;
  std::optional<LineFit> fit;  // log N vs log t (mode 1) or log N vs l (mode 2)
  std::vector<ReportEntry> entries;
};

/// Winding of U_k along the axis next to one endpoint of a complementary interval.
inline SpiralCensus spiral_census(const DomainProfile& prof, const CompactSet& set, Interval gap, SpiralMode mode,
                                  SpiralOptions opt = {}) {
  const double t1 = gap.lo, t2 = gap.hi;
  if (!(t1 < t2)) throw ValidationError("spiral interval needs t1 < t2");
  for (const auto& piece : set.pieces()) {
    if (piece.hi > t1 && piece.lo < t2) {
      throw ValidationError("interval (" + fmt_double(t1) + ", " + fmt_double(t2) + ") meets M; not a complementary interval");
    }
  }
  // e is the accumulation plane; sgn points from it into the interval.
  const bool lower_end = opt.end == SpiralEnd::lower;
  const double e = lower_end ? t1 : t2;
  const double sgn = lower_end ? 1.0 : -1.0;
  if (!set.contains(e)) throw ValidationError("spiral endpoint " + fmt_double(e) + " is not in M");

  const auto& mk = prof.net().cumulative(prof.k());
  const auto it = std::lower_bound(mk.begin(), mk.end(), e);
  const bool in_net = it != mk.end() && *it == e;
  int l_net = -1;
  if (in_net) l_net = prof.net().level(prof.k()).origin[static_cast<std::size_t>(it - mk.begin())];
  if (mode == SpiralMode::endpoint_in_net && !in_net) {
    throw ValidationError("endpoint-in-net mode needs the endpoint in M_k; " + fmt_double(e) + " is not a net point");
  }
  if (mode == SpiralMode::endpoint_limit && in_net) {
    throw ValidationError("endpoint-limit mode needs the endpoint outside M_k; " + fmt_double(e) + " is a net point");
  }

  // Constants of size pi / (4 a^3) cancel in U differences; long double keeps them.
  const HField<long double> field(prof);
  auto U = [&](double s) { return field(std::complex<long double>(s, 0)).H.real(); };
  auto direction = [&](long double u) {
    return Vec3{static_cast<double>(std::sin(u)), static_cast<double>(-std::cos(u)), 0.0};
  };
  // U increases along the axis, so the winding over [lo, hi] is U(hi) - U(lo).
  auto sample = [&](double t, double p, double q) {
    const double lo = std::min(p, q), hi = std::max(p, q);
    const long double ulo = U(lo), uhi = U(hi);
    SpiralSample s;
    s.t = t;
    s.lo = lo;
    s.hi = hi;
    s.delta_u = static_cast<double>(uhi - ulo);
    s.turns = static_cast<long long>(std::floor(s.delta_u / (2.0 * std::numbers::pi)));
    s.direction_lo = direction(ulo);
    s.direction_hi = direction(uhi);
    return s;
  };

  SpiralCensus out;
  out.mode = mode;
  const Params& par = prof.params();
  std::vector<double> fx, fy;
  if (mode == SpiralMode::endpoint_in_net) {
    std::vector<double> ts = opt.ts;
    if (ts.empty()) {
      for (int j = 3; j <= 8; ++j) ts.push_back((t2 - t1) * std::ldexp(1.0, -j));
    }
    detail::Worst lower;
    for (double t : ts) {
      if (!(t > 0.0 && t < 0.5 * (t2 - t1))) throw ValidationError("ladder value t must lie in (0, (t2 - t1)/2)");
      out.samples.push_back(sample(t, e + sgn * t, e + sgn * 2 * t));
      const auto& s = out.samples.back();
      // Reference minorant c2 mu^{-l} / (64 t^3).
      const double ref = par.c2() * std::pow(par.mu(), -l_net) / (64.0 * t * t * t);
      lower.offer(std::log(s.delta_u / ref), "t = " + fmt_double(t));
      if (s.turns >= 1) {
        fx.push_back(std::log(t));
        fy.push_back(std::log(static_cast<double>(s.turns)));
      }
    }
    nlohmann::json params = {{"k", prof.k()}, {"t1", t1}, {"t2", t2}, {"endpoint", e}, {"level", l_net},
                             {"ladder", ts.size()}, {"fitted", fx.size()}};
    double margin = -INFINITY;
    std::optional<std::string> witness = "fewer than two ladder values with N >= 1";
    if (fx.size() >= 2) {
      out.fit = fit_line(fx, fy);
      params["slope"] = out.fit->slope;
      margin = 0.3 - std::abs(out.fit->slope + 3.0);
      witness = margin < 0 ? std::optional<std::string>("slope = " + fmt_double(out.fit->slope)) : std::nullopt;
    }
    out.entries.push_back(make_entry("spiral.endpoint_slope", "N(t) ~ t^{-3} next to a net endpoint (slope -3 +- 0.3)",
                                     params, margin, witness));
    out.entries.push_back(make_entry("spiral.endpoint_minorant", "winding of U_k over [t, 2t] from the endpoint > c2 mu^{-l} / (64 t^3)",
                                     {{"k", prof.k()}, {"endpoint", e}, {"level", l_net}}, lower.margin,
                                     lower.witness_if_failed()));
    return out;
  }

  if (opt.slab_from < 0 || opt.slab_to <= opt.slab_from) throw ValidationError("slab levels need 0 <= from < to");
  const double g = par.gamma();
  if (!(std::pow(g, -opt.slab_from) < t2 - t1)) {
    throw ValidationError("slab t^l = endpoint +- gamma^{-l} leaves the interval at l = " + std::to_string(opt.slab_from));
  }
  detail::Worst lower;
  const double a = prof.a();
  for (int l = opt.slab_from; l <= opt.slab_to; ++l) {
    out.samples.push_back(sample(l, e + sgn * std::pow(g, -(l + 1)), e + sgn * std::pow(g, -l)));
    const auto& s = out.samples.back();
    // The nearest level-l net point lies within gamma^{-l} of the endpoint, so each
    // slab point is within 2 gamma^{-l} of it: c2 mu^{-l} (1 - 1/gamma) gamma^{-l} / (4 gamma^{-2l} + a^2)^2.
    const double gl = std::pow(g, -l);
    const double den = 4.0 * gl * gl + a * a;
    const double ref = par.c2() * std::pow(par.mu(), -l) * (1.0 - 1.0 / g) * gl / (den * den);
    if (l < prof.k()) lower.offer(std::log(s.delta_u / ref), "l = " + std::to_string(l));
    if (s.turns >= 1) {
      fx.push_back(l);
      fy.push_back(std::log(static_cast<double>(s.turns)));
    }
  }
  const double ratio_ref = g * g * g / par.mu();
  nlohmann::json params = {{"k", prof.k()}, {"t1", t1}, {"t2", t2}, {"endpoint", e}, {"slab_from", opt.slab_from},
                           {"slab_to", opt.slab_to}, {"reference_ratio", ratio_ref}, {"fitted", fx.size()}};
  double margin = -INFINITY;
  std::optional<std::string> witness = "fewer than two slabs with N_l >= 1";
  if (fx.size() >= 2) {
    out.fit = fit_line(fx, fy);
    const double ratio = std::exp(out.fit->slope);
    params["ratio"] = ratio;
    margin = 0.1 - std::abs(ratio / ratio_ref - 1.0);
    witness = margin < 0 ? std::optional<std::string>("ratio = " + fmt_double(ratio)) : std::nullopt;
  }
  out.entries.push_back(make_entry("spiral.slab_growth", "N_l ~ c (gamma^3/mu)^l across slabs (ratio within 10%)",
                                   params, margin, witness));
  out.entries.push_back(make_entry("spiral.slab_minorant",
                                   "winding over slab l > c2 mu^{-l} (1 - 1/gamma) gamma^{-l} / (4 gamma^{-2l} + a_k^2)^2",
                                   {{"k", prof.k()}, {"endpoint", e}, {"slab_from", opt.slab_from}, {"slab_to", opt.slab_to}},
                                   lower.margin == INFINITY ? 0.0 : lower.margin, lower.witness_if_failed()));
  return out;
}

// ---------------------------------------------------------------- Cauchy decay

struct CauchyScan {
  std::vector<int> ks;                // D_k compares levels k and k+1
  std::vector<double> displacement;   // max vertex distance
  std::vector<ReportEntry> entries;
};

/// Meshes at consecutive levels on one fixed sub-grid of a complementary
/// interval, each rotated so U_k vanishes at the interval's midpoint.
struct CauchyOptions {
  std::size_t nx = 16, ny = 8;
  double window = 0.2;  // sub-grid width as a fraction of the interval, centred on its midpoint
  double tol = 1e-12;
  double min_factor = 2.0;
};

inline CauchyScan cauchy_decay_scan(const DomainProfile& prof, Interval gap, int k_from, int k_to,
                                    CauchyOptions opt = {}) {
  const std::size_t nx = opt.nx, ny = opt.ny;
  const double tol = opt.tol, min_factor = opt.min_factor;
  if (!(opt.window > 0.0 && opt.window < 1.0)) throw ValidationError("Cauchy window must lie in (0, 1)");
  if (k_from < 0 || k_to <= k_from) throw ValidationError("Cauchy scan needs 0 <= k_from < k_to");
  if (k_to + 1 > prof.net().depth()) throw ValidationError("Cauchy scan needs nets through level k_to + 1");
  if (nx < 2 || ny < 1) throw ValidationError("Cauchy scan needs nx >= 2 and ny >= 1");
  const double w = gap.hi - gap.lo;
  const double mid = 0.5 * (gap.lo + gap.hi);

  ParamGrid grid;
  grid.xs = uniform_points({mid - 0.5 * opt.window * w, mid + 0.5 * opt.window * w}, nx);
  for (double x : grid.xs) {
    double ymax = INFINITY;
    for (int k = k_from; k <= k_to + 1; ++k) ymax = std::min(ymax, capital_y(prof.at_level(k), x).Y);
    std::vector<double> col;
    for (std::size_t j = 0; j <= ny; ++j) col.push_back(0.9 * ymax * static_cast<double>(j) / static_cast<double>(ny));
    grid.ys.push_back(std::move(col));
  }

  std::vector<SurfaceMesh> meshes;
  for (int k = k_from; k <= k_to + 1; ++k) {
    const DomainProfile pk = prof.at_level(k);
    const long double phase = HField<long double>(pk)(std::complex<long double>(mid, 0)).H.real();
    meshes.push_back(build_mesh(WeierstrassSurface::from_field(HField<double>(pk), phase, 0.0, true), grid, tol));
  }

  CauchyScan out;
  for (int k = k_from; k <= k_to; ++k) {
    const auto& a = meshes[static_cast<std::size_t>(k - k_from)].vertices;
    const auto& b = meshes[static_cast<std::size_t>(k - k_from + 1)].vertices;
    double d = 0.0;
    for (std::size_t v = 0; v < a.size(); ++v) d = std::max(d, norm(a[v] - b[v]));
    out.ks.push_back(k);
    out.displacement.push_back(d);
  }
  detail::Worst dec;
  nlohmann::json ratios = nlohmann::json::array();
  for (std::size_t i = 1; i < out.displacement.size(); ++i) {
    const double ratio = out.displacement[i - 1] / out.displacement[i];
    ratios.push_back(ratio);
    dec.offer(ratio - min_factor, "k = " + std::to_string(out.ks[i - 1]) + ", ratio = " + fmt_double(ratio));
  }
  const nlohmann::json disp = out.displacement;
  out.entries.push_back(make_entry("convergence.cauchy_decay",
                                   "max vertex displacement between consecutive levels shrinks geometrically",
                                   {{"k_from", k_from}, {"k_to", k_to}, {"gap_lo", gap.lo}, {"gap_hi", gap.hi},
                                    {"window", opt.window}, {"grid_points", grid.size()}, {"displacement", disp}, {"ratios", ratios},
                                    {"min_factor", min_factor}},
                                   out.displacement.size() >= 2 ? dec.margin : 0.0, dec.witness_if_failed()));
  return out;
}

// ---------------------------------------------------------------- embedding

inline ReportEntry certify_embedding(const SurfaceMesh& mesh, nlohmann::json params = nlohmann::json::object()) {
  const EmbeddingScan scan = mesh_embedding_scan(mesh);
  params["triangles"] = scan.triangles;
  params["degenerate"] = scan.degenerate;
  params["candidate_pairs"] = scan.candidate_pairs;
  params["intersecting_pairs"] = scan.intersecting_pairs;
  std::optional<std::string> witness;
  if (scan.witness) {
    witness = "triangles " + std::to_string(scan.witness->first) + ", " + std::to_string(scan.witness->second);
  }
  const double margin = scan.intersecting_pairs ? -static_cast<double>(scan.intersecting_pairs) : 0.0;
  return make_entry("mesh.embedding", "no two non-adjacent triangles of the mesh intersect", std::move(params), margin,
                    witness);
}

/// On each slice x3 = t of a field-surface mesh (one grid column), vertices with
/// y > 0 project strictly increasingly onto (sin U_k(t,0), -cos U_k(t,0), 0) as y
/// grows, and those with y < 0 strictly decreasingly: each level set is a graph
/// over that line. Margin: smallest projected step per unit of y.
inline ReportEntry check_graph_sheets(const WeierstrassSurface& s, const SurfaceMesh& mesh, const ParamGrid& grid) {
  const FieldSurface* fs = s.field_surface();
  if (!fs) throw ValidationError("graph-sheet check needs a field surface");
  if (mesh.vertices.size() != grid.size()) throw ValidationError("mesh does not match the grid");
  const std::size_t nr = grid.rows();
  detail::Worst step;
  for (std::size_t i = 0; i < grid.columns(); ++i) {
    const double x = grid.xs[i];
    const double u = fs->reduced(cplx(x, 0.0)).H.real();
    const Vec3 d{std::sin(u), -std::cos(u), 0.0};
    const auto& ys = grid.ys[i];
    const std::size_t base = i * nr;
    std::size_t j0 = 0;
    while (j0 < nr && ys[j0] < 0.0) ++j0;
    if (j0 == nr || ys[j0] != 0.0) continue;
    const Vec3 foot = mesh.vertices[base + j0];
    double prev_up = 0.0, prev_y = 0.0;
    for (std::size_t j = j0 + 1; j < nr; ++j) {
      const double proj = dot(mesh.vertices[base + j] - foot, d);
      step.offer((proj - prev_up) / (ys[j] - prev_y), detail::witness_z(x, ys[j]));
      prev_up = proj;
      prev_y = ys[j];
    }
    prev_up = 0.0;
    prev_y = 0.0;
    for (std::size_t j = j0; j-- > 0;) {
      const double proj = dot(mesh.vertices[base + j] - foot, d);
      step.offer((prev_up - proj) / (prev_y - ys[j]), detail::witness_z(x, ys[j]));
      prev_up = proj;
      prev_y = ys[j];
    }
  }
  const double margin = step.margin == INFINITY ? 0.0 : step.margin;
  return make_entry("fiber.graph_sheets", "level sets x3 = t are graphs over the line of (sin U_k, -cos U_k, 0)",
                    {{"k", fs->field->k()}, {"columns", grid.columns()}, {"rows", nr}}, margin,
                    step.witness_if_failed());
}

}  // namespace lamina

#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <numbers>

#include <lamina/verify.hpp>

using namespace lamina;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Setup {
  CompactSet set;
  DomainProfile prof;
};

Setup make_setup(const CompactSetSpec& spec, int k, ParamsInput in = {}) {
  const Params par = Params::make(in);
  auto set = materialize_set(spec);
  auto net = std::make_shared<const NetHierarchy>(build_nets(set, par.gamma(), k));
  return {set, DomainProfile(net, par, k, padded_range(set, par.gamma()))};
}

bool all_pass(const std::vector<ReportEntry>& es) {
  for (const auto& e : es) {
    if (!e.pass) return false;
  }
  return !es.empty();
}

const ReportEntry& find(const std::vector<ReportEntry>& es, const std::string& id) {
  for (const auto& e : es) {
    if (e.claim_id == id) return e;
  }
  FAIL("missing entry " << id);
  throw;
}

}  // namespace

TEST_CASE("uniform points include both ends") {
  const auto xs = uniform_points({-1.0, 3.0}, 5);
  REQUIRE(xs.size() == 5);
  CHECK(xs.front() == -1.0);
  CHECK(xs.back() == 3.0);
  CHECK(xs[2] == 1.0);
  CHECK_THROWS_AS(uniform_points({0.0, 1.0}, 1), ValidationError);
}

TEST_CASE("level planes hold with the height integrated") {
  const auto s = make_setup(PointList{{0.5}}, 2);
  const auto surface = WeierstrassSurface::from_field(HField<double>(s.prof));
  const auto grid = sample_domain(s.prof, 12, 4);
  const auto es = check_level_planes(surface, grid);
  REQUIRE(es.size() == 1);
  CHECK(es[0].pass);
  CHECK(es[0].parameters["max_error"].get<double>() <= 1e-9);

  ParamGrid hel_grid{{-1.0, 0.0, 2.5}, {{-1.0, 0.5}, {-0.2, 1.0}, {0.3, 0.9}}};
  CHECK(check_level_planes(WeierstrassSurface::helicoid(), hel_grid)[0].pass);
  CHECK_THROWS_AS(check_level_planes(WeierstrassSurface::catenoid(), hel_grid), ValidationError);
}

TEST_CASE("fiber graphs: oscillation below eps^2 c1' with defaults") {
  const auto s = make_setup(CantorSpec{5}, 4);
  const HField<double> field(s.prof);
  const auto es = check_fiber_graphs(field, uniform_points(s.prof.x_range(), 101), 32);
  CHECK(all_pass(es));
  const double osc = es[0].parameters["max_u_osc"].get<double>();
  CHECK(osc <= 0.0687);
  CHECK(osc > 0.0);
  CHECK(find(es, "fiber.inner_product").margin > 0.0);
}

TEST_CASE("fiber graphs: large eps loosens the oscillation") {
  ParamsInput in;
  const auto base = make_setup(PointList{{0.5}}, 2, in);
  in.eps = 0.4;
  const Params loose = Params::unchecked(in);
  const DomainProfile prof(base.prof.net_ptr(), loose, 2, base.prof.x_range());
  const auto xs = uniform_points(prof.x_range(), 41);
  const double osc_default = check_fiber_graphs(HField<double>(base.prof), xs, 32)[0].parameters["max_u_osc"];
  const double osc_loose = check_fiber_graphs(HField<double>(prof), xs, 32)[0].parameters["max_u_osc"];
  CHECK(osc_loose > 10.0 * osc_default);
}

TEST_CASE("fiber projection against the immersion oracle") {
  const auto s = make_setup(PointList{{0.5}}, 2);
  const HField<double> field(s.prof);
  const auto surface = WeierstrassSurface::from_field(field);
  for (double x : {0.1, 0.45, 0.5, 0.62, 0.9}) {
    const double Y = capital_y(s.prof, x).Y;
    const Vec3 top = immerse_point(surface, cplx(x, Y), 1e-13);
    const Vec3 foot = immerse_point(surface, cplx(x, 0.0), 1e-13);
    const Vec3 dy0 = tangent_frame(surface, cplx(x, 0.0)).dy;
    const double oracle = std::log(dot(top - foot, dy0));
    CHECK_THAT(log_fiber_projection(field, x, Y, 1e-12), WithinAbs(oracle, 1e-8));
  }
}

TEST_CASE("radius certificates on a Cantor set") {
  const auto s = make_setup(CantorSpec{6}, 5);
  const auto xs = uniform_points(s.prof.x_range(), 300);
  RadiusOptions opt;
  opt.fiber_points = 40;
  const auto es = check_radius(s.prof, xs, opt);
  CHECK(all_pass(es));

  // k = 0: the second alternative reads r_0 > (prod c_l) r_0, margin -log prod c_l.
  const auto rc = recursion_constants(s.prof.params(), 5);
  const auto& d0 = es.front();
  REQUIRE(d0.claim_id == "radius.dichotomy");
  CHECK_THAT(d0.margin, WithinRel(-rc.log_product, 1e-12));

  // Fiber length exceeds r_k: the analytic ratio sinh(2W) / (W e^{c2 W}) is >= 1.4.
  for (const auto& e : es) {
    if (e.claim_id == "radius.fiber_length") CHECK(e.margin > std::log(1.3));
    if (e.claim_id == "radius.good_interval") CHECK(e.parameters["vacuous"].get<bool>());
  }
}

TEST_CASE("good interval: small a_k forces r_k > 1 at net points") {
  const auto s = make_setup(CantorSpec{6}, 4);
  RadiusOptions opt;
  opt.fiber_points = 10;
  opt.good_interval_a = 1e-6;
  const auto es = check_radius(s.prof, uniform_points(s.prof.x_range(), 50), opt);
  std::size_t checked = 0;
  for (const auto& e : es) {
    if (e.claim_id != "radius.good_interval") continue;
    CHECK_FALSE(e.parameters["vacuous"].get<bool>());
    CHECK(e.parameters["probes"].get<std::size_t>() > 0);
    CHECK(e.pass);
    ++checked;
  }
  CHECK(checked == 5);

  // r_k(p) directly: s = a^{3/2} and the exponent dominates.
  const DomainProfile pa(s.prof.net_ptr(), s.prof.params(), 4, s.prof.x_range(), 1e-6);
  for (double p : s.prof.net().cumulative(4)) CHECK(scalars(pa, p).log_r > 0.0);
}

TEST_CASE("curvature blowup at a single point follows a^-8") {
  const auto s = make_setup(PointList{{0.0}}, 3);
  const auto scan = curvature_blowup_scan(s.prof, s.set);
  CHECK(all_pass(scan.entries));
  REQUIRE(scan.rows.size() == 3);
  for (const auto& r : scan.rows) CHECK_THAT(r.A2, WithinRel(2.0 * std::pow(r.a, -8.0), 1e-12));
  CHECK(find(scan.entries, "curvature.offnet_bound").parameters["vacuous"].get<bool>());
}

TEST_CASE("curvature blowup on a Cantor set, with an off-net point") {
  const auto s = make_setup(CantorSpec{10}, 8);
  BlowupOptions opt;
  opt.levels = {0, 1, 3, 6, 8};
  const auto scan = curvature_blowup_scan(s.prof, s.set, opt);
  CHECK(all_pass(scan.entries));
  BlowupOptions too_deep;
  too_deep.levels = {9};
  CHECK_THROWS_AS(curvature_blowup_scan(s.prof, s.set, too_deep), ValidationError);
  const auto& off = find(scan.entries, "curvature.offnet_bound");
  CHECK_FALSE(off.parameters["vacuous"].get<bool>());
  CHECK(s.set.contains(off.parameters["x"].get<double>()));
  CHECK(find(scan.entries, "curvature.blowup_slope").parameters["max_slope_deviation"].get<double>() < 0.2);
}

TEST_CASE("bounded curvature away from M") {
  const auto s = make_setup(CantorSpec{5}, 5);
  const auto far = bounded_curvature_scan(s.prof, s.set, 0.1, 200, 4, 7);
  CHECK(all_pass(far.entries));
  const auto near = bounded_curvature_scan(s.prof, s.set, 0.05, 200, 4, 7);
  for (std::size_t k = 0; k < far.max_A2.size(); ++k) {
    CHECK(near.max_A2[k] >= far.max_A2[k]);
    CHECK(far.max_A2[k] <= far.majorant[k]);
  }
  // Same seed, same samples.
  const auto again = bounded_curvature_scan(s.prof, s.set, 0.1, 200, 4, 7);
  CHECK(again.max_A2 == far.max_A2);

  const auto all = bounded_curvature_scan(s.prof, s.set, 2.0, 50, 2, 0);
  for (const auto& e : all.entries) {
    CHECK(e.pass);
    CHECK(e.parameters["vacuous"].get<bool>());
  }
  CHECK_THROWS_AS(bounded_curvature_scan(s.prof, s.set, 0.0), ValidationError);
  CHECK_THROWS_AS(bounded_curvature_scan(s.prof, s.set, -1.0), ValidationError);
}

TEST_CASE("spiral census next to a net endpoint") {
  const auto s = make_setup(PointList{{0.0, 1.0}}, 12);
  const auto c = spiral_census(s.prof, s.set, {0.0, 1.0}, SpiralMode::endpoint_in_net);
  CHECK(all_pass(c.entries));
  REQUIRE(c.fit);
  CHECK_THAT(c.fit->slope, WithinAbs(-3.0, 0.05));
  for (const auto& smp : c.samples) {
    CHECK(smp.turns == static_cast<long long>(std::floor(smp.delta_u / (2 * std::numbers::pi))));
    CHECK_THAT(norm(smp.direction_lo), WithinAbs(1.0, 1e-12));
    CHECK(smp.direction_hi.z == 0.0);
  }
  // The upper end is also a net point; the count there mirrors the lower one.
  SpiralOptions up;
  up.end = SpiralEnd::upper;
  const auto cu = spiral_census(s.prof, s.set, {0.0, 1.0}, SpiralMode::endpoint_in_net, up);
  CHECK(all_pass(cu.entries));
}

TEST_CASE("spiral census: floor counts and validation") {
  const auto s = make_setup(PointList{{0.0, 1.0}}, 0);
  SpiralOptions opt;
  opt.ts = {0.4};
  // a_0 = 1/2 is not small next to t: the winding over [0.4, 0.8] is below 2 pi.
  const auto c = spiral_census(s.prof, s.set, {0.0, 1.0}, SpiralMode::endpoint_in_net, opt);
  REQUIRE(c.samples.size() == 1);
  CHECK(c.samples[0].delta_u < 2 * std::numbers::pi);
  CHECK(c.samples[0].turns == 0);
  CHECK_FALSE(c.entries[0].pass);

  CHECK_THROWS_AS(spiral_census(s.prof, s.set, {-0.5, 0.5}, SpiralMode::endpoint_in_net), ValidationError);
  CHECK_THROWS_AS(spiral_census(s.prof, s.set, {0.2, 0.7}, SpiralMode::endpoint_in_net), ValidationError);
  CHECK_THROWS_AS(spiral_census(s.prof, s.set, {0.0, 1.0}, SpiralMode::endpoint_limit), ValidationError);
  opt.ts = {0.6};
  CHECK_THROWS_AS(spiral_census(s.prof, s.set, {0.0, 1.0}, SpiralMode::endpoint_in_net, opt), ValidationError);
}

TEST_CASE("spiral census at an endpoint outside the nets") {
  const auto s = make_setup(CantorSpec{12}, 14);
  Interval gap{};
  for (const auto& g : s.set.gaps()) {
    if (g.hi - g.lo > 0.3) gap = g;
  }
  const auto c = spiral_census(s.prof, s.set, gap, SpiralMode::endpoint_limit);
  REQUIRE(c.samples.size() == 6);
  for (std::size_t i = 1; i < c.samples.size(); ++i) CHECK(c.samples[i].turns > c.samples[i - 1].turns);
  CHECK(find(c.entries, "spiral.slab_minorant").pass);
  REQUIRE(c.fit);
  CHECK(std::exp(c.fit->slope) > 3.0);
}

TEST_CASE("Cauchy decay between consecutive levels") {
  const auto s = make_setup(PointList{{0.0, 0.5, 1.0}}, 8);
  const auto c = cauchy_decay_scan(s.prof, {0.0, 0.5}, 4, 7);
  REQUIRE(c.displacement.size() == 4);
  CHECK(all_pass(c.entries));
  // Only a_k changes between levels here; H_k moves by O(a_k^2), a factor 4 per level.
  for (std::size_t i = 1; i < c.displacement.size(); ++i) CHECK(c.displacement[i] < c.displacement[i - 1] / 3);
  CHECK_THROWS_AS(cauchy_decay_scan(s.prof, {0.0, 0.5}, 4, 8), ValidationError);
  CHECK_THROWS_AS(cauchy_decay_scan(s.prof, {0.0, 0.5}, 4, 4), ValidationError);
}

TEST_CASE("embedding certificate: helicoid passes, overlapped copy fails") {
  const auto hel = WeierstrassSurface::helicoid();
  ParamGrid grid;
  for (int i = 0; i <= 40; ++i) {
    grid.xs.push_back(-std::numbers::pi + 2 * std::numbers::pi * i / 40);
    std::vector<double> col;
    for (int j = -4; j <= 4; ++j) col.push_back(0.25 * j);
    grid.ys.push_back(col);
  }
  auto mesh = build_mesh(hel, grid);
  const auto ok = certify_embedding(mesh);
  CHECK(ok.pass);
  CHECK(ok.margin == 0.0);
  CHECK_FALSE(ok.witness);

  SurfaceMesh doubled = mesh;
  const auto n = static_cast<std::uint32_t>(mesh.vertices.size());
  for (const auto& v : mesh.vertices) doubled.vertices.push_back({v.y, -v.x, v.z + 0.01});
  for (auto t : mesh.triangles) doubled.triangles.push_back({t[0] + n, t[1] + n, t[2] + n});
  const auto bad = certify_embedding(doubled);
  CHECK_FALSE(bad.pass);
  CHECK(bad.witness);
}

TEST_CASE("level sets are graphs over the emitted direction") {
  const auto s = make_setup(PointList{{0.5}}, 2);
  const auto surface = WeierstrassSurface::from_field(HField<double>(s.prof));
  const auto grid = sample_domain(s.prof, 64, 6, {0.5, 1'000'000, true});
  const auto mesh = build_mesh(surface, grid);
  const auto e = check_graph_sheets(surface, mesh, grid);
  CHECK(e.pass);
  CHECK(e.margin > 0.5);  // the projected speed is cosh V cos(dU) >= cos(0.07)
  CHECK_THROWS_AS(check_graph_sheets(WeierstrassSurface::helicoid(), mesh, grid), ValidationError);
}

#pragma once

// End-to-end run: nets -> field -> surface -> meshes -> certificates, with
// every artifact written under cfg.out. Nothing depends on wall-clock time, so
// identical (config, seed) pairs give identical files.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "compactset.hpp"
#include "config.hpp"
#include "error.hpp"
#include "immersion.hpp"
#include "mesh_io.hpp"
#include "params.hpp"
#include "profile.hpp"
#include "report.hpp"
#include "verify.hpp"

namespace lamina {

struct PipelineResult {
  VerificationReport report;
  std::vector<std::string> mesh_files;
  std::size_t failed = 0;
};

namespace detail {

inline std::ofstream open_table(const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header << '\n';
  return out;
}

inline void close_table(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

inline void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory " + dir.string() + " is not writable; choose another with --out");
  }
  std::filesystem::remove(probe, ec);
}

/// Complementary intervals of M inside the padded range, bounded gaps first.
inline std::vector<Interval> complementary_intervals(const CompactSet& set, Interval range) {
  std::vector<Interval> out = set.gaps();
  if (range.lo < set.min()) out.push_back({range.lo, set.min()});
  if (set.max() < range.hi) out.push_back({set.max(), range.hi});
  return out;
}

inline bool in_net(const NetHierarchy& net, int k, double x) {
  const auto& m = net.cumulative(k);
  return std::binary_search(m.begin(), m.end(), x);
}

inline void print_summary(const VerificationReport& report, std::ostream& log) {
  struct Row {
    std::size_t total = 0, failed = 0;
    double worst = INFINITY;
  };
  std::vector<std::string> order;
  std::map<std::string, Row> rows;
  for (const auto& e : report.entries()) {
    if (!rows.count(e.claim_id)) order.push_back(e.claim_id);
    auto& r = rows[e.claim_id];
    ++r.total;
    r.failed += !e.pass;
    r.worst = std::min(r.worst, e.margin);
  }
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %7s %7s %14s  %s\n", "claim", "checks", "failed", "worst margin", "verdict");
  log << line;
  for (const auto& id : order) {
    const auto& r = rows[id];
    std::snprintf(line, sizeof line, "%-28s %7zu %7zu %14.6g  %s\n", id.c_str(), r.total, r.failed, r.worst,
                  r.failed ? "FAIL" : "pass");
    log << line;
  }
  log << "failed certificates: " << report.failed() << " of " << report.entries().size() << '\n';
}

}  // namespace detail

/// Runs the configured pipeline; `meshes_only` skips every certificate.
inline PipelineResult run_pipeline(const RunConfig& cfg, std::ostream& log, bool meshes_only = false) {
  namespace fs = std::filesystem;
  validate_config(cfg);
  const Params par = Params::make(cfg.params);
  const CompactSet set = materialize_set(cfg.set);
  if (set.empty()) throw ValidationError("the compact set M is empty");
  const int K = cfg.levels;

  std::vector<std::string> certs = meshes_only ? std::vector<std::string>{} : cfg.certificates;
  auto enabled = [&](const std::string& name) { return std::find(certs.begin(), certs.end(), name) != certs.end(); };

  int depth = K;
  if (enabled("spiral")) depth = std::max(depth, cfg.spiral_k);
  if (enabled("cauchy")) depth = std::max(depth, cfg.cauchy_to + 1);
  const auto net = std::make_shared<const NetHierarchy>(build_nets(set, par.gamma(), depth));
  const Interval range = padded_range(set, par.gamma());
  const DomainProfile top(net, par, K, range);

  const fs::path dir(cfg.out);
  detail::prepare_output_dir(dir);
  PipelineResult res;
  VerificationReport& report = res.report;

  // nets.csv: M_k with the level e(p) at which each point entered.
  {
    const auto path = dir / "nets.csv";
    auto out = detail::open_table(path, "k,point,e");
    for (int k = 0; k <= depth; ++k) {
      const auto& lvl = net->level(k);
      for (std::size_t i = 0; i < lvl.cumulative.size(); ++i) {
        out << k << ',' << fmt_double(lvl.cumulative[i]) << ',' << lvl.origin[i] << '\n';
      }
    }
    detail::close_table(out, path);
  }

  // traces.csv: axis values of H_k and the radius scalars.
  {
    const auto path = dir / "traces.csv";
    auto out = detail::open_table(path, "k,x,U,abs_dH,Y,q,log_r");
    const auto xs = uniform_points(range, cfg.nx);
    for (int k = 0; k <= K; ++k) {
      const DomainProfile pk = top.at_level(k);
      const HField<long double> field(pk);
      for (double x : xs) {
        const auto v = field(std::complex<long double>(x, 0));
        const Scalars sc = scalars(pk, x);
        out << k << ',' << fmt_double(x) << ',' << fmt_double(static_cast<double>(v.H.real())) << ','
            << fmt_double(static_cast<double>(std::abs(v.dH))) << ',' << fmt_double(capital_y(pk, x).Y) << ','
            << fmt_double(sc.q) << ',' << fmt_double(sc.log_r) << '\n';
      }
    }
    detail::close_table(out, path);
  }

  // recursion.csv: theta_k, c_k and the partial products.
  const RecursionConstants rc = recursion_constants(par, std::max(K, 1));
  {
    const auto path = dir / "recursion.csv";
    auto out = detail::open_table(path, "k,theta,log_c,log_partial_product");
    for (std::size_t k = 0; k < rc.theta.size(); ++k) {
      out << k << ',' << fmt_double(rc.theta[k]) << ',' << fmt_double(rc.log_c[k]) << ','
          << fmt_double(rc.log_partial[k]) << '\n';
    }
    detail::close_table(out, path);
  }

  if (enabled("nets")) report.add(audit_nets(*net, set));

  const Refinement rule{cfg.kappa, cfg.max_points, cfg.mirror};
  for (int k = 0; k <= K; ++k) {
    const DomainProfile pk = top.at_level(k);
    const ParamGrid grid = sample_domain(pk, cfg.nx, cfg.ny, rule);
    const auto surface = WeierstrassSurface::from_field(HField<double>(pk));
    const SurfaceMesh mesh = build_mesh(surface, grid, cfg.quad_tol);
    for (const auto& f : cfg.mesh_formats) {
      const auto path = dir / ("mesh_" + std::to_string(k) + "." + f);
      export_mesh(mesh, f == "obj" ? MeshFormat::obj : f == "ply" ? MeshFormat::ply : MeshFormat::csv, path.string());
      res.mesh_files.push_back(path.string());
    }
    {
      const auto path = dir / ("grid_" + std::to_string(k) + ".csv");
      auto out = detail::open_table(path, "x,y,Y");
      for (std::size_t i = 0; i < grid.columns(); ++i) {
        const double Y = capital_y(pk, grid.xs[i]).Y;
        for (double y : grid.ys[i]) out << fmt_double(grid.xs[i]) << ',' << fmt_double(y) << ',' << fmt_double(Y) << '\n';
      }
      detail::close_table(out, path);
    }
    log << "level " << k << ": " << grid.columns() << " x " << grid.rows() << " grid, " << mesh.triangles.size()
        << " triangles\n";

    if (enabled("level_planes")) {
      const ParamGrid lp = sample_domain(pk, cfg.level_plane_nx, cfg.level_plane_ny);
      for (auto e : check_level_planes(surface, lp, cfg.level_plane_tol, std::min(cfg.quad_tol, 1e-3 * cfg.level_plane_tol))) {
        e.parameters["k"] = k;
        report.add(std::move(e));
      }
    }
    if (enabled("fiber")) {
      const auto xs = uniform_points(range, cfg.fiber_points);
      for (auto e : check_fiber_graphs(HField<double>(pk), xs, cfg.fiber_samples)) {
        e.parameters["k"] = k;
        report.add(std::move(e));
      }
    }
    if (enabled("embedding")) report.add(certify_embedding(mesh, {{"k", k}}));
    if (enabled("graph_sheets")) {
      auto e = check_graph_sheets(surface, mesh, grid);
      e.parameters["k"] = k;
      report.add(std::move(e));
    }
  }

  if (enabled("radius")) {
    RadiusOptions opt;
    opt.fiber_points = cfg.fiber_points;
    report.add(check_radius(top, uniform_points(range, cfg.radius_points), opt));
  }

  if (enabled("blowup")) {
    BlowupOptions opt;
    opt.a_values = cfg.blowup_a;
    const BlowupScan scan = curvature_blowup_scan(top, set, opt);
    const auto path = dir / "blowup.csv";
    auto out = detail::open_table(path, "p,level,a,A2,bound");
    for (const auto& r : scan.rows) {
      out << fmt_double(r.p) << ',' << r.level << ',' << fmt_double(r.a) << ',' << fmt_double(r.A2) << ','
          << fmt_double(r.bound) << '\n';
    }
    detail::close_table(out, path);
    report.add(scan.entries);
  }

  if (enabled("bounded")) {
    const BoundedScan scan = bounded_curvature_scan(top, set, cfg.delta, cfg.bounded_points, 8, cfg.seed);
    const auto path = dir / "bounded.csv";
    auto out = detail::open_table(path, "k,samples,max_A2,majorant");
    for (std::size_t k = 0; k < scan.max_A2.size(); ++k) {
      out << k << ',' << scan.samples[k] << ',' << fmt_double(scan.max_A2[k]) << ',' << fmt_double(scan.majorant[k])
          << '\n';
    }
    detail::close_table(out, path);
    report.add(scan.entries);
  }

  if (enabled("spiral")) {
    const DomainProfile ps(net, par, cfg.spiral_k, range);
    const SpiralOptions defaults;
    const auto path = dir / "spiral.csv";
    auto out = detail::open_table(path, "gap_lo,gap_hi,endpoint,mode,t,lo,hi,delta_u,turns");
    for (const Interval& gap : detail::complementary_intervals(set, range)) {
      if (gap.hi - gap.lo < cfg.spiral_min_width) continue;
      for (SpiralEnd end : {SpiralEnd::lower, SpiralEnd::upper}) {
        const double e = end == SpiralEnd::lower ? gap.lo : gap.hi;
        if (!set.contains(e)) continue;  // outer end of the padded range
        const bool net_end = detail::in_net(*net, cfg.spiral_k, e);
        if (!net_end && !(std::pow(par.gamma(), -defaults.slab_from) < gap.hi - gap.lo &&
                          defaults.slab_to < cfg.spiral_k)) {
          continue;
        }
        SpiralOptions opt;
        opt.end = end;
        const SpiralMode mode = net_end ? SpiralMode::endpoint_in_net : SpiralMode::endpoint_limit;
        SpiralCensus census = spiral_census(ps, set, gap, mode, opt);
        for (const auto& s : census.samples) {
          out << fmt_double(gap.lo) << ',' << fmt_double(gap.hi) << ',' << fmt_double(e) << ','
              << (net_end ? "endpoint_in_net" : "endpoint_limit") << ',' << fmt_double(s.t) << ',' << fmt_double(s.lo)
              << ',' << fmt_double(s.hi) << ',' << fmt_double(s.delta_u) << ',' << s.turns << '\n';
        }
        for (auto& entry : census.entries) {
          entry.parameters["end"] = end == SpiralEnd::lower ? "lower" : "upper";
          report.add(std::move(entry));
        }
      }
    }
    detail::close_table(out, path);
  }

  if (enabled("cauchy")) {
    // Widest bounded gap; the widest outer interval when M has no gap.
    auto pool = set.gaps();
    if (pool.empty()) pool = detail::complementary_intervals(set, range);
    const Interval gap = *std::max_element(pool.begin(), pool.end(), [](const Interval& a, const Interval& b) {
      return a.hi - a.lo < b.hi - b.lo;
    });
    CauchyOptions opt;
    opt.window = cfg.cauchy_window;
    const CauchyScan scan = cauchy_decay_scan(top.at_level(0), gap, cfg.cauchy_from, cfg.cauchy_to, opt);
    const auto path = dir / "cauchy.csv";
    auto out = detail::open_table(path, "k,displacement");
    for (std::size_t i = 0; i < scan.ks.size(); ++i) out << scan.ks[i] << ',' << fmt_double(scan.displacement[i]) << '\n';
    detail::close_table(out, path);
    report.add(scan.entries);
  }

  nlohmann::json header = config_to_json(cfg);
  header["derived"] = {{"c0", par.c0()},           {"c1", par.c1()},     {"c2", par.c2()},
                       {"c1prime", par.c1prime()}, {"tau", par.tau()},   {"delta_alpha", par.delta_alpha()},
                       {"log_product_c", rc.log_product}, {"net_depth", depth}};
  header["meshes_only"] = meshes_only;
  report.write_json((dir / "report.json").string(), header);
  report.write_csv((dir / "report.csv").string());

  if (!report.entries().empty()) detail::print_summary(report, log);
  res.failed = report.failed();
  return res;
}

}  // namespace lamina

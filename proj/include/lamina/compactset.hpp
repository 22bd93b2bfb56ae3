#pragma once

// Compact subsets of [0, 1] and their layered maximal separated nets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "report.hpp"

namespace lamina {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

struct PointList {
  std::vector<double> points;  // strictly increasing
};
struct IntervalUnion {
  std::vector<Interval> pieces;  // disjoint, sorted
};
struct CantorSpec {
  int depth = 1;
  double ratio = 1.0 / 3.0;  // kept fraction per side, in (0, 1/2)
};

using CompactSetSpec = std::variant<PointList, IntervalUnion, CantorSpec>;

/// A finite union of disjoint closed intervals (points are degenerate intervals).
class CompactSet {
public:
  CompactSet() = default;
  explicit CompactSet(std::vector<Interval> pieces) : pieces_(std::move(pieces)) { validate(); }

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double min() const { return pieces_.front().lo; }
  double max() const { return pieces_.back().hi; }

  /// Point-to-set distance, O(log n).
  double distance(double x) const {
    if (pieces_.empty()) return std::numeric_limits<double>::infinity();
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    double d = std::numeric_limits<double>::infinity();
    if (it != pieces_.end()) d = it->lo - x;
    if (it != pieces_.begin()) {
      const Interval& left = *std::prev(it);
      d = std::min(d, x <= left.hi ? 0.0 : x - left.hi);
    }
    return d;
  }
  bool contains(double x) const { return distance(x) == 0.0; }

  /// Open intervals of the complement within [lo, hi] (bounded gaps between pieces).
  std::vector<Interval> gaps() const {
    std::vector<Interval> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      out.push_back({pieces_[i - 1].hi, pieces_[i].lo});
    }
    return out;
  }

private:
  void validate() const {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& iv = pieces_[i];
      if (!(iv.lo >= 0.0 && iv.hi <= 1.0 && iv.lo <= iv.hi)) {
        std::ostringstream msg;
        msg << "set piece [" << iv.lo << ", " << iv.hi << "] must satisfy 0 <= lo <= hi <= 1";
        throw ValidationError(msg.str());
      }
      if (i > 0 && !(pieces_[i - 1].hi < iv.lo)) {
        std::ostringstream msg;
        msg << "set pieces must be disjoint and sorted: [" << pieces_[i - 1].lo << ", "
            << pieces_[i - 1].hi << "] and [" << iv.lo << ", " << iv.hi << "]";
        throw ValidationError(msg.str());
      }
    }
  }

  std::vector<Interval> pieces_;
};

inline CompactSet materialize_set(const CompactSetSpec& spec) {
  struct Visitor {
    CompactSet operator()(const PointList& p) const {
      std::vector<Interval> pieces;
      pieces.reserve(p.points.size());
      for (double x : p.points) pieces.push_back({x, x});
      return CompactSet(std::move(pieces));
    }
    CompactSet operator()(const IntervalUnion& u) const { return CompactSet(u.pieces); }
    CompactSet operator()(const CantorSpec& c) const {
      if (c.depth < 0 || c.depth > 30) throw ValidationError("cantor depth must be in [0, 30]");
      if (!(c.ratio > 0.0 && c.ratio < 0.5)) throw ValidationError("cantor ratio must lie in (0, 1/2)");
      std::vector<Interval> cur{{0.0, 1.0}};
      for (int d = 0; d < c.depth; ++d) {
        std::vector<Interval> next;
        next.reserve(cur.size() * 2);
        for (const auto& iv : cur) {
          const double len = (iv.hi - iv.lo) * c.ratio;
          next.push_back({iv.lo, iv.lo + len});
          next.push_back({iv.hi - len, iv.hi});
        }
        cur = std::move(next);
      }
      return CompactSet(std::move(cur));
    }
  };
  return std::visit(Visitor{}, spec);
}

/// Absolute slack in separation comparisons. Admitted points sit at
/// r + gamma^{-k}, rounded; coordinates lie in [0,1], so a few ulps of 1.
inline constexpr double kSeparationSlack = 1e-15;

struct NetLevel {
  std::vector<double> fresh;        // m_k, sorted
  std::vector<double> cumulative;   // M_k, sorted
  std::vector<int> origin;          // e(p) for each entry of cumulative
};

/// Layered nets m_k, M_k over a compact set. Immutable once built.
class NetHierarchy {
public:
  NetHierarchy() = default;

  /// Assemble from explicit m_k lists (used for audits of hand-edited nets).
  static NetHierarchy from_levels(double gamma, std::vector<std::vector<double>> fresh) {
    NetHierarchy net;
    net.gamma_ = gamma;
    std::vector<std::pair<double, int>> acc;
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      auto& m = fresh[k];
      std::sort(m.begin(), m.end());
      for (double p : m) acc.emplace_back(p, static_cast<int>(k));
      std::sort(acc.begin(), acc.end());
      NetLevel lvl;
      lvl.fresh = m;
      lvl.cumulative.reserve(acc.size());
      lvl.origin.reserve(acc.size());
      for (const auto& [p, e] : acc) {
        lvl.cumulative.push_back(p);
        lvl.origin.push_back(e);
      }
      net.levels_.push_back(std::move(lvl));
    }
    return net;
  }

  double gamma() const { return gamma_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const NetLevel& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  const std::vector<double>& fresh(int k) const { return level(k).fresh; }
  const std::vector<double>& cumulative(int k) const { return level(k).cumulative; }
  double spacing(int k) const { return std::pow(gamma_, -k); }

  bool operator==(const NetHierarchy&) const = default;

private:
  double gamma_ = 2.0;
  std::vector<NetLevel> levels_;
};

inline bool operator==(const NetLevel& a, const NetLevel& b) {
  return a.fresh == b.fresh && a.cumulative == b.cumulative && a.origin == b.origin;
}

/// Greedy left-to-right sweep: admit the leftmost point of M that is at least
/// gamma^{-k} from M_{k-1} and from the points already admitted at level k.
inline NetHierarchy build_nets(const CompactSet& set, double gamma, int levels) {
  if (set.empty()) throw ValidationError("compact set M must be nonempty");
  if (!(gamma > 1.0)) throw ValidationError("net ratio must satisfy γ > 1");
  if (levels < 0) throw ValidationError("level count K must be >= 0");

  std::vector<std::vector<double>> fresh;
  std::vector<double> prev;  // M_{k-1}
  for (int k = 0; k <= levels; ++k) {
    const double d = std::pow(gamma, -k);
    const double dc = d - kSeparationSlack;  // conflict radius
    std::vector<double> admitted;
    // Every point left of `next` is excluded; it carries across pieces.
    double next = -std::numeric_limits<double>::infinity();
    std::size_t j = 0;  // first element of prev that may still conflict
    for (const auto& piece : set.pieces()) {
      // A candidate that overshoots the right endpoint by rounding only is
      // pulled back onto it; that endpoint is still d - slack separated.
      auto snap = [&](double c) { return (c > piece.hi && c - piece.hi <= kSeparationSlack) ? piece.hi : c; };
      double c = snap(std::max(piece.lo, next));
      while (c <= piece.hi) {
        while (j < prev.size() && prev[j] + dc <= c) ++j;
        if (j < prev.size() && prev[j] - dc < c) {
          // c is within d of prev[j]; the next candidate is prev[j] + d.
          c = snap(prev[j] + d);
          continue;
        }
        admitted.push_back(c);
        c = snap(c + d);
      }
      next = c;
    }
    std::vector<double> merged;
    merged.reserve(prev.size() + admitted.size());
    std::merge(prev.begin(), prev.end(), admitted.begin(), admitted.end(), std::back_inserter(merged));
    prev = std::move(merged);
    fresh.push_back(std::move(admitted));
  }
  return NetHierarchy::from_levels(gamma, std::move(fresh));
}

struct NetPoint {
  double point = 0.0;  // p_k(x)
  int origin = 0;      // e(p_k(x))
};

/// Nearest element of M_k to x; ties go to the smaller point.
inline NetPoint closest_net_point(const NetHierarchy& net, int k, double x) {
  const auto& lvl = net.level(k);
  const auto& pts = lvl.cumulative;
  if (pts.empty()) throw DomainError("closest_net_point: M_k is empty");
  auto it = std::lower_bound(pts.begin(), pts.end(), x);
  std::size_t idx;
  if (it == pts.end()) {
    idx = pts.size() - 1;
  } else if (it == pts.begin()) {
    idx = 0;
  } else {
    const std::size_t right = static_cast<std::size_t>(it - pts.begin());
    const std::size_t left = right - 1;
    idx = (x - pts[left] <= pts[right] - x) ? left : right;
  }
  return {pts[idx], lvl.origin[idx]};
}

/// First point of `piece` not covered by the open gamma^{-k} balls around `pts`.
inline std::optional<double> first_uncovered(const Interval& piece, const std::vector<double>& pts, double d) {
  double cursor = piece.lo;  // everything left of cursor is covered
  auto it = std::upper_bound(pts.begin(), pts.end(), piece.lo - d);
  for (; it != pts.end() && *it - d < cursor; ++it) {
    cursor = std::max(cursor, *it + d);
    if (cursor > piece.hi) return std::nullopt;
  }
  if (cursor <= piece.hi) return cursor;
  return std::nullopt;
}

/// Certificates for separation, cardinality, maximality and coverage per level.
inline std::vector<ReportEntry> audit_nets(const NetHierarchy& net, const CompactSet& set,
                                           int samples_per_piece = 8) {
  std::vector<ReportEntry> out;
  const double gamma = net.gamma();
  for (int k = 0; k <= net.depth(); ++k) {
    const double d = net.spacing(k);
    const auto& m = net.fresh(k);
    const auto& all = net.cumulative(k);
    const std::vector<double> prev = k > 0 ? net.cumulative(k - 1) : std::vector<double>{};
    const nlohmann::json params = {{"k", k}, {"gamma", gamma}};

    // Separation: within m_k and from M_{k-1}.
    double min_sep = std::numeric_limits<double>::infinity();
    std::optional<std::string> sep_witness;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i > 0 && m[i] - m[i - 1] < min_sep) {
        min_sep = m[i] - m[i - 1];
        sep_witness = witness_pair(m[i - 1], m[i]);
      }
      auto it = std::lower_bound(prev.begin(), prev.end(), m[i]);
      if (it != prev.end() && *it - m[i] < min_sep) {
        min_sep = *it - m[i];
        sep_witness = witness_pair(m[i], *it);
      }
      if (it != prev.begin() && m[i] - *std::prev(it) < min_sep) {
        min_sep = m[i] - *std::prev(it);
        sep_witness = witness_pair(*std::prev(it), m[i]);
      }
    }
    const double sep_margin = m.empty() ? 1.0 : (min_sep - (d - kSeparationSlack)) / d;
    out.push_back(make_entry("nets.separation", "|p-q|, |p-r| >= gamma^-k for p,q in m_k, r in M_{k-1}",
                             params, sep_margin, sep_margin >= 0 ? std::nullopt : sep_witness));

    // Cardinality.
    const double card_bound = std::pow(gamma, k) + 1.0;
    const double card_margin = card_bound - static_cast<double>(m.size());
    out.push_back(make_entry("nets.cardinality", "|m_k| <= gamma^k + 1", params, card_margin,
                             card_margin >= 0 ? std::nullopt
                                              : std::optional<std::string>("|m_k| = " + std::to_string(m.size()))));

    // Maximality, exact: no point of M outside the open d-balls around M_k.
    std::optional<double> uncovered;
    for (const auto& piece : set.pieces()) {
      uncovered = first_uncovered(piece, all, d);
      if (uncovered) break;
    }
    out.push_back(make_entry("nets.maximality", "no point of M can be added to m_k", params,
                             uncovered ? -1.0 : 1.0,
                             uncovered ? std::optional<std::string>("addable point x = " + fmt_double(*uncovered))
                                       : std::nullopt));

    // Coverage margin from sampled points of M.
    double worst = 0.0, worst_at = set.min();
    for (const auto& piece : set.pieces()) {
      const int n = piece.hi > piece.lo ? samples_per_piece : 0;
      for (int s = 0; s <= n + 1; ++s) {
        double x = s == 0 ? piece.lo : (s == n + 1 ? piece.hi : piece.lo + (piece.hi - piece.lo) * s / (n + 1));
        auto it = std::lower_bound(all.begin(), all.end(), x);
        double dist = std::numeric_limits<double>::infinity();
        if (it != all.end()) dist = *it - x;
        if (it != all.begin()) dist = std::min(dist, x - *std::prev(it));
        if (dist > worst) {
          worst = dist;
          worst_at = x;
        }
      }
    }
    const double cov_margin = (d - worst) / d;
    nlohmann::json cov_params = params;
    cov_params["max_distance"] = worst;
    out.push_back(make_entry("nets.coverage", "every p in M has q in M_k with |p-q| < gamma^-k", cov_params,
                             cov_margin,
                             cov_margin > 0 ? std::nullopt
                                            : std::optional<std::string>("x = " + fmt_double(worst_at))));
  }
  return out;
}

}  // namespace lamina

#pragma once

// Run configuration: a TOML subset (tables, scalars, single-line arrays),
// environment overrides with prefix LAMINATION_, then command-line flags.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "compactset.hpp"
#include "error.hpp"
#include "params.hpp"

namespace lamina {

namespace toml {

class Parser {
public:
  Parser(std::string text, std::string origin) : src_(std::move(text)), origin_(std::move(origin)) {}

  /// Tables become JSON objects, `key = value` pairs their members.
  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::istringstream in(src_);
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      text_ = strip_comment(raw);
      pos_ = 0;
      skip_ws();
      if (at_end()) continue;
      if (peek() == '[') {
        ++pos_;
        const std::string name = bare_key();
        skip_ws();
        expect(']');
        expect_end();
        if (root.contains(name)) fail("table [" + name + "] defined twice");
        root[name] = nlohmann::json::object();
        table = &root[name];
        continue;
      }
      const std::string key = bare_key();
      skip_ws();
      expect('=');
      skip_ws();
      nlohmann::json v = value();
      expect_end();
      if (table->contains(key)) fail("key '" + key + "' defined twice");
      (*table)[key] = std::move(v);
    }
    return root;
  }

  /// A lone value, e.g. from an environment variable.
  nlohmann::json parse_value() {
    text_ = src_;
    pos_ = 0;
    line_ = 1;
    skip_ws();
    nlohmann::json v = value();
    expect_end();
    return v;
  }

private:
  static std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
      if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError(origin_ + ":" + std::to_string(line_) + ": " + why);
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }
  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void expect_end() {
    skip_ws();
    if (!at_end()) fail("unexpected trailing text '" + text_.substr(pos_) + "'");
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return text_.substr(start, pos_ - start);
  }

  nlohmann::json value() {
    if (at_end()) fail("missing value");
    const char c = peek();
    if (c == '"') return string();
    if (c == '[') return array();
    if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number();
  }

  nlohmann::json string() {
    expect('"');
    std::string out;
    while (!at_end() && peek() != '"') {
      if (peek() == '\\') {
        ++pos_;
        if (at_end()) break;
        const char e = peek();
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += peek();
      }
      ++pos_;
    }
    expect('"');
    return out;
  }

  nlohmann::json array() {
    expect('[');
    nlohmann::json out = nlohmann::json::array();
    skip_ws();
    if (!at_end() && peek() == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      skip_ws();
      out.push_back(value());
      skip_ws();
      if (!at_end() && peek() == ',') {
        ++pos_;
        skip_ws();
        if (!at_end() && peek() == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      expect(']');
      return out;
    }
  }

  nlohmann::json number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                         peek() == '.' || peek() == '_')) {
      ++pos_;
    }
    std::string tok = text_.substr(start, pos_ - start);
    std::erase(tok, '_');
    if (tok.empty()) fail("expected a value");
    const bool integral = tok.find_first_of(".eEn") == std::string::npos;
    try {
      std::size_t used = 0;
      if (integral) {
        const long long v = std::stoll(tok, &used);
        if (used == tok.size()) return v;
      } else {
        const double v = std::stod(tok, &used);
        if (used == tok.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("cannot parse value '" + tok + "'");
  }

  std::string src_, origin_, text_;
  std::size_t pos_ = 0, line_ = 0;
};

inline nlohmann::json parse(const std::string& text, const std::string& origin = "<config>") {
  return Parser(text, origin).parse();
}

inline nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

}  // namespace toml

/// Every certificate the pipeline can run, in report order.
inline const std::vector<std::string>& certificate_names() {
  static const std::vector<std::string> names{"nets",   "level_planes", "fiber",  "radius",   "blowup",
                                              "bounded", "spiral",       "cauchy", "embedding", "graph_sheets"};
  return names;
}

struct RunConfig {
  CompactSetSpec set = PointList{{0.5}};
  ParamsInput params;
  int levels = 2;  // K
  std::uint64_t seed = 0;
  std::string out = "lamina_out";
  std::vector<std::string> mesh_formats{"obj", "ply", "csv"};

  // grid
  std::size_t nx = 64, ny = 8;
  double kappa = 0.5;
  std::size_t max_points = 4'000'000;
  bool mirror = true;

  // tolerances
  double quad_tol = 1e-10;
  double level_plane_tol = 1e-9;

  // certificates
  std::vector<std::string> certificates = certificate_names();
  std::size_t level_plane_nx = 64, level_plane_ny = 15;
  std::size_t fiber_points = 200;
  int fiber_samples = 64;
  std::size_t radius_points = 2000;
  std::vector<double> blowup_a{1e-1, 1e-2, 1e-3};
  double delta = 0.1;
  std::size_t bounded_points = 400;
  int spiral_k = 12;
  double spiral_min_width = 0.1;
  int cauchy_from = 4, cauchy_to = 8;
  double cauchy_window = 0.2;
};

namespace detail {

template <class T>
T get_as(const nlohmann::json& v, const std::string& where) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw std::invalid_argument("");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::invalid_argument("");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) throw std::invalid_argument("");
      return static_cast<T>(v.get<long long>());
    } else {
      return v.get<T>();
    }
  } catch (const std::exception&) {
    throw ValidationError("config key " + where + " has the wrong type: " + v.dump());
  }
}

inline std::vector<double> get_doubles(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError("config key " + where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_as<double>(x, where));
  return out;
}

inline std::vector<std::string> get_strings(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError("config key " + where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(get_as<std::string>(x, where));
  return out;
}

}  // namespace detail

inline std::vector<std::string> parse_certificate_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    if (item == "all") return certificate_names();
    if (item == "none") continue;
    out.push_back(item);
  }
  return out;
}

/// Apply a parsed document on top of `cfg`. Unknown tables or keys are errors.
inline void apply_config(RunConfig& cfg, const nlohmann::json& doc) {
  using detail::get_as;
  if (!doc.is_object()) throw ValidationError("config root must be a table");

  std::string set_kind;
  nlohmann::json set_doc = nlohmann::json::object();
  for (const auto& [table, body] : doc.items()) {
    if (!body.is_object()) throw ValidationError("config entry '" + table + "' must be a table");
    for (const auto& [key, v] : body.items()) {
      const std::string where = table + "." + key;
      auto unknown = [&] { throw ValidationError("unknown config key " + where); };
      if (table == "set") {
        if (key == "kind") set_kind = get_as<std::string>(v, where);
        else if (key == "points" || key == "intervals" || key == "depth" || key == "ratio") set_doc[key] = v;
        else unknown();
      } else if (table == "params") {
        auto& p = cfg.params;
        if (key == "gamma") p.gamma = get_as<double>(v, where);
        else if (key == "mu") p.mu = get_as<double>(v, where);
        else if (key == "sigma") p.sigma = get_as<double>(v, where);
        else if (key == "alpha") p.alpha = get_as<double>(v, where);
        else if (key == "eps") p.eps = get_as<double>(v, where);
        else if (key == "a_coef") p.a_coef = get_as<double>(v, where);
        else if (key == "a_base") p.a_base = get_as<double>(v, where);
        else unknown();
      } else if (table == "run") {
        if (key == "levels") cfg.levels = get_as<int>(v, where);
        else if (key == "seed") cfg.seed = get_as<std::uint64_t>(v, where);
        else if (key == "out") cfg.out = get_as<std::string>(v, where);
        else if (key == "mesh_formats") cfg.mesh_formats = detail::get_strings(v, where);
        else unknown();
      } else if (table == "grid") {
        if (key == "nx") cfg.nx = get_as<std::size_t>(v, where);
        else if (key == "ny") cfg.ny = get_as<std::size_t>(v, where);
        else if (key == "kappa") cfg.kappa = get_as<double>(v, where);
        else if (key == "max_points") cfg.max_points = get_as<std::size_t>(v, where);
        else if (key == "mirror") cfg.mirror = get_as<bool>(v, where);
        else unknown();
      } else if (table == "tolerances") {
        if (key == "quadrature") cfg.quad_tol = get_as<double>(v, where);
        else if (key == "level_planes") cfg.level_plane_tol = get_as<double>(v, where);
        else unknown();
      } else if (table == "certificates") {
        if (key == "enabled") cfg.certificates = detail::get_strings(v, where);
        else if (key == "level_plane_nx") cfg.level_plane_nx = get_as<std::size_t>(v, where);
        else if (key == "level_plane_ny") cfg.level_plane_ny = get_as<std::size_t>(v, where);
        else if (key == "fiber_points") cfg.fiber_points = get_as<std::size_t>(v, where);
        else if (key == "fiber_samples") cfg.fiber_samples = get_as<int>(v, where);
        else if (key == "radius_points") cfg.radius_points = get_as<std::size_t>(v, where);
        else if (key == "blowup_a") cfg.blowup_a = detail::get_doubles(v, where);
        else if (key == "delta") cfg.delta = get_as<double>(v, where);
        else if (key == "bounded_points") cfg.bounded_points = get_as<std::size_t>(v, where);
        else if (key == "spiral_k") cfg.spiral_k = get_as<int>(v, where);
        else if (key == "spiral_min_width") cfg.spiral_min_width = get_as<double>(v, where);
        else if (key == "cauchy_from") cfg.cauchy_from = get_as<int>(v, where);
        else if (key == "cauchy_to") cfg.cauchy_to = get_as<int>(v, where);
        else if (key == "cauchy_window") cfg.cauchy_window = get_as<double>(v, where);
        else unknown();
      } else {
        throw ValidationError("unknown config table [" + table + "]");
      }
    }
  }

  if (!set_kind.empty() || !set_doc.empty()) {
    if (set_kind.empty()) throw ValidationError("config [set] needs kind = \"points\" | \"intervals\" | \"cantor\"");
    if (set_kind == "points") {
      if (!set_doc.contains("points")) throw ValidationError("config [set] kind points needs points = [...]");
      cfg.set = PointList{detail::get_doubles(set_doc["points"], "set.points")};
    } else if (set_kind == "intervals") {
      if (!set_doc.contains("intervals")) throw ValidationError("config [set] kind intervals needs intervals = [[lo, hi], ...]");
      IntervalUnion u;
      for (const auto& iv : set_doc["intervals"]) {
        const auto pair = detail::get_doubles(iv, "set.intervals");
        if (pair.size() != 2) throw ValidationError("config set.intervals entries must be [lo, hi]");
        u.pieces.push_back({pair[0], pair[1]});
      }
      cfg.set = u;
    } else if (set_kind == "cantor") {
      CantorSpec c;
      if (set_doc.contains("depth")) c.depth = get_as<int>(set_doc["depth"], "set.depth");
      if (set_doc.contains("ratio")) c.ratio = get_as<double>(set_doc["ratio"], "set.ratio");
      cfg.set = c;
    } else {
      throw ValidationError("config set.kind must be points, intervals or cantor (got \"" + set_kind + "\")");
    }
  }
}

/// LAMINATION_<TABLE>_<KEY>=value, e.g. LAMINATION_PARAMS_EPS=0.04 or
/// LAMINATION_RUN_LEVELS=3. Values use the config value syntax; anything that
/// does not parse is taken as a string.
inline nlohmann::json environment_overrides(char** envp) {
  nlohmann::json doc = nlohmann::json::object();
  if (!envp) return doc;
  const std::string prefix = "LAMINATION_";
  for (char** e = envp; *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto us = name.find('_');
    if (us == std::string::npos || us == 0 || us + 1 == name.size()) {
      throw ValidationError("environment override " + entry.substr(0, eq) + " must look like LAMINATION_TABLE_KEY");
    }
    const std::string raw = entry.substr(eq + 1);
    nlohmann::json v;
    try {
      v = toml::Parser(raw, entry.substr(0, eq)).parse_value();
    } catch (const ValidationError&) {
      v = raw;
    }
    doc[name.substr(0, us)][name.substr(us + 1)] = v;
  }
  return doc;
}

/// Validate everything that can be checked before any computation.
inline void validate_config(const RunConfig& cfg) {
  Params::make(cfg.params);  // throws naming the failed inequality
  if (cfg.levels < 0) throw ValidationError("run.levels must be >= 0");
  if (cfg.nx < 2 || cfg.ny < 1) throw ValidationError("grid needs nx >= 2 and ny >= 1");
  if (!(cfg.kappa >= 0.0)) throw ValidationError("grid.kappa must be >= 0");
  if (!(cfg.quad_tol > 0.0)) throw ValidationError("tolerances.quadrature must be > 0");
  if (!(cfg.level_plane_tol > 0.0)) throw ValidationError("tolerances.level_planes must be > 0");
  for (const auto& f : cfg.mesh_formats) {
    if (f != "obj" && f != "ply" && f != "csv") throw ValidationError("unknown mesh format '" + f + "' (obj, ply, csv)");
  }
  const auto& known = certificate_names();
  for (const auto& c : cfg.certificates) {
    if (std::find(known.begin(), known.end(), c) == known.end()) {
      std::string list;
      for (const auto& n : known) list += (list.empty() ? "" : ", ") + n;
      throw ValidationError("unknown certificate '" + c + "'; choose from " + list);
    }
  }
  if (cfg.blowup_a.size() < 2) throw ValidationError("certificates.blowup_a needs at least two values");
  if (!(cfg.delta > 0.0)) throw ValidationError("certificates.delta must be > 0");
  if (cfg.spiral_k < 0) throw ValidationError("certificates.spiral_k must be >= 0");
  if (cfg.cauchy_from < 0 || cfg.cauchy_to <= cfg.cauchy_from) {
    throw ValidationError("certificates need 0 <= cauchy_from < cauchy_to");
  }
  if (!(cfg.cauchy_window > 0.0 && cfg.cauchy_window < 1.0)) throw ValidationError("certificates.cauchy_window must lie in (0, 1)");
  materialize_set(cfg.set);
}

/// Defaults, then the file (if any), then the environment.
inline RunConfig load_config(const std::string& path, char** envp = nullptr) {
  RunConfig cfg;
  if (!path.empty()) apply_config(cfg, toml::parse_file(path));
  apply_config(cfg, environment_overrides(envp));
  return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json set;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointList>) {
          set = {{"kind", "points"}, {"points", s.points}};
        } else if constexpr (std::is_same_v<T, IntervalUnion>) {
          nlohmann::json ivs = nlohmann::json::array();
          for (const auto& iv : s.pieces) ivs.push_back({iv.lo, iv.hi});
          set = {{"kind", "intervals"}, {"intervals", ivs}};
        } else {
          set = {{"kind", "cantor"}, {"depth", s.depth}, {"ratio", s.ratio}};
        }
      },
      cfg.set);
  const auto& p = cfg.params;
  return {{"set", set},
          {"params",
           {{"gamma", p.gamma}, {"mu", p.mu}, {"sigma", p.sigma}, {"alpha", p.alpha}, {"eps", p.eps},
            {"a_coef", p.a_coef}, {"a_base", p.a_base}}},
          {"run", {{"levels", cfg.levels}, {"seed", cfg.seed}, {"out", cfg.out}, {"mesh_formats", cfg.mesh_formats}}},
          {"grid",
           {{"nx", cfg.nx}, {"ny", cfg.ny}, {"kappa", cfg.kappa}, {"max_points", cfg.max_points}, {"mirror", cfg.mirror}}},
          {"tolerances", {{"quadrature", cfg.quad_tol}, {"level_planes", cfg.level_plane_tol}}},
          {"certificates",
           {{"enabled", cfg.certificates},
            {"level_plane_nx", cfg.level_plane_nx},
            {"level_plane_ny", cfg.level_plane_ny},
            {"fiber_points", cfg.fiber_points},
            {"fiber_samples", cfg.fiber_samples},
            {"radius_points", cfg.radius_points},
            {"blowup_a", cfg.blowup_a},
            {"delta", cfg.delta},
            {"bounded_points", cfg.bounded_points},
            {"spiral_k", cfg.spiral_k},
            {"spiral_min_width", cfg.spiral_min_width},
            {"cauchy_from", cfg.cauchy_from},
            {"cauchy_to", cfg.cauchy_to},
            {"cauchy_window", cfg.cauchy_window}}}};
}

}  // namespace lamina

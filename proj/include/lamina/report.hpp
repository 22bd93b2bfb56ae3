#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace lamina {

struct ReportEntry {
  std::string claim_id;
  std::string locus;           // statement of the checked claim
  nlohmann::json parameters;   // inputs the verdict depends on
  double margin = 0.0;         // signed, positive = satisfied
  bool pass = false;
  std::optional<std::string> witness;
};

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string witness_pair(double a, double b) {
  return "points " + fmt_double(a) + ", " + fmt_double(b);
}

/// Margin convention: pass iff margin >= 0.
inline ReportEntry make_entry(std::string id, std::string locus, nlohmann::json params, double margin,
                              std::optional<std::string> witness = std::nullopt) {
  ReportEntry e;
  e.claim_id = std::move(id);
  e.locus = std::move(locus);
  e.parameters = std::move(params);
  e.margin = margin;
  e.pass = margin >= 0.0;
  e.witness = std::move(witness);
  return e;
}

class VerificationReport {
public:
  void add(ReportEntry e) { entries_.push_back(std::move(e)); }
  void add(const std::vector<ReportEntry>& es) { entries_.insert(entries_.end(), es.begin(), es.end()); }

  const std::vector<ReportEntry>& entries() const { return entries_; }
  std::size_t failed() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += !e.pass;
    return n;
  }

  nlohmann::json to_json(nlohmann::json header = nlohmann::json::object()) const {
    nlohmann::json j;
    j["header"] = std::move(header);
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries_) {
      nlohmann::json je = {{"claim_id", e.claim_id},
                           {"locus", e.locus},
                           {"parameters", e.parameters},
                           {"margin", e.margin},
                           {"verdict", e.pass ? "pass" : "fail"}};
      je["witness"] = e.witness ? nlohmann::json(*e.witness) : nlohmann::json(nullptr);
      j["entries"].push_back(std::move(je));
    }
    j["failed"] = failed();
    return j;
  }

  void write_json(const std::string& path, nlohmann::json header = nlohmann::json::object()) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << to_json(std::move(header)).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "claim_id,margin,verdict\n";
    for (const auto& e : entries_) {
      out << e.claim_id << ',' << fmt_double(e.margin) << ',' << (e.pass ? "pass" : "fail") << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
  }

private:
  std::vector<ReportEntry> entries_;
};

}  // namespace lamina

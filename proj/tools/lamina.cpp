// lamina: build meshes, verify certificates, or sweep one parameter.
//
// Precedence: built-in defaults < --config file < LAMINATION_* environment < flags.
// Exit status: verify returns the failed-certificate count (capped at 254);
// 255 means the run aborted with an error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lamina/config.hpp"
#include "lamina/pipeline.hpp"

extern char** environ;

namespace {

constexpr int kErrorExit = 255;
constexpr int kMaxFailedExit = 254;

struct Flags {
  std::string config;
  std::optional<int> k;
  std::optional<std::string> out;
  std::optional<std::string> certificates;
  std::optional<std::uint64_t> seed;
};

lamina::RunConfig resolve(const Flags& f) {
  lamina::RunConfig cfg = lamina::load_config(f.config, environ);
  if (f.k) cfg.levels = *f.k;
  if (f.out) cfg.out = *f.out;
  if (f.certificates) cfg.certificates = lamina::parse_certificate_list(*f.certificates);
  if (f.seed) cfg.seed = *f.seed;
  return cfg;
}

int exit_code(std::size_t failed) { return static_cast<int>(std::min<std::size_t>(failed, kMaxFailedExit)); }

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// One full verification per value of `key` (TABLE.KEY); rows of sweep.csv give
/// the worst margin per claim, ready for log-log fits. Values rejected by
/// validation get a single invalid_config row.
int run_sweep(const lamina::RunConfig& base, const std::string& key, const std::string& values) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
    throw lamina::ValidationError("--vary expects TABLE.KEY, e.g. params.eps (got '" + key + "')");
  }
  const auto vals = split_values(values);
  if (vals.empty()) throw lamina::ValidationError("--values needs at least one value");
  lamina::detail::prepare_output_dir(base.out);
  const auto table_path = std::filesystem::path(base.out) / "sweep.csv";
  auto table = lamina::detail::open_table(table_path, "key,value,failed,claim_id,checks,worst_margin");
  for (std::size_t i = 0; i < vals.size(); ++i) {
    lamina::RunConfig cfg = base;
    nlohmann::json patch;
    patch[key.substr(0, dot)][key.substr(dot + 1)] = lamina::toml::Parser(vals[i], "--values").parse_value();
    lamina::apply_config(cfg, patch);
    cfg.out = (std::filesystem::path(base.out) / ("run_" + std::to_string(i))).string();
    std::cout << "== " << key << " = " << vals[i] << " -> " << cfg.out << '\n';
    lamina::PipelineResult res;
    try {
      res = lamina::run_pipeline(cfg, std::cout);
    } catch (const lamina::ValidationError& e) {
      // An invalid point is a sweep result, not a reason to stop.
      std::cerr << "lamina: " << key << " = " << vals[i] << ": " << e.what() << '\n';
      table << key << ',' << vals[i] << ",,invalid_config,0,nan\n";
      continue;
    }
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::size_t, double>> worst;
    for (const auto& e : res.report.entries()) {
      auto [it, fresh] = worst.try_emplace(e.claim_id, 0, INFINITY);
      if (fresh) order.push_back(e.claim_id);
      ++it->second.first;
      it->second.second = std::min(it->second.second, e.margin);
    }
    for (const auto& id : order) {
      table << key << ',' << vals[i] << ',' << res.failed << ',' << id << ',' << worst[id].first << ','
            << lamina::fmt_double(worst[id].second) << '\n';
    }
  }
  lamina::detail::close_table(table, table_path);
  std::cout << "wrote " << table_path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construct the minimal disks Sigma_k over a compact set M and certify their properties."};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "config file (TOML subset)")->check(CLI::ExistingFile);
    sub->add_option("--k", flags.k, "levels K: meshes and certificates for k = 0..K")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--certificates", flags.certificates,
                    "comma-separated certificate list, 'all' or 'none'");
    sub->add_option("--seed", flags.seed, "seed for sampled certificates");
  };

  auto* build = app.add_subcommand("build", "write nets, traces and meshes for k = 0..K");
  auto* verify = app.add_subcommand("verify", "build, then run the selected certificates");
  auto* sweep = app.add_subcommand("sweep", "rerun verify for each value of one config key");
  add_common(build);
  add_common(verify);
  add_common(sweep);
  std::string vary, values;
  sweep->add_option("--vary", vary, "key to vary, TABLE.KEY (e.g. params.eps)")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const lamina::RunConfig cfg = resolve(flags);
    if (*build) {
      lamina::run_pipeline(cfg, std::cout, true);
      std::cout << "wrote " << cfg.out << '\n';
      return 0;
    }
    if (*verify) {
      const auto res = lamina::run_pipeline(cfg, std::cout);
      std::cout << "wrote " << cfg.out << '\n';
      return exit_code(res.failed);
    }
    return run_sweep(cfg, vary, values);
  } catch (const lamina::Error& e) {
    std::cerr << "lamina: " << e.what() << '\n';
    return kErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "lamina: unexpected failure: " << e.what() << '\n';
    return kErrorExit;
  }
}

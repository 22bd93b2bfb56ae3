#include <catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <lamina/config.hpp>

using namespace lamina;

namespace {

std::vector<char*> env_block(std::vector<std::string>& storage) {
  std::vector<char*> out;
  for (auto& s : storage) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

}  // namespace

TEST_CASE("parser reads tables, scalars, arrays and comments") {
  const auto doc = toml::parse(R"(
# experiment
[set]
kind = "intervals"   # two pieces
intervals = [[0.0, 0.25], [0.75, 1.0],]

[params]
eps = 0.04
alpha = 30
[run]
out = "a # not a comment"
mesh_formats = ["ply"]
[grid]
mirror = false
max_points = 1_000_000
)");
  CHECK(doc["set"]["intervals"][1][0].get<double>() == 0.75);
  CHECK(doc["params"]["alpha"].is_number_integer());
  CHECK(doc["run"]["out"] == "a # not a comment");
  CHECK(doc["grid"]["mirror"] == false);
  CHECK(doc["grid"]["max_points"] == 1000000);

  RunConfig cfg;
  apply_config(cfg, doc);
  const auto* u = std::get_if<IntervalUnion>(&cfg.set);
  REQUIRE(u);
  CHECK(u->pieces.size() == 2);
  CHECK(cfg.params.eps == 0.04);
  CHECK(cfg.params.alpha == 30.0);  // integers are accepted for real keys
  CHECK(cfg.mesh_formats == std::vector<std::string>{"ply"});
  CHECK_FALSE(cfg.mirror);
  CHECK(cfg.max_points == 1'000'000);
}

TEST_CASE("parser errors carry the line number") {
  CHECK_THROWS_WITH(toml::parse("[a]\nx = \n", "f.toml"), Catch::Matchers::ContainsSubstring("f.toml:2"));
  CHECK_THROWS_AS(toml::parse("x = [1, 2"), ValidationError);
  CHECK_THROWS_AS(toml::parse("x = 1 2"), ValidationError);
  CHECK_THROWS_AS(toml::parse("x = 1\nx = 2"), ValidationError);
  CHECK_THROWS_AS(toml::parse("[t]\n[t]"), ValidationError);
  CHECK_THROWS_AS(toml::parse("x = \"open"), ValidationError);
  CHECK_THROWS_AS(toml::parse_file("/nonexistent/lamina.toml"), IoError);
}

TEST_CASE("unknown keys and wrong types are rejected") {
  RunConfig cfg;
  CHECK_THROWS_WITH(apply_config(cfg, toml::parse("[params]\nepsilon = 0.1")),
                    Catch::Matchers::ContainsSubstring("params.epsilon"));
  CHECK_THROWS_AS(apply_config(cfg, toml::parse("[nope]\nx = 1")), ValidationError);
  CHECK_THROWS_AS(apply_config(cfg, toml::parse("[run]\nlevels = 1.5")), ValidationError);
  CHECK_THROWS_AS(apply_config(cfg, toml::parse("[run]\nseed = -1")), ValidationError);
  CHECK_THROWS_AS(apply_config(cfg, toml::parse("[grid]\nmirror = 1")), ValidationError);
  CHECK_THROWS_AS(apply_config(cfg, toml::parse("[set]\nkind = \"blob\"")), ValidationError);
  CHECK_THROWS_AS(apply_config(cfg, toml::parse("[set]\npoints = [0.5]")), ValidationError);
}

TEST_CASE("set kinds") {
  RunConfig cfg;
  apply_config(cfg, toml::parse("[set]\nkind = \"cantor\"\ndepth = 4"));
  REQUIRE(std::holds_alternative<CantorSpec>(cfg.set));
  CHECK(std::get<CantorSpec>(cfg.set).depth == 4);
  CHECK(materialize_set(cfg.set).pieces().size() == 16);

  apply_config(cfg, toml::parse("[set]\nkind = \"points\"\npoints = [0, 0.5, 1]"));
  CHECK(materialize_set(cfg.set).pieces().size() == 3);
}

TEST_CASE("validation names the failed inequality") {
  RunConfig cfg;
  cfg.params.mu = cfg.params.gamma;
  CHECK_THROWS_WITH(validate_config(cfg), Catch::Matchers::ContainsSubstring("must satisfy μ^{2/3} < γ < μ < γ³"));

  RunConfig bad_cert;
  bad_cert.certificates = {"radius", "teleport"};
  CHECK_THROWS_WITH(validate_config(bad_cert), Catch::Matchers::ContainsSubstring("teleport"));

  RunConfig bad_format;
  bad_format.mesh_formats = {"stl"};
  CHECK_THROWS_AS(validate_config(bad_format), ValidationError);

  RunConfig bad_set;
  bad_set.set = PointList{{0.5, 0.25}};
  CHECK_THROWS_AS(validate_config(bad_set), ValidationError);

  RunConfig bad_cauchy;
  bad_cauchy.cauchy_to = bad_cauchy.cauchy_from;
  CHECK_THROWS_AS(validate_config(bad_cauchy), ValidationError);

  CHECK_NOTHROW(validate_config(RunConfig{}));
}

TEST_CASE("environment overrides apply after the file") {
  std::vector<std::string> vars{"LAMINATION_RUN_LEVELS=5", "LAMINATION_PARAMS_EPS=0.03", "LAMINATION_RUN_OUT=plain text",
                                "LAMINATION_CERTIFICATES_ENABLED=[\"nets\"]", "UNRELATED=1"};
  auto env = env_block(vars);
  const auto doc = environment_overrides(env.data());
  CHECK(doc["run"]["levels"] == 5);
  CHECK(doc["run"]["out"] == "plain text");

  RunConfig cfg;
  apply_config(cfg, toml::parse("[run]\nlevels = 2\n[params]\neps = 0.05"));
  apply_config(cfg, doc);
  CHECK(cfg.levels == 5);
  CHECK(cfg.params.eps == 0.03);
  CHECK(cfg.certificates == std::vector<std::string>{"nets"});

  std::vector<std::string> malformed{"LAMINATION_LEVELS=3"};
  auto env2 = env_block(malformed);
  CHECK_THROWS_AS(environment_overrides(env2.data()), ValidationError);
}

TEST_CASE("certificate lists") {
  CHECK(parse_certificate_list("all") == certificate_names());
  CHECK(parse_certificate_list("none").empty());
  CHECK(parse_certificate_list("").empty());
  CHECK(parse_certificate_list(" radius, spiral ") == std::vector<std::string>{"radius", "spiral"});
}

TEST_CASE("serialized config reloads to the same values") {
  RunConfig cfg;
  cfg.set = CantorSpec{5, 0.25};
  cfg.params.eps = 0.02;
  cfg.levels = 3;
  cfg.certificates = {"nets", "bounded"};
  const auto j = config_to_json(cfg);

  RunConfig back;
  apply_config(back, j);
  CHECK(config_to_json(back) == j);
}

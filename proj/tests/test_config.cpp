#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergo/config.hpp"
#include "ergo/experiments.hpp"

using namespace ergo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ergo_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* minimal = R"(system:
  base: {builder: doubling}
  fiber: {builder: affine, alpha: 0.5, c: 0.0}
  potential: {kind: constant, value: 0.0, epsilon_phi: 0.1}
  grid: 128
experiment:
  kind: spectrum
)";

}  // namespace

TEST_CASE("shipped configs round trip") {
  int count = 0;
  for (auto& e : fs::directory_iterator(ERGO_CONFIG_DIR)) {
    if (e.path().extension() != ".yaml") continue;
    INFO(e.path().string());
    auto cfg = load_config(e.path().string());
    auto text = to_yaml(cfg);
    auto again = parse_config(text);
    CHECK(again == cfg);
    CHECK(to_yaml(again) == text);
    ++count;
  }
  CHECK(count >= 12);
}

TEST_CASE("defaults and hash") {
  auto cfg = parse_config(minimal);
  CHECK(cfg.system.grid == 128);
  CHECK(cfg.system.zeta == 1.0);
  CHECK(cfg.experiment.kind == "spectrum");
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("unknown key reports its position") {
  std::string text = std::string(minimal) + "  bogus: 3\n";
  try {
    parse_config(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(e.line == 7);
    CHECK(e.column == 2);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("type and choice errors") {
  std::string bad_grid = minimal;
  bad_grid.replace(bad_grid.find("128"), 3, "abc");
  CHECK_THROWS_AS(parse_config(bad_grid), config_error);
  std::string bad_kind = minimal;
  bad_kind.replace(bad_kind.find("spectrum"), 8, "nonsense");
  CHECK_THROWS_AS(parse_config(bad_kind), config_error);
  CHECK_THROWS_AS(parse_config("system: [1, 2]\n"), config_error);
  CHECK_THROWS_AS(parse_config("experiment: {kind: spectrum}\n"), config_error);
}

TEST_CASE("spectrum run on the doubling map") {
  auto cfg = load_config(std::string(ERGO_CONFIG_DIR) + "/spectrum_doubling.yaml");
  auto out = scratch("spectrum");
  auto rec = run_experiment(cfg, out.string(), 1);
  CHECK(rec.exit_code() == 0);
  CHECK(rec.metrics["lambda"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fs::exists(out / "result.json"));
  CHECK(fs::exists(out / "eigendata.csv"));
  CHECK(fs::exists(out / "resolved_config.yaml"));
  CHECK(parse_config(slurp(out / "resolved_config.yaml")) == cfg);
  auto header = slurp(out / "eigendata.csv").substr(0, 12);
  CHECK(header == "i,x,h,nu,m\r\n");
  fs::remove_all(out);
}

TEST_CASE("constant stability family runs clean") {
  auto cfg = load_config(std::string(ERGO_CONFIG_DIR) + "/stability_constant.yaml");
  cfg.system.grid = 64;
  cfg.system.fiber_bins = 128;
  auto out = scratch("stability");
  auto rec = run_experiment(cfg, out.string(), 1);
  CHECK(rec.exit_code() == 0);
  CHECK(rec.violations.empty());
  fs::remove_all(out);
}

TEST_CASE("gap violation is a hypothesis violation") {
  auto cfg = load_config(std::string(ERGO_CONFIG_DIR) + "/verify_q_violation.yaml");
  auto out = scratch("violation");
  auto rec = run_experiment(cfg, out.string(), 1);
  CHECK(rec.exit_code() == 2);
  bool named = false;
  for (auto& v : rec.violations) named = named || v.find("(f2)") != std::string::npos;
  CHECK(named);
  cfg.experiment.kind = "spectrum";
  auto rec2 = run_experiment(cfg, out.string(), 1);
  CHECK(rec2.exit_code() == 2);
  fs::remove_all(out);
}

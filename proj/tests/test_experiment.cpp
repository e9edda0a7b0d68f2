#include "upress/experiment.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace upress;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "upress_unit" / name;
  fs::remove_all(dir);
  return dir;
}

RunConfig small(const std::string& preset_name, const std::string& dir) {
  auto c = preset(preset_name);
  c.pressure.n_max = 6;
  c.output_dir = scratch(dir).string();
  return c;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("exit codes by error class") {
    CHECK(exit_code_for(ErrorCode::Config) == ExitCode::Usage);
    CHECK(exit_code_for(ErrorCode::NotProbability) == ExitCode::Usage);
    CHECK(exit_code_for(ErrorCode::UnderResolved) == ExitCode::Refused);
    CHECK(exit_code_for(ErrorCode::TooLarge) == ExitCode::Refused);
    CHECK(exit_code_for(ErrorCode::CheckFailed) == ExitCode::CheckFailed);
    CHECK(exit_code_for(ErrorCode::Io) == ExitCode::Internal);
  }

  TEST_CASE("csv quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  }

  TEST_CASE("estimate writes a table and a report") {
    const auto c = small("catrot-entropy", "estimate");
    const auto out = run_estimate(c);
    REQUIRE(out.code == ExitCode::Ok);
    REQUIRE(out.estimate.has_value());
    const auto report = json::parse(slurp(fs::path(c.output_dir) / "report.json"));
    CHECK(report["schema_version"] == 1);
    CHECK(report["status"] == "ok");
    CHECK(report["config"]["name"] == "catrot-entropy");
    const auto csv = slurp(fs::path(c.output_dir) / "table.csv");
    CHECK(csv.rfind("schema_version,n,epsilon,m,logP,logQ,logGreedy\n", 0) == 0);
    // One line per (n, eps) row plus the header.
    const auto lines = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == 1 + c.pressure.epsilons.size() * static_cast<std::size_t>(c.pressure.n_max - c.pressure.n_min + 1));
  }

  TEST_CASE("runs are byte-identical for a fixed seed") {
    auto a = small("catrot-cocycle-line", "det_a");
    a.pressure.jobs = 1;
    auto b = a;
    b.output_dir = scratch("det_b").string();
    b.pressure.jobs = 3;
    REQUIRE(run_estimate(a).code == ExitCode::Ok);
    REQUIRE(run_estimate(b).code == ExitCode::Ok);
    CHECK(slurp(fs::path(a.output_dir) / "table.csv") == slurp(fs::path(b.output_dir) / "table.csv"));
    // The echoed config differs only in the output directory and jobs; compare everything else.
    auto ra = json::parse(slurp(fs::path(a.output_dir) / "report.json"));
    auto rb = json::parse(slurp(fs::path(b.output_dir) / "report.json"));
    ra.erase("config");
    rb.erase("config");
    CHECK(ra == rb);

    auto o1 = small("oracle", "oracle_a");
    o1.oracle.instances = 30;
    auto o2 = o1;
    o2.output_dir = scratch("oracle_b").string();
    REQUIRE(run_oracle(o1).code == ExitCode::Ok);
    REQUIRE(run_oracle(o2).code == ExitCode::Ok);
    auto j1 = json::parse(slurp(fs::path(o1.output_dir) / "oracle.json"));
    auto j2 = json::parse(slurp(fs::path(o2.output_dir) / "oracle.json"));
    j1.erase("config");
    j2.erase("config");
    CHECK(j1 == j2);
  }

  TEST_CASE("refusals become error.json") {
    auto c = small("catrot-entropy", "refuse");
    c.pressure.n_max = 20;
    c.pressure.epsilons = {1e-4};
    const auto out = run_estimate(c);
    CHECK(out.code == ExitCode::Refused);
    CHECK(out.reason == "under-resolved");
    CHECK_FALSE(out.estimate.has_value());
    const auto err = json::parse(slurp(fs::path(c.output_dir) / "error.json"));
    CHECK(err["status"] == "error");
    CHECK(err["exit_code"] == 3);
    CHECK(err["reason"] == "under-resolved");
    CHECK_FALSE(fs::exists(fs::path(c.output_dir) / "report.json"));
  }

  TEST_CASE("invalid configs are usage errors") {
    auto c = small("catrot-entropy", "invalid");
    c.pressure.delta = 0.5;
    const auto out = run_estimate(c);
    CHECK(out.code == ExitCode::Usage);
    CHECK(out.reason == "config-invalid");
    CHECK(out.message.find("pressure.delta") != std::string::npos);

    auto s = small("catrot-cocycle-line", "empty_sweep");
    s.sweep.values.clear();
    CHECK(run_sweep(s).code == ExitCode::Usage);

    auto m = small("catrot-entropy", "magnitude_sweep");
    m.sweep.axis = "magnitude";
    m.sweep.values = {0.0};
    CHECK(run_sweep(m).code == ExitCode::Usage);
  }

  TEST_CASE("registries follow the config") {
    VerifySpec v;
    v.registry = {"haar"};
    CHECK(build_registry(cat_rotation(), v, 1).size() == 1);
    v.registry = {"haar", "fixed-point"};
    const auto r = build_registry(cat_rotation(), v, 1);
    REQUIRE(r.size() == 2);
    CHECK(r[1].kind == MeasureKind::CenterCircle);
    CHECK(build_registry(cat_rotation(), v, 1).front().seed == r.front().seed);
  }

  TEST_CASE("the oracle suite agrees with enumeration") {
    const auto run = oracle_suite(cat_rotation(), TorusPoint{0.3, 0.2, 0.1}, 0.1, 60, 16, 9);
    CHECK(run.instances == 60);
    CHECK(run.pass);
    CHECK(run.max_defect <= 1e-9);
  }
}

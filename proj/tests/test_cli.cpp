#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "flowplan/common.hpp"
#include "flowplan/profiles_json.hpp"

using namespace flowplan;
namespace fs = std::filesystem;

static const fs::path kData = FLOWPLAN_DATA_DIR;
static const std::string kBin = FLOWPLAN_BIN;

namespace {

int run(const std::string& args) {
  const int rc = std::system((kBin + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("validate resolves and type-checks the video QA spec") {
  const fs::path out = fresh_dir("flowplan_cli_validate");
  const int rc = run("validate --spec " + (kData / "video_qa.json").string() + " --catalog " +
                     (kData / "executors.json").string() + " --out " + out.string());
  CHECK(rc == 0);
  CHECK(fs::exists(out / "video_qa.dag.json"));
  CHECK(fs::exists(out / "manifest.json"));

  const json dag = detail::parse_json_file(out / "video_qa.dag.json");
  CHECK(dag.at("nodes").size() == 4);
  CHECK(dag.at("edges").size() == 4);
}

TEST_CASE("validate accepts the DSL form") {
  const fs::path out = fresh_dir("flowplan_cli_validate_dsl");
  const int rc = run("validate --spec " + (kData / "video_qa.flow").string() + " --catalog " +
                     (kData / "executors.json").string() + " --out " + out.string());
  CHECK(rc == 0);
}

TEST_CASE("unknown flags are a usage error") {
  CHECK(run("validate --nonsense") == 1);
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("a broken spec maps to the input-validation exit code") {
  const fs::path out = fresh_dir("flowplan_cli_badspec");
  const fs::path bad = out / "bad.json";
  atomic_write_file(bad, R"({"workflow":"w","tasks":[]})");
  const int rc = run("validate --spec " + bad.string() + " --catalog " +
                     (kData / "executors.json").string() + " --out " + out.string());
  CHECK(rc == 4);
}

TEST_CASE("plan solves a zero-demand instance with exit 0") {
  const fs::path out = fresh_dir("flowplan_cli_plan0");
  const fs::path inst = out / "instance.json";
  atomic_write_file(inst, R"({
    "models": ")" + (kData / "models.json").string() + R"(",
    "workflows": ")" + (kData / "workflows.json").string() + R"(",
    "resources": [{"name":"A100","cost_per_unit_second":0.0006,"capacity":100},
                  {"name":"H100","cost_per_unit_second":0.0018,"capacity":100}],
    "objective": "min_energy",
    "demand": [{"workflow":"video_qa","slo":{"type":"accuracy","tier":"good"},"peak":0,"avg":0}]
  })");
  const int rc = run("plan --instance " + inst.string() + " --out " + out.string());
  CHECK(rc == 0);
  REQUIRE(fs::exists(out / "plan.json"));
  const json plan = detail::parse_json_file(out / "plan.json");
  CHECK(plan.at("status") == "optimal");
  CHECK(plan.at("objective_value").get<double>() == 0.0);
}

TEST_CASE("plan with zero budgets and positive demand exits 2") {
  const fs::path out = fresh_dir("flowplan_cli_plan_infeasible");
  const fs::path inst = out / "instance.json";
  atomic_write_file(inst, R"({
    "models": ")" + (kData / "models.json").string() + R"(",
    "workflows": ")" + (kData / "workflows.json").string() + R"(",
    "resources": [{"name":"A100","cost_per_unit_second":0.0006,"capacity":0},
                  {"name":"H100","cost_per_unit_second":0.0018,"capacity":0}],
    "objective": "min_cost",
    "demand": [{"workflow":"video_qa","slo":{"type":"accuracy","tier":"good"},"peak":1,"avg":0.5}]
  })");
  CHECK(run("plan --instance " + inst.string() + " --out " + out.string()) == 2);
}

TEST_CASE("gen-trace is idempotent per seed") {
  const fs::path out = fresh_dir("flowplan_cli_gentrace");
  const std::string a = (out / "a.csv").string();
  const std::string b = (out / "b.csv").string();
  const std::string args = " --duration 7200 --resolution 60 --seed 11 --noise 0.1"
                           " --workflows video_qa,code_gen";
  CHECK(run("gen-trace --out " + a + args) == 0);
  CHECK(run("gen-trace --out " + b + args) == 0);
  CHECK(read_file(a) == read_file(b));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("simulate and report produce timeline and summary artifacts") {
  const fs::path out = fresh_dir("flowplan_cli_sim");
  const std::string trace = (out / "trace.csv").string();
  REQUIRE(run("gen-trace --out " + trace +
              " --duration 7200 --resolution 60 --seed 3 --base-rate 0.4"
              " --workflows video_qa") == 0);
  const int rc = run("simulate --trace " + trace + " --profiles " + kData.string() +
                     " --policy opt-mult --objective cost --epoch-seconds 3600 --out " +
                     out.string());
  CHECK(rc == 0);
  REQUIRE(fs::exists(out / "metrics.json"));
  REQUIRE(fs::exists(out / "timeline.csv"));

  const fs::path rep = fresh_dir("flowplan_cli_report");
  CHECK(run("report --metrics " + (out / "metrics.json").string() + " --format both --out " +
            rep.string()) == 0);
  CHECK(fs::exists(rep / "timeline.csv"));
  CHECK(fs::exists(rep / "summary.txt"));

  // Totals row equals the column sums.
  const std::string csv = read_file(rep / "timeline.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const auto header = split(line, ',');
  size_t energy_col = 0;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == "energy_kwh") energy_col = i;
  REQUIRE(energy_col > 0);
  double sum = 0.0, total = -1.0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f[0] == "total")
      total = std::stod(f[energy_col]);
    else
      sum += std::stod(f[energy_col]);
  }
  CHECK_THAT(total, Catch::Matchers::WithinRel(sum, 1e-9));
}

TEST_CASE("report on empty metrics writes a header-only timeline") {
  const fs::path out = fresh_dir("flowplan_cli_report_empty");
  const fs::path metrics = out / "metrics.json";
  atomic_write_file(metrics, R"({"epochs":[],
    "totals":{"gpus_by_type":{},"energy_kwh":0,"cost":0,"violations":0,"dropped":0},
    "under_prediction_fraction":0,"mean_utilization":0})");
  CHECK(run("report --metrics " + metrics.string() + " --format csv --out " + out.string()) == 0);
  const std::string csv = read_file(out / "timeline.csv");
  CHECK(csv.find("epoch,gpus_A100,gpus_H100,gpus_CPU") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("outputs land only in the requested directory with a manifest") {
  const fs::path out = fresh_dir("flowplan_cli_manifest");
  const fs::path inst = out / "instance.json";
  atomic_write_file(inst, R"({
    "models": ")" + (kData / "models.json").string() + R"(",
    "workflows": ")" + (kData / "workflows.json").string() + R"(",
    "resources": [{"name":"A100","cost_per_unit_second":0.0006,"capacity":100},
                  {"name":"H100","cost_per_unit_second":0.0018,"capacity":100}],
    "demand": [{"workflow":"video_qa","slo":{"type":"accuracy","tier":"basic"},"peak":0.5,"avg":0.25}]
  })");
  REQUIRE(run("plan --instance " + inst.string() + " --out " + out.string()) == 0);
  const json manifest = detail::parse_json_file(out / "manifest.json");
  CHECK(manifest.at("command") == "plan");
  CHECK(manifest.at("inputs").size() >= 1);
  for (const auto& o : manifest.at("outputs")) {
    const fs::path p = o.get<std::string>();
    CHECK(p.parent_path() == out);
    CHECK(fs::exists(p));
  }
}

TEST_CASE("plan runs are idempotent for identical inputs") {
  const fs::path out1 = fresh_dir("flowplan_cli_idem1");
  const fs::path out2 = fresh_dir("flowplan_cli_idem2");
  const fs::path inst = out1 / "instance.json";
  atomic_write_file(inst, R"({
    "models": ")" + (kData / "models.json").string() + R"(",
    "workflows": ")" + (kData / "workflows.json").string() + R"(",
    "resources": [{"name":"A100","cost_per_unit_second":0.0006,"capacity":200},
                  {"name":"H100","cost_per_unit_second":0.0018,"capacity":100}],
    "objective": "min_cost",
    "demand": [{"workflow":"code_gen","slo":{"type":"accuracy","tier":"fair"},"peak":1.5,"avg":1.0}]
  })");
  REQUIRE(run("plan --instance " + inst.string() + " --out " + out1.string()) == 0);
  REQUIRE(run("plan --instance " + inst.string() + " --out " + out2.string()) == 0);
  CHECK(read_file(out1 / "plan.json") == read_file(out2 / "plan.json"));
}

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <functional>
#include <random>
#include <set>

#include "flowplan/compiler.hpp"

using namespace flowplan;
namespace fs = std::filesystem;

static const fs::path kData = FLOWPLAN_DATA_DIR;

namespace {

std::vector<ExecutorCatalogEntry> catalog() {
  return load_executor_catalog(kData / "executors.json");
}

ProfileStore store_with(std::vector<ModelProfile> models) {
  return ProfileStore(std::move(models), {}, {});
}

ModelProfile gemma_like(const std::string& name, double theta, double ttft, double tpot) {
  ModelProfile m;
  m.model_name = name;
  m.resource_type = "A100";
  m.parallelism = 4;
  m.load_curve = {{0.0, ttft / 2, tpot / 2, 200.0}, {theta, ttft, tpot, 400.0}};
  m.sustainable_tps = theta;
  m.energy_rate = 0.4;
  return m;
}

}  // namespace

TEST_CASE("the 4-task video QA spec parses with 4 tasks and 4 dependency edges") {
  DeclarativeSpec spec = parse_spec(read_file(kData / "video_qa.json"));
  CHECK(spec.workflow_name == "video_qa");
  REQUIRE(spec.tasks.size() == 4);
  LogicalWorkflow wf = resolve_executors(spec, catalog());
  CHECK(wf.nodes.size() == 4);
  CHECK(wf.edges.size() == 4);
}

TEST_CASE("the DSL form parses to the same spec as the JSON form") {
  DeclarativeSpec a = parse_spec(read_file(kData / "video_qa.json"));
  DeclarativeSpec b = parse_spec(read_file(kData / "video_qa.flow"));
  CHECK(serialize_spec(a) == serialize_spec(b));
}

TEST_CASE("parse errors: empty tasks, self-loop, duplicates, dangling refs") {
  CHECK_THROWS_WITH(parse_spec(R"({"workflow":"w","tasks":[]})"),
                    Catch::Matchers::ContainsSubstring("no tasks"));
  CHECK_THROWS_WITH(
      parse_spec(R"({"workflow":"w","tasks":[{"id":"a","description":"x","inputs":["a"]}]})"),
      Catch::Matchers::ContainsSubstring("cycle"));
  CHECK_THROWS_WITH(parse_spec(R"({"workflow":"w","tasks":[
        {"id":"a","description":"x"},{"id":"a","description":"y"}]})"),
                    Catch::Matchers::ContainsSubstring("duplicate task_id"));
  CHECK_THROWS_WITH(
      parse_spec(R"({"workflow":"w","tasks":[{"id":"a","description":"x","inputs":["ghost"]}]})"),
      Catch::Matchers::ContainsSubstring("dangling input reference"));
  // Two-node cycle.
  CHECK_THROWS_WITH(parse_spec(R"({"workflow":"w","tasks":[
        {"id":"a","description":"x","inputs":["b"]},
        {"id":"b","description":"y","inputs":["a"]}]})"),
                    Catch::Matchers::ContainsSubstring("cycle"));
}

TEST_CASE("DSL errors carry line numbers") {
  try {
    parse_spec("workflow w\ntask broken_line_without_description <- x\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("alias phrases steer executor resolution") {
  DeclarativeSpec spec;
  spec.workflow_name = "w";
  spec.tasks = {{"t", "Given a list of scenes, convert audio to text.", {}, {}}};
  LogicalWorkflow wf = resolve_executors(spec, catalog());
  CHECK(wf.nodes[0].executor_name == "speech_to_text");
}

TEST_CASE("an executor constraint pins the choice regardless of score") {
  DeclarativeSpec spec;
  spec.workflow_name = "w";
  spec.tasks = {{"t", "Given a list of scenes, convert audio to text.", {},
                 {{"executor", "frame_extractor"}}}};
  LogicalWorkflow wf = resolve_executors(spec, catalog());
  CHECK(wf.nodes[0].executor_name == "frame_extractor");
}

TEST_CASE("a task nobody matches is an unresolved-task error naming it") {
  DeclarativeSpec spec;
  spec.workflow_name = "w";
  spec.tasks = {{"weird", "fold proteins", {}, {}}};
  try {
    resolve_executors(spec, catalog());
    FAIL("expected unresolved-task error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("weird") != std::string::npos);
    CHECK(std::string(e.what()).find("onboard") != std::string::npos);
  }
}

TEST_CASE("resolution is deterministic") {
  DeclarativeSpec spec = parse_spec(read_file(kData / "verify_video_code.json"));
  LogicalWorkflow a = resolve_executors(spec, catalog());
  LogicalWorkflow b = resolve_executors(spec, catalog());
  CHECK(serialize_workflow(a) == serialize_workflow(b));
}

TEST_CASE("type_check passes the resolved video QA workflow") {
  DeclarativeSpec spec = parse_spec(read_file(kData / "video_qa.json"));
  LogicalWorkflow wf = resolve_executors(spec, catalog());
  CHECK(type_check(wf, catalog()).empty());
}

TEST_CASE("type_check flags a text edge into a frame consumer") {
  LogicalWorkflow wf;
  wf.workflow_name = "w";
  wf.nodes = {{"stt", "speech_to_text"}, {"od", "object_detector"}};
  wf.edges = {{"stt", "od", DataType::text}};
  auto errors = type_check(wf, catalog());
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].expected == "frame");
  CHECK(errors[0].found == "text");
}

TEST_CASE("type_check on an empty workflow is a vacuous pass") {
  LogicalWorkflow wf;
  wf.workflow_name = "w";
  CHECK(type_check(wf, catalog()).empty());
}

TEST_CASE("critical path: parallel branches overlap, sink adds") {
  LogicalWorkflow wf;
  wf.workflow_name = "w";
  wf.nodes = {{"a", "x"}, {"b", "x"}, {"sink", "x"}};
  wf.edges = {{"a", "sink", DataType::text}, {"b", "sink", DataType::text}};
  ProfileStore store = store_with({});
  std::map<std::string, NodeBinding> bindings = {
      {"a", ToolBinding{"CPU", 10.0, 1}},
      {"b", ToolBinding{"CPU", 12.0, 1}},
      {"sink", ToolBinding{"CPU", 5.0, 1}},
  };
  CHECK_THAT(critical_path_latency(wf, bindings, Pct::p95, store),
             Catch::Matchers::WithinAbs(17.0, 1e-12));
}

TEST_CASE("critical path of a single node is its latency") {
  LogicalWorkflow wf;
  wf.workflow_name = "w";
  wf.nodes = {{"only", "x"}};
  ProfileStore store = store_with({});
  std::map<std::string, NodeBinding> bindings = {{"only", ToolBinding{"CPU", 3.0, 1}}};
  CHECK_THAT(critical_path_latency(wf, bindings, Pct::p95, store),
             Catch::Matchers::WithinAbs(3.0, 1e-12));
}

TEST_CASE("unbound node is an error") {
  LogicalWorkflow wf;
  wf.workflow_name = "w";
  wf.nodes = {{"a", "x"}};
  ProfileStore store = store_with({});
  CHECK_THROWS_WITH(critical_path_latency(wf, {}, Pct::p95, store),
                    Catch::Matchers::ContainsSubstring("unbound node"));
}

TEST_CASE("critical path equals exhaustive path enumeration on random DAGs") {
  std::mt19937_64 rng(5150);
  ProfileStore store = store_with({});
  for (int iter = 0; iter < 40; ++iter) {
    const int n = 2 + static_cast<int>(rng() % 11);  // up to 12 nodes
    LogicalWorkflow wf;
    wf.workflow_name = "w";
    std::vector<double> lat(static_cast<size_t>(n));
    std::map<std::string, NodeBinding> bindings;
    for (int i = 0; i < n; ++i) {
      const std::string id = "n" + std::to_string(i);
      wf.nodes.push_back({id, "x"});
      lat[static_cast<size_t>(i)] = 1.0 + static_cast<double>(rng() % 100) / 10.0;
      bindings[id] = ToolBinding{"CPU", lat[static_cast<size_t>(i)], 1};
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng() % 3 == 0)
          wf.edges.push_back({"n" + std::to_string(i), "n" + std::to_string(j), DataType::text});

    // Oracle: longest path by DFS enumeration over all paths.
    std::map<std::string, std::vector<std::string>> out;
    std::set<std::string> has_incoming;
    for (const auto& e : wf.edges) {
      out[e.from].push_back(e.to);
      has_incoming.insert(e.to);
    }
    double best = 0.0;
    std::function<void(const std::string&, double)> dfs = [&](const std::string& id, double acc) {
      const double total = acc + lat[static_cast<size_t>(std::stoi(id.substr(1)))];
      best = std::max(best, total);
      for (const auto& nxt : out[id]) dfs(nxt, total);
    };
    for (const auto& node : wf.nodes)
      if (!has_incoming.count(node.task_id)) dfs(node.task_id, 0.0);

    CHECK_THAT(critical_path_latency(wf, bindings, Pct::p95, store),
               Catch::Matchers::WithinAbs(best, 1e-9));
  }
}

TEST_CASE("llm node latency uses the bound model's load point") {
  LogicalWorkflow wf;
  wf.workflow_name = "w";
  wf.nodes = {{"llm", "x"}};
  ProfileStore store = store_with({gemma_like("g", 700.0, 0.2, 0.06)});
  std::map<std::string, NodeBinding> bindings = {
      {"llm", LlmBinding{"g@A100/tp4", {100, 200, 300, 120}, -1.0}}};
  CHECK_THAT(critical_path_latency(wf, bindings, Pct::p95, store),
             Catch::Matchers::WithinAbs(0.2 + 200 * 0.06, 1e-9));
  CHECK_THAT(critical_path_latency(wf, bindings, Pct::p99, store),
             Catch::Matchers::WithinAbs(0.2 + 300 * 0.06, 1e-9));
}

TEST_CASE("bound_units_by_resource counts shared llm instances once") {
  LogicalWorkflow wf;
  wf.workflow_name = "w";
  wf.nodes = {{"a", "x"}, {"b", "x"}, {"t", "x"}};
  wf.edges = {{"a", "b", DataType::text}, {"t", "b", DataType::text}};
  ProfileStore store = store_with({gemma_like("g", 700.0, 0.2, 0.06)});
  std::map<std::string, NodeBinding> bindings = {
      {"a", LlmBinding{"g@A100/tp4", {100, 200, 300, 120}, -1.0}},
      {"b", LlmBinding{"g@A100/tp4", {50, 60, 70, 55}, -1.0}},
      {"t", ToolBinding{"A100", 2.0, 1}},
  };
  auto units = bound_units_by_resource(wf, bindings, store);
  CHECK(units["A100"] == 5);  // 4 (one gemma instance) + 1 tool unit
}

TEST_CASE("parse-serialize-parse is identity on valid specs") {
  for (const char* file : {"video_qa.json", "verify_video_code.json"}) {
    DeclarativeSpec spec = parse_spec(read_file(kData / file));
    const std::string once = serialize_spec(spec);
    DeclarativeSpec again = parse_spec(once);
    CHECK(serialize_spec(again) == once);
  }
}

TEST_CASE("multi-sink workflows are rejected at resolution") {
  DeclarativeSpec spec;
  spec.workflow_name = "w";
  spec.external_inputs = {"videos"};
  spec.tasks = {{"a", "Given a list of videos, identify scenes in each.", {"videos"}, {}},
                {"b", "Given a list of scenes, extract frames.", {"a"}, {}},
                {"c", "Given a list of scenes, convert audio to text.", {"a"}, {}}};
  CHECK_THROWS_WITH(resolve_executors(spec, catalog()),
                    Catch::Matchers::ContainsSubstring("single sink"));
}

TEST_CASE("dynamic requests match registered workflows or executors") {
  DeclarativeSpec video = parse_spec(read_file(kData / "video_qa.json"));
  auto cat = catalog();
  RequestMatch m = resolve_request(
      "Identify scenes in the videos, extract key frames, and answer questions about the clip.",
      {video}, cat);
  CHECK(m.is_workflow);
  CHECK(m.name == "video_qa");

  RequestMatch tool = resolve_request("transcribe the audio to text", {}, cat);
  CHECK_FALSE(tool.is_workflow);
  CHECK(tool.name == "speech_to_text");

  CHECK_THROWS_AS(resolve_request("fold proteins", {video}, cat), Error);
}

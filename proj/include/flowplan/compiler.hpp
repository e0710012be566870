#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flowplan/common.hpp"
#include "flowplan/profiles.hpp"
#include "flowplan/profiles_json.hpp"

namespace flowplan {

// Closed data-type vocabulary for typed DAG edges.
enum class DataType { video, scene, frame, audio, text, tokens, code };

inline const char* data_type_name(DataType t) {
  switch (t) {
    case DataType::video: return "video";
    case DataType::scene: return "scene";
    case DataType::frame: return "frame";
    case DataType::audio: return "audio";
    case DataType::text: return "text";
    case DataType::tokens: return "tokens";
    default: return "code";
  }
}

inline DataType parse_data_type(const std::string& s) {
  if (s == "video") return DataType::video;
  if (s == "scene") return DataType::scene;
  if (s == "frame") return DataType::frame;
  if (s == "audio") return DataType::audio;
  if (s == "text") return DataType::text;
  if (s == "tokens") return DataType::tokens;
  if (s == "code") return DataType::code;
  throw ParseError("unknown data type: " + s + " (vocabulary: video, scene, frame, audio, "
                   "text, tokens, code)");
}

enum class ExecutorKind { llm, composition, tool };

inline const char* executor_kind_name(ExecutorKind k) {
  switch (k) {
    case ExecutorKind::llm: return "llm";
    case ExecutorKind::composition: return "composition";
    default: return "tool";
  }
}

inline ExecutorKind parse_executor_kind(const std::string& s) {
  if (s == "llm") return ExecutorKind::llm;
  if (s == "composition") return ExecutorKind::composition;
  if (s == "tool") return ExecutorKind::tool;
  throw ParseError("unknown executor kind: " + s);
}

struct ExecutorCatalogEntry {
  std::string executor_name;
  ExecutorKind kind = ExecutorKind::tool;
  std::string description;
  std::vector<DataType> inputs;
  std::vector<DataType> outputs;
  std::map<std::string, std::string> knobs;
  std::vector<std::string> aliases;
};

inline void validate(const ExecutorCatalogEntry& e) {
  if (e.executor_name.empty()) throw ValidationError("catalog entry with empty name");
  if (e.aliases.empty())
    throw ValidationError("executor " + e.executor_name + ": aliases must be non-empty");
}

struct SpecTask {
  std::string id;
  std::string description;
  std::vector<std::string> inputs;  // prior task ids or external input names
  std::map<std::string, std::string> constraints;
};

struct DeclarativeSpec {
  std::string workflow_name;
  std::vector<std::string> external_inputs;
  std::vector<SpecTask> tasks;

  const SpecTask* find_task(const std::string& id) const {
    for (const auto& t : tasks)
      if (t.id == id) return &t;
    return nullptr;
  }
};

struct LogicalNode {
  std::string task_id;
  std::string executor_name;
};

struct LogicalEdge {
  std::string from;
  std::string to;
  DataType type = DataType::text;
};

// Request-agnostic executor DAG with typed edges.
struct LogicalWorkflow {
  std::string workflow_name;
  std::vector<LogicalNode> nodes;
  std::vector<LogicalEdge> edges;

  const LogicalNode* find_node(const std::string& task_id) const {
    for (const auto& n : nodes)
      if (n.task_id == task_id) return &n;
    return nullptr;
  }
};

struct TypeCheckError {
  LogicalEdge edge;
  std::string expected;
  std::string found;

  std::string to_string() const {
    return "edge " + edge.from + " -> " + edge.to + ": expected " + expected + ", found " + found;
  }
};

// ---------------------------------------------------------------------------
// Spec parsing (JSON and the line-oriented DSL)

namespace detail {

// Cycle/dangling-reference validation shared by both parsers.
inline void validate_spec_structure(const DeclarativeSpec& spec) {
  if (spec.tasks.empty()) throw ParseError("workflow " + spec.workflow_name + ": no tasks");
  std::set<std::string> ids;
  for (const auto& t : spec.tasks) {
    if (t.id.empty()) throw ParseError("task with empty id");
    if (!ids.insert(t.id).second) throw ParseError("duplicate task_id: " + t.id);
  }
  std::set<std::string> externals(spec.external_inputs.begin(), spec.external_inputs.end());
  for (const auto& t : spec.tasks) {
    for (const auto& in : t.inputs) {
      if (!ids.count(in) && !externals.count(in))
        throw ParseError("task " + t.id + ": dangling input reference '" + in + "'");
    }
  }
  // Kahn topological check for cycles over task->task dependencies.
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& t : spec.tasks) indegree[t.id] = 0;
  for (const auto& t : spec.tasks) {
    for (const auto& in : t.inputs) {
      if (!ids.count(in)) continue;
      ++indegree[t.id];
      dependents[in].push_back(t.id);
    }
  }
  std::vector<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push_back(id);
  size_t seen = 0;
  while (!ready.empty()) {
    std::string id = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto& d : dependents[id])
      if (--indegree[d] == 0) ready.push_back(d);
  }
  if (seen != spec.tasks.size()) {
    std::string cyclic;
    for (const auto& [id, deg] : indegree)
      if (deg > 0) cyclic += (cyclic.empty() ? "" : ", ") + id;
    throw ParseError("workflow " + spec.workflow_name + ": dependency cycle involving " + cyclic);
  }
}

inline DeclarativeSpec parse_spec_json(const std::string& source) {
  json root = parse_json_text(source, "spec");
  DeclarativeSpec spec;
  spec.workflow_name = get_string(root, "workflow", "spec");
  if (root.contains("inputs"))
    for (const auto& v : root.at("inputs")) spec.external_inputs.push_back(v.get<std::string>());
  const json& tasks = require_field(root, "tasks", "spec");
  for (const auto& tj : tasks) {
    SpecTask t;
    t.id = get_string(tj, "id", "spec.tasks");
    t.description = get_string(tj, "description", "task " + t.id);
    if (tj.contains("inputs"))
      for (const auto& v : tj.at("inputs")) t.inputs.push_back(v.get<std::string>());
    if (tj.contains("constraints"))
      for (const auto& [k, v] : tj.at("constraints").items())
        t.constraints[k] = v.is_string() ? v.get<std::string>() : v.dump();
    spec.tasks.push_back(std::move(t));
  }
  validate_spec_structure(spec);
  return spec;
}

// Line DSL:
//   workflow <name>
//   input <name>[, <name>...]
//   task <id> "<description>" [<- in1, in2] [@key=value ...]
// '#' starts a comment.
inline DeclarativeSpec parse_spec_dsl(const std::string& source) {
  DeclarativeSpec spec;
  std::istringstream in(source);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError("spec:" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.rfind("workflow ", 0) == 0) {
      spec.workflow_name = trim(line.substr(9));
      continue;
    }
    if (line.rfind("input ", 0) == 0) {
      for (auto& name : split(line.substr(6), ',')) {
        std::string n = trim(name);
        if (!n.empty()) spec.external_inputs.push_back(n);
      }
      continue;
    }
    if (line.rfind("task ", 0) == 0) {
      SpecTask t;
      std::string rest = trim(line.substr(5));
      size_t q1 = rest.find('"');
      if (q1 == std::string::npos) fail("task line missing quoted description");
      t.id = trim(rest.substr(0, q1));
      if (t.id.empty()) fail("task line missing id");
      size_t q2 = rest.find('"', q1 + 1);
      if (q2 == std::string::npos) fail("unterminated description string");
      t.description = rest.substr(q1 + 1, q2 - q1 - 1);
      std::string tail = trim(rest.substr(q2 + 1));
      // Split off @key=value constraint tokens from the end.
      while (!tail.empty()) {
        size_t at = tail.rfind('@');
        if (at == std::string::npos) break;
        std::string tok = trim(tail.substr(at + 1));
        size_t eq = tok.find('=');
        if (eq == std::string::npos) fail("constraint token '@" + tok + "' missing '='");
        t.constraints[trim(tok.substr(0, eq))] = trim(tok.substr(eq + 1));
        tail = trim(tail.substr(0, at));
      }
      if (!tail.empty()) {
        if (tail.rfind("<-", 0) != 0) fail("expected '<-' before input list");
        for (auto& name : split(tail.substr(2), ',')) {
          std::string n = trim(name);
          if (!n.empty()) t.inputs.push_back(n);
        }
      }
      spec.tasks.push_back(std::move(t));
      continue;
    }
    fail("unrecognized directive: " + line);
  }
  if (spec.workflow_name.empty()) throw ParseError("spec: missing 'workflow <name>' line");
  validate_spec_structure(spec);
  return spec;
}

}  // namespace detail

// Accepts either the JSON spec format or the line DSL (auto-detected).
inline DeclarativeSpec parse_spec(const std::string& source) {
  for (char c : source) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return detail::parse_spec_json(source);
    break;
  }
  return detail::parse_spec_dsl(source);
}

inline std::string serialize_spec(const DeclarativeSpec& spec) {
  json root;
  root["workflow"] = spec.workflow_name;
  root["inputs"] = spec.external_inputs;
  root["tasks"] = json::array();
  for (const auto& t : spec.tasks) {
    json tj;
    tj["id"] = t.id;
    tj["description"] = t.description;
    tj["inputs"] = t.inputs;
    tj["constraints"] = json::object();
    for (const auto& [k, v] : t.constraints) tj["constraints"][k] = v;
    root["tasks"].push_back(std::move(tj));
  }
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Executor catalog

inline ExecutorCatalogEntry catalog_entry_from_json(const json& j, const std::string& ctx) {
  ExecutorCatalogEntry e;
  e.executor_name = detail::get_string(j, "name", ctx);
  e.kind = parse_executor_kind(detail::get_string(j, "kind", ctx));
  e.description = detail::get_string(j, "description", ctx);
  for (const auto& v : detail::require_field(j, "inputs", ctx))
    e.inputs.push_back(parse_data_type(v.get<std::string>()));
  for (const auto& v : detail::require_field(j, "outputs", ctx))
    e.outputs.push_back(parse_data_type(v.get<std::string>()));
  if (j.contains("knobs"))
    for (const auto& [k, v] : j.at("knobs").items())
      e.knobs[k] = v.is_string() ? v.get<std::string>() : v.dump();
  for (const auto& v : detail::require_field(j, "aliases", ctx))
    e.aliases.push_back(v.get<std::string>());
  validate(e);
  return e;
}

inline std::vector<ExecutorCatalogEntry> load_executor_catalog(
    const std::filesystem::path& path) {
  json root = detail::parse_json_file(path);
  if (!root.is_array()) throw ParseError(path.string() + ": expected a JSON array");
  std::vector<ExecutorCatalogEntry> out;
  std::set<std::string> names;
  for (size_t i = 0; i < root.size(); ++i) {
    auto e = catalog_entry_from_json(root[i], path.string() + "[" + std::to_string(i) + "]");
    if (!names.insert(e.executor_name).second)
      throw ValidationError("duplicate executor: " + e.executor_name);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Executor resolution

namespace detail {

inline const std::set<std::string>& match_stopwords() {
  static const std::set<std::string> words = {"a",    "an",  "and", "d",    "each", "for",
                                              "from", "in",  "is",  "it",   "list", "of",
                                              "on",   "or",  "some", "the", "to",   "with"};
  return words;
}

// Deterministic description-to-executor score: whole-phrase alias hits weigh
// 2 per word; unique non-stopword token overlap with the executor description
// adds 1 each.
inline int match_score(const std::string& task_description, const ExecutorCatalogEntry& e) {
  const std::string desc_lower = to_lower(task_description);
  const auto desc_tokens_v = tokenize_words(task_description);
  const std::set<std::string> desc_tokens(desc_tokens_v.begin(), desc_tokens_v.end());
  int score = 0;
  for (const auto& alias : e.aliases) {
    const auto alias_tokens = tokenize_words(alias);
    if (alias_tokens.empty()) continue;
    // Phrase containment over the token sequence.
    bool hit = false;
    if (alias_tokens.size() == 1) {
      hit = desc_tokens.count(alias_tokens[0]) > 0;
    } else {
      for (size_t i = 0; i + alias_tokens.size() <= desc_tokens_v.size() && !hit; ++i) {
        bool all = true;
        for (size_t k = 0; k < alias_tokens.size(); ++k)
          if (desc_tokens_v[i + k] != alias_tokens[k]) {
            all = false;
            break;
          }
        hit = all;
      }
    }
    if (hit) score += 2 * static_cast<int>(alias_tokens.size());
  }
  for (const auto& tok : tokenize_words(e.description)) {
    if (match_stopwords().count(tok)) continue;
    if (desc_tokens.count(tok)) ++score;
  }
  (void)desc_lower;
  return score;
}

}  // namespace detail

// Maps every task to the highest-scoring executor. A task constraint
// executor=<name> pins the choice. A task nobody scores on is an error that
// lists the task, so the caller can onboard a suitable executor.
inline LogicalWorkflow resolve_executors(const DeclarativeSpec& spec,
                                         const std::vector<ExecutorCatalogEntry>& catalog) {
  if (catalog.empty()) throw Error("executor catalog is empty");
  std::map<std::string, const ExecutorCatalogEntry*> by_name;
  for (const auto& e : catalog) by_name[e.executor_name] = &e;

  LogicalWorkflow wf;
  wf.workflow_name = spec.workflow_name;
  std::map<std::string, const ExecutorCatalogEntry*> chosen;

  for (const auto& task : spec.tasks) {
    const ExecutorCatalogEntry* pick = nullptr;
    auto pinned = task.constraints.find("executor");
    if (pinned != task.constraints.end()) {
      auto it = by_name.find(pinned->second);
      if (it == by_name.end())
        throw Error("task " + task.id + ": pinned executor '" + pinned->second +
                    "' is not in the catalog");
      pick = it->second;
    } else {
      int best = 0;
      for (const auto& e : catalog) {
        const int s = detail::match_score(task.description, e);
        if (s > best || (s == best && s > 0 && pick && e.executor_name < pick->executor_name)) {
          best = s;
          pick = &e;
        }
      }
      if (!pick || best == 0)
        throw Error("unresolved task '" + task.id + "': no executor matches \"" +
                    task.description + "\"; onboard a suitable executor");
    }
    wf.nodes.push_back({task.id, pick->executor_name});
    chosen[task.id] = pick;
  }

  // Typed edges between tasks; external inputs carry no edge.
  std::set<std::string> task_ids;
  for (const auto& t : spec.tasks) task_ids.insert(t.id);
  for (const auto& task : spec.tasks) {
    for (const auto& in : task.inputs) {
      if (!task_ids.count(in)) continue;
      const ExecutorCatalogEntry* producer = chosen[in];
      const ExecutorCatalogEntry* consumer = chosen[task.id];
      DataType edge_type = producer->outputs.empty() ? DataType::text : producer->outputs.front();
      for (DataType out : producer->outputs) {
        bool accepted = false;
        for (DataType want : consumer->inputs)
          if (want == out) accepted = true;
        if (accepted) {
          edge_type = out;
          break;
        }
      }
      wf.edges.push_back({in, task.id, edge_type});
    }
  }

  // The DAG must converge on one final answer node.
  std::set<std::string> has_dependent;
  for (const auto& e : wf.edges) has_dependent.insert(e.from);
  std::vector<std::string> sinks;
  for (const auto& n : wf.nodes)
    if (!has_dependent.count(n.task_id)) sinks.push_back(n.task_id);
  if (sinks.size() != 1) {
    std::string list;
    for (const auto& s : sinks) list += (list.empty() ? "" : ", ") + s;
    throw Error("workflow " + spec.workflow_name + ": expected a single sink node, found " +
                std::to_string(sinks.size()) + " (" + list + ")");
  }
  return wf;
}

// A request that names no workflow is matched against registered workflows
// and catalog executors with the same scoring as task resolution. No
// multi-step decomposition happens here.
struct RequestMatch {
  std::string name;
  bool is_workflow = false;
  int score = 0;
};

inline RequestMatch resolve_request(const std::string& request_text,
                                    const std::vector<DeclarativeSpec>& registered,
                                    const std::vector<ExecutorCatalogEntry>& catalog) {
  std::vector<ExecutorCatalogEntry> candidates = catalog;
  std::set<std::string> workflow_names;
  for (const auto& spec : registered) {
    ExecutorCatalogEntry pseudo;
    pseudo.executor_name = spec.workflow_name;
    pseudo.kind = ExecutorKind::composition;
    // A workflow matches through the union of its tasks' vocabulary, so a
    // request spanning several tasks outranks any single executor.
    std::set<std::string> vocab;
    for (const auto& t : spec.tasks) {
      pseudo.description += t.description + " ";
      for (const auto& tok : tokenize_words(t.description))
        if (!detail::match_stopwords().count(tok)) vocab.insert(tok);
    }
    for (const auto& w : tokenize_words(spec.workflow_name)) vocab.insert(w);
    pseudo.aliases.assign(vocab.begin(), vocab.end());
    if (pseudo.aliases.empty()) pseudo.aliases.push_back(spec.workflow_name);
    candidates.push_back(std::move(pseudo));
    workflow_names.insert(spec.workflow_name);
  }
  RequestMatch best;
  for (const auto& e : candidates) {
    const int s = detail::match_score(request_text, e);
    if (s > best.score ||
        (s == best.score && s > 0 && !best.name.empty() && e.executor_name < best.name)) {
      best = {e.executor_name, workflow_names.count(e.executor_name) > 0, s};
    }
  }
  if (best.score == 0)
    throw Error("no workflow or executor matches request: \"" + request_text + "\"");
  return best;
}

// Every edge's type must be producible by its source and accepted by its
// destination. Returns all mismatches; empty means the DAG is well-typed.
inline std::vector<TypeCheckError> type_check(const LogicalWorkflow& wf,
                                              const std::vector<ExecutorCatalogEntry>& catalog) {
  std::map<std::string, const ExecutorCatalogEntry*> by_name;
  for (const auto& e : catalog) by_name[e.executor_name] = &e;
  std::map<std::string, const ExecutorCatalogEntry*> exec_of;
  for (const auto& n : wf.nodes) {
    auto it = by_name.find(n.executor_name);
    if (it == by_name.end()) throw Error("node " + n.task_id + ": unknown executor " + n.executor_name);
    exec_of[n.task_id] = it->second;
  }
  std::vector<TypeCheckError> errors;
  auto type_list = [](const std::vector<DataType>& ts) {
    std::string out;
    for (DataType t : ts) out += (out.empty() ? "" : "|") + std::string(data_type_name(t));
    return out;
  };
  for (const auto& e : wf.edges) {
    const auto* producer = exec_of.at(e.from);
    const auto* consumer = exec_of.at(e.to);
    bool produced = false;
    for (DataType t : producer->outputs) produced |= (t == e.type);
    bool consumed = false;
    for (DataType t : consumer->inputs) consumed |= (t == e.type);
    if (!produced || !consumed) {
      errors.push_back({e,
                        !consumed ? type_list(consumer->inputs) : type_list(producer->outputs),
                        data_type_name(e.type)});
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------
// Critical-path latency over a bound DAG

// A node bound to an LLM model profile; tokens come from the workflow token
// distribution attributed to this node.
struct LlmBinding {
  std::string model_key;
  TokenDist tokens;
  double offered_tps = -1.0;  // <0 means the model's sustainable load
};

struct ToolBinding {
  std::string resource;
  double latency_s = 0.0;
  int units = 0;
};

using NodeBinding = std::variant<ToolBinding, LlmBinding>;

inline double node_latency(const NodeBinding& b, Pct percentile, const ProfileStore& store) {
  if (std::holds_alternative<ToolBinding>(b)) return std::get<ToolBinding>(b).latency_s;
  const auto& lb = std::get<LlmBinding>(b);
  const ModelProfile& m = store.model(lb.model_key);
  const double offered = lb.offered_tps < 0 ? m.sustainable_tps : lb.offered_tps;
  const LoadPoint perf = perf_at_load(m, offered);
  return perf.ttft_s + lb.tokens.at(percentile) * perf.tpot_s;
}

// Longest root-to-sink path over node latencies; fan-out branches overlap.
inline double critical_path_latency(const LogicalWorkflow& wf,
                                    const std::map<std::string, NodeBinding>& bindings,
                                    Pct percentile, const ProfileStore& store) {
  for (const auto& n : wf.nodes)
    if (!bindings.count(n.task_id)) throw Error("unbound node: " + n.task_id);
  // Topological order via Kahn over edges.
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> out_edges;
  for (const auto& n : wf.nodes) indegree[n.task_id] = 0;
  for (const auto& e : wf.edges) {
    ++indegree[e.to];
    out_edges[e.from].push_back(e.to);
  }
  std::vector<std::string> order;
  std::vector<std::string> ready;
  for (const auto& n : wf.nodes)
    if (indegree[n.task_id] == 0) ready.push_back(n.task_id);
  std::map<std::string, double> finish;
  while (!ready.empty()) {
    std::string id = ready.back();
    ready.pop_back();
    order.push_back(id);
    for (const auto& nxt : out_edges[id])
      if (--indegree[nxt] == 0) ready.push_back(nxt);
  }
  if (order.size() != wf.nodes.size()) throw Error("workflow has a cycle");
  std::map<std::string, double> start;
  for (const auto& id : order) start[id] = 0.0;
  for (const auto& id : order) {
    const double lat = node_latency(bindings.at(id), percentile, store);
    finish[id] = start[id] + lat;
    for (const auto& nxt : out_edges[id]) start[nxt] = std::max(start[nxt], finish[id]);
  }
  double total = 0.0;
  for (const auto& [id, f] : finish) total = std::max(total, f);
  return total;
}

// Resource units a bound DAG occupies, by resource type. Multiple LLM nodes
// sharing one model profile count its instance once.
inline std::map<std::string, int> bound_units_by_resource(
    const LogicalWorkflow& wf, const std::map<std::string, NodeBinding>& bindings,
    const ProfileStore& store) {
  std::map<std::string, int> units;
  std::set<std::string> counted_models;
  for (const auto& n : wf.nodes) {
    const auto& b = bindings.at(n.task_id);
    if (std::holds_alternative<ToolBinding>(b)) {
      const auto& tb = std::get<ToolBinding>(b);
      units[tb.resource] += tb.units;
    } else {
      const auto& lb = std::get<LlmBinding>(b);
      if (counted_models.insert(lb.model_key).second) {
        const ModelProfile& m = store.model(lb.model_key);
        units[m.resource_type] += m.parallelism;
      }
    }
  }
  return units;
}

// Canonical JSON form of a resolved DAG, as printed by the validate command.
inline std::string serialize_workflow(const LogicalWorkflow& wf) {
  json root;
  root["workflow"] = wf.workflow_name;
  root["nodes"] = json::array();
  for (const auto& n : wf.nodes)
    root["nodes"].push_back({{"task", n.task_id}, {"executor", n.executor_name}});
  root["edges"] = json::array();
  for (const auto& e : wf.edges)
    root["edges"].push_back(
        {{"from", e.from}, {"to", e.to}, {"type", data_type_name(e.type)}});
  return root.dump(2) + "\n";
}

}  // namespace flowplan

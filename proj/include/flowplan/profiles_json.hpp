#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flowplan/common.hpp"
#include "flowplan/profiles.hpp"

namespace flowplan {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string line_of_offset(const std::string& text, size_t byte_offset) {
  size_t line = 1;
  for (size_t i = 0; i < byte_offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return std::to_string(line);
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ":" + line_of_offset(text, e.byte) + ": " + e.what());
  }
}

inline json parse_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_file(path), path.string());
}

inline const json& require_field(const json& j, const char* field, const std::string& ctx) {
  auto it = j.find(field);
  if (it == j.end()) throw ParseError(ctx + ": missing field '" + field + "'");
  return *it;
}

inline double get_number(const json& j, const char* field, const std::string& ctx) {
  const json& v = require_field(j, field, ctx);
  if (!v.is_number()) throw ParseError(ctx + ": field '" + field + "' must be a number");
  return v.get<double>();
}

inline double get_number_or(const json& j, const char* field, double fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  return it->get<double>();
}

inline std::string get_string(const json& j, const char* field, const std::string& ctx) {
  const json& v = require_field(j, field, ctx);
  if (!v.is_string()) throw ParseError(ctx + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// models.json: array of ModelProfile

inline ModelProfile model_profile_from_json(const json& j, const std::string& ctx) {
  ModelProfile m;
  m.model_name = detail::get_string(j, "model", ctx);
  m.resource_type = detail::get_string(j, "resource", ctx);
  m.parallelism = static_cast<int>(detail::get_number(j, "parallelism", ctx));
  m.energy_rate = detail::get_number(j, "energy_rate_kwh_per_unit_hour", ctx);
  m.multiplex_factor = detail::get_number_or(j, "multiplex_factor", 1.0);
  const json& curve = detail::require_field(j, "load_curve", ctx);
  if (!curve.is_array()) throw ParseError(ctx + ": load_curve must be an array");
  for (const auto& pj : curve) {
    LoadPoint p;
    p.offered_tps = detail::get_number(pj, "offered_tps", ctx + ".load_curve");
    p.ttft_s = detail::get_number(pj, "ttft_s", ctx + ".load_curve");
    p.tpot_s = detail::get_number(pj, "tpot_s", ctx + ".load_curve");
    p.power_w = detail::get_number(pj, "power_w", ctx + ".load_curve");
    m.load_curve.push_back(p);
  }
  if (j.contains("sustainable_tps"))
    m.sustainable_tps = detail::get_number(j, "sustainable_tps", ctx);
  else if (!m.load_curve.empty())
    m.sustainable_tps = m.load_curve.back().offered_tps;
  return m;
}

inline json model_profile_to_json(const ModelProfile& m) {
  json j;
  j["model"] = m.model_name;
  j["resource"] = m.resource_type;
  j["parallelism"] = m.parallelism;
  j["sustainable_tps"] = m.sustainable_tps;
  j["energy_rate_kwh_per_unit_hour"] = m.energy_rate;
  j["multiplex_factor"] = m.multiplex_factor;
  j["load_curve"] = json::array();
  for (const auto& p : m.load_curve) {
    j["load_curve"].push_back({{"offered_tps", p.offered_tps},
                               {"ttft_s", p.ttft_s},
                               {"tpot_s", p.tpot_s},
                               {"power_w", p.power_w}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// workflows.json: array of WorkflowConfig

inline WorkflowConfig workflow_config_from_json(const json& j, const std::string& ctx) {
  WorkflowConfig c;
  c.workflow_name = detail::get_string(j, "workflow", ctx);
  c.config_id = detail::get_string(j, "config_id", ctx);
  c.accuracy = detail::get_number(j, "accuracy", ctx);
  if (j.contains("knobs")) {
    for (const auto& [k, v] : j.at("knobs").items())
      c.knobs[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  const std::string tctx = ctx + ".tokens_per_request";
  const json& t = detail::require_field(j, "tokens_per_request", ctx);
  c.tokens_per_request.p50 = detail::get_number(t, "p50", tctx);
  c.tokens_per_request.p95 = detail::get_number(t, "p95", tctx);
  c.tokens_per_request.p99 = detail::get_number(t, "p99", tctx);
  c.tokens_per_request.mean = detail::get_number(t, "mean", tctx);
  const json& cm = detail::require_field(j, "compatible_models", ctx);
  for (const auto& v : cm) c.compatible_models.push_back(v.get<std::string>());
  if (j.contains("tool_stages")) {
    for (const auto& sj : j.at("tool_stages")) {
      ToolStage st;
      const std::string sctx = ctx + ".tool_stages";
      st.stage_name = detail::get_string(sj, "stage", sctx);
      st.executor_name = detail::get_string(sj, "executor", sctx);
      for (const auto& pj : detail::require_field(sj, "placements", sctx)) {
        ToolPlacement p;
        p.resource = detail::get_string(pj, "resource", sctx + ".placements");
        p.latency_s = detail::get_number(pj, "latency_s", sctx + ".placements");
        p.units = static_cast<int>(detail::get_number(pj, "units", sctx + ".placements"));
        st.placements.push_back(p);
      }
      c.tool_stages.push_back(std::move(st));
    }
  }
  return c;
}

inline json workflow_config_to_json(const WorkflowConfig& c) {
  json j;
  j["workflow"] = c.workflow_name;
  j["config_id"] = c.config_id;
  j["accuracy"] = c.accuracy;
  j["knobs"] = json::object();
  for (const auto& [k, v] : c.knobs) j["knobs"][k] = v;
  j["tokens_per_request"] = {{"p50", c.tokens_per_request.p50},
                             {"p95", c.tokens_per_request.p95},
                             {"p99", c.tokens_per_request.p99},
                             {"mean", c.tokens_per_request.mean}};
  j["compatible_models"] = c.compatible_models;
  j["tool_stages"] = json::array();
  for (const auto& st : c.tool_stages) {
    json sj;
    sj["stage"] = st.stage_name;
    sj["executor"] = st.executor_name;
    sj["placements"] = json::array();
    for (const auto& p : st.placements)
      sj["placements"].push_back(
          {{"resource", p.resource}, {"latency_s", p.latency_s}, {"units", p.units}});
    j["tool_stages"].push_back(std::move(sj));
  }
  return j;
}

// ---------------------------------------------------------------------------
// resources.json: array of ResourceType

inline ResourceType resource_from_json(const json& j, const std::string& ctx) {
  ResourceType r;
  r.name = detail::get_string(j, "name", ctx);
  r.cost_per_unit_second = detail::get_number(j, "cost_per_unit_second", ctx);
  const json& cap = detail::require_field(j, "capacity", ctx);
  if (cap.is_null())
    r.capacity = ResourceType::unlimited();
  else
    r.capacity = cap.get<double>();
  return r;
}

inline json resource_to_json(const ResourceType& r) {
  json j;
  j["name"] = r.name;
  j["cost_per_unit_second"] = r.cost_per_unit_second;
  if (std::isinf(r.capacity))
    j["capacity"] = nullptr;
  else
    j["capacity"] = r.capacity;
  return j;
}

// ---------------------------------------------------------------------------
// File-level loaders

inline std::vector<ModelProfile> load_model_profiles(const std::filesystem::path& path) {
  json root = detail::parse_json_file(path);
  if (!root.is_array()) throw ParseError(path.string() + ": expected a JSON array");
  std::vector<ModelProfile> out;
  for (size_t i = 0; i < root.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    ModelProfile m = model_profile_from_json(root[i], ctx);
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<WorkflowConfig> load_workflow_configs(const std::filesystem::path& path) {
  json root = detail::parse_json_file(path);
  if (!root.is_array()) throw ParseError(path.string() + ": expected a JSON array");
  std::vector<WorkflowConfig> out;
  for (size_t i = 0; i < root.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    out.push_back(workflow_config_from_json(root[i], ctx));
  }
  return out;
}

inline std::vector<ResourceType> load_resources(const std::filesystem::path& path) {
  json root = detail::parse_json_file(path);
  if (!root.is_array()) throw ParseError(path.string() + ": expected a JSON array");
  std::vector<ResourceType> out;
  for (size_t i = 0; i < root.size(); ++i)
    out.push_back(resource_from_json(root[i], path.string() + "[" + std::to_string(i) + "]"));
  return out;
}

// Loads and validates both profiling layers. Duplicate keys and invariant
// violations are rejected with the offending record named.
inline std::pair<std::vector<ModelProfile>, std::vector<WorkflowConfig>> load_profiles(
    const std::filesystem::path& model_path, const std::filesystem::path& workflow_path) {
  auto models = load_model_profiles(model_path);
  auto workflows = load_workflow_configs(workflow_path);
  ProfileStore store(models, workflows);
  store.validate_all();
  return {std::move(models), std::move(workflows)};
}

inline std::string serialize_model_profiles(const std::vector<ModelProfile>& models) {
  json root = json::array();
  for (const auto& m : models) root.push_back(model_profile_to_json(m));
  return root.dump(2) + "\n";
}

inline std::string serialize_workflow_configs(const std::vector<WorkflowConfig>& configs) {
  json root = json::array();
  for (const auto& c : configs) root.push_back(workflow_config_to_json(c));
  return root.dump(2) + "\n";
}

}  // namespace flowplan

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "flowplan/optimizer.hpp"
#include "flowplan/profiles_json.hpp"
#include "flowplan/trace.hpp"

namespace flowplan {

// ---------------------------------------------------------------------------
// OptimizationInstance file format
//
// {
//   "models": "models.json",            // path, relative to this file
//   "workflows": "workflows.json",
//   "resources": [ ... ] | "resources.json",
//   "objective": "min_energy" | "min_cost" | "max_accuracy_under_budget",
//   "mode": "joint" | "per_pair",
//   "buffer": 1.15, "epsilon": 0.001, "solver_time_limit": 300,
//   "demand": [ {"workflow": w, "slo": {"type": t, "tier": x | "threshold": v},
//                "peak": r, "avg": r}, ... ],
//   "cost_slo": { "<workflow>": dollars_per_request, ... }
// }

inline SloSpec slo_spec_from_json(const json& j, const std::string& ctx) {
  SloSpec spec;
  spec.type = parse_slo_type(detail::get_string(j, "type", ctx));
  if (j.contains("tier")) spec.tier = parse_slo_tier(j.at("tier").get<std::string>());
  if (j.contains("threshold")) spec.threshold = j.at("threshold").get<double>();
  if (!spec.tier && !spec.threshold)
    throw ParseError(ctx + ": slo requires a tier or a threshold");
  return spec;
}

inline json slo_spec_to_json(const SloSpec& spec) {
  json j;
  j["type"] = slo_type_name(spec.type);
  if (spec.tier) j["tier"] = slo_tier_name(*spec.tier);
  if (spec.threshold) j["threshold"] = *spec.threshold;
  return j;
}

inline OptimizationInstance load_instance(const std::filesystem::path& path) {
  const json root = detail::parse_json_file(path);
  const std::filesystem::path dir = path.parent_path();
  OptimizationInstance inst;

  auto resolve_path = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : dir / fp;
  };

  inst.models = load_model_profiles(resolve_path(detail::get_string(root, "models", path.string())));
  inst.configs =
      load_workflow_configs(resolve_path(detail::get_string(root, "workflows", path.string())));
  const json& res = detail::require_field(root, "resources", path.string());
  if (res.is_string()) {
    inst.resources = load_resources(resolve_path(res.get<std::string>()));
  } else if (res.is_array()) {
    for (size_t i = 0; i < res.size(); ++i)
      inst.resources.push_back(
          resource_from_json(res[i], path.string() + ".resources[" + std::to_string(i) + "]"));
  } else {
    throw ParseError(path.string() + ": resources must be a path or an array");
  }

  inst.buffer = detail::get_number_or(root, "buffer", 1.15);
  inst.epsilon = detail::get_number_or(root, "epsilon", 0.001);
  inst.solver_time_limit = detail::get_number_or(root, "solver_time_limit", 300.0);
  if (root.contains("objective"))
    inst.objective = parse_objective(root.at("objective").get<std::string>());
  if (root.contains("mode")) inst.mode = parse_plan_mode(root.at("mode").get<std::string>());

  // Tier-based SLOs resolve against thresholds derived from the profiles.
  std::optional<SloTierTable> tiers;
  auto tier_table = [&]() -> const SloTierTable& {
    if (!tiers) tiers = derive_slo_tiers(inst.configs, inst.models);
    return *tiers;
  };

  const json& demand = detail::require_field(root, "demand", path.string());
  for (size_t i = 0; i < demand.size(); ++i) {
    const std::string ctx = path.string() + ".demand[" + std::to_string(i) + "]";
    const json& dj = demand[i];
    PairDemand d;
    d.workflow = detail::get_string(dj, "workflow", ctx);
    d.slo = slo_spec_from_json(detail::require_field(dj, "slo", ctx), ctx + ".slo");
    d.peak = detail::get_number(dj, "peak", ctx);
    d.avg = detail::get_number(dj, "avg", ctx);
    if (!d.slo.threshold) d.slo.threshold = tier_table().resolve(d.workflow, d.slo);
    if (d.slo.type == SloType::cost) inst.cost_slo[d.workflow] = *d.slo.threshold;
    inst.demand.push_back(std::move(d));
  }
  if (root.contains("cost_slo"))
    for (const auto& [wf, tau] : root.at("cost_slo").items())
      inst.cost_slo[wf] = tau.get<double>();
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------
// DeploymentPlan file format

inline json plan_to_json(const OptimizationInstance& inst, const DeploymentPlan& plan) {
  json root;
  root["status"] = plan_status_name(plan.status);
  root["objective"] = objective_name(inst.objective);
  root["mode"] = plan_mode_name(inst.mode);
  root["objective_value"] = plan.objective_value;
  if (plan.status == PlanStatus::time_limit) root["gap"] = plan.gap;
  if (!plan.infeasible_reason.empty()) root["infeasible_reason"] = plan.infeasible_reason;
  root["instance_counts"] = json::object();
  for (const auto& [key, n] : plan.instance_counts) root["instance_counts"][key] = n;
  auto allocs = [&](const std::vector<Allocation>& list) {
    json arr = json::array();
    for (const auto& a : list) {
      const auto& d = inst.demand[static_cast<size_t>(a.pair)];
      arr.push_back({{"workflow", d.workflow},
                     {"slo", d.slo.key()},
                     {"config_id", a.config_id},
                     {"model", a.model_key},
                     {"rate", a.rate}});
    }
    return arr;
  };
  root["alloc_peak"] = allocs(plan.alloc_peak);
  root["alloc_avg"] = allocs(plan.alloc_avg);

  const PlanReport rep = plan_report(inst, plan);
  json repj;
  repj["gpus_by_type"] = json::object();
  for (const auto& [res, units] : rep.gpus_by_type) repj["gpus_by_type"][res] = units;
  repj["energy_rate_kwh_per_hour"] = rep.energy_rate;
  repj["cost_rate_per_second"] = rep.cost_rate;
  repj["mean_accuracy"] = rep.mean_accuracy;
  root["report"] = std::move(repj);
  return root;
}

// Static-policy ingestion: instance counts plus (workflow, slo)-keyed routing.
struct LoadedPlan {
  PlanStatus status = PlanStatus::optimal;
  std::map<std::string, int> instance_counts;
  std::map<PairKey, std::vector<std::pair<std::string, std::string>>> alloc_keys;  // (config, model)
  std::map<PairKey, std::vector<double>> alloc_rates;
};

inline LoadedPlan load_plan(const std::filesystem::path& path) {
  const json root = detail::parse_json_file(path);
  LoadedPlan out;
  const std::string status = detail::get_string(root, "status", path.string());
  if (status == "optimal")
    out.status = PlanStatus::optimal;
  else if (status == "infeasible")
    out.status = PlanStatus::infeasible;
  else
    out.status = PlanStatus::time_limit;
  for (const auto& [key, n] : detail::require_field(root, "instance_counts", path.string()).items())
    out.instance_counts[key] = n.get<int>();
  if (root.contains("alloc_peak")) {
    for (const auto& aj : root.at("alloc_peak")) {
      PairKey key{detail::get_string(aj, "workflow", path.string()),
                  detail::get_string(aj, "slo", path.string())};
      out.alloc_keys[key].emplace_back(detail::get_string(aj, "config_id", path.string()),
                                       detail::get_string(aj, "model", path.string()));
      out.alloc_rates[key].push_back(detail::get_number(aj, "rate", path.string()));
    }
  }
  return out;
}

// Plan summary in the shape of the headline comparison tables:
// GPUs by type, energy rate, cost rate, mean accuracy.
inline std::string plan_summary_text(const OptimizationInstance& inst,
                                     const DeploymentPlan& plan) {
  std::ostringstream out;
  out << "status: " << plan_status_name(plan.status) << "\n";
  if (plan.status == PlanStatus::infeasible) {
    out << "reason: " << plan.infeasible_reason << "\n";
    return out.str();
  }
  out << "objective (" << objective_name(inst.objective) << "): " << plan.objective_value << "\n";
  if (plan.status == PlanStatus::time_limit)
    out << "optimality gap: " << plan.gap << "\n";
  out << "instances:\n";
  for (const auto& [key, n] : plan.instance_counts)
    if (n > 0) out << "  " << key << ": " << n << "\n";
  const PlanReport rep = plan_report(inst, plan);
  out << "units by resource:\n";
  for (const auto& [res, units] : rep.gpus_by_type) out << "  " << res << ": " << units << "\n";
  out << "energy rate: " << rep.energy_rate << " kWh/h\n";
  out << "cost rate: " << rep.cost_rate * 3600.0 << " $/h\n";
  out << "mean accuracy: " << rep.mean_accuracy << "\n";
  return out.str();
}

}  // namespace flowplan

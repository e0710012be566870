#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowplan/common.hpp"

namespace flowplan {

// A hardware (or external-service) pool the optimizer can draw from.
// cost_per_unit_second is c_g; capacity is the budget B_g in units.
struct ResourceType {
  std::string name;
  double cost_per_unit_second = 0.0;
  double capacity = 0.0;  // use unlimited() for externally-hosted pools

  static constexpr double unlimited() { return std::numeric_limits<double>::infinity(); }
};

// One measured operating point of a model instance.
struct LoadPoint {
  double offered_tps = 0.0;
  double ttft_s = 0.0;
  double tpot_s = 0.0;
  double power_w = 0.0;  // per resource unit
};

enum class Pct { p50, p95, p99 };

inline const char* pct_name(Pct p) {
  switch (p) {
    case Pct::p50: return "p50";
    case Pct::p95: return "p95";
    default: return "p99";
  }
}

// Tokens-per-request distribution summary for one workflow configuration.
struct TokenDist {
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double mean = 0.0;

  double at(Pct p) const {
    switch (p) {
      case Pct::p50: return p50;
      case Pct::p95: return p95;
      default: return p99;
    }
  }
};

// One (model, resource type, parallelism) tuple with its load curve.
struct ModelProfile {
  std::string model_name;
  std::string resource_type;
  int parallelism = 1;             // g_m: resource units per instance
  std::vector<LoadPoint> load_curve;  // sorted by offered_tps, strictly increasing
  double sustainable_tps = 0.0;    // theta_m: last curve point's offered_tps
  double energy_rate = 0.0;        // e_m: kWh per resource-unit per hour at sustainable load
  double multiplex_factor = 1.0;   // mu_m

  // Canonical identity; (model, resource, parallelism) is the uniqueness key.
  std::string key() const {
    return model_name + "@" + resource_type + "/tp" + std::to_string(parallelism);
  }

  const LoadPoint& peak_point() const { return load_curve.back(); }
  double ttft_at_sustainable() const { return load_curve.back().ttft_s; }
  double tpot_at_sustainable() const { return load_curve.back().tpot_s; }
};

struct ToolPlacement {
  std::string resource;
  double latency_s = 0.0;
  int units = 0;
};

struct ToolStage {
  std::string stage_name;
  std::string executor_name;
  std::vector<ToolPlacement> placements;

  // Fastest placement, used when no explicit binding picks one.
  const ToolPlacement& best_placement() const {
    const ToolPlacement* best = &placements.front();
    for (const auto& p : placements)
      if (p.latency_s < best->latency_s) best = &p;
    return *best;
  }
};

// One configuration c of a workflow: knob settings plus measured accuracy
// and token demand.
struct WorkflowConfig {
  std::string workflow_name;
  std::string config_id;
  std::map<std::string, std::string> knobs;
  double accuracy = 0.0;  // a_c
  TokenDist tokens_per_request;  // t_c
  std::vector<std::string> compatible_models;  // model names, any hardware profile qualifies
  std::vector<ToolStage> tool_stages;  // declared tool chain, executed in order

  std::string key() const { return workflow_name + "/" + config_id; }

  bool compatible_with(const std::string& model_name) const {
    for (const auto& m : compatible_models)
      if (m == model_name) return true;
    return false;
  }

  // Latency of the declared tool chain using each stage's fastest placement.
  double tool_chain_latency() const {
    double sum = 0.0;
    for (const auto& st : tool_stages) sum += st.best_placement().latency_s;
    return sum;
  }
};

enum class SloType { accuracy, latency, cost };
enum class SloTier { best, good, fair, basic };

inline const char* slo_type_name(SloType t) {
  switch (t) {
    case SloType::accuracy: return "max_accuracy";
    case SloType::latency: return "min_latency";
    default: return "max_cost";
  }
}

inline const char* slo_tier_name(SloTier t) {
  switch (t) {
    case SloTier::best: return "best";
    case SloTier::good: return "good";
    case SloTier::fair: return "fair";
    default: return "basic";
  }
}

inline SloType parse_slo_type(const std::string& s) {
  if (s == "max_accuracy" || s == "accuracy") return SloType::accuracy;
  if (s == "min_latency" || s == "latency") return SloType::latency;
  if (s == "max_cost" || s == "cost") return SloType::cost;
  throw ParseError("unknown SLO type: " + s);
}

inline SloTier parse_slo_tier(const std::string& s) {
  if (s == "best") return SloTier::best;
  if (s == "good") return SloTier::good;
  if (s == "fair") return SloTier::fair;
  if (s == "basic") return SloTier::basic;
  throw ParseError("unknown SLO tier: " + s);
}

// An SLO demand: a type plus either a named tier (resolved against the tier
// table) or an explicit threshold tau.
struct SloSpec {
  SloType type = SloType::accuracy;
  std::optional<SloTier> tier;
  std::optional<double> threshold;

  static SloSpec with_threshold(SloType t, double tau) {
    SloSpec s;
    s.type = t;
    s.threshold = tau;
    return s;
  }
  static SloSpec with_tier(SloType t, SloTier tr) {
    SloSpec s;
    s.type = t;
    s.tier = tr;
    return s;
  }

  std::string key() const {
    std::string out = slo_type_name(type);
    if (tier) return out + ":" + slo_tier_name(*tier);
    if (threshold) return out + ":" + std::to_string(*threshold);
    return out;
  }
};

// Per (workflow, slo type) tier thresholds.
struct SloTierTable {
  // workflow -> type -> tier -> threshold
  std::map<std::string, std::map<SloType, std::map<SloTier, double>>> table;

  double threshold(const std::string& workflow, SloType type, SloTier tier) const {
    auto wit = table.find(workflow);
    if (wit == table.end()) throw Error("no SLO tiers for workflow: " + workflow);
    auto tit = wit->second.find(type);
    if (tit == wit->second.end())
      throw Error("no " + std::string(slo_type_name(type)) + " tiers for workflow: " + workflow);
    return tit->second.at(tier);
  }

  // Resolves a SloSpec to its numeric threshold.
  double resolve(const std::string& workflow, const SloSpec& spec) const {
    if (spec.threshold) return *spec.threshold;
    if (!spec.tier) throw Error("SLO spec has neither tier nor threshold");
    return threshold(workflow, spec.type, *spec.tier);
  }
};

// ---------------------------------------------------------------------------
// Validation

inline void validate(const ResourceType& r) {
  if (r.name.empty()) throw ValidationError("resource type with empty name");
  if (r.cost_per_unit_second < 0)
    throw ValidationError("resource " + r.name + ": cost_per_unit_second < 0");
  if (r.capacity < 0) throw ValidationError("resource " + r.name + ": capacity < 0");
}

inline void validate(const ModelProfile& m) {
  const std::string who = "model profile " + m.key();
  if (m.model_name.empty()) throw ValidationError("model profile with empty model_name");
  if (m.load_curve.empty()) throw ValidationError(who + ": empty load_curve");
  // Externally hosted models may occupy zero local units.
  if (m.parallelism < 1 && m.resource_type != "EXTERNAL")
    throw ValidationError(who + ": parallelism must be >= 1");
  if (m.parallelism < 0) throw ValidationError(who + ": parallelism < 0");
  if (m.energy_rate < 0) throw ValidationError(who + ": energy_rate < 0");
  if (m.multiplex_factor < 1.0)
    throw ValidationError(who + ": multiplex_factor must be >= 1");
  const LoadPoint* prev = nullptr;
  for (const auto& p : m.load_curve) {
    if (p.offered_tps < 0 || p.ttft_s < 0 || p.tpot_s < 0 || p.power_w < 0)
      throw ValidationError(who + ": negative value in load curve");
    if (prev) {
      if (p.offered_tps <= prev->offered_tps)
        throw ValidationError(who + ": load_curve offered_tps not strictly increasing");
      if (p.ttft_s < prev->ttft_s || p.tpot_s < prev->tpot_s)
        throw ValidationError(who + ": ttft/tpot must be non-decreasing along the load curve");
    }
    prev = &p;
  }
  if (std::abs(m.sustainable_tps - m.load_curve.back().offered_tps) > 1e-9)
    throw ValidationError(who + ": sustainable_tps must equal the last load point's offered_tps");
}

inline void validate(const WorkflowConfig& c) {
  const std::string who = "workflow config " + c.key();
  if (c.workflow_name.empty() || c.config_id.empty())
    throw ValidationError("workflow config with empty workflow_name or config_id");
  if (c.accuracy < 0.0 || c.accuracy > 1.0)
    throw ValidationError(who + ": accuracy must be in [0,1]");
  const auto& t = c.tokens_per_request;
  if (t.p50 < 0 || t.mean < 0) throw ValidationError(who + ": tokens_per_request negative");
  if (t.p50 > t.p95 || t.p95 > t.p99)
    throw ValidationError(who + ": tokens_per_request requires p50 <= p95 <= p99");
  if (c.compatible_models.empty())
    throw ValidationError(who + ": compatible_models must be non-empty");
  for (const auto& st : c.tool_stages) {
    if (st.placements.empty())
      throw ValidationError(who + ": tool stage " + st.stage_name + " has no placements");
    for (const auto& p : st.placements) {
      if (p.latency_s <= 0)
        throw ValidationError(who + ": tool stage " + st.stage_name +
                              " placement latency must be > 0");
      if (p.units < 0)
        throw ValidationError(who + ": tool stage " + st.stage_name + " placement units < 0");
    }
  }
}

// ---------------------------------------------------------------------------
// Store

// Read-only after construction; safe for concurrent readers.
class ProfileStore {
 public:
  ProfileStore() = default;
  ProfileStore(std::vector<ModelProfile> models, std::vector<WorkflowConfig> workflows,
               std::vector<ResourceType> resources = {})
      : models_(std::move(models)),
        workflows_(std::move(workflows)),
        resources_(std::move(resources)) {
    index();
  }

  const std::vector<ModelProfile>& models() const { return models_; }
  const std::vector<WorkflowConfig>& workflows() const { return workflows_; }
  const std::vector<ResourceType>& resources() const { return resources_; }

  const ModelProfile& model(const std::string& key) const {
    auto it = model_by_key_.find(key);
    if (it == model_by_key_.end()) throw Error("unknown model profile: " + key);
    return models_[it->second];
  }

  bool has_model(const std::string& key) const { return model_by_key_.count(key) > 0; }

  const ResourceType& resource(const std::string& name) const {
    auto it = resource_by_name_.find(name);
    if (it == resource_by_name_.end()) throw Error("unknown resource type: " + name);
    return resources_[it->second];
  }

  std::vector<const ModelProfile*> profiles_for_model_name(const std::string& model_name) const {
    std::vector<const ModelProfile*> out;
    for (const auto& m : models_)
      if (m.model_name == model_name) out.push_back(&m);
    return out;
  }

  std::vector<const WorkflowConfig*> configs_for_workflow(const std::string& workflow) const {
    std::vector<const WorkflowConfig*> out;
    for (const auto& c : workflows_)
      if (c.workflow_name == workflow) out.push_back(&c);
    return out;
  }

  std::vector<std::string> workflow_names() const {
    std::set<std::string> names;
    for (const auto& c : workflows_) names.insert(c.workflow_name);
    return {names.begin(), names.end()};
  }

  void validate_all() const {
    std::set<std::string> model_keys;
    for (const auto& m : models_) {
      validate(m);
      if (!model_keys.insert(m.key()).second)
        throw ValidationError("duplicate model profile key: " + m.key());
    }
    std::set<std::string> resource_names;
    for (const auto& r : resources_) {
      validate(r);
      if (!resource_names.insert(r.name).second)
        throw ValidationError("duplicate resource type: " + r.name);
    }
    std::set<std::string> config_keys;
    for (const auto& c : workflows_) {
      validate(c);
      if (!config_keys.insert(c.key()).second)
        throw ValidationError("duplicate workflow config: " + c.key());
    }
  }

 private:
  void index() {
    model_by_key_.clear();
    resource_by_name_.clear();
    for (size_t i = 0; i < models_.size(); ++i) model_by_key_[models_[i].key()] = i;
    for (size_t i = 0; i < resources_.size(); ++i) resource_by_name_[resources_[i].name] = i;
  }

  std::vector<ModelProfile> models_;
  std::vector<WorkflowConfig> workflows_;
  std::vector<ResourceType> resources_;
  std::map<std::string, size_t> model_by_key_;
  std::map<std::string, size_t> resource_by_name_;
};

// ---------------------------------------------------------------------------
// Operations

// Piecewise-linear interpolation of the load curve. Queries below the first
// point clamp to it; queries beyond sustainable_tps are an overload error,
// never an extrapolation.
inline LoadPoint perf_at_load(const ModelProfile& profile, double offered_tps) {
  if (offered_tps < 0) throw Error(profile.key() + ": negative offered load");
  const auto& curve = profile.load_curve;
  if (offered_tps > profile.sustainable_tps + 1e-9)
    throw OverloadError(profile.key() + ": offered " + std::to_string(offered_tps) +
                        " tps exceeds sustainable " + std::to_string(profile.sustainable_tps));
  if (offered_tps <= curve.front().offered_tps) {
    LoadPoint p = curve.front();
    p.offered_tps = offered_tps;
    return p;
  }
  for (size_t i = 1; i < curve.size(); ++i) {
    const auto& lo = curve[i - 1];
    const auto& hi = curve[i];
    if (offered_tps <= hi.offered_tps) {
      const double f = (offered_tps - lo.offered_tps) / (hi.offered_tps - lo.offered_tps);
      LoadPoint p;
      p.offered_tps = offered_tps;
      p.ttft_s = lo.ttft_s + f * (hi.ttft_s - lo.ttft_s);
      p.tpot_s = lo.tpot_s + f * (hi.tpot_s - lo.tpot_s);
      p.power_w = lo.power_w + f * (hi.power_w - lo.power_w);
      return p;
    }
  }
  LoadPoint p = curve.back();  // offered == sustainable within tolerance
  p.offered_tps = offered_tps;
  return p;
}

// End-to-end request latency estimate: tool chain + TTFT + tokens * TPOT.
// tool_latency_override carries a DAG critical-path latency when the caller
// has one; otherwise the config's declared chain is used.
inline double estimate_request_latency(const WorkflowConfig& config, const ModelProfile& model,
                                       Pct percentile, double offered_tps,
                                       std::optional<double> tool_latency_override = {}) {
  if (!config.compatible_with(model.model_name))
    throw Error("model " + model.model_name + " is not compatible with config " + config.key());
  const LoadPoint perf = perf_at_load(model, offered_tps);
  const double tool_lat =
      tool_latency_override ? *tool_latency_override : config.tool_chain_latency();
  return tool_lat + perf.ttft_s + config.tokens_per_request.at(percentile) * perf.tpot_s;
}

// Derives the best/good/fair/basic thresholds from the achievable set of
// (config, compatible model profile) pairs. Accuracy tiers are the max and
// the 95th/80th/50th nearest-rank percentiles; latency tiers mirror them from
// the fast end (min, 5th, 20th, 50th), evaluated at sustainable load with
// p95 token counts.
inline SloTierTable derive_slo_tiers(const std::vector<WorkflowConfig>& workflows,
                                     const std::vector<ModelProfile>& models) {
  SloTierTable out;
  std::map<std::string, std::vector<double>> accs;
  std::map<std::string, std::vector<double>> lats;
  for (const auto& c : workflows) {
    for (const auto& m : models) {
      if (!c.compatible_with(m.model_name)) continue;
      accs[c.workflow_name].push_back(c.accuracy);
      lats[c.workflow_name].push_back(
          estimate_request_latency(c, m, Pct::p95, m.sustainable_tps));
    }
  }
  for (auto& [wf, a] : accs) {
    if (a.empty()) throw Error("no (config, model) candidates for workflow " + wf);
    std::sort(a.begin(), a.end());
    auto& acc_tiers = out.table[wf][SloType::accuracy];
    acc_tiers[SloTier::best] = a.back();
    acc_tiers[SloTier::good] = percentile_nearest_rank(a, 0.95);
    acc_tiers[SloTier::fair] = percentile_nearest_rank(a, 0.80);
    acc_tiers[SloTier::basic] = percentile_nearest_rank(a, 0.50);

    auto& l = lats[wf];
    std::sort(l.begin(), l.end());
    auto& lat_tiers = out.table[wf][SloType::latency];
    lat_tiers[SloTier::best] = l.front();
    lat_tiers[SloTier::good] = percentile_nearest_rank(l, 0.05);
    lat_tiers[SloTier::fair] = percentile_nearest_rank(l, 0.20);
    lat_tiers[SloTier::basic] = percentile_nearest_rank(l, 0.50);
  }
  if (out.table.empty()) throw Error("derive_slo_tiers: empty candidate set");
  return out;
}

}  // namespace flowplan

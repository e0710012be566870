#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowplan/common.hpp"
#include "flowplan/optimizer.hpp"
#include "flowplan/profiles.hpp"
#include "flowplan/trace.hpp"

namespace flowplan {

struct PeakAvg {
  double peak = 0.0;  // requests/second
  double avg = 0.0;
};

// EWMA demand predictor over (workflow, slo tier) pairs.
struct PredictorState {
  double alpha = 0.5;
  std::map<PairKey, PeakAvg> forecast;

  void validate() const {
    if (alpha <= 0.0 || alpha > 1.0) throw ValidationError("EWMA alpha must be in (0, 1]");
    for (const auto& [k, f] : forecast)
      if (f.peak < 0 || f.avg < 0)
        throw ValidationError("negative forecast for " + k.to_string());
  }
};

// forecast' = alpha * observed + (1 - alpha) * forecast, elementwise.
inline PredictorState ewma_predict(const PredictorState& state,
                                   const std::map<PairKey, PeakAvg>& observed) {
  state.validate();
  PredictorState next = state;
  for (const auto& [key, obs] : observed) {
    if (obs.peak < 0 || obs.avg < 0)
      throw ValidationError("negative observation for " + key.to_string());
    auto it = next.forecast.find(key);
    if (it == next.forecast.end()) {
      next.forecast[key] = {state.alpha * obs.peak, state.alpha * obs.avg};
    } else {
      it->second.peak = state.alpha * obs.peak + (1.0 - state.alpha) * it->second.peak;
      it->second.avg = state.alpha * obs.avg + (1.0 - state.alpha) * it->second.avg;
    }
  }
  return next;
}

// Per-pair peak/average request rate of one epoch of the trace.
inline std::map<PairKey, PeakAvg> aggregate_epoch(const DemandTrace& trace, size_t epoch_index,
                                                  double epoch_length_s) {
  if (trace.resolution_s <= 0) throw Error("trace has no resolution");
  const auto bins_per_epoch =
      static_cast<size_t>(std::llround(epoch_length_s / trace.resolution_s));
  if (bins_per_epoch == 0 ||
      std::abs(epoch_length_s - static_cast<double>(bins_per_epoch) * trace.resolution_s) > 1e-6)
    throw Error("epoch length must be a positive multiple of the trace resolution");
  const size_t begin = epoch_index * bins_per_epoch;
  if (begin >= trace.num_bins()) throw Error("epoch index out of range");
  const size_t end = std::min(trace.num_bins(), begin + bins_per_epoch);
  std::map<PairKey, PeakAvg> out;
  for (const auto& [key, series] : trace.series) {
    PeakAvg pa;
    double sum = 0.0;
    for (size_t i = begin; i < end; ++i) {
      const double rate = series[i] / trace.resolution_s;
      pa.peak = std::max(pa.peak, rate);
      sum += rate;
    }
    pa.avg = sum / static_cast<double>(end - begin);
    out[key] = pa;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cluster state

struct ClusterState {
  struct Pending {
    std::string model;
    int count = 0;
    double ready_time = 0.0;
    bool spare = false;
  };

  std::map<std::string, int> serving;  // instances currently taking load
  std::map<std::string, int> spare;    // provisioned idle headroom
  std::vector<Pending> pending;
  double provisioning_delay = 1200.0;
  double spare_fraction = 0.05;

  int pending_count(const std::string& model, bool spare_pool) const {
    int sum = 0;
    for (const auto& p : pending)
      if (p.model == model && p.spare == spare_pool) sum += p.count;
    return sum;
  }

  int allocated(const std::string& model) const {
    int sum = 0;
    auto sit = serving.find(model);
    if (sit != serving.end()) sum += sit->second;
    auto pit = spare.find(model);
    if (pit != spare.end()) sum += pit->second;
    for (const auto& p : pending)
      if (p.model == model) sum += p.count;
    return sum;
  }

  // Pending instances become active exactly at their ready_time.
  void activate_ready(double now) {
    std::vector<Pending> still;
    for (const auto& p : pending) {
      if (p.ready_time <= now + 1e-9) {
        (p.spare ? spare : serving)[p.model] += p.count;
      } else {
        still.push_back(p);
      }
    }
    pending = std::move(still);
  }

  std::set<std::string> known_models() const {
    std::set<std::string> keys;
    for (const auto& [k, _] : serving) keys.insert(k);
    for (const auto& [k, _] : spare) keys.insert(k);
    for (const auto& p : pending) keys.insert(p.model);
    return keys;
  }
};

namespace detail_sim {

inline int spare_target(const ClusterState& cluster, int plan_count) {
  if (plan_count <= 0 || cluster.spare_fraction <= 0) return 0;
  return static_cast<int>(std::ceil(cluster.spare_fraction * plan_count));
}

// Reconcile one pool (serving or spare) toward a target count. Scale-downs
// cancel pending orders first and then release live instances immediately;
// scale-ups wait out the provisioning delay.
inline void reconcile_pool(ClusterState& cluster, const std::string& model, int target,
                           bool spare_pool, double now) {
  auto& pool = spare_pool ? cluster.spare : cluster.serving;
  int live = pool.count(model) ? pool[model] : 0;
  int inflight = cluster.pending_count(model, spare_pool);
  int total = live + inflight;
  if (total > target) {
    int excess = total - target;
    for (auto it = cluster.pending.rbegin(); it != cluster.pending.rend() && excess > 0; ++it) {
      if (it->model != model || it->spare != spare_pool) continue;
      const int cancel = std::min(excess, it->count);
      it->count -= cancel;
      excess -= cancel;
    }
    std::erase_if(cluster.pending, [](const ClusterState::Pending& p) { return p.count == 0; });
    if (excess > 0) pool[model] = live - excess;
  } else if (total < target) {
    const int add = target - total;
    if (cluster.provisioning_delay <= 0) {
      pool[model] = live + add;
    } else {
      cluster.pending.push_back({model, add, now + cluster.provisioning_delay, spare_pool});
    }
  }
}

}  // namespace detail_sim

// Applies a deployment plan to the cluster: scale-downs take effect
// immediately, scale-ups (including replacement spares) enter the pending
// queue with the provisioning delay.
inline void apply_plan(ClusterState& cluster, const std::map<std::string, int>& plan_counts,
                       double now) {
  std::set<std::string> keys = cluster.known_models();
  for (const auto& [k, _] : plan_counts) keys.insert(k);
  for (const auto& key : keys) {
    auto it = plan_counts.find(key);
    const int target = it == plan_counts.end() ? 0 : it->second;
    detail_sim::reconcile_pool(cluster, key, target, /*spare_pool=*/false, now);
    detail_sim::reconcile_pool(cluster, key, detail_sim::spare_target(cluster, target),
                               /*spare_pool=*/true, now);
  }
}

// ---------------------------------------------------------------------------
// Auto-scaler

struct ScaleDecision {
  std::string model;
  int activated_spares = 0;
  int ordered = 0;
};

// Scale-out-only reaction to sustained high utilization: bring spares into
// service instantly, order the remainder subject to resource budgets. Scale-in
// is left to the per-epoch optimizer.
inline std::vector<ScaleDecision> autoscale(ClusterState& cluster,
                                            const std::map<std::string, double>& window_load_tps,
                                            const ProfileStore& store, double threshold,
                                            double now) {
  if (threshold <= 0.0 || threshold > 1.0) throw ValidationError("autoscale threshold in (0,1]");
  std::vector<ScaleDecision> decisions;
  for (const auto& [key, load] : window_load_tps) {
    if (load < 0) throw ValidationError("negative window load for " + key);
    if (load == 0) continue;
    if (!store.has_model(key)) continue;
    const ModelProfile& m = store.model(key);
    const int n = cluster.serving.count(key) ? cluster.serving[key] : 0;
    const double capacity = n * m.sustainable_tps;
    if (capacity > 0 && load / capacity <= threshold) continue;
    int want = static_cast<int>(
        std::ceil((load / threshold - capacity) / m.sustainable_tps));
    if (want <= 0) continue;

    ScaleDecision d;
    d.model = key;
    int& spares = cluster.spare[key];
    const int activate = std::min(want, spares);
    if (activate > 0) {
      spares -= activate;
      cluster.serving[key] += activate;
      want -= activate;
      d.activated_spares = activate;
      // Replacement headroom provisions in the background.
      if (cluster.provisioning_delay > 0)
        cluster.pending.push_back({key, activate, now + cluster.provisioning_delay, true});
      else
        spares += activate;
    }
    if (want > 0) {
      // Respect the resource budget across all instances on this pool.
      const ResourceType& res = store.resource(m.resource_type);
      int addable = want;
      if (!std::isinf(res.capacity) && m.parallelism > 0) {
        long used = 0;
        for (const auto& other : store.models()) {
          if (other.resource_type != res.name) continue;
          used += static_cast<long>(cluster.allocated(other.key())) * other.parallelism;
        }
        const long headroom = static_cast<long>(res.capacity) - used;
        addable = static_cast<int>(
            std::max(0L, std::min<long>(want, headroom / std::max(1, m.parallelism))));
      }
      if (addable > 0) {
        if (cluster.provisioning_delay > 0)
          cluster.pending.push_back({key, addable, now + cluster.provisioning_delay, false});
        else
          cluster.serving[key] += addable;
        d.ordered = addable;
      }
    }
    if (d.activated_spares > 0 || d.ordered > 0) decisions.push_back(std::move(d));
  }
  return decisions;
}

// ---------------------------------------------------------------------------
// Routing and accounting

// Per-pair routing weights extracted from a plan's peak allocations.
struct RoutedShare {
  std::string config_id;
  std::string model_key;
  double weight = 0.0;  // normalized within the pair
};

using RoutingTable = std::map<PairKey, std::vector<RoutedShare>>;

inline RoutingTable routing_from_plan(const DeploymentPlan& plan,
                                      const std::vector<PairKey>& pair_keys) {
  RoutingTable table;
  std::map<int, double> pair_sum;
  for (const auto& a : plan.alloc_peak) pair_sum[a.pair] += a.rate;
  for (const auto& a : plan.alloc_peak) {
    if (a.pair < 0 || static_cast<size_t>(a.pair) >= pair_keys.size()) continue;
    const double denom = pair_sum[a.pair];
    if (denom <= 0) continue;
    table[pair_keys[static_cast<size_t>(a.pair)]].push_back(
        {a.config_id, a.model_key, a.rate / denom});
  }
  return table;
}

struct BinUsage {
  double energy_kwh = 0.0;
  double cost = 0.0;
  double violations = 0.0;      // requests whose estimated latency exceeded tau
  double dropped = 0.0;         // requests beyond live capacity
  double shadow_dropped = 0.0;  // requests beyond planned capacity (no autoscaler)
  double total_requests = 0.0;
  double served_token_seconds = 0.0;
  double capacity_token_seconds = 0.0;
  std::map<std::string, double> demand_tps;       // routed load before capacity clip
  std::map<std::string, double> offered_tps;      // per serving model, clipped
  std::map<std::string, double> utilization;      // offered / (serving * theta)
  std::map<std::string, double> allocated_units;  // per resource type
};

// Splits one bin's demand across the routed (config, model) tuples, clips at
// live capacity, and integrates energy, cost, violations, and drops.
inline BinUsage route_and_account(const ClusterState& cluster, const RoutingTable& routing,
                                  const std::map<PairKey, double>& bin_counts,
                                  const std::map<PairKey, SloSpec>& slos,
                                  const ProfileStore& store, double bin_seconds,
                                  const std::map<std::string, int>& planned_counts) {
  BinUsage usage;
  struct TupleLoad {
    PairKey pair;
    const WorkflowConfig* config;
    double request_rate = 0.0;  // requests/second routed here
  };
  std::map<std::string, std::vector<TupleLoad>> by_model;
  std::map<std::string, double> model_tps;

  std::map<std::string, const WorkflowConfig*> cfg_by_key;
  for (const auto& c : store.workflows()) cfg_by_key[c.key()] = &c;

  for (const auto& [pair, count] : bin_counts) {
    if (count < 0) throw ValidationError("negative bin demand for " + pair.to_string());
    const double rate = count / bin_seconds;
    usage.total_requests += count;
    auto rit = routing.find(pair);
    if (rit == routing.end() || rit->second.empty()) {
      usage.dropped += count;
      usage.shadow_dropped += count;
      continue;
    }
    for (const auto& share : rit->second) {
      auto cit = cfg_by_key.find(pair.workflow + "/" + share.config_id);
      if (cit == cfg_by_key.end())
        throw Error("routing references unknown config " + pair.workflow + "/" + share.config_id);
      const double r = rate * share.weight;
      by_model[share.model_key].push_back({pair, cit->second, r});
      model_tps[share.model_key] +=
          r * OptimizationInstance::capacity_tokens(*cit->second);
    }
  }

  // Live vs planned clip factor per model.
  std::map<std::string, double> live_factor, planned_factor;
  for (const auto& [key, load] : model_tps) {
    const ModelProfile& m = store.model(key);
    const int n_live = cluster.serving.count(key) ? cluster.serving.at(key) : 0;
    const auto pit = planned_counts.find(key);
    const int n_planned = pit == planned_counts.end() ? 0 : pit->second;
    const double live_cap = n_live * m.sustainable_tps;
    const double planned_cap = n_planned * m.sustainable_tps;
    live_factor[key] = load <= live_cap ? 1.0 : (load > 0 ? live_cap / load : 1.0);
    planned_factor[key] = load <= planned_cap ? 1.0 : (load > 0 ? planned_cap / load : 1.0);
    usage.demand_tps[key] = load;
    usage.offered_tps[key] = std::min(load, live_cap);
    usage.utilization[key] = live_cap > 0 ? usage.offered_tps[key] / live_cap : 0.0;
    usage.served_token_seconds += usage.offered_tps[key] * bin_seconds;
  }

  for (const auto& [key, tuples] : by_model) {
    const double f = live_factor[key];
    const double fp = planned_factor[key];
    const ModelProfile& m = store.model(key);
    const int n_live = cluster.serving.count(key) ? cluster.serving.at(key) : 0;
    const double per_instance =
        n_live > 0 ? usage.offered_tps[key] / static_cast<double>(n_live) : 0.0;
    const LoadPoint perf = n_live > 0 ? perf_at_load(m, per_instance) : LoadPoint{};
    for (const auto& t : tuples) {
      const double served = t.request_rate * f * bin_seconds;
      usage.dropped += t.request_rate * (1.0 - f) * bin_seconds;
      usage.shadow_dropped += t.request_rate * (1.0 - fp) * bin_seconds;
      const SloSpec& slo = slos.at(t.pair);
      if (!slo.threshold) throw Error("unresolved SLO for " + t.pair.to_string());
      if (slo.type == SloType::latency) {
        const double est =
            perf.ttft_s +
            OptimizationInstance::capacity_tokens(*t.config) * perf.tpot_s;
        if (est > *slo.threshold + 1e-12) usage.violations += served;
      } else if (slo.type == SloType::accuracy) {
        if (t.config->accuracy < *slo.threshold - 1e-12) usage.violations += served;
      }
    }
  }

  // Energy and cost over every allocated instance: serving instances at their
  // operating point, spares and in-flight provisioning at idle power.
  for (const auto& key : cluster.known_models()) {
    const ModelProfile& m = store.model(key);
    const ResourceType& res = store.resource(m.resource_type);
    const int n_live = cluster.serving.count(key) ? cluster.serving.at(key) : 0;
    const int n_idle = (cluster.spare.count(key) ? cluster.spare.at(key) : 0) +
                       cluster.pending_count(key, false) + cluster.pending_count(key, true);
    if (n_live == 0 && n_idle == 0) continue;
    const double per_instance =
        n_live > 0 ? (usage.offered_tps.count(key) ? usage.offered_tps.at(key) : 0.0) /
                         static_cast<double>(n_live)
                   : 0.0;
    const double active_power = n_live > 0 ? perf_at_load(m, per_instance).power_w : 0.0;
    const double idle_power = perf_at_load(m, 0.0).power_w;
    const double watts =
        (static_cast<double>(n_live) * active_power + static_cast<double>(n_idle) * idle_power) *
        m.parallelism;
    usage.energy_kwh += watts * bin_seconds / 3.6e6;
    usage.cost += static_cast<double>(n_live + n_idle) * m.parallelism *
                  res.cost_per_unit_second * bin_seconds;
    usage.allocated_units[m.resource_type] +=
        static_cast<double>(n_live + n_idle) * m.parallelism;
    usage.capacity_token_seconds += static_cast<double>(n_live) * m.sustainable_tps * bin_seconds;
  }
  return usage;
}

// ---------------------------------------------------------------------------
// Simulation driver

struct SimPolicy {
  enum class Kind { static_plan, opt, opt_mult };
  Kind kind = Kind::opt_mult;
  std::map<std::string, int> static_counts;
  RoutingTable static_routing;

  static SimPolicy opt() { return {Kind::opt, {}, {}}; }
  static SimPolicy opt_mult() { return {Kind::opt_mult, {}, {}}; }
};

inline const char* sim_policy_name(SimPolicy::Kind k) {
  switch (k) {
    case SimPolicy::Kind::static_plan: return "static";
    case SimPolicy::Kind::opt: return "opt";
    default: return "opt_mult";
  }
}

struct SimConfig {
  double epoch_length_s = 3600.0;
  double autoscale_window_s = 60.0;
  double autoscale_threshold = 0.9;
  SimPolicy policy;
  Objective objective = Objective::min_cost;
  double buffer = 1.15;
  double provisioning_delay_s = 1200.0;
  double spare_fraction = 0.05;
  double ewma_alpha = 0.5;
  bool autoscaler_enabled = true;
  bool early_reopt_enabled = true;
  double early_reopt_factor = 1.25;  // observed peak / forecast peak trigger
  bool oracle_predictor = false;     // forecast := the epoch's actual demand
  bool record_bins = false;
  double solver_time_limit_s = 300.0;

  void validate(const DemandTrace& trace) const {
    if (autoscale_threshold <= 0.0 || autoscale_threshold > 1.0)
      throw ValidationError("autoscale_threshold must be in (0, 1]");
    if (epoch_length_s <= 0) throw ValidationError("epoch_length must be > 0");
    const double ratio = epoch_length_s / trace.resolution_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw ValidationError("epoch_length must be a multiple of the trace resolution");
    if (ewma_alpha <= 0 || ewma_alpha > 1) throw ValidationError("ewma alpha in (0,1]");
    if (spare_fraction < 0) throw ValidationError("spare_fraction must be >= 0");
  }
};

struct EpochMetrics {
  std::map<std::string, double> gpus_by_type;  // time-averaged allocated units
  double energy_kwh = 0.0;
  double cost = 0.0;
  double violations = 0.0;
  double dropped = 0.0;
  double shadow_dropped = 0.0;
  double total_requests = 0.0;
  bool degraded = false;  // solver infeasible; epoch served with prior plan
};

struct BinRecord {
  double t = 0.0;
  std::map<std::string, int> serving;
  std::map<std::string, int> idle;  // spares + pending
  std::map<std::string, double> offered_tps;
  double energy_kwh = 0.0;
  double cost = 0.0;
};

struct SimMetrics {
  std::vector<EpochMetrics> epochs;
  EpochMetrics totals;
  double under_prediction_fraction = 0.0;
  double mean_utilization = 0.0;
  std::vector<BinRecord> bins;  // populated when SimConfig::record_bins
};

namespace detail_sim {

inline OptimizationInstance build_epoch_instance(const ProfileStore& store,
                                                 const SloTierTable& tiers,
                                                 const std::vector<PairKey>& pairs,
                                                 const std::map<PairKey, PeakAvg>& forecast,
                                                 const SimConfig& cfg) {
  OptimizationInstance inst;
  inst.configs = store.workflows();
  inst.models = store.models();
  inst.resources = store.resources();
  inst.buffer = cfg.buffer;
  inst.objective = cfg.objective;
  inst.mode = cfg.policy.kind == SimPolicy::Kind::opt ? PlanMode::per_pair : PlanMode::joint;
  inst.solver_time_limit = cfg.solver_time_limit_s;
  for (const auto& key : pairs) {
    SloSpec slo = parse_slo_key(key.slo);
    if (!slo.threshold) slo.threshold = tiers.resolve(key.workflow, slo);
    PairDemand d;
    d.workflow = key.workflow;
    d.slo = slo;
    auto it = forecast.find(key);
    if (it != forecast.end()) {
      d.peak = it->second.peak;
      d.avg = it->second.avg;
    }
    inst.demand.push_back(std::move(d));
  }
  return inst;
}

}  // namespace detail_sim

// Runs an epoch-based solve (or reuses the policy's fixed plan), diffs the
// result against the cluster, and returns the plan driving the epoch.
// Exposed separately for unit testing; run_simulation drives it per epoch.
inline DeploymentPlan step_epoch(ClusterState& cluster, const OptimizationInstance& inst,
                                 const SimConfig& cfg, double now, bool* degraded) {
  if (degraded) *degraded = false;
  if (cfg.policy.kind == SimPolicy::Kind::static_plan) {
    DeploymentPlan plan;
    plan.status = PlanStatus::optimal;
    plan.instance_counts = cfg.policy.static_counts;
    apply_plan(cluster, plan.instance_counts, now);
    return plan;
  }
  DeploymentPlan plan = solve(inst);
  if (plan.status == PlanStatus::infeasible) {
    if (degraded) *degraded = true;
    return plan;  // serve the epoch with current capacity
  }
  apply_plan(cluster, plan.instance_counts, now);
  return plan;
}

inline SimMetrics run_simulation(const DemandTrace& trace, const SimConfig& cfg,
                                 const ProfileStore& store) {
  trace.validate();
  cfg.validate(trace);
  if (trace.num_bins() == 0) {
    SimMetrics empty;
    return empty;
  }
  const SloTierTable tiers = derive_slo_tiers(store.workflows(), store.models());
  const std::vector<PairKey> pairs = trace.pairs();
  std::map<PairKey, SloSpec> slos;
  for (const auto& key : pairs) {
    SloSpec slo = parse_slo_key(key.slo);
    if (!slo.threshold) slo.threshold = tiers.resolve(key.workflow, slo);
    slos[key] = slo;
  }

  const auto bins_per_epoch =
      static_cast<size_t>(std::llround(cfg.epoch_length_s / trace.resolution_s));
  const size_t num_epochs =
      (trace.num_bins() + bins_per_epoch - 1) / bins_per_epoch;

  ClusterState cluster;
  cluster.provisioning_delay = cfg.provisioning_delay_s;
  cluster.spare_fraction = cfg.spare_fraction;

  PredictorState predictor;
  predictor.alpha = cfg.ewma_alpha;
  predictor.forecast = aggregate_epoch(trace, 0, cfg.epoch_length_s);  // bootstrap

  SimMetrics metrics;
  RoutingTable routing = cfg.policy.static_routing;
  std::map<std::string, int> planned_counts = cfg.policy.static_counts;

  // The initial plan is provisioned before the simulated window starts.
  bool first_apply = true;

  for (size_t e = 0; e < num_epochs; ++e) {
    const double epoch_start = static_cast<double>(e) * cfg.epoch_length_s;
    std::map<PairKey, PeakAvg> forecast =
        cfg.oracle_predictor ? aggregate_epoch(trace, e, cfg.epoch_length_s) : predictor.forecast;

    EpochMetrics em;
    OptimizationInstance inst =
        detail_sim::build_epoch_instance(store, tiers, pairs, forecast, cfg);
    bool degraded = false;
    if (first_apply) {
      // Pre-provisioned start: no delay on the first plan.
      ClusterState boot = cluster;
      boot.provisioning_delay = 0;
      DeploymentPlan plan = step_epoch(boot, inst, cfg, epoch_start, &degraded);
      boot.provisioning_delay = cfg.provisioning_delay_s;
      cluster = boot;
      if (!degraded && plan.status != PlanStatus::infeasible) {
        if (cfg.policy.kind != SimPolicy::Kind::static_plan) {
          routing = routing_from_plan(plan, pairs);
          planned_counts = plan.instance_counts;
        }
      }
      first_apply = false;
    } else {
      DeploymentPlan plan = step_epoch(cluster, inst, cfg, epoch_start, &degraded);
      if (!degraded && plan.status != PlanStatus::infeasible &&
          cfg.policy.kind != SimPolicy::Kind::static_plan) {
        routing = routing_from_plan(plan, pairs);
        planned_counts = plan.instance_counts;
      }
    }
    em.degraded = degraded;

    // Intra-epoch bin loop.
    std::map<std::string, double> over_threshold_s;
    std::map<PairKey, double> peak_so_far, sum_so_far;
    bool reoptimized = false;
    const size_t bin_begin = e * bins_per_epoch;
    const size_t bin_end = std::min(trace.num_bins(), bin_begin + bins_per_epoch);
    std::map<std::string, double> gpu_seconds;

    for (size_t b = bin_begin; b < bin_end; ++b) {
      const double t = static_cast<double>(b) * trace.resolution_s;
      cluster.activate_ready(t);

      std::map<PairKey, double> bin_counts;
      for (const auto& [key, series] : trace.series) bin_counts[key] = series[b];

      BinUsage usage = route_and_account(cluster, routing, bin_counts, slos, store,
                                         trace.resolution_s, planned_counts);
      em.energy_kwh += usage.energy_kwh;
      em.cost += usage.cost;
      em.violations += usage.violations;
      em.dropped += usage.dropped;
      em.shadow_dropped += usage.shadow_dropped;
      em.total_requests += usage.total_requests;
      metrics.mean_utilization += usage.served_token_seconds;  // temporary numerator
      metrics.under_prediction_fraction += usage.capacity_token_seconds;  // temporary denominator
      for (const auto& [res, units] : usage.allocated_units)
        gpu_seconds[res] += units * trace.resolution_s;

      if (cfg.record_bins) {
        BinRecord rec;
        rec.t = t;
        rec.serving = cluster.serving;
        for (const auto& key : cluster.known_models()) {
          const int idle = (cluster.spare.count(key) ? cluster.spare.at(key) : 0) +
                           cluster.pending_count(key, false) + cluster.pending_count(key, true);
          if (idle > 0) rec.idle[key] = idle;
        }
        rec.offered_tps = usage.offered_tps;
        rec.energy_kwh = usage.energy_kwh;
        rec.cost = usage.cost;
        metrics.bins.push_back(std::move(rec));
      }

      // Auto-scaler: sustained utilization above threshold over a window.
      if (cfg.autoscaler_enabled) {
        std::map<std::string, double> hot;
        for (const auto& [key, util] : usage.utilization) {
          if (util > cfg.autoscale_threshold) {
            over_threshold_s[key] += trace.resolution_s;
            if (over_threshold_s[key] >= cfg.autoscale_window_s - 1e-9) {
              // Scale from the unclipped routed demand, not the capped load.
              hot[key] = usage.demand_tps.count(key) ? usage.demand_tps.at(key) : 0.0;
              over_threshold_s[key] = 0.0;
            }
          } else {
            over_threshold_s[key] = 0.0;
          }
        }
        std::erase_if(over_threshold_s, [&](const auto& kv) {
          return usage.utilization.count(kv.first) == 0;
        });
        if (!hot.empty()) autoscale(cluster, hot, store, cfg.autoscale_threshold, t);
      }

      // Early re-optimization when demand runs far past the forecast.
      if (cfg.early_reopt_enabled && !reoptimized &&
          cfg.policy.kind != SimPolicy::Kind::static_plan) {
        bool trigger = false;
        for (const auto& [key, count] : bin_counts) {
          const double rate = count / trace.resolution_s;
          peak_so_far[key] = std::max(peak_so_far[key], rate);
          sum_so_far[key] += rate;
          const auto fit = forecast.find(key);
          const double fpeak = fit != forecast.end() ? fit->second.peak : 0.0;
          if (peak_so_far[key] > cfg.early_reopt_factor * fpeak && peak_so_far[key] > 0)
            trigger = true;
        }
        if (trigger) {
          reoptimized = true;
          std::map<PairKey, PeakAvg> revised = forecast;
          const double bins_seen = static_cast<double>(b - bin_begin + 1);
          for (auto& [key, pa] : revised) {
            pa.peak = std::max(pa.peak, peak_so_far[key]);
            pa.avg = std::max(pa.avg, sum_so_far[key] / bins_seen);
          }
          OptimizationInstance revised_inst =
              detail_sim::build_epoch_instance(store, tiers, pairs, revised, cfg);
          bool redegraded = false;
          DeploymentPlan plan = step_epoch(cluster, revised_inst, cfg, t, &redegraded);
          if (!redegraded && plan.status != PlanStatus::infeasible) {
            routing = routing_from_plan(plan, pairs);
            // planned_counts stays the epoch-start plan: the shadow metric
            // measures epoch-boundary forecast quality.
          }
        }
      } else if (cfg.early_reopt_enabled) {
        for (const auto& [key, count] : bin_counts) {
          const double rate = count / trace.resolution_s;
          peak_so_far[key] = std::max(peak_so_far[key], rate);
          sum_so_far[key] += rate;
        }
      }
    }

    const double epoch_seconds = static_cast<double>(bin_end - bin_begin) * trace.resolution_s;
    for (const auto& [res, sec] : gpu_seconds) em.gpus_by_type[res] = sec / epoch_seconds;

    metrics.epochs.push_back(em);

    // Feed the epoch's observation into the predictor for the next epoch.
    if (!cfg.oracle_predictor) {
      predictor = ewma_predict(predictor, aggregate_epoch(trace, e, cfg.epoch_length_s));
    }
  }

  // Fold temporaries into the proper ratios and totals.
  const double served_tokens = metrics.mean_utilization;
  const double capacity_tokens = metrics.under_prediction_fraction;
  metrics.mean_utilization = capacity_tokens > 0 ? served_tokens / capacity_tokens : 0.0;
  metrics.under_prediction_fraction = 0.0;

  for (const auto& em : metrics.epochs) {
    metrics.totals.energy_kwh += em.energy_kwh;
    metrics.totals.cost += em.cost;
    metrics.totals.violations += em.violations;
    metrics.totals.dropped += em.dropped;
    metrics.totals.shadow_dropped += em.shadow_dropped;
    metrics.totals.total_requests += em.total_requests;
    for (const auto& [res, g] : em.gpus_by_type) metrics.totals.gpus_by_type[res] += g;
  }
  if (metrics.totals.total_requests > 0)
    metrics.under_prediction_fraction =
        metrics.totals.shadow_dropped / metrics.totals.total_requests;
  return metrics;
}

// ---------------------------------------------------------------------------
// Optimization-epoch sensitivity sweep

struct SweepRow {
  double interval_s = 0.0;
  double total_cost = 0.0;
  double mean_utilization = 0.0;
  double under_prediction_fraction = 0.0;
};

// One full simulation per interval, auto-scaler and early re-optimization
// disabled so the under-prediction metric isolates epoch-boundary forecasting.
inline std::vector<SweepRow> epoch_sensitivity_sweep(const DemandTrace& trace,
                                                     const std::vector<double>& intervals,
                                                     const SimConfig& base_cfg,
                                                     const ProfileStore& store) {
  for (double iv : intervals) {
    const double ratio = iv / trace.resolution_s;
    if (iv <= 0 || std::abs(ratio - std::round(ratio)) > 1e-9)
      throw ValidationError("sweep interval " + std::to_string(iv) +
                            " is not a multiple of the trace resolution");
  }
  std::vector<std::future<SweepRow>> futures;
  for (double iv : intervals) {
    futures.push_back(std::async(std::launch::async, [&, iv]() {
      SimConfig cfg = base_cfg;
      cfg.epoch_length_s = iv;
      cfg.autoscaler_enabled = false;
      cfg.early_reopt_enabled = false;
      SimMetrics m = run_simulation(trace, cfg, store);
      return SweepRow{iv, m.totals.cost, m.mean_utilization, m.under_prediction_fraction};
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

}  // namespace flowplan

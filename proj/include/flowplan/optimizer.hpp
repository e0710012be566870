#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flowplan/common.hpp"
#include "flowplan/exact_lp.hpp"
#include "flowplan/profiles.hpp"
#include "flowplan/simplex.hpp"

namespace flowplan {

enum class Objective { min_energy, min_cost, max_accuracy_under_budget };
enum class PlanMode { per_pair, joint };
enum class PlanStatus { optimal, infeasible, time_limit };

inline const char* objective_name(Objective o) {
  switch (o) {
    case Objective::min_energy: return "min_energy";
    case Objective::min_cost: return "min_cost";
    default: return "max_accuracy_under_budget";
  }
}

inline Objective parse_objective(const std::string& s) {
  if (s == "min_energy" || s == "energy") return Objective::min_energy;
  if (s == "min_cost" || s == "cost") return Objective::min_cost;
  if (s == "max_accuracy_under_budget" || s == "accuracy") return Objective::max_accuracy_under_budget;
  throw ParseError("unknown objective: " + s);
}

inline const char* plan_mode_name(PlanMode m) {
  return m == PlanMode::per_pair ? "per_pair" : "joint";
}

inline PlanMode parse_plan_mode(const std::string& s) {
  if (s == "per_pair" || s == "opt") return PlanMode::per_pair;
  if (s == "joint" || s == "opt_mult" || s == "opt-mult") return PlanMode::joint;
  throw ParseError("unknown mode: " + s);
}

inline const char* plan_status_name(PlanStatus s) {
  switch (s) {
    case PlanStatus::optimal: return "optimal";
    case PlanStatus::infeasible: return "infeasible";
    default: return "time_limit";
  }
}

// One (workflow, SLO) demand pair. slo.threshold must be resolved before
// solving; tier names are kept for reporting.
struct PairDemand {
  std::string workflow;
  SloSpec slo;
  double peak = 0.0;  // requests/second
  double avg = 0.0;

  std::string key() const { return workflow + "#" + slo.key(); }
};

struct OptimizationInstance {
  std::vector<WorkflowConfig> configs;
  std::vector<ModelProfile> models;
  std::vector<ResourceType> resources;
  std::vector<PairDemand> demand;
  std::map<std::string, double> cost_slo;  // workflow -> tau_cost ($/request)
  double buffer = 1.15;                    // alpha
  double epsilon = 0.001;                  // accuracy-objective cost weight
  double solver_time_limit = 300.0;        // seconds
  Objective objective = Objective::min_energy;
  PlanMode mode = PlanMode::joint;

  const ResourceType& resource_of(const ModelProfile& m) const {
    for (const auto& r : resources)
      if (r.name == m.resource_type) return r;
    throw ValidationError("model " + m.key() + " references unknown resource " + m.resource_type);
  }

  double total_avg_demand() const {
    double sum = 0.0;
    for (const auto& d : demand) sum += d.avg;
    return sum;
  }

  // Eq-style scalars: p95 tokens guard capacity and latency, mean tokens
  // price average spend.
  static double capacity_tokens(const WorkflowConfig& c) { return c.tokens_per_request.p95; }
  static double cost_tokens(const WorkflowConfig& c) { return c.tokens_per_request.mean; }

  void validate() const {
    if (buffer < 1.0) throw ValidationError("buffer factor must be >= 1");
    if (epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
    if (solver_time_limit <= 0.0) throw ValidationError("solver_time_limit must be > 0");
    for (const auto& r : resources) flowplan::validate(r);
    for (const auto& m : models) {
      flowplan::validate(m);
      resource_of(m);
    }
    for (const auto& c : configs) flowplan::validate(c);
    std::set<std::string> pair_keys;
    for (const auto& d : demand) {
      if (d.peak < 0 || d.avg < 0)
        throw ValidationError("pair " + d.key() + ": negative demand");
      if (d.avg > d.peak + 1e-12)
        throw ValidationError("pair " + d.key() + ": lambda_avg exceeds lambda_peak");
      if (!d.slo.threshold)
        throw ValidationError("pair " + d.key() + ": SLO threshold not resolved");
      if (!pair_keys.insert(d.key()).second)
        throw ValidationError("duplicate demand pair: " + d.key());
    }
    for (const auto& [wf, tau] : cost_slo)
      if (tau < 0) throw ValidationError("cost SLO for " + wf + " is negative");
  }
};

struct Allocation {
  int pair = 0;  // index into instance demand
  std::string config_id;
  std::string model_key;
  double rate = 0.0;  // requests/second
};

struct DeploymentPlan {
  PlanStatus status = PlanStatus::infeasible;
  std::map<std::string, int> instance_counts;  // model key -> n_m
  std::vector<Allocation> alloc_peak;
  std::vector<Allocation> alloc_avg;
  double objective_value = 0.0;
  double gap = 0.0;  // relative optimality gap when status == time_limit
  std::string infeasible_reason;

  int count(const std::string& model_key) const {
    auto it = instance_counts.find(model_key);
    return it == instance_counts.end() ? 0 : it->second;
  }
};

enum class ConstraintId {
  demand_peak,
  demand_avg,
  capacity,
  slo_accuracy,
  slo_latency,
  cost_budget,
  resource_budget
};

inline const char* constraint_id_name(ConstraintId id) {
  switch (id) {
    case ConstraintId::demand_peak: return "demand_peak";
    case ConstraintId::demand_avg: return "demand_avg";
    case ConstraintId::capacity: return "capacity";
    case ConstraintId::slo_accuracy: return "slo_accuracy";
    case ConstraintId::slo_latency: return "slo_latency";
    case ConstraintId::cost_budget: return "cost_budget";
    default: return "resource_budget";
  }
}

struct ConstraintViolation {
  ConstraintId id;
  std::string tuple;
  double slack = 0.0;  // positive violation magnitude in the constraint's units
};

// ---------------------------------------------------------------------------
// SLO filtering (paper's pre-solve tuple elimination)

struct AdmissibleTuple {
  int pair = 0;
  int config = 0;
  int model = 0;
};

struct FilterReport {
  std::vector<AdmissibleTuple> tuples;
  std::vector<std::pair<int, std::string>> empty_pairs;  // pair index -> diagnosis
};

// Latency screen: TTFT + t_c * TPOT at sustainable load, tokens at p95.
inline double llm_latency_scalar(const WorkflowConfig& c, const ModelProfile& m) {
  return m.ttft_at_sustainable() + OptimizationInstance::capacity_tokens(c) * m.tpot_at_sustainable();
}

inline FilterReport filter_feasible(const OptimizationInstance& inst) {
  FilterReport report;
  for (size_t p = 0; p < inst.demand.size(); ++p) {
    const auto& pair = inst.demand[p];
    if (pair.peak <= 0.0 && pair.avg <= 0.0) continue;
    const double tau = *pair.slo.threshold;
    int dropped_compat = 0, dropped_acc = 0, dropped_lat = 0;
    size_t admitted_before = report.tuples.size();
    for (size_t c = 0; c < inst.configs.size(); ++c) {
      const auto& cfg = inst.configs[c];
      if (cfg.workflow_name != pair.workflow) continue;
      for (size_t m = 0; m < inst.models.size(); ++m) {
        const auto& model = inst.models[m];
        if (!cfg.compatible_with(model.model_name)) {
          ++dropped_compat;
          continue;
        }
        if (pair.slo.type == SloType::accuracy && cfg.accuracy < tau) {
          ++dropped_acc;
          continue;
        }
        if (pair.slo.type == SloType::latency && llm_latency_scalar(cfg, model) > tau) {
          ++dropped_lat;
          continue;
        }
        report.tuples.push_back(
            {static_cast<int>(p), static_cast<int>(c), static_cast<int>(m)});
      }
    }
    if (report.tuples.size() == admitted_before) {
      std::string why = "no admissible (config, model) tuples";
      if (dropped_acc > 0)
        why += "; accuracy filter dropped " + std::to_string(dropped_acc);
      if (dropped_lat > 0)
        why += "; latency filter dropped " + std::to_string(dropped_lat);
      if (dropped_compat > 0)
        why += "; " + std::to_string(dropped_compat) + " incompatible";
      report.empty_pairs.emplace_back(static_cast<int>(p), why);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// MILP core shared by solve paths

namespace milp {

struct Problem {
  const OptimizationInstance* inst = nullptr;
  std::vector<AdmissibleTuple> tuples;
  std::vector<int> model_index;        // instance model indices, sorted by key
  std::map<int, int> model_var;        // instance model index -> position in model_index
  std::vector<long> upper_bound;       // per model_index entry
  double total_avg = 0.0;

  int num_tuples() const { return static_cast<int>(tuples.size()); }
  int num_models() const { return static_cast<int>(model_index.size()); }
  int xpeak_var(int t) const { return t; }
  int xavg_var(int t) const { return num_tuples() + t; }
  int n_var(int k) const { return 2 * num_tuples() + k; }
  int num_vars() const { return 2 * num_tuples() + num_models(); }

  const ModelProfile& model(int k) const {
    return inst->models[static_cast<size_t>(model_index[static_cast<size_t>(k)])];
  }
  const WorkflowConfig& config_of(const AdmissibleTuple& t) const {
    return inst->configs[static_cast<size_t>(t.config)];
  }
  const ModelProfile& model_of(const AdmissibleTuple& t) const {
    return inst->models[static_cast<size_t>(t.model)];
  }
};

// Objective coefficient on n_k for the instance-count objectives.
inline double n_weight(const OptimizationInstance& inst, const ModelProfile& m,
                       Objective objective) {
  switch (objective) {
    case Objective::min_energy: return m.energy_rate * m.parallelism;
    case Objective::min_cost:
      return m.parallelism * inst.resource_of(m).cost_per_unit_second;
    default: return 0.0;
  }
}

// Per-tuple average-allocation cost coefficient (Eq-6 style spend term).
inline double avg_cost_coef(const OptimizationInstance& inst, const WorkflowConfig& c,
                            const ModelProfile& m) {
  return OptimizationInstance::cost_tokens(c) / m.sustainable_tps * m.parallelism *
         inst.resource_of(m).cost_per_unit_second;
}

inline double cost_budget_rhs(const OptimizationInstance& inst) {
  double budget = 0.0;
  for (const auto& [wf, tau] : inst.cost_slo) {
    double sum_avg = 0.0;
    for (const auto& d : inst.demand)
      if (d.workflow == wf) sum_avg += d.avg;
    budget += tau * sum_avg;
  }
  return budget;
}

inline Problem build_problem(const OptimizationInstance& inst, const FilterReport& filter) {
  Problem prob;
  prob.inst = &inst;
  prob.tuples = filter.tuples;
  std::sort(prob.tuples.begin(), prob.tuples.end(),
            [&](const AdmissibleTuple& a, const AdmissibleTuple& b) {
              if (a.pair != b.pair) return a.pair < b.pair;
              const auto ak = inst.configs[static_cast<size_t>(a.config)].key();
              const auto bk = inst.configs[static_cast<size_t>(b.config)].key();
              if (ak != bk) return ak < bk;
              return inst.models[static_cast<size_t>(a.model)].key() <
                     inst.models[static_cast<size_t>(b.model)].key();
            });
  std::set<int> used;
  for (const auto& t : prob.tuples) used.insert(t.model);
  prob.model_index.assign(used.begin(), used.end());
  std::sort(prob.model_index.begin(), prob.model_index.end(), [&](int a, int b) {
    return inst.models[static_cast<size_t>(a)].key() < inst.models[static_cast<size_t>(b)].key();
  });
  for (size_t k = 0; k < prob.model_index.size(); ++k)
    prob.model_var[prob.model_index[k]] = static_cast<int>(k);
  prob.total_avg = inst.total_avg_demand();

  // n_k never usefully exceeds the buffered worst-case token demand it could
  // absorb, nor what the resource budget admits.
  prob.upper_bound.assign(prob.model_index.size(), 0);
  for (int k = 0; k < prob.num_models(); ++k) {
    const ModelProfile& m = prob.model(k);
    double token_need = 0.0;
    for (size_t p = 0; p < inst.demand.size(); ++p) {
      double max_tokens = 0.0;
      for (const auto& t : prob.tuples)
        if (t.model == prob.model_index[static_cast<size_t>(k)] &&
            t.pair == static_cast<int>(p))
          max_tokens = std::max(
              max_tokens, OptimizationInstance::capacity_tokens(prob.config_of(t)));
      token_need += inst.buffer * inst.demand[p].peak * max_tokens;
    }
    long ub = static_cast<long>(std::ceil(m.multiplex_factor * token_need / m.sustainable_tps));
    const ResourceType& res = inst.resource_of(m);
    if (m.parallelism > 0 && !std::isinf(res.capacity))
      ub = std::min(ub, static_cast<long>(res.capacity / m.parallelism));
    prob.upper_bound[static_cast<size_t>(k)] = std::max(0L, ub);
  }
  return prob;
}

// Shared constraint rows (everything except n bounds), double precision.
inline LinearProgram base_lp(const Problem& prob, Objective objective) {
  const auto& inst = *prob.inst;
  LinearProgram lp(prob.num_vars());

  // Demand windows, Eq (1)/(2): lambda <= sum x <= alpha * lambda.
  for (size_t p = 0; p < inst.demand.size(); ++p) {
    const auto& d = inst.demand[p];
    if (d.peak <= 0.0 && d.avg <= 0.0) continue;
    std::vector<std::pair<int, double>> peak_coeffs, avg_coeffs;
    for (int t = 0; t < prob.num_tuples(); ++t) {
      if (prob.tuples[static_cast<size_t>(t)].pair != static_cast<int>(p)) continue;
      peak_coeffs.emplace_back(prob.xpeak_var(t), 1.0);
      avg_coeffs.emplace_back(prob.xavg_var(t), 1.0);
    }
    lp.add_row(peak_coeffs, '>', d.peak);
    lp.add_row(peak_coeffs, '<', inst.buffer * d.peak);
    lp.add_row(avg_coeffs, '>', d.avg);
    lp.add_row(avg_coeffs, '<', inst.buffer * d.avg);
  }

  // Capacity with multiplexing, Eq (3): mu_m sum x_peak t_c <= n_m theta_m.
  for (int k = 0; k < prob.num_models(); ++k) {
    const ModelProfile& m = prob.model(k);
    std::vector<std::pair<int, double>> coeffs;
    for (int t = 0; t < prob.num_tuples(); ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      if (prob.model_var.at(tup.model) != k) continue;
      coeffs.emplace_back(prob.xpeak_var(t), m.multiplex_factor *
                                                 OptimizationInstance::capacity_tokens(
                                                     prob.config_of(tup)));
    }
    coeffs.emplace_back(prob.n_var(k), -m.sustainable_tps);
    lp.add_row(coeffs, '<', 0.0);
  }

  // Cost budget, Eq (6), only when a cost SLO is present.
  if (!inst.cost_slo.empty()) {
    std::vector<std::pair<int, double>> coeffs;
    for (int t = 0; t < prob.num_tuples(); ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      coeffs.emplace_back(prob.xavg_var(t),
                          avg_cost_coef(inst, prob.config_of(tup), prob.model_of(tup)));
    }
    lp.add_row(coeffs, '<', cost_budget_rhs(inst));
  }

  // Resource budgets, Eq (7).
  for (const auto& res : inst.resources) {
    if (std::isinf(res.capacity)) continue;
    std::vector<std::pair<int, double>> coeffs;
    for (int k = 0; k < prob.num_models(); ++k) {
      const ModelProfile& m = prob.model(k);
      if (m.resource_type == res.name && m.parallelism > 0)
        coeffs.emplace_back(prob.n_var(k), static_cast<double>(m.parallelism));
    }
    if (!coeffs.empty()) lp.add_row(coeffs, '<', res.capacity);
  }

  // Objective.
  if (objective == Objective::max_accuracy_under_budget) {
    const double lambda_total = prob.total_avg;
    for (int t = 0; t < prob.num_tuples(); ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      const double acc_term =
          lambda_total > 0 ? prob.config_of(tup).accuracy / lambda_total : 0.0;
      lp.set_objective(prob.xavg_var(t),
                       -acc_term + inst.epsilon *
                                       avg_cost_coef(inst, prob.config_of(tup),
                                                     prob.model_of(tup)));
    }
  } else {
    for (int k = 0; k < prob.num_models(); ++k)
      lp.set_objective(prob.n_var(k), n_weight(inst, prob.model(k), objective));
  }
  return lp;
}

struct BnbResult {
  bool feasible = false;
  bool timed_out = false;
  std::vector<long> n;          // per problem model
  std::vector<double> x;        // full variable vector at the incumbent
  double objective = 0.0;       // internal (minimization) objective
  double best_bound = -std::numeric_limits<double>::infinity();
};

// Depth-first branch and bound on the integer instance counts. extra_rows
// lets callers pin the objective during lexicographic tie-breaking.
class BranchAndBound {
 public:
  BranchAndBound(const Problem& prob, LinearProgram lp,
                 std::chrono::steady_clock::time_point deadline)
      : prob_(prob), lp_(std::move(lp)), deadline_(deadline) {}

  BnbResult run() {
    BnbResult best;
    best.objective = std::numeric_limits<double>::infinity();
    struct Node {
      std::vector<long> lo, hi;
    };
    std::vector<Node> stack;
    Node root;
    root.lo.assign(static_cast<size_t>(prob_.num_models()), 0);
    root.hi = prob_.upper_bound;
    stack.push_back(root);
    double global_lb = std::numeric_limits<double>::infinity();
    bool global_lb_set = false;

    while (!stack.empty()) {
      if (std::chrono::steady_clock::now() > deadline_) {
        best.timed_out = true;
        break;
      }
      Node node = stack.back();
      stack.pop_back();

      LpResult rel = solve_node(node);
      if (rel.status != LpStatus::optimal) continue;
      if (!global_lb_set) {
        global_lb = rel.objective;
        global_lb_set = true;
      }
      if (best.feasible && rel.objective >= best.objective - 1e-9 * std::max(1.0, std::abs(best.objective)))
        continue;

      int frac_k = -1;
      double frac_dist = 1e-6;
      for (int k = 0; k < prob_.num_models(); ++k) {
        const double v = rel.x[static_cast<size_t>(prob_.n_var(k))];
        const double dist = std::abs(v - std::round(v));
        if (dist > frac_dist) {
          frac_dist = dist;
          frac_k = k;
        }
      }
      if (frac_k < 0) {
        std::vector<long> n(static_cast<size_t>(prob_.num_models()));
        for (int k = 0; k < prob_.num_models(); ++k)
          n[static_cast<size_t>(k)] =
              std::lround(rel.x[static_cast<size_t>(prob_.n_var(k))]);
        if (!best.feasible ||
            rel.objective < best.objective - 1e-9 * std::max(1.0, std::abs(best.objective))) {
          best.feasible = true;
          best.n = n;
          best.x = rel.x;
          best.objective = rel.objective;
        }
        continue;
      }
      const double v = rel.x[static_cast<size_t>(prob_.n_var(frac_k))];
      Node up = node;
      up.lo[static_cast<size_t>(frac_k)] = static_cast<long>(std::floor(v)) + 1;
      Node down = node;
      down.hi[static_cast<size_t>(frac_k)] = static_cast<long>(std::floor(v));
      if (up.lo[static_cast<size_t>(frac_k)] <= up.hi[static_cast<size_t>(frac_k)])
        stack.push_back(up);
      if (down.lo[static_cast<size_t>(frac_k)] <= down.hi[static_cast<size_t>(frac_k)])
        stack.push_back(down);  // floor child explored first
    }
    best.best_bound = global_lb_set ? global_lb : -std::numeric_limits<double>::infinity();
    return best;
  }

 private:
  LpResult solve_node(const auto& node) {
    LinearProgram lp = lp_;
    for (int k = 0; k < prob_.num_models(); ++k) {
      const double lo = static_cast<double>(node.lo[static_cast<size_t>(k)]);
      const double hi = static_cast<double>(node.hi[static_cast<size_t>(k)]);
      if (lo > 0) lp.add_row({{prob_.n_var(k), 1.0}}, '>', lo);
      lp.add_row({{prob_.n_var(k), 1.0}}, '<', hi);
    }
    return solve_lp(lp);
  }

  const Problem& prob_;
  LinearProgram lp_;
  std::chrono::steady_clock::time_point deadline_;
};

// Exact-arithmetic allocation polish: with n fixed, recompute x so the plan
// satisfies the validator's 1e-9 tolerances regardless of simplex roundoff.
inline bool exact_allocation(const Problem& prob, const std::vector<long>& n,
                             Objective objective, std::vector<double>* xpeak,
                             std::vector<double>* xavg, double* objective13) {
  const auto& inst = *prob.inst;
  const int T = prob.num_tuples();
  ExactLinearProgram lp(2 * T);
  for (size_t p = 0; p < inst.demand.size(); ++p) {
    const auto& d = inst.demand[p];
    if (d.peak <= 0.0 && d.avg <= 0.0) continue;
    std::vector<std::pair<int, mpq_class>> pc, ac;
    for (int t = 0; t < T; ++t) {
      if (prob.tuples[static_cast<size_t>(t)].pair != static_cast<int>(p)) continue;
      pc.emplace_back(t, 1);
      ac.emplace_back(T + t, 1);
    }
    lp.add_row(pc, '>', mpq_class(d.peak));
    lp.add_row(pc, '<', mpq_class(inst.buffer) * mpq_class(d.peak));
    lp.add_row(ac, '>', mpq_class(d.avg));
    lp.add_row(ac, '<', mpq_class(inst.buffer) * mpq_class(d.avg));
  }
  for (int k = 0; k < prob.num_models(); ++k) {
    const ModelProfile& m = prob.model(k);
    std::vector<std::pair<int, mpq_class>> coeffs;
    for (int t = 0; t < T; ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      if (prob.model_var.at(tup.model) != k) continue;
      coeffs.emplace_back(t, mpq_class(m.multiplex_factor) *
                                 mpq_class(OptimizationInstance::capacity_tokens(
                                     prob.config_of(tup))));
    }
    lp.add_row(coeffs, '<',
               mpq_class(n[static_cast<size_t>(k)]) * mpq_class(m.sustainable_tps));
  }
  if (!inst.cost_slo.empty()) {
    std::vector<std::pair<int, mpq_class>> coeffs;
    for (int t = 0; t < T; ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      coeffs.emplace_back(T + t,
                          mpq_class(avg_cost_coef(inst, prob.config_of(tup), prob.model_of(tup))));
    }
    lp.add_row(coeffs, '<', mpq_class(cost_budget_rhs(inst)));
  }
  if (objective == Objective::max_accuracy_under_budget && prob.total_avg > 0) {
    for (int t = 0; t < T; ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      mpq_class coef = -mpq_class(prob.config_of(tup).accuracy) / mpq_class(prob.total_avg);
      coef += mpq_class(inst.epsilon) *
              mpq_class(avg_cost_coef(inst, prob.config_of(tup), prob.model_of(tup)));
      lp.set_objective(T + t, coef);
    }
  }
  ExactLpResult res = solve_exact_lp(lp);
  if (res.status != LpStatus::optimal) return false;
  xpeak->assign(static_cast<size_t>(T), 0.0);
  xavg->assign(static_cast<size_t>(T), 0.0);
  for (int t = 0; t < T; ++t) {
    (*xpeak)[static_cast<size_t>(t)] = res.x[static_cast<size_t>(t)].get_d();
    (*xavg)[static_cast<size_t>(t)] = res.x[static_cast<size_t>(T + t)].get_d();
  }
  if (objective13) *objective13 = -res.objective.get_d();
  return true;
}

}  // namespace milp

// ---------------------------------------------------------------------------
// solve / brute_force_solve

namespace detail_opt {

inline DeploymentPlan make_infeasible(const OptimizationInstance& inst,
                                      const FilterReport& filter) {
  DeploymentPlan plan;
  plan.status = PlanStatus::infeasible;
  for (const auto& [p, why] : filter.empty_pairs) {
    plan.infeasible_reason += (plan.infeasible_reason.empty() ? "" : "; ") +
                              inst.demand[static_cast<size_t>(p)].key() + ": " + why;
  }
  if (plan.infeasible_reason.empty()) plan.infeasible_reason = "no feasible assignment";
  return plan;
}

inline void fill_allocations(const milp::Problem& prob, const std::vector<double>& xpeak,
                             const std::vector<double>& xavg, DeploymentPlan* plan) {
  for (int t = 0; t < prob.num_tuples(); ++t) {
    const auto& tup = prob.tuples[static_cast<size_t>(t)];
    const auto& cfg = prob.config_of(tup);
    const auto& mdl = prob.model_of(tup);
    if (xpeak[static_cast<size_t>(t)] > 1e-12)
      plan->alloc_peak.push_back(
          {tup.pair, cfg.config_id, mdl.key(), xpeak[static_cast<size_t>(t)]});
    if (xavg[static_cast<size_t>(t)] > 1e-12)
      plan->alloc_avg.push_back(
          {tup.pair, cfg.config_id, mdl.key(), xavg[static_cast<size_t>(t)]});
  }
}

inline double plan_n_objective(const OptimizationInstance& inst, const DeploymentPlan& plan,
                               Objective objective) {
  double sum = 0.0;
  for (const auto& m : inst.models) {
    const int n = plan.count(m.key());
    if (n > 0) sum += n * milp::n_weight(inst, m, objective);
  }
  return sum;
}

// Eq-13 value of a plan's average allocations.
inline double plan_accuracy_objective(const OptimizationInstance& inst,
                                      const DeploymentPlan& plan) {
  const double lambda_total = inst.total_avg_demand();
  if (lambda_total <= 0) return 0.0;
  std::map<std::string, const WorkflowConfig*> cfg_by_id;
  for (const auto& c : inst.configs) cfg_by_id[c.key()] = &c;
  std::map<std::string, const ModelProfile*> model_by_key;
  for (const auto& m : inst.models) model_by_key[m.key()] = &m;
  double acc = 0.0, cost = 0.0;
  for (const auto& a : plan.alloc_avg) {
    const auto& d = inst.demand[static_cast<size_t>(a.pair)];
    const WorkflowConfig* c = cfg_by_id.at(d.workflow + "/" + a.config_id);
    const ModelProfile* m = model_by_key.at(a.model_key);
    acc += a.rate * c->accuracy;
    cost += a.rate * milp::avg_cost_coef(inst, *c, *m);
  }
  return acc / lambda_total - inst.epsilon * cost;
}

inline double plan_objective(const OptimizationInstance& inst, const DeploymentPlan& plan,
                             Objective objective) {
  if (objective == Objective::max_accuracy_under_budget)
    return plan_accuracy_objective(inst, plan);
  return plan_n_objective(inst, plan, objective);
}

inline DeploymentPlan solve_single(const OptimizationInstance& inst,
                                   std::chrono::steady_clock::time_point deadline) {
  const FilterReport filter = filter_feasible(inst);
  if (!filter.empty_pairs.empty()) return make_infeasible(inst, filter);

  milp::Problem prob = milp::build_problem(inst, filter);
  DeploymentPlan plan;

  if (prob.num_tuples() == 0) {  // zero demand everywhere
    plan.status = PlanStatus::optimal;
    plan.objective_value = 0.0;
    return plan;
  }

  const bool maximize = inst.objective == Objective::max_accuracy_under_budget;
  LinearProgram lp = milp::base_lp(prob, inst.objective);
  milp::BranchAndBound bnb(prob, lp, deadline);
  milp::BnbResult res = bnb.run();

  if (!res.feasible) {
    if (res.timed_out) {
      plan.status = PlanStatus::time_limit;
      plan.gap = std::numeric_limits<double>::infinity();
      plan.infeasible_reason = "time limit reached before any incumbent";
      return plan;
    }
    plan.status = PlanStatus::infeasible;
    plan.infeasible_reason = "no integer assignment satisfies the constraints";
    return plan;
  }

  std::vector<long> n = res.n;
  if (!res.timed_out) {
    // Lexicographic tie-break: among equal-objective optima prefer the
    // smallest n vector in model-key order.
    const double vstar = res.objective;
    const double tol = 1e-7 * std::max(1.0, std::abs(vstar));
    LinearProgram lex_base = milp::base_lp(prob, inst.objective);
    // Pin the optimum. base_lp's objective is the internal minimization form.
    {
      std::vector<std::pair<int, double>> coeffs;
      for (int v = 0; v < lex_base.num_vars(); ++v) {
        const double c = lex_base.objective()[static_cast<size_t>(v)];
        if (c != 0.0) coeffs.emplace_back(v, c);
      }
      if (!coeffs.empty()) lex_base.add_row(coeffs, '<', vstar + tol);
    }
    for (int k = 0; k < prob.num_models() && std::chrono::steady_clock::now() <= deadline; ++k) {
      LinearProgram lex = lex_base;
      for (int v = 0; v < lex.num_vars(); ++v) lex.set_objective(v, 0.0);
      lex.set_objective(prob.n_var(k), 1.0);
      for (int kk = 0; kk < k; ++kk) {
        lex.add_row({{prob.n_var(kk), 1.0}}, '=',
                    static_cast<double>(n[static_cast<size_t>(kk)]));
      }
      milp::Problem subprob = prob;  // same bounds
      milp::BranchAndBound lex_bnb(subprob, lex, deadline);
      milp::BnbResult lex_res = lex_bnb.run();
      if (!lex_res.feasible || lex_res.timed_out) break;
      n[static_cast<size_t>(k)] = lex_res.n[static_cast<size_t>(k)];
    }
  }

  plan.status = res.timed_out ? PlanStatus::time_limit : PlanStatus::optimal;
  for (int k = 0; k < prob.num_models(); ++k)
    plan.instance_counts[prob.model(k).key()] = static_cast<int>(n[static_cast<size_t>(k)]);

  // Exact allocation polish at the final n.
  std::vector<double> xpeak, xavg;
  double obj13 = 0.0;
  if (milp::exact_allocation(prob, n, inst.objective, &xpeak, &xavg, &obj13)) {
    fill_allocations(prob, xpeak, xavg, &plan);
    plan.objective_value = maximize ? obj13
                                    : plan_n_objective(inst, plan, inst.objective);
  } else {
    // Exact polish should never fail at a feasible n; keep the search x.
    xpeak.assign(static_cast<size_t>(prob.num_tuples()), 0.0);
    xavg.assign(static_cast<size_t>(prob.num_tuples()), 0.0);
    for (int t = 0; t < prob.num_tuples(); ++t) {
      xpeak[static_cast<size_t>(t)] = res.x[static_cast<size_t>(prob.xpeak_var(t))];
      xavg[static_cast<size_t>(t)] = res.x[static_cast<size_t>(prob.xavg_var(t))];
    }
    fill_allocations(prob, xpeak, xavg, &plan);
    plan.objective_value = maximize ? -res.objective : res.objective;
  }
  if (res.timed_out) {
    const double incumbent = maximize ? -res.objective : res.objective;
    const double bound = maximize ? -res.best_bound : res.best_bound;
    plan.gap = std::abs(incumbent - bound) / std::max(1.0, std::abs(incumbent));
  }
  return plan;
}

}  // namespace detail_opt

// Exactly solves the allocation MILP. per_pair mode solves every demand pair
// with private instances and reports the union; joint mode shares one
// instance vector across all pairs.
inline DeploymentPlan solve(const OptimizationInstance& inst) {
  inst.validate();
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(inst.solver_time_limit));
  if (inst.mode == PlanMode::joint) return detail_opt::solve_single(inst, deadline);

  DeploymentPlan combined;
  combined.status = PlanStatus::optimal;
  for (size_t p = 0; p < inst.demand.size(); ++p) {
    OptimizationInstance sub = inst;
    sub.mode = PlanMode::joint;
    sub.demand = {inst.demand[p]};
    DeploymentPlan part = detail_opt::solve_single(sub, deadline);
    if (part.status == PlanStatus::infeasible) {
      part.infeasible_reason =
          inst.demand[p].key() + ": " + (part.infeasible_reason.empty() ? "infeasible"
                                                                        : part.infeasible_reason);
      return part;
    }
    if (part.status == PlanStatus::time_limit) combined.status = PlanStatus::time_limit;
    combined.gap = std::max(combined.gap, part.gap);
    for (const auto& [key, count] : part.instance_counts)
      combined.instance_counts[key] += count;
    for (auto a : part.alloc_peak) {
      a.pair = static_cast<int>(p);
      combined.alloc_peak.push_back(a);
    }
    for (auto a : part.alloc_avg) {
      a.pair = static_cast<int>(p);
      combined.alloc_avg.push_back(a);
    }
  }
  combined.objective_value = detail_opt::plan_objective(inst, combined, inst.objective);
  return combined;
}

// Enumerates integer instance vectors and checks allocation feasibility with
// the exact rational LP. Independent of the branch-and-bound path; used as
// the correctness oracle.
inline DeploymentPlan brute_force_solve(const OptimizationInstance& inst) {
  inst.validate();
  if (inst.mode == PlanMode::per_pair) {
    DeploymentPlan combined;
    combined.status = PlanStatus::optimal;
    for (size_t p = 0; p < inst.demand.size(); ++p) {
      OptimizationInstance sub = inst;
      sub.mode = PlanMode::joint;
      sub.demand = {inst.demand[p]};
      DeploymentPlan part = brute_force_solve(sub);
      if (part.status != PlanStatus::optimal) return part;
      for (const auto& [key, count] : part.instance_counts)
        combined.instance_counts[key] += count;
      for (auto a : part.alloc_peak) {
        a.pair = static_cast<int>(p);
        combined.alloc_peak.push_back(a);
      }
      for (auto a : part.alloc_avg) {
        a.pair = static_cast<int>(p);
        combined.alloc_avg.push_back(a);
      }
    }
    combined.objective_value = detail_opt::plan_objective(inst, combined, inst.objective);
    return combined;
  }

  const FilterReport filter = filter_feasible(inst);
  if (!filter.empty_pairs.empty()) return detail_opt::make_infeasible(inst, filter);
  milp::Problem prob = milp::build_problem(inst, filter);
  DeploymentPlan plan;
  if (prob.num_tuples() == 0) {
    plan.status = PlanStatus::optimal;
    plan.objective_value = 0.0;
    return plan;
  }

  const int K = prob.num_models();
  const int T = prob.num_tuples();
  // A one-step-larger bound than the solver's keeps the oracle honest about
  // the solver's own bound derivation.
  std::vector<long> ub(prob.upper_bound);
  for (auto& u : ub) u += 1;
  double combos = 1.0;
  for (const auto& u : ub) combos *= static_cast<double>(u + 1);
  if (combos > 2e6)
    throw Error("brute_force_solve: instance exceeds enumeration bounds (" +
                std::to_string(static_cast<long long>(combos)) + " candidate vectors)");

  // Average-side allocations are independent of n; solve them once, exactly.
  ExactLinearProgram avg_lp(T);
  for (size_t p = 0; p < inst.demand.size(); ++p) {
    const auto& d = inst.demand[p];
    if (d.peak <= 0.0 && d.avg <= 0.0) continue;
    std::vector<std::pair<int, mpq_class>> coeffs;
    for (int t = 0; t < T; ++t)
      if (prob.tuples[static_cast<size_t>(t)].pair == static_cast<int>(p))
        coeffs.emplace_back(t, 1);
    avg_lp.add_row(coeffs, '>', mpq_class(d.avg));
    avg_lp.add_row(coeffs, '<', mpq_class(inst.buffer) * mpq_class(d.avg));
  }
  if (!inst.cost_slo.empty()) {
    std::vector<std::pair<int, mpq_class>> coeffs;
    for (int t = 0; t < T; ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      coeffs.emplace_back(
          t, mpq_class(milp::avg_cost_coef(inst, prob.config_of(tup), prob.model_of(tup))));
    }
    avg_lp.add_row(coeffs, '<', mpq_class(milp::cost_budget_rhs(inst)));
  }
  if (inst.objective == Objective::max_accuracy_under_budget && prob.total_avg > 0) {
    for (int t = 0; t < T; ++t) {
      const auto& tup = prob.tuples[static_cast<size_t>(t)];
      mpq_class coef = -mpq_class(prob.config_of(tup).accuracy) / mpq_class(prob.total_avg);
      coef += mpq_class(inst.epsilon) *
              mpq_class(milp::avg_cost_coef(inst, prob.config_of(tup), prob.model_of(tup)));
      avg_lp.set_objective(t, coef);
    }
  }
  ExactLpResult avg_res = solve_exact_lp(avg_lp);
  if (avg_res.status != LpStatus::optimal) {
    plan.status = PlanStatus::infeasible;
    plan.infeasible_reason = "average-demand allocation infeasible";
    return plan;
  }

  // Candidate n vectors in lexicographic order by model key.
  std::vector<std::vector<long>> candidates;
  std::vector<long> cur(static_cast<size_t>(K), 0);
  while (true) {
    candidates.push_back(cur);
    int k = K - 1;
    while (k >= 0) {
      if (++cur[static_cast<size_t>(k)] <= ub[static_cast<size_t>(k)]) break;
      cur[static_cast<size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
  }
  auto vector_objective = [&](const std::vector<long>& n) {
    double obj = 0.0;
    for (int k = 0; k < K; ++k)
      obj += static_cast<double>(n[static_cast<size_t>(k)]) *
             milp::n_weight(inst, prob.model(k), inst.objective);
    return obj;
  };
  if (inst.objective != Objective::max_accuracy_under_budget) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const std::vector<long>& a, const std::vector<long>& b) {
                       const double oa = vector_objective(a), ob = vector_objective(b);
                       if (oa != ob) return oa < ob;
                       return a < b;
                     });
  }

  auto within_budget = [&](const std::vector<long>& n) {
    for (const auto& res : inst.resources) {
      if (std::isinf(res.capacity)) continue;
      long used = 0;
      for (int k = 0; k < K; ++k)
        if (prob.model(k).resource_type == res.name)
          used += n[static_cast<size_t>(k)] * prob.model(k).parallelism;
      if (static_cast<double>(used) > res.capacity + 1e-9) return false;
    }
    return true;
  };

  // Necessary-condition screens before the exact LP: every pair needs at
  // least lambda * (its cheapest token count) of reachable capacity, and the
  // cluster as a whole at least the sum of those. Only provably infeasible
  // vectors are skipped.
  struct PairNeed {
    std::set<int> reachable;  // problem model indices
    double min_tokens = 0.0;
    double lambda = 0.0;
  };
  std::vector<PairNeed> needs;
  for (size_t p = 0; p < inst.demand.size(); ++p) {
    const auto& d = inst.demand[p];
    if (d.peak <= 0.0 && d.avg <= 0.0) continue;
    PairNeed need;
    need.lambda = d.peak;
    need.min_tokens = std::numeric_limits<double>::infinity();
    for (const auto& tup : prob.tuples) {
      if (tup.pair != static_cast<int>(p)) continue;
      need.reachable.insert(prob.model_var.at(tup.model));
      need.min_tokens = std::min(
          need.min_tokens, OptimizationInstance::capacity_tokens(prob.config_of(tup)));
    }
    needs.push_back(std::move(need));
  }
  auto plausibly_feasible = [&](const std::vector<long>& n) {
    double total_capacity = 0.0, total_need = 0.0;
    for (int k = 0; k < K; ++k)
      total_capacity += static_cast<double>(n[static_cast<size_t>(k)]) *
                        prob.model(k).sustainable_tps / prob.model(k).multiplex_factor;
    for (const auto& need : needs) {
      double reachable_capacity = 0.0;
      for (int k : need.reachable)
        reachable_capacity += static_cast<double>(n[static_cast<size_t>(k)]) *
                              prob.model(k).sustainable_tps / prob.model(k).multiplex_factor;
      const double want = need.lambda * need.min_tokens;
      if (reachable_capacity < want - 1e-7 * std::max(1.0, want)) return false;
      total_need += want;
    }
    return total_capacity >= total_need - 1e-7 * std::max(1.0, total_need);
  };

  auto peak_feasible = [&](const std::vector<long>& n, std::vector<mpq_class>* witness) {
    ExactLinearProgram lp(T);
    for (size_t p = 0; p < inst.demand.size(); ++p) {
      const auto& d = inst.demand[p];
      if (d.peak <= 0.0 && d.avg <= 0.0) continue;
      std::vector<std::pair<int, mpq_class>> coeffs;
      for (int t = 0; t < T; ++t)
        if (prob.tuples[static_cast<size_t>(t)].pair == static_cast<int>(p))
          coeffs.emplace_back(t, 1);
      lp.add_row(coeffs, '>', mpq_class(d.peak));
      lp.add_row(coeffs, '<', mpq_class(inst.buffer) * mpq_class(d.peak));
    }
    for (int k = 0; k < K; ++k) {
      const ModelProfile& m = prob.model(k);
      std::vector<std::pair<int, mpq_class>> coeffs;
      for (int t = 0; t < T; ++t) {
        const auto& tup = prob.tuples[static_cast<size_t>(t)];
        if (prob.model_var.at(tup.model) != k) continue;
        coeffs.emplace_back(t, mpq_class(m.multiplex_factor) *
                                   mpq_class(OptimizationInstance::capacity_tokens(
                                       prob.config_of(tup))));
      }
      lp.add_row(coeffs, '<',
                 mpq_class(n[static_cast<size_t>(k)]) * mpq_class(m.sustainable_tps));
    }
    ExactLpResult res = solve_exact_lp(lp);
    if (res.status != LpStatus::optimal) return false;
    *witness = res.x;
    return true;
  };

  for (const auto& n : candidates) {
    if (!within_budget(n)) continue;
    if (!plausibly_feasible(n)) continue;
    std::vector<mpq_class> witness;
    if (!peak_feasible(n, &witness)) continue;
    plan.status = PlanStatus::optimal;
    for (int k = 0; k < K; ++k)
      plan.instance_counts[prob.model(k).key()] = static_cast<int>(n[static_cast<size_t>(k)]);
    std::vector<double> xpeak(static_cast<size_t>(T), 0.0), xavg(static_cast<size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) {
      xpeak[static_cast<size_t>(t)] = witness[static_cast<size_t>(t)].get_d();
      xavg[static_cast<size_t>(t)] = avg_res.x[static_cast<size_t>(t)].get_d();
    }
    detail_opt::fill_allocations(prob, xpeak, xavg, &plan);
    plan.objective_value = inst.objective == Objective::max_accuracy_under_budget
                               ? -avg_res.objective.get_d()
                               : vector_objective(n);
    return plan;
  }
  plan.status = PlanStatus::infeasible;
  plan.infeasible_reason = "no enumerated instance vector is feasible";
  return plan;
}

// ---------------------------------------------------------------------------
// Plan validation and reporting

inline std::vector<ConstraintViolation> validate_plan(const OptimizationInstance& inst,
                                                      const DeploymentPlan& plan) {
  constexpr double kTol = 1e-9;
  std::vector<ConstraintViolation> out;
  const FilterReport filter = filter_feasible(inst);
  std::set<std::string> admissible;
  for (const auto& t : filter.tuples) {
    admissible.insert(std::to_string(t.pair) + "|" +
                      inst.configs[static_cast<size_t>(t.config)].config_id + "|" +
                      inst.models[static_cast<size_t>(t.model)].key());
  }
  std::map<std::string, const WorkflowConfig*> cfg_by_key;
  for (const auto& c : inst.configs) cfg_by_key[c.key()] = &c;
  std::map<std::string, const ModelProfile*> model_by_key;
  for (const auto& m : inst.models) model_by_key[m.key()] = &m;

  auto tuple_name = [&](const Allocation& a) {
    return inst.demand[static_cast<size_t>(a.pair)].key() + "/" + a.config_id + "@" + a.model_key;
  };
  auto check_alloc_admissible = [&](const Allocation& a) {
    const std::string key = std::to_string(a.pair) + "|" + a.config_id + "|" + a.model_key;
    if (admissible.count(key)) return;
    const auto& d = inst.demand[static_cast<size_t>(a.pair)];
    const auto cit = cfg_by_key.find(d.workflow + "/" + a.config_id);
    const auto mit = model_by_key.find(a.model_key);
    double slack = 0.0;
    ConstraintId id =
        d.slo.type == SloType::latency ? ConstraintId::slo_latency : ConstraintId::slo_accuracy;
    if (cit != cfg_by_key.end() && mit != model_by_key.end() && d.slo.threshold) {
      if (d.slo.type == SloType::accuracy)
        slack = *d.slo.threshold - cit->second->accuracy;
      else if (d.slo.type == SloType::latency)
        slack = llm_latency_scalar(*cit->second, *mit->second) - *d.slo.threshold;
    }
    out.push_back({id, tuple_name(a), slack});
  };
  for (const auto& a : plan.alloc_peak)
    if (a.rate > kTol) check_alloc_admissible(a);
  for (const auto& a : plan.alloc_avg)
    if (a.rate > kTol) check_alloc_admissible(a);

  // Demand windows.
  for (size_t p = 0; p < inst.demand.size(); ++p) {
    const auto& d = inst.demand[p];
    double speak = 0.0, savg = 0.0;
    for (const auto& a : plan.alloc_peak)
      if (a.pair == static_cast<int>(p)) speak += a.rate;
    for (const auto& a : plan.alloc_avg)
      if (a.pair == static_cast<int>(p)) savg += a.rate;
    if (speak < d.peak - kTol)
      out.push_back({ConstraintId::demand_peak, d.key(), d.peak - speak});
    if (speak > inst.buffer * d.peak + kTol)
      out.push_back({ConstraintId::demand_peak, d.key(), speak - inst.buffer * d.peak});
    if (savg < d.avg - kTol)
      out.push_back({ConstraintId::demand_avg, d.key(), d.avg - savg});
    if (savg > inst.buffer * d.avg + kTol)
      out.push_back({ConstraintId::demand_avg, d.key(), savg - inst.buffer * d.avg});
  }

  // Capacity per model profile.
  for (const auto& m : inst.models) {
    double used = 0.0;
    for (const auto& a : plan.alloc_peak) {
      if (a.model_key != m.key()) continue;
      const auto& d = inst.demand[static_cast<size_t>(a.pair)];
      const auto cit = cfg_by_key.find(d.workflow + "/" + a.config_id);
      if (cit == cfg_by_key.end()) continue;
      used += m.multiplex_factor * a.rate * OptimizationInstance::capacity_tokens(*cit->second);
    }
    const double cap = plan.count(m.key()) * m.sustainable_tps;
    if (used > cap + kTol) out.push_back({ConstraintId::capacity, m.key(), used - cap});
  }

  // Cost budget.
  if (!inst.cost_slo.empty()) {
    double spend = 0.0;
    for (const auto& a : plan.alloc_avg) {
      const auto& d = inst.demand[static_cast<size_t>(a.pair)];
      const auto cit = cfg_by_key.find(d.workflow + "/" + a.config_id);
      const auto mit = model_by_key.find(a.model_key);
      if (cit == cfg_by_key.end() || mit == model_by_key.end()) continue;
      spend += a.rate * milp::avg_cost_coef(inst, *cit->second, *mit->second);
    }
    const double budget = milp::cost_budget_rhs(inst);
    if (spend > budget + kTol)
      out.push_back({ConstraintId::cost_budget, "total", spend - budget});
  }

  // Resource budgets; instance counts are integers, checked exactly.
  for (const auto& res : inst.resources) {
    if (std::isinf(res.capacity)) continue;
    long used = 0;
    for (const auto& m : inst.models)
      if (m.resource_type == res.name) used += static_cast<long>(plan.count(m.key())) * m.parallelism;
    if (static_cast<double>(used) > res.capacity + kTol)
      out.push_back({ConstraintId::resource_budget, res.name,
                     static_cast<double>(used) - res.capacity});
  }

  for (const auto& [key, n] : plan.instance_counts)
    if (n < 0) out.push_back({ConstraintId::resource_budget, key, static_cast<double>(-n)});
  return out;
}

struct PlanReport {
  std::map<std::string, double> gpus_by_type;  // resource units, sum n_m * g_m
  double energy_rate = 0.0;                    // kWh per hour at sustainable load
  double cost_rate = 0.0;                      // $ per second of allocation
  double mean_accuracy = 0.0;                  // Eq-13 accuracy fraction
};

inline PlanReport plan_report(const OptimizationInstance& inst, const DeploymentPlan& plan) {
  PlanReport rep;
  for (const auto& m : inst.models) {
    const int n = plan.count(m.key());
    if (n <= 0) continue;
    rep.gpus_by_type[m.resource_type] += static_cast<double>(n) * m.parallelism;
    rep.energy_rate += n * m.energy_rate * m.parallelism;
    rep.cost_rate += n * m.parallelism * inst.resource_of(m).cost_per_unit_second;
  }
  const double lambda_total = inst.total_avg_demand();
  if (lambda_total > 0) {
    std::map<std::string, const WorkflowConfig*> cfg_by_key;
    for (const auto& c : inst.configs) cfg_by_key[c.key()] = &c;
    double acc = 0.0;
    for (const auto& a : plan.alloc_avg) {
      const auto& d = inst.demand[static_cast<size_t>(a.pair)];
      auto cit = cfg_by_key.find(d.workflow + "/" + a.config_id);
      if (cit != cfg_by_key.end()) acc += a.rate * cit->second->accuracy;
    }
    rep.mean_accuracy = acc / lambda_total;
  }
  return rep;
}

}  // namespace flowplan

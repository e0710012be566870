// flowplan: plan and simulate resource allocation for multi-tenant agentic
// workflow serving. Subcommands: validate, plan, simulate, sweep, gen-trace,
// report.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowplan/compiler.hpp"
#include "flowplan/manifest.hpp"
#include "flowplan/optimizer.hpp"
#include "flowplan/plan_json.hpp"
#include "flowplan/profiles_json.hpp"
#include "flowplan/report.hpp"
#include "flowplan/sim.hpp"
#include "flowplan/trace.hpp"
#include "flowplan/version.hpp"

namespace fs = std::filesystem;
using namespace flowplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeLimit = 3;
constexpr int kExitInvalidInput = 4;

fs::path default_out_dir() {
  if (const char* env = std::getenv("FLOWPLAN_OUT_DIR")) return fs::path(env);
  return fs::path(".");
}

RunManifest make_manifest(const std::string& command, int argc, char** argv) {
  RunManifest m;
  m.command = command;
  for (int i = 0; i < argc; ++i) m.argv.emplace_back(argv[i]);
  return m;
}

ProfileStore load_store(const fs::path& dir) {
  auto [models, workflows] = load_profiles(dir / "models.json", dir / "workflows.json");
  std::vector<ResourceType> resources;
  if (fs::exists(dir / "resources.json")) resources = load_resources(dir / "resources.json");
  ProfileStore store(std::move(models), std::move(workflows), std::move(resources));
  store.validate_all();
  return store;
}

struct SimulateArgs {
  std::string trace_path;
  std::string profiles_dir;
  std::string policy = "opt-mult";
  std::string objective = "cost";
  double epoch_seconds = 3600.0;
  double provisioning_delay = 1200.0;
  double autoscale_threshold = 0.9;
  double autoscale_window = 60.0;
  double spare_fraction = 0.05;
  double buffer = 1.15;
  bool no_autoscaler = false;
  bool oracle_predictor = false;
  std::string out_dir;
};

SimConfig to_sim_config(const SimulateArgs& args, const ProfileStore& store) {
  SimConfig cfg;
  cfg.epoch_length_s = args.epoch_seconds;
  cfg.objective = parse_objective(args.objective);
  cfg.provisioning_delay_s = args.provisioning_delay;
  cfg.autoscale_threshold = args.autoscale_threshold;
  cfg.autoscale_window_s = args.autoscale_window;
  cfg.spare_fraction = args.spare_fraction;
  cfg.buffer = args.buffer;
  cfg.autoscaler_enabled = !args.no_autoscaler;
  cfg.oracle_predictor = args.oracle_predictor;

  if (args.policy == "opt") {
    cfg.policy = SimPolicy::opt();
  } else if (args.policy == "opt-mult" || args.policy == "opt_mult") {
    cfg.policy = SimPolicy::opt_mult();
  } else if (args.policy.rfind("static:", 0) == 0) {
    const fs::path plan_path = args.policy.substr(7);
    LoadedPlan loaded = load_plan(plan_path);
    cfg.policy.kind = SimPolicy::Kind::static_plan;
    cfg.policy.static_counts = loaded.instance_counts;
    for (const auto& [key, allocs] : loaded.alloc_keys) {
      double sum = 0.0;
      for (double r : loaded.alloc_rates.at(key)) sum += r;
      if (sum <= 0) continue;
      for (size_t i = 0; i < allocs.size(); ++i)
        cfg.policy.static_routing[key].push_back(
            {allocs[i].first, allocs[i].second, loaded.alloc_rates.at(key)[i] / sum});
    }
  } else {
    throw ParseError("unknown policy '" + args.policy +
                     "' (expected static:<plan.json>, opt, or opt-mult)");
  }
  (void)store;
  return cfg;
}

int run_validate(const std::string& spec_path, const std::string& catalog_path,
                 const fs::path& out_dir, RunManifest manifest) {
  manifest.add_input(spec_path);
  manifest.add_input(catalog_path);
  const DeclarativeSpec spec = parse_spec(read_file(spec_path));
  const auto catalog = load_executor_catalog(catalog_path);
  const LogicalWorkflow wf = resolve_executors(spec, catalog);
  const auto errors = type_check(wf, catalog);
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "type error: " << e.to_string() << "\n";
    return kExitInvalidInput;
  }
  const std::string dag = serialize_workflow(wf);
  std::cout << dag;
  fs::create_directories(out_dir);
  const fs::path dag_path = out_dir / (wf.workflow_name + ".dag.json");
  atomic_write_file(dag_path, dag);
  manifest.outputs.push_back(dag_path.string());
  manifest.write(out_dir / "manifest.json");
  return kExitOk;
}

int run_plan(const std::string& instance_path, const fs::path& out_dir, RunManifest manifest) {
  manifest.add_input(instance_path);
  const OptimizationInstance inst = load_instance(instance_path);
  manifest.config["objective"] = objective_name(inst.objective);
  manifest.config["mode"] = plan_mode_name(inst.mode);
  const DeploymentPlan plan = solve(inst);

  fs::create_directories(out_dir);
  const fs::path plan_path = out_dir / "plan.json";
  atomic_write_file(plan_path, plan_to_json(inst, plan).dump(2) + "\n");
  const fs::path summary_path = out_dir / "summary.txt";
  atomic_write_file(summary_path, plan_summary_text(inst, plan));
  manifest.outputs.push_back(plan_path.string());
  manifest.outputs.push_back(summary_path.string());
  manifest.write(out_dir / "manifest.json");
  std::cout << plan_summary_text(inst, plan);

  switch (plan.status) {
    case PlanStatus::optimal: return kExitOk;
    case PlanStatus::infeasible: return kExitInfeasible;
    default: return kExitTimeLimit;
  }
}

int run_simulate(const SimulateArgs& args, RunManifest manifest) {
  const fs::path out_dir = args.out_dir.empty() ? default_out_dir() : fs::path(args.out_dir);
  manifest.add_input(args.trace_path);
  manifest.add_input(fs::path(args.profiles_dir) / "models.json");
  manifest.add_input(fs::path(args.profiles_dir) / "workflows.json");
  manifest.config["policy"] = args.policy;
  manifest.config["objective"] = args.objective;
  manifest.config["epoch_seconds"] = std::to_string(args.epoch_seconds);

  const ProfileStore store = load_store(args.profiles_dir);
  const DemandTrace trace = load_trace_csv(args.trace_path);
  const SimConfig cfg = to_sim_config(args, store);
  const SimMetrics metrics = run_simulation(trace, cfg, store);

  fs::create_directories(out_dir);
  const fs::path metrics_path = out_dir / "metrics.json";
  atomic_write_file(metrics_path, metrics_to_json(metrics).dump(2) + "\n");
  const fs::path timeline_path = out_dir / "timeline.csv";
  atomic_write_file(timeline_path, timeline_csv(metrics));
  manifest.outputs.push_back(metrics_path.string());
  manifest.outputs.push_back(timeline_path.string());
  manifest.write(out_dir / "manifest.json");
  std::cout << summary_text(metrics, args.policy);
  return kExitOk;
}

int run_sweep(const SimulateArgs& args, const std::string& intervals_arg, RunManifest manifest) {
  const fs::path out_dir = args.out_dir.empty() ? default_out_dir() : fs::path(args.out_dir);
  manifest.add_input(args.trace_path);
  manifest.config["intervals"] = intervals_arg;

  std::vector<double> intervals;
  for (const auto& tok : split(intervals_arg, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    intervals.push_back(std::stod(t));
  }
  if (intervals.empty()) throw ParseError("no intervals given");

  const ProfileStore store = load_store(args.profiles_dir);
  const DemandTrace trace = load_trace_csv(args.trace_path);
  const SimConfig cfg = to_sim_config(args, store);
  const auto rows = epoch_sensitivity_sweep(trace, intervals, cfg, store);

  fs::create_directories(out_dir);
  const fs::path sweep_path = out_dir / "sweep.csv";
  atomic_write_file(sweep_path, sweep_csv(rows));
  manifest.outputs.push_back(sweep_path.string());
  manifest.write(out_dir / "manifest.json");
  std::cout << sweep_csv(rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planner and trace-driven simulator for multi-tenant agentic workflow serving"};
  app.set_version_flag("--version", std::string("flowplan ") + kVersion);
  app.require_subcommand(1);

  // validate
  std::string spec_path, catalog_path, validate_out;
  auto* validate_cmd =
      app.add_subcommand("validate", "parse a workflow spec, resolve executors, type-check");
  validate_cmd->add_option("--spec", spec_path, "workflow spec (JSON or line DSL)")->required();
  validate_cmd->add_option("--catalog", catalog_path, "executors.json")->required();
  validate_cmd->add_option("--out", validate_out, "output directory");

  // plan
  std::string instance_path, plan_out;
  auto* plan_cmd = app.add_subcommand("plan", "solve one allocation instance");
  plan_cmd->add_option("--instance", instance_path, "instance JSON")->required();
  plan_cmd->add_option("--out", plan_out, "output directory");

  // simulate
  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "run the epoch-based execution simulation");
  sim_cmd->add_option("--trace", sim_args.trace_path, "arrival trace CSV")->required();
  sim_cmd->add_option("--profiles", sim_args.profiles_dir,
                      "directory with models.json/workflows.json/resources.json")
      ->required();
  sim_cmd->add_option("--policy", sim_args.policy, "static:<plan.json> | opt | opt-mult");
  sim_cmd->add_option("--objective", sim_args.objective, "energy | cost | accuracy");
  sim_cmd->add_option("--epoch-seconds", sim_args.epoch_seconds, "optimization epoch length");
  sim_cmd->add_option("--provisioning-delay", sim_args.provisioning_delay,
                      "seconds until new instances serve");
  sim_cmd->add_option("--autoscale-threshold", sim_args.autoscale_threshold, "utilization trigger");
  sim_cmd->add_option("--autoscale-window", sim_args.autoscale_window, "seconds over threshold");
  sim_cmd->add_option("--spare-fraction", sim_args.spare_fraction, "idle headroom fraction");
  sim_cmd->add_option("--buffer", sim_args.buffer, "demand buffer factor");
  sim_cmd->add_flag("--no-autoscaler", sim_args.no_autoscaler, "disable the auto-scaler");
  sim_cmd->add_flag("--oracle-predictor", sim_args.oracle_predictor,
                    "forecast each epoch with its actual demand");
  sim_cmd->add_option("--out", sim_args.out_dir, "output directory");

  // sweep
  SimulateArgs sweep_args;
  std::string intervals_arg = "1200,3600,7200,14400,21600";
  auto* sweep_cmd = app.add_subcommand("sweep", "epoch-length sensitivity sweep");
  sweep_cmd->add_option("--trace", sweep_args.trace_path, "arrival trace CSV")->required();
  sweep_cmd->add_option("--profiles", sweep_args.profiles_dir, "profiles directory")->required();
  sweep_cmd->add_option("--intervals", intervals_arg, "comma-separated epoch lengths in seconds");
  sweep_cmd->add_option("--policy", sweep_args.policy, "opt | opt-mult");
  sweep_cmd->add_option("--objective", sweep_args.objective, "energy | cost | accuracy");
  sweep_cmd->add_option("--provisioning-delay", sweep_args.provisioning_delay, "seconds");
  sweep_cmd->add_option("--buffer", sweep_args.buffer, "demand buffer factor");
  sweep_cmd->add_option("--out", sweep_args.out_dir, "output directory");

  // gen-trace
  SynthParams synth;
  std::string gen_out_file = "trace.csv";
  std::string workflows_arg = "video_qa";
  std::string mix_arg;
  auto* gen_cmd = app.add_subcommand("gen-trace", "generate a seeded synthetic diurnal trace");
  gen_cmd->add_option("--out", gen_out_file, "output CSV path");
  gen_cmd->add_option("--duration", synth.duration_s, "seconds");
  gen_cmd->add_option("--resolution", synth.resolution_s, "bin seconds");
  gen_cmd->add_option("--base-rate", synth.base_rate, "requests/second per workflow");
  gen_cmd->add_option("--amplitude", synth.diurnal_amplitude, "diurnal amplitude fraction");
  gen_cmd->add_option("--noise", synth.noise_std, "gaussian noise fraction");
  gen_cmd->add_option("--seed", synth.seed, "RNG seed");
  gen_cmd->add_option("--workflows", workflows_arg, "comma-separated workflow names");
  gen_cmd->add_option("--mix", mix_arg,
                      "tier mix, e.g. \"accuracy:good=0.7,latency:good=0.3\" (all workflows)");

  // report
  std::string metrics_path, report_out, report_format = "both";
  auto* report_cmd = app.add_subcommand("report", "format metrics.json as CSV/summary");
  report_cmd->add_option("--metrics", metrics_path, "metrics.json from simulate")->required();
  report_cmd->add_option("--format", report_format, "csv | summary | both");
  report_cmd->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate_cmd) {
      const fs::path out = validate_out.empty() ? default_out_dir() : fs::path(validate_out);
      return run_validate(spec_path, catalog_path, out, make_manifest("validate", argc, argv));
    }
    if (*plan_cmd) {
      const fs::path out = plan_out.empty() ? default_out_dir() : fs::path(plan_out);
      return run_plan(instance_path, out, make_manifest("plan", argc, argv));
    }
    if (*sim_cmd) return run_simulate(sim_args, make_manifest("simulate", argc, argv));
    if (*sweep_cmd) return run_sweep(sweep_args, intervals_arg, make_manifest("sweep", argc, argv));
    if (*gen_cmd) {
      synth.workflows.clear();
      for (const auto& wf : split(workflows_arg, ',')) {
        const std::string w = trim(wf);
        if (!w.empty()) synth.workflows.push_back(w);
      }
      if (!mix_arg.empty()) {
        std::map<std::string, double> mix;
        for (const auto& part : split(mix_arg, ',')) {
          const auto kv = split(trim(part), '=');
          if (kv.size() != 2) throw ParseError("bad --mix entry: " + part);
          mix[trim(kv[0])] = std::stod(kv[1]);
        }
        for (const auto& wf : synth.workflows) synth.slo_mix[wf] = mix;
      }
      RunManifest manifest = make_manifest("gen-trace", argc, argv);
      manifest.seed = synth.seed;
      manifest.has_seed = true;
      const DemandTrace trace = synth_trace(synth);
      write_trace_csv(trace, gen_out_file);
      manifest.outputs.push_back(gen_out_file);
      const fs::path out_dir = fs::path(gen_out_file).has_parent_path()
                                   ? fs::path(gen_out_file).parent_path()
                                   : fs::path(".");
      manifest.write(out_dir / "manifest.json");
      std::cout << "wrote " << gen_out_file << " (" << trace.num_bins() << " bins, "
                << trace.series.size() << " series)\n";
      return kExitOk;
    }
    if (*report_cmd) {
      const fs::path out = report_out.empty() ? default_out_dir() : fs::path(report_out);
      RunManifest manifest = make_manifest("report", argc, argv);
      manifest.add_input(metrics_path);
      const SimMetrics metrics = load_metrics(metrics_path);
      fs::create_directories(out);
      if (report_format == "csv" || report_format == "both") {
        atomic_write_file(out / "timeline.csv", timeline_csv(metrics));
        manifest.outputs.push_back((out / "timeline.csv").string());
      }
      if (report_format == "summary" || report_format == "both") {
        atomic_write_file(out / "summary.txt", summary_text(metrics));
        manifest.outputs.push_back((out / "summary.txt").string());
      }
      manifest.write(out / "manifest.json");
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowplan/common.hpp"
#include "flowplan/profiles_json.hpp"
#include "flowplan/sim.hpp"

namespace flowplan {

// metrics.json <-> SimMetrics

inline json metrics_to_json(const SimMetrics& m) {
  json root;
  auto epoch_json = [](const EpochMetrics& e) {
    json j;
    j["gpus_by_type"] = json::object();
    for (const auto& [res, g] : e.gpus_by_type) j["gpus_by_type"][res] = g;
    j["energy_kwh"] = e.energy_kwh;
    j["cost"] = e.cost;
    j["violations"] = e.violations;
    j["dropped"] = e.dropped;
    j["shadow_dropped"] = e.shadow_dropped;
    j["total_requests"] = e.total_requests;
    j["degraded"] = e.degraded;
    return j;
  };
  root["epochs"] = json::array();
  for (const auto& e : m.epochs) root["epochs"].push_back(epoch_json(e));
  root["totals"] = epoch_json(m.totals);
  root["under_prediction_fraction"] = m.under_prediction_fraction;
  root["mean_utilization"] = m.mean_utilization;
  return root;
}

inline SimMetrics metrics_from_json(const json& root, const std::string& ctx) {
  SimMetrics m;
  auto epoch_from = [&](const json& j) {
    EpochMetrics e;
    if (j.contains("gpus_by_type"))
      for (const auto& [res, g] : j.at("gpus_by_type").items()) e.gpus_by_type[res] = g.get<double>();
    e.energy_kwh = detail::get_number(j, "energy_kwh", ctx);
    e.cost = detail::get_number(j, "cost", ctx);
    e.violations = detail::get_number(j, "violations", ctx);
    e.dropped = detail::get_number(j, "dropped", ctx);
    e.shadow_dropped = detail::get_number_or(j, "shadow_dropped", 0.0);
    e.total_requests = detail::get_number_or(j, "total_requests", 0.0);
    if (j.contains("degraded")) e.degraded = j.at("degraded").get<bool>();
    return e;
  };
  for (const auto& ej : detail::require_field(root, "epochs", ctx)) m.epochs.push_back(epoch_from(ej));
  m.totals = epoch_from(detail::require_field(root, "totals", ctx));
  m.under_prediction_fraction = detail::get_number_or(root, "under_prediction_fraction", 0.0);
  m.mean_utilization = detail::get_number_or(root, "mean_utilization", 0.0);
  return m;
}

inline SimMetrics load_metrics(const std::filesystem::path& path) {
  return metrics_from_json(detail::parse_json_file(path), path.string());
}

// ---------------------------------------------------------------------------
// timeline.csv: one row per epoch plus a totals row equal to column sums.

inline double gpus_of(const EpochMetrics& e, const std::string& res) {
  auto it = e.gpus_by_type.find(res);
  return it == e.gpus_by_type.end() ? 0.0 : it->second;
}

inline std::string timeline_csv(const SimMetrics& m) {
  // Fixed columns first; any additional resource types follow.
  std::vector<std::string> extra;
  {
    std::set<std::string> seen{"A100", "H100", "CPU"};
    for (const auto& e : m.epochs)
      for (const auto& [res, _] : e.gpus_by_type)
        if (seen.insert(res).second) extra.push_back(res);
  }
  std::ostringstream out;
  out.precision(12);
  out << "epoch,gpus_A100,gpus_H100,gpus_CPU";
  for (const auto& r : extra) out << ",gpus_" << r;
  out << ",energy_kwh,cost,violations,dropped\n";
  auto row = [&](const std::string& label, const EpochMetrics& e) {
    out << label << ',' << gpus_of(e, "A100") << ',' << gpus_of(e, "H100") << ','
        << gpus_of(e, "CPU");
    for (const auto& r : extra) out << ',' << gpus_of(e, r);
    out << ',' << e.energy_kwh << ',' << e.cost << ',' << e.violations << ',' << e.dropped
        << '\n';
  };
  for (size_t i = 0; i < m.epochs.size(); ++i) row(std::to_string(i), m.epochs[i]);
  if (!m.epochs.empty()) row("total", m.totals);
  return out.str();
}

// summary.txt mirroring the comparison-table columns.
inline std::string summary_text(const SimMetrics& m, const std::string& label = "") {
  std::ostringstream out;
  out.precision(6);
  if (!label.empty()) out << "policy: " << label << "\n";
  double gpu_total = 0.0;
  for (const auto& [res, g] : m.totals.gpus_by_type)
    if (res != "CPU" && res != "EXTERNAL") gpu_total += g;
  out << "# of GPUs (epoch-summed): " << gpu_total << "\n";
  for (const auto& [res, g] : m.totals.gpus_by_type)
    out << "  " << res << ": " << g << "\n";
  out << "Energy (MWh): " << m.totals.energy_kwh / 1000.0 << "\n";
  out << "Cost ($): " << m.totals.cost << "\n";
  out << "SLO violations: " << m.totals.violations << "\n";
  out << "dropped requests: " << m.totals.dropped << "\n";
  out << "under-prediction fraction: " << m.under_prediction_fraction << "\n";
  out << "mean utilization: " << m.mean_utilization << "\n";
  return out.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(12);
  out << "interval_s,total_cost,mean_utilization,under_prediction_fraction\n";
  for (const auto& r : rows)
    out << r.interval_s << ',' << r.total_cost << ',' << r.mean_utilization << ','
        << r.under_prediction_fraction << '\n';
  return out.str();
}

}  // namespace flowplan

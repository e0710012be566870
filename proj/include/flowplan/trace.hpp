#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowplan/common.hpp"
#include "flowplan/profiles.hpp"

namespace flowplan {

// (workflow, slo tier) demand stream identity. The slo string is
// "<type>:<tier>" or "<type>:<threshold>", e.g. "accuracy:good".
struct PairKey {
  std::string workflow;
  std::string slo;

  bool operator<(const PairKey& o) const {
    return workflow != o.workflow ? workflow < o.workflow : slo < o.slo;
  }
  bool operator==(const PairKey& o) const {
    return workflow == o.workflow && slo == o.slo;
  }
  std::string to_string() const { return workflow + "#" + slo; }
};

inline SloSpec parse_slo_key(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw ParseError("slo_tier must be <type>:<tier>, got '" + s + "'");
  const SloType type = parse_slo_type(parts[0]);
  try {
    return SloSpec::with_tier(type, parse_slo_tier(parts[1]));
  } catch (const ParseError&) {
    try {
      size_t pos = 0;
      const double tau = std::stod(parts[1], &pos);
      if (pos != parts[1].size()) throw std::invalid_argument("trailing");
      return SloSpec::with_threshold(type, tau);
    } catch (const std::exception&) {
      throw ParseError("slo_tier '" + s + "': tier must be a name or numeric threshold");
    }
  }
}

// Binned arrival counts per (workflow, slo tier).
struct DemandTrace {
  double resolution_s = 60.0;
  std::map<PairKey, std::vector<double>> series;  // requests per bin

  size_t num_bins() const { return series.empty() ? 0 : series.begin()->second.size(); }
  double duration_s() const { return static_cast<double>(num_bins()) * resolution_s; }

  std::vector<PairKey> pairs() const {
    std::vector<PairKey> out;
    for (const auto& [k, _] : series) out.push_back(k);
    return out;
  }

  void validate() const {
    if (resolution_s <= 0) throw ValidationError("trace resolution must be > 0");
    size_t len = num_bins();
    for (const auto& [k, v] : series) {
      if (v.size() != len)
        throw ValidationError("trace series " + k.to_string() + " has mismatched length");
      for (double c : v)
        if (c < 0) throw ValidationError("trace series " + k.to_string() + " has negative count");
    }
  }

  bool operator==(const DemandTrace& o) const {
    return resolution_s == o.resolution_s && series == o.series;
  }
};

// ---------------------------------------------------------------------------
// CSV ingestion: timestamp_s,workflow,slo_tier,count

inline DemandTrace load_trace_csv(const std::filesystem::path& path,
                                  double resolution_hint = 0.0) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  struct RawRow {
    double t;
    PairKey key;
    double count;
  };
  std::vector<RawRow> rows;
  double prev_t = -std::numeric_limits<double>::infinity();
  std::set<double> timestamps;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (lineno == 1 && trimmed.rfind("timestamp_s", 0) == 0) continue;  // header
    const auto fields = split(trimmed, ',');
    if (fields.size() != 4)
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": expected 4 columns (timestamp_s,workflow,slo_tier,count)");
    RawRow row;
    try {
      row.t = std::stod(fields[0]);
      row.count = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
    row.key = {trim(fields[1]), trim(fields[2])};
    if (row.key.workflow.empty() || row.key.slo.empty())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty workflow or slo_tier");
    if (row.count < 0)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": negative count");
    if (row.t < prev_t)
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": non-monotone timestamp " + fields[0]);
    parse_slo_key(row.key.slo);  // fail early on bad tier strings
    prev_t = row.t;
    timestamps.insert(row.t);
    rows.push_back(std::move(row));
  }

  DemandTrace trace;
  if (rows.empty()) {
    trace.resolution_s = resolution_hint > 0 ? resolution_hint : 60.0;
    return trace;
  }
  double resolution = resolution_hint;
  if (resolution <= 0) {
    double min_delta = 0.0;
    double prev = *timestamps.begin();
    for (auto it = std::next(timestamps.begin()); it != timestamps.end(); ++it) {
      const double d = *it - prev;
      if (min_delta == 0.0 || d < min_delta) min_delta = d;
      prev = *it;
    }
    resolution = min_delta > 0 ? min_delta : 60.0;
  }
  trace.resolution_s = resolution;
  const double t0 = *timestamps.begin();
  const double t_last = *timestamps.rbegin();
  const auto nbins = static_cast<size_t>(std::llround((t_last - t0) / resolution)) + 1;
  std::set<PairKey> keys;
  for (const auto& r : rows) keys.insert(r.key);
  for (const auto& k : keys) trace.series[k].assign(nbins, 0.0);
  for (const auto& r : rows) {
    const double pos = (r.t - t0) / resolution;
    const auto idx = static_cast<size_t>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(idx)) > 1e-6)
      throw ParseError(path.string() + ": timestamp " + std::to_string(r.t) +
                       " is not aligned to the " + std::to_string(resolution) + "s grid");
    trace.series[r.key][idx] += r.count;
  }
  trace.validate();
  return trace;
}

inline std::string trace_to_csv(const DemandTrace& trace) {
  std::ostringstream out;
  out << "timestamp_s,workflow,slo_tier,count\n";
  out.precision(12);
  const size_t nbins = trace.num_bins();
  for (size_t i = 0; i < nbins; ++i) {
    for (const auto& [key, series] : trace.series) {
      out << (static_cast<double>(i) * trace.resolution_s) << ',' << key.workflow << ','
          << key.slo << ',' << series[i] << '\n';
    }
  }
  return out.str();
}

inline void write_trace_csv(const DemandTrace& trace, const std::filesystem::path& path) {
  atomic_write_file(path, trace_to_csv(trace));
}

// ---------------------------------------------------------------------------
// Seeded synthetic diurnal generator

struct SynthParams {
  double duration_s = 86400.0;
  double resolution_s = 60.0;
  double base_rate = 1.0;          // requests/second per workflow
  double diurnal_amplitude = 0.5;  // fraction of base, must be < 1
  double noise_std = 0.0;          // gaussian sigma as a fraction of base
  std::vector<std::string> workflows = {"video_qa"};
  // tier mix per workflow; empty means 70% accuracy:good / 30% latency:good
  std::map<std::string, std::map<std::string, double>> slo_mix;
  std::uint64_t seed = 0;

  void validate() const {
    if (duration_s <= 0 || resolution_s <= 0)
      throw ValidationError("synth trace duration and resolution must be > 0");
    if (diurnal_amplitude < 0 || diurnal_amplitude >= 1)
      throw ValidationError("diurnal_amplitude must be in [0, 1)");
    if (noise_std < 0) throw ValidationError("noise_std must be >= 0");
    if (base_rate < 0) throw ValidationError("base_rate must be >= 0");
    if (workflows.empty()) throw ValidationError("synth trace needs at least one workflow");
    for (const auto& [wf, mix] : slo_mix) {
      double sum = 0.0;
      for (const auto& [_, f] : mix) {
        if (f < 0) throw ValidationError("slo_mix fraction < 0 for " + wf);
        sum += f;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("slo_mix fractions for " + wf + " must sum to 1");
    }
  }
};

namespace detail {

// Hand-rolled uniform and Box-Muller keep output identical across standard
// library implementations; mt19937_64 itself is fully specified.
class SeededGauss {
 public:
  explicit SeededGauss(std::uint64_t seed) : rng_(seed) {}

  double uniform01() {  // [0, 1), 53-bit
    return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

// rate(t) = base * (1 + A sin(2 pi t / 86400)) + sigma * base * z, clamped at
// zero, split across tiers by slo_mix. Deterministic per seed.
inline DemandTrace synth_trace(const SynthParams& params) {
  params.validate();
  DemandTrace trace;
  trace.resolution_s = params.resolution_s;
  const auto nbins = static_cast<size_t>(std::llround(params.duration_s / params.resolution_s));
  static const std::map<std::string, double> kDefaultMix = {{"accuracy:good", 0.7},
                                                            {"latency:good", 0.3}};
  detail::SeededGauss gauss(params.seed);
  for (const auto& wf : params.workflows) {
    const auto mix_it = params.slo_mix.find(wf);
    const auto& mix = mix_it != params.slo_mix.end() ? mix_it->second : kDefaultMix;
    std::vector<double> rate(nbins, 0.0);
    for (size_t i = 0; i < nbins; ++i) {
      const double t = static_cast<double>(i) * params.resolution_s;
      double r = params.base_rate * (1.0 + params.diurnal_amplitude * std::sin(2.0 * M_PI * t / 86400.0));
      if (params.noise_std > 0) r += params.noise_std * params.base_rate * gauss.normal();
      rate[i] = std::max(0.0, r);
    }
    for (const auto& [tier, frac] : mix) {
      auto& series = trace.series[{wf, tier}];
      series.assign(nbins, 0.0);
      for (size_t i = 0; i < nbins; ++i) series[i] = rate[i] * params.resolution_s * frac;
    }
  }
  trace.validate();
  return trace;
}

}  // namespace flowplan

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "flowplan/trace.hpp"

using namespace flowplan;
namespace fs = std::filesystem;

namespace {

fs::path write_tmp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  atomic_write_file(p, content);
  return p;
}

}  // namespace

TEST_CASE("a three-row file for one pair loads as a series of length 3") {
  const auto p = write_tmp("flowplan_trace3.csv",
                           "timestamp_s,workflow,slo_tier,count\n"
                           "0,video_qa,accuracy:good,5\n"
                           "60,video_qa,accuracy:good,7\n"
                           "120,video_qa,accuracy:good,6\n");
  DemandTrace t = load_trace_csv(p);
  CHECK_THAT(t.resolution_s, Catch::Matchers::WithinAbs(60.0, 1e-12));
  REQUIRE(t.series.size() == 1);
  const auto& s = t.series.begin()->second;
  REQUIRE(s.size() == 3);
  CHECK(s[1] == 7.0);
}

TEST_CASE("gaps are zero-filled") {
  const auto p = write_tmp("flowplan_trace_gap.csv",
                           "timestamp_s,workflow,slo_tier,count\n"
                           "0,w,accuracy:good,5\n"
                           "120,w,accuracy:good,6\n");
  DemandTrace t = load_trace_csv(p);
  const auto& s = t.series.begin()->second;
  REQUIRE(s.size() == 3);
  CHECK(s[1] == 0.0);
}

TEST_CASE("malformed rows and non-monotone timestamps are line-numbered errors") {
  const auto bad = write_tmp("flowplan_trace_bad.csv",
                             "timestamp_s,workflow,slo_tier,count\n"
                             "0,w,accuracy:good,notanumber\n");
  CHECK_THROWS_WITH(load_trace_csv(bad), Catch::Matchers::ContainsSubstring(":2:"));

  const auto mono = write_tmp("flowplan_trace_mono.csv",
                              "timestamp_s,workflow,slo_tier,count\n"
                              "60,w,accuracy:good,1\n"
                              "0,w,accuracy:good,1\n");
  CHECK_THROWS_WITH(load_trace_csv(mono), Catch::Matchers::ContainsSubstring("non-monotone"));
}

TEST_CASE("a 24h file at 60s resolution keeps 1440 bins and column totals") {
  SynthParams params;
  params.duration_s = 86400;
  params.resolution_s = 60;
  params.base_rate = 0.5;
  params.diurnal_amplitude = 0.4;
  params.noise_std = 0.05;
  params.seed = 17;
  params.workflows = {"video_qa", "code_gen"};
  DemandTrace t = synth_trace(params);
  const fs::path p = fs::temp_directory_path() / "flowplan_trace24.csv";
  write_trace_csv(t, p);

  // Column-sum oracle straight from the file text.
  std::map<PairKey, double> sums;
  std::istringstream in(read_file(p));
  std::string line;
  std::getline(in, line);  // header
  size_t rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split(line, ',');
    REQUIRE(f.size() == 4);
    sums[{f[1], f[2]}] += std::stod(f[3]);
    ++rows;
  }
  DemandTrace loaded = load_trace_csv(p);
  CHECK(loaded.num_bins() == 1440);
  CHECK(rows == 1440 * loaded.series.size());
  for (const auto& [key, series] : loaded.series) {
    double total = 0.0;
    for (double c : series) total += c;
    CHECK_THAT(total, Catch::Matchers::WithinRel(sums.at(key), 1e-9));
  }
}

TEST_CASE("write then load is identity") {
  SynthParams params;
  params.duration_s = 7200;
  params.resolution_s = 60;
  params.base_rate = 1.0;
  params.diurnal_amplitude = 0.3;
  params.noise_std = 0.1;
  params.seed = 9;
  DemandTrace t = synth_trace(params);
  const fs::path p = fs::temp_directory_path() / "flowplan_trace_rt.csv";
  write_trace_csv(t, p);
  DemandTrace back = load_trace_csv(p);
  REQUIRE(back.num_bins() == t.num_bins());
  REQUIRE(back.series.size() == t.series.size());
  for (const auto& [key, series] : t.series) {
    const auto& other = back.series.at(key);
    for (size_t i = 0; i < series.size(); ++i)
      CHECK_THAT(other[i], Catch::Matchers::WithinRel(series[i], 1e-9));
  }
}

TEST_CASE("no amplitude and no noise gives a constant series") {
  SynthParams params;
  params.duration_s = 3600;
  params.resolution_s = 60;
  params.base_rate = 2.0;
  params.diurnal_amplitude = 0.0;
  params.noise_std = 0.0;
  DemandTrace t = synth_trace(params);
  for (const auto& [key, series] : t.series) {
    const double expected = series[0];
    for (double c : series) CHECK_THAT(c, Catch::Matchers::WithinAbs(expected, 1e-12));
  }
}

TEST_CASE("same seed twice gives identical traces") {
  SynthParams params;
  params.seed = 11;
  params.noise_std = 0.2;
  params.duration_s = 7200;
  DemandTrace a = synth_trace(params);
  DemandTrace b = synth_trace(params);
  CHECK(a == b);
}

TEST_CASE("noise-free extrema follow the sinusoid amplitude") {
  SynthParams params;
  params.seed = 11;
  params.duration_s = 86400;
  params.resolution_s = 60;
  params.base_rate = 1.0;
  params.diurnal_amplitude = 0.5;
  params.noise_std = 0.0;
  DemandTrace t = synth_trace(params);
  const auto& s = t.series.begin()->second;
  const double mx = *std::max_element(s.begin(), s.end());
  const double mn = *std::min_element(s.begin(), s.end());
  const double expected = (1 + params.diurnal_amplitude) / (1 - params.diurnal_amplitude);
  CHECK(std::abs(mx / mn - expected) / expected < 0.05);
}

TEST_CASE("totals scale linearly in base rate when noise-free") {
  SynthParams params;
  params.duration_s = 86400;
  params.diurnal_amplitude = 0.4;
  params.noise_std = 0.0;
  params.base_rate = 1.0;
  DemandTrace t1 = synth_trace(params);
  params.base_rate = 3.0;
  DemandTrace t3 = synth_trace(params);
  for (const auto& [key, series] : t1.series) {
    double sum1 = 0, sum3 = 0;
    for (double c : series) sum1 += c;
    for (double c : t3.series.at(key)) sum3 += c;
    CHECK_THAT(sum3, Catch::Matchers::WithinRel(3.0 * sum1, 1e-9));
  }
}

TEST_CASE("slo mix fractions must sum to one") {
  SynthParams params;
  params.slo_mix["video_qa"] = {{"accuracy:good", 0.5}, {"latency:good", 0.3}};
  CHECK_THROWS_AS(synth_trace(params), ValidationError);
}

TEST_CASE("default mix splits 70/30 across the good tiers") {
  SynthParams params;
  params.duration_s = 3600;
  params.noise_std = 0.0;
  params.diurnal_amplitude = 0.0;
  params.base_rate = 1.0;
  DemandTrace t = synth_trace(params);
  REQUIRE(t.series.size() == 2);
  const auto& acc = t.series.at({"video_qa", "accuracy:good"});
  const auto& lat = t.series.at({"video_qa", "latency:good"});
  CHECK_THAT(acc[0], Catch::Matchers::WithinAbs(0.7 * 60.0, 1e-9));
  CHECK_THAT(lat[0], Catch::Matchers::WithinAbs(0.3 * 60.0, 1e-9));
}

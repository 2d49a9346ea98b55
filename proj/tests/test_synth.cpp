#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/ingest.hpp"
#include "core/synth.hpp"
#include "core/text.hpp"

using namespace aist;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("aist_synth_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int64_t line_count(const std::string& path) {
  const std::string text = read_text_file(path);
  int64_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

Dataset ingest_synth_dir(const std::string& dir, const SynthSpec& spec, int num_steps) {
  Dataset data;
  data.graph = RegionGraph::load(dir + "/regions.graph");
  IngestSpan span;
  span.start = CivilTime{spec.start_year, 1, 1, 0, 0, 0};
  span.end = CivilTime{spec.start_year, 1 + spec.months, 1, 0, 0, 0};
  span.tau_hours = spec.tau_hours;
  REQUIRE(span.total_steps() == num_steps);
  IngestReport rep;
  data.crimes = ingest_crimes(dir + "/crimes.csv", data.graph, {spec.category}, span, rep);
  CHECK(rep.total_rejected() == 0);
  data.features = make_feature_tensor(data.graph.num_regions(), num_steps);
  IngestReport taxi_rep, poi_rep;
  ingest_taxi(dir + "/taxi.csv", data.graph, span, data.features, taxi_rep);
  CHECK(taxi_rep.total_rejected() == 0);
  ingest_poi(dir + "/pois.csv", data.graph, data.features, poi_rep);
  CHECK(poi_rep.total_rejected() == 0);
  return data;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

// series[t-1] = count of (category 0, region i) at 1-based step t
std::vector<double> crime_series(const Dataset& data, int region) {
  std::vector<double> s(static_cast<size_t>(data.crimes.num_steps));
  for (int t = 0; t < data.crimes.num_steps; ++t) s[static_cast<size_t>(t)] = data.crimes.values.at(0, region, t);
  return s;
}

double lag_corr(const std::vector<double>& follower, const std::vector<double>& driver,
                int lag) {
  std::vector<double> f(follower.begin() + lag, follower.end());
  std::vector<double> d(driver.begin(), driver.end() - lag);
  return pearson(f, d);
}

}  // namespace

TEST_CASE("generate_synth is byte-identical across reruns") {
  SynthSpec spec;
  spec.months = 1;
  spec.n = 5;
  const auto d1 = temp_dir("rerun_a");
  const auto d2 = temp_dir("rerun_b");
  const SynthSummary s1 = generate_synth(spec, d1.string());
  const SynthSummary s2 = generate_synth(spec, d2.string());

  CHECK(s1.num_steps == s2.num_steps);
  CHECK(s1.crime_rows == s2.crime_rows);
  CHECK(s1.taxi_rows == s2.taxi_rows);
  CHECK(s1.poi_rows == s2.poi_rows);
  for (const char* name :
       {"crimes.csv", "taxi.csv", "pois.csv", "regions.graph", "synth_meta.json"}) {
    CHECK(read_text_file((d1 / name).string()) == read_text_file((d2 / name).string()));
  }

  SynthSpec other = spec;
  other.seed = 8;
  const auto d3 = temp_dir("rerun_c");
  generate_synth(other, d3.string());
  CHECK(read_text_file((d1 / "crimes.csv").string()) !=
        read_text_file((d3 / "crimes.csv").string()));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
  std::filesystem::remove_all(d3);
}

TEST_CASE("synth summary row counts match the emitted files") {
  SynthSpec spec;
  spec.months = 1;
  spec.n = 5;
  const auto dir = temp_dir("counts");
  const SynthSummary sum = generate_synth(spec, dir.string());

  CHECK(sum.num_steps == 31 * (24 / spec.tau_hours));  // January
  CHECK(sum.crime_rows == line_count((dir / "crimes.csv").string()) - 1);
  CHECK(sum.taxi_rows == line_count((dir / "taxi.csv").string()) - 1);
  CHECK(sum.poi_rows == line_count((dir / "pois.csv").string()) - 1);
  CHECK(sum.crime_rows > 0);
  CHECK(sum.taxi_rows > 0);
  CHECK(sum.poi_rows > 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("generate_synth validates its spec") {
  const auto dir = temp_dir("invalid");
  SynthSpec spec;
  spec.n = 3;
  CHECK_THROWS_AS(generate_synth(spec, dir.string()), ConfigError);
  spec = SynthSpec{};
  spec.months = 0;
  CHECK_THROWS_AS(generate_synth(spec, dir.string()), ConfigError);
  spec = SynthSpec{};
  spec.tau_hours = 5;
  CHECK_THROWS_AS(generate_synth(spec, dir.string()), ConfigError);
  spec.tau_hours = 7;
  CHECK_THROWS_AS(generate_synth(spec, dir.string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synth graph plants each driver inside its region's neighborhood") {
  SynthSpec spec;
  spec.months = 1;
  spec.n = 7;
  const auto dir = temp_dir("graph");
  generate_synth(spec, dir.string());
  const RegionGraph g = RegionGraph::load((dir / "regions.graph").string());

  CHECK(g.num_regions() == spec.n);
  CHECK(g.connected());
  for (int i = 0; i < spec.n; ++i) CHECK(g.id_at(i) == i);
  for (int i = 2; i < spec.n; ++i) {
    const int driver = i % 2 == 0 ? 0 : 1;
    const auto hood = g.neighborhood(i);
    CHECK(std::find(hood.begin(), hood.end(), driver) != hood.end());
  }
  CHECK(g.parent_of(0) == 0);
  CHECK(g.parent_of(1) == 0);
  for (int i = 2; i < spec.n; ++i) CHECK(g.parent_of(i) == 1 + (i - 2) / 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synth_meta.json records the planted structure") {
  SynthSpec spec;  // defaults: n=6, months=3, tau=4
  const auto dir = temp_dir("meta");
  const SynthSummary sum = generate_synth(spec, dir.string());

  const auto meta = nlohmann::json::parse(read_text_file((dir / "synth_meta.json").string()));
  CHECK(meta.at("seed").get<uint64_t>() == spec.seed);
  CHECK(meta.at("n").get<int>() == spec.n);
  CHECK(meta.at("months").get<int>() == spec.months);
  CHECK(meta.at("tau_hours").get<int>() == spec.tau_hours);
  CHECK(meta.at("category").get<std::string>() == "theft");
  CHECK(meta.at("origin").get<std::string>() == "2021-01-01T00:00:00");
  CHECK(meta.at("end").get<std::string>() == "2021-04-01T00:00:00");
  CHECK(meta.at("num_steps").get<int>() == sum.num_steps);
  CHECK(sum.num_steps == (31 + 28 + 31) * 6);
  CHECK(meta.at("period_steps").get<int>() == 42);
  CHECK(meta.at("informative_feature_index").get<int>() == 0);
  const auto& informative = meta.at("informative_neighbor");
  REQUIRE(informative.size() == static_cast<size_t>(spec.n));
  CHECK(informative.at("0").get<int>() == -1);
  CHECK(informative.at("1").get<int>() == -1);
  for (int i = 2; i < spec.n; ++i)
    CHECK(informative.at(std::to_string(i)).get<int>() == (i % 2 == 0 ? 0 : 1));
  std::filesystem::remove_all(dir);
}

TEST_CASE("ingesting the synthetic corpus conserves every generated row") {
  SynthSpec spec;
  spec.months = 1;
  spec.n = 5;
  const auto dir = temp_dir("conserve");
  const SynthSummary sum = generate_synth(spec, dir.string());
  const Dataset data = ingest_synth_dir(dir.string(), spec, sum.num_steps);

  double crime_total = 0.0;
  for (double v : data.crimes.values.data) crime_total += v;
  CHECK(crime_total == static_cast<double>(sum.crime_rows));

  // Every trip lands both its pickup (F2) and dropoff (F1) inside the span.
  double inflow = 0.0, outflow = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    for (int t = 0; t < sum.num_steps; ++t) {
      inflow += data.features.values.at(0, i, t);
      outflow += data.features.values.at(1, i, t);
    }
  }
  CHECK(inflow == static_cast<double>(sum.taxi_rows));
  CHECK(outflow == static_cast<double>(sum.taxi_rows));
  std::filesystem::remove_all(dir);
}

TEST_CASE("planted signals dominate the synthetic series") {
  SynthSpec spec;  // n=6, 3 months: 540 steps
  const auto dir = temp_dir("signal");
  const SynthSummary sum = generate_synth(spec, dir.string());
  const Dataset data = ingest_synth_dir(dir.string(), spec, sum.num_steps);

  const auto x0 = crime_series(data, 0);
  const auto x1 = crime_series(data, 1);

  // Region 1 is a lag-1 copy of region 0 (plus sparse noise).
  CHECK(lag_corr(x1, x0, 1) > 0.9);
  CHECK(lag_corr(x1, x0, 1) > lag_corr(x1, x0, 0) + 0.2);

  // Cold regions follow their planted driver at lag 1.
  for (int i = 2; i < spec.n; ++i) {
    const auto xi = crime_series(data, i);
    const auto& driver = (i % 2 == 0) ? x0 : x1;
    CHECK(lag_corr(xi, driver, 1) > 0.6);
    CHECK(lag_corr(xi, driver, 1) > lag_corr(xi, driver, 0) + 0.1);
  }

  // The weekly cycle: autocorrelation peaks at the period (42 bins), echoes
  // at its double, and flips negative at the half period.
  const double at_period = lag_corr(x0, x0, 42);
  CHECK(at_period > 0.35);
  for (int lag : {36, 37, 39, 45, 48}) CHECK(at_period > lag_corr(x0, x0, lag) + 0.05);
  CHECK(lag_corr(x0, x0, 21) < 0.0);
  CHECK(lag_corr(x0, x0, 84) > 0.35);

  // Taxi inflow previews the NEXT bin's crime, beating the current bin.
  for (int i = 0; i < spec.n; ++i) {
    const auto xi = crime_series(data, i);
    std::vector<double> inflow(static_cast<size_t>(sum.num_steps));
    for (int t = 0; t < sum.num_steps; ++t)
      inflow[static_cast<size_t>(t)] = data.features.values.at(0, i, t);
    CHECK(lag_corr(xi, inflow, 1) > 0.6);
    CHECK(lag_corr(xi, inflow, 1) > lag_corr(xi, inflow, 0) + 0.1);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("the desk preset finds full windows in the default synthetic span") {
  SynthSpec spec;
  const auto dir = temp_dir("windows");
  const SynthSummary sum = generate_synth(spec, dir.string());
  const Dataset data = ingest_synth_dir(dir.string(), spec, sum.num_steps);

  Config cfg;
  apply_preset(cfg, "desk");
  WindowReport report;
  const auto windows = build_windows(cfg, data, 0, &report);
  // Weekly reach dominates: t_weekly * 42 = 84 bins of lookback.
  CHECK(report.emitted == static_cast<int64_t>((sum.num_steps - 84) * spec.n));
  CHECK(windows.size() == static_cast<size_t>(report.emitted));
  CHECK(split_dataset(windows, cfg, data).train.size() > 0);
  std::filesystem::remove_all(dir);
}

#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/region_graph.hpp"
#include "core/rng.hpp"
#include "core/tensors.hpp"
#include "core/text.hpp"

namespace aist {

namespace {

int poisson(Rng& rng, double lambda) {
  // Knuth's method; all our intensities are small.
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.uniform();
  } while (p > limit);
  return k - 1;
}

int binomial(Rng& rng, int n, double p) {
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (rng.uniform() < p) ++k;
  return k;
}

int driver_of(int region) {  // cold regions only
  return region % 2 == 0 ? 0 : 1;
}

RegionGraph build_synth_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  std::map<int, int> parent_of;
  parent_of[0] = 0;
  parent_of[1] = 0;
  for (int i = 2; i < n; ++i) parent_of[i] = 1 + (i - 2) / 2;
  edges.emplace_back(0, 1);
  for (int i = 2; i < n; ++i) {
    edges.emplace_back(driver_of(i), i);  // planted neighbor edge
    if (i >= 3) edges.emplace_back(i - 1, i);
  }
  return RegionGraph::build(edges, parent_of);
}

std::string stamp(int64_t origin_sec, int step, double frac, int tau_hours) {
  const int64_t span = static_cast<int64_t>(tau_hours) * 3600;
  const int64_t off = std::min<int64_t>(span - 1, static_cast<int64_t>(frac * static_cast<double>(span)));
  return format_civil(civil_from_seconds(origin_sec + static_cast<int64_t>(step - 1) * span + off));
}

}  // namespace

SynthSummary generate_synth(const SynthSpec& spec, const std::string& out_dir) {
  if (spec.n < 4) throw ConfigError("synth: need at least 4 regions");
  if (spec.months < 1) throw ConfigError("synth: need at least 1 month");
  if (24 % spec.tau_hours != 0) throw ConfigError("synth: tau must divide 24");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output dir " + out_dir + ": " + ec.message());

  const int m = 24 / spec.tau_hours;         // bins per day
  const int week = 7 * m;                    // bins per week
  CivilTime origin{};
  origin.year = spec.start_year;
  origin.month = 1;
  origin.day = 1;
  CivilTime end = origin;
  end.month += spec.months;
  end.year += (end.month - 1) / 12;
  end.month = (end.month - 1) % 12 + 1;
  const int64_t origin_sec = civil_to_seconds(origin);
  const int64_t span_sec = civil_to_seconds(end) - origin_sec;
  const int steps = static_cast<int>(span_sec / (static_cast<int64_t>(spec.tau_hours) * 3600));
  const int n = spec.n;

  // --- crime counts ---------------------------------------------------------
  Rng rng = rng_for(spec.seed, "synth-crime");
  std::vector<std::vector<int>> x(static_cast<size_t>(n),
                                  std::vector<int>(static_cast<size_t>(steps + 1), 0));
  constexpr double kTwoPi = 6.283185307179586;
  for (int t = 1; t <= steps; ++t) {
    const double weekly = 0.5 * (1.0 + std::sin(kTwoPi * (t - 1) / week));
    const double daily = 0.5 * (1.0 + std::sin(kTwoPi * (t - 1) / m));
    const double lam = 0.4 + 4.2 * weekly + 1.8 * daily;
    x[0][static_cast<size_t>(t)] = poisson(rng, lam);
    x[1][static_cast<size_t>(t)] =
        (t >= 2 ? x[0][static_cast<size_t>(t - 1)] : poisson(rng, 1.0)) + poisson(rng, 0.1);
    for (int i = 2; i < n; ++i) {
      const int d = driver_of(i);
      const int base = t >= 2 ? binomial(rng, x[static_cast<size_t>(d)][static_cast<size_t>(t - 1)], 0.45)
                              : poisson(rng, 0.3);
      x[static_cast<size_t>(i)][static_cast<size_t>(t)] = base + poisson(rng, 0.05);
    }
  }

  SynthSummary sum;
  sum.num_steps = steps;

  // --- crimes.csv -------------------------------------------------------------
  Rng crng = rng_for(spec.seed, "synth-crime-times");
  {
    std::ostringstream out;
    out << "timestamp,category,community_area\n";
    for (int t = 1; t <= steps; ++t) {
      for (int i = 0; i < n; ++i) {
        const int c = x[static_cast<size_t>(i)][static_cast<size_t>(t)];
        for (int e = 0; e < c; ++e) {
          out << stamp(origin_sec, t, crng.uniform(), spec.tau_hours) << ","
              << spec.category << "," << i << "\n";
          ++sum.crime_rows;
        }
      }
    }
    write_text_file(out_dir + "/crimes.csv", out.str());
  }

  // --- taxi.csv: inflow previews next-bin crime -------------------------------
  Rng trng = rng_for(spec.seed, "synth-taxi");
  {
    std::ostringstream out;
    out << "pickup_ts,dropoff_ts,pickup_area,dropoff_area\n";
    for (int t = 1; t <= steps; ++t) {
      for (int i = 0; i < n; ++i) {
        const int preview = t < steps ? x[static_cast<size_t>(i)][static_cast<size_t>(t + 1)] : 0;
        const int trips = preview + poisson(trng, 0.7);
        for (int e = 0; e < trips; ++e) {
          double f1 = trng.uniform();
          double f2 = trng.uniform();
          if (f2 < f1) std::swap(f1, f2);
          const int pickup = static_cast<int>(trng.uniform_int(static_cast<uint64_t>(n)));
          out << stamp(origin_sec, t, f1, spec.tau_hours) << ","
              << stamp(origin_sec, t, f2, spec.tau_hours) << "," << pickup << "," << i
              << "\n";
          ++sum.taxi_rows;
        }
      }
    }
    write_text_file(out_dir + "/taxi.csv", out.str());
  }

  // --- pois.csv: static filler -------------------------------------------------
  {
    std::ostringstream out;
    out << "community_area,poi_category\n";
    for (int i = 0; i < n; ++i) {
      for (size_t j = 0; j < kPoiCategories.size(); ++j) {
        const int count = static_cast<int>((static_cast<size_t>(i) * 7 + j * 3) % 5);
        for (int e = 0; e < count; ++e) {
          out << i << "," << kPoiCategories[j] << "\n";
          ++sum.poi_rows;
        }
      }
    }
    write_text_file(out_dir + "/pois.csv", out.str());
  }

  build_synth_graph(n).save(out_dir + "/regions.graph");

  nlohmann::json meta;
  meta["seed"] = spec.seed;
  meta["n"] = n;
  meta["months"] = spec.months;
  meta["tau_hours"] = spec.tau_hours;
  meta["category"] = spec.category;
  meta["origin"] = format_civil(origin);
  meta["end"] = format_civil(end);
  meta["num_steps"] = steps;
  meta["period_steps"] = week;
  nlohmann::json informative;
  for (int i = 0; i < n; ++i)
    informative[std::to_string(i)] = i < 2 ? -1 : driver_of(i);
  meta["informative_neighbor"] = informative;
  meta["informative_feature_index"] = 0;
  write_text_file(out_dir + "/synth_meta.json", meta.dump(2) + "\n");
  return sum;
}

}  // namespace aist

#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/region_graph.hpp"
#include "core/tensors.hpp"

namespace aist {

// Rejected rows never abort ingestion; they are tallied per reason. For taxi
// trips the pickup and dropoff sides are attributed independently, so
// `accepted` counts applied increments and sum(bins) == accepted holds for
// every source.
struct IngestReport {
  int64_t accepted = 0;
  std::map<std::string, int64_t> rejected;

  int64_t total_rejected() const {
    int64_t n = 0;
    for (const auto& [_, c] : rejected) n += c;
    return n;
  }
};

struct IngestSpan {
  CivilTime start;
  CivilTime end;  // exclusive
  int tau_hours = 0;

  int total_steps() const;  // throws ConfigError unless tau divides the span
};

// Crime CSV: timestamp,category,community_area (header row required).
CrimeTensor ingest_crimes(const std::string& csv_path, const RegionGraph& graph,
                          const std::vector<std::string>& categories, const IngestSpan& span,
                          IngestReport& report);

// Taxi CSV: pickup_ts,dropoff_ts,pickup_area,dropoff_area. Fills F1 (inflow,
// dropoff side) and F2 (outflow, pickup side) of an otherwise untouched
// feature tensor.
void ingest_taxi(const std::string& csv_path, const RegionGraph& graph, const IngestSpan& span,
                 FeatureTensor& features, IngestReport& report);

// POI CSV: community_area,poi_category. Fills F3..F12, replicated over time.
void ingest_poi(const std::string& csv_path, const RegionGraph& graph, FeatureTensor& features,
                IngestReport& report);

FeatureTensor make_feature_tensor(int num_regions, int num_steps);

}  // namespace aist

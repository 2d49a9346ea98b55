#pragma once

#include <cstdint>
#include <string>

namespace aist {

// Planted-signal synthetic city. Regions 0 and 1 are "hot": region 0 follows
// a weekly+daily sinusoidal intensity, region 1 is its lag-1 copy. Every
// other ("cold") region i is a thinned lag-1 function of a driver region
// (0 for even i, 1 for odd i) that sits inside its first-hop neighborhood —
// the planted informative neighbor. Taxi inflow (feature index 0) is a noisy
// preview of the next bin's crime count — the planted informative feature.
// POI counts are static, uninformative filler.
struct SynthSpec {
  uint64_t seed = 7;
  int n = 6;  // >= 4
  int months = 3;
  int tau_hours = 4;
  std::string category = "theft";
  int start_year = 2021;
};

struct SynthSummary {
  int num_steps = 0;
  int64_t crime_rows = 0;
  int64_t taxi_rows = 0;
  int64_t poi_rows = 0;
};

// Writes crimes.csv, taxi.csv, pois.csv, regions.graph, synth_meta.json.
// Byte-identical output for a fixed spec.
SynthSummary generate_synth(const SynthSpec& spec, const std::string& out_dir);

}  // namespace aist

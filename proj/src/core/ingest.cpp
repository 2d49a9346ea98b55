#include "core/ingest.hpp"

#include <fstream>

#include "core/errors.hpp"

namespace aist {

int IngestSpan::total_steps() const {
  if (tau_hours <= 0 || 24 % tau_hours != 0)
    throw ConfigError("tau must be a positive divisor of 24, got " + std::to_string(tau_hours));
  const int64_t seconds = civil_to_seconds(end) - civil_to_seconds(start);
  if (seconds <= 0) throw ConfigError("ingest span is empty");
  const int64_t bin = int64_t(tau_hours) * 3600;
  if (seconds % bin != 0)
    throw ConfigError("ingest span is not a whole number of " + std::to_string(tau_hours) +
                      "h bins");
  return static_cast<int>(seconds / bin);
}

namespace {

// Returns the 0-based bin, or -1 when out of span.
int bin_of(const CivilTime& ts, const IngestSpan& span) {
  const int64_t rel = civil_to_seconds(ts) - civil_to_seconds(span.start);
  if (rel < 0) return -1;
  const int64_t bin = rel / (int64_t(span.tau_hours) * 3600);
  if (bin >= span.total_steps()) return -1;
  return static_cast<int>(bin);
}

class CsvReader {
 public:
  CsvReader(const std::string& path, size_t expected_fields)
      : in_(path, std::ios::binary), path_(path), expected_(expected_fields) {
    if (!in_) throw IoError("cannot open CSV: " + path);
    std::string header;
    if (!std::getline(in_, header)) throw DataError("empty CSV: " + path);
  }

  // Reads the next data row; false on EOF. Blank lines are skipped; rows with
  // the wrong field count surface as malformed.
  bool next(std::vector<std::string>& fields, bool& malformed) {
    std::string line;
    while (std::getline(in_, line)) {
      if (trim(line).empty()) continue;
      fields = csv_fields(line);
      malformed = fields.size() != expected_;
      return true;
    }
    return false;
  }

 private:
  std::ifstream in_;
  std::string path_;
  size_t expected_;
};

}  // namespace

CrimeTensor ingest_crimes(const std::string& csv_path, const RegionGraph& graph,
                          const std::vector<std::string>& categories, const IngestSpan& span,
                          IngestReport& report) {
  CrimeTensor crimes;
  crimes.categories = categories;
  crimes.num_regions = graph.num_regions();
  crimes.num_steps = span.total_steps();
  crimes.tau_hours = span.tau_hours;
  crimes.origin = span.start;
  crimes.values =
      Tensor3(static_cast<int64_t>(categories.size()), crimes.num_regions, crimes.num_steps);

  CsvReader reader(csv_path, 3);
  std::vector<std::string> row;
  bool malformed = false;
  while (reader.next(row, malformed)) {
    if (malformed) {
      ++report.rejected["malformed_row"];
      continue;
    }
    const auto ts = parse_civil(row[0]);
    if (!ts) {
      ++report.rejected["bad_timestamp"];
      continue;
    }
    const int k = crimes.category_index(lower(trim(row[1])));
    if (k < 0) {
      ++report.rejected["unknown_category"];
      continue;
    }
    const auto region = parse_int(row[2]);
    if (!region || !graph.has_region(static_cast<int>(*region))) {
      ++report.rejected["unknown_region"];
      continue;
    }
    const int t = bin_of(*ts, span);
    if (t < 0) {
      ++report.rejected["out_of_span"];
      continue;
    }
    crimes.values.at(k, graph.index_of(static_cast<int>(*region)), t) += 1.0;
    ++report.accepted;
  }
  return crimes;
}

FeatureTensor make_feature_tensor(int num_regions, int num_steps) {
  FeatureTensor f;
  f.feature_names = default_feature_names();
  f.values = Tensor3(static_cast<int64_t>(f.feature_names.size()), num_regions, num_steps);
  return f;
}

void ingest_taxi(const std::string& csv_path, const RegionGraph& graph, const IngestSpan& span,
                 FeatureTensor& features, IngestReport& report) {
  CsvReader reader(csv_path, 4);
  std::vector<std::string> row;
  bool malformed = false;
  while (reader.next(row, malformed)) {
    if (malformed) {
      ++report.rejected["malformed_row"];
      continue;
    }
    // Pickup feeds outflow (F2), dropoff feeds inflow (F1); each side stands
    // on its own so a trip ending outside the span still counts its pickup.
    const auto side = [&](const std::string& ts_text, const std::string& region_text,
                          int feature, const char* reject_prefix) {
      const auto ts = parse_civil(ts_text);
      if (!ts) {
        ++report.rejected[std::string(reject_prefix) + "_bad_timestamp"];
        return;
      }
      const auto region = parse_int(region_text);
      if (!region || !graph.has_region(static_cast<int>(*region))) {
        ++report.rejected[std::string(reject_prefix) + "_unknown_region"];
        return;
      }
      const int t = bin_of(*ts, span);
      if (t < 0) {
        ++report.rejected[std::string(reject_prefix) + "_out_of_span"];
        return;
      }
      features.values.at(feature, graph.index_of(static_cast<int>(*region)), t) += 1.0;
      ++report.accepted;
    };
    side(row[1], row[3], 0, "dropoff");  // F1 inflow
    side(row[0], row[2], 1, "pickup");   // F2 outflow
  }
}

void ingest_poi(const std::string& csv_path, const RegionGraph& graph, FeatureTensor& features,
                IngestReport& report) {
  CsvReader reader(csv_path, 2);
  std::vector<std::string> row;
  bool malformed = false;
  const int num_steps = static_cast<int>(features.values.dims[2]);
  while (reader.next(row, malformed)) {
    if (malformed) {
      ++report.rejected["malformed_row"];
      continue;
    }
    const auto region = parse_int(row[0]);
    if (!region || !graph.has_region(static_cast<int>(*region))) {
      ++report.rejected["unknown_region"];
      continue;
    }
    const std::string cat = lower(trim(row[1]));
    int j = -1;
    for (size_t c = 0; c < kPoiCategories.size(); ++c)
      if (kPoiCategories[c] == cat) j = static_cast<int>(c);
    if (j < 0) {
      ++report.rejected["unknown_category"];
      continue;
    }
    const int i = graph.index_of(static_cast<int>(*region));
    for (int t = 0; t < num_steps; ++t) features.values.at(2 + j, i, t) += 1.0;
    ++report.accepted;
  }
}

}  // namespace aist

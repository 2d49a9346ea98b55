#include <doctest.h>

#include <numeric>

#include "core/errors.hpp"
#include "core/ingest.hpp"
#include "core/text.hpp"

using namespace aist;

namespace {

RegionGraph two_regions() {
  return RegionGraph::build({{1, 2}}, {{1, 10}, {2, 10}});
}

IngestSpan day_span(int tau = 6) {
  IngestSpan s;
  s.start = CivilTime{2021, 1, 1, 0, 0, 0};
  s.end = CivilTime{2021, 1, 2, 0, 0, 0};
  s.tau_hours = tau;
  return s;
}

double tensor_sum(const Tensor3& t) {
  return std::accumulate(t.data.begin(), t.data.end(), 0.0);
}

}  // namespace

TEST_CASE("span step count and divisibility errors") {
  CHECK(day_span(6).total_steps() == 4);
  CHECK(day_span(24).total_steps() == 1);
  CHECK_THROWS_AS(day_span(5).total_steps(), ConfigError);   // 5 does not divide 24
  IngestSpan bad = day_span(6);
  bad.end = CivilTime{2021, 1, 1, 3, 0, 0};                   // half a bin
  CHECK_THROWS_AS(bad.total_steps(), ConfigError);
  bad.end = bad.start;
  CHECK_THROWS_AS(bad.total_steps(), ConfigError);
}

TEST_CASE("crime ingestion conserves accepted rows and tallies rejects") {
  const std::string csv = "/tmp/aist_test_crimes.csv";
  write_text_file(csv,
                  "timestamp,category,community_area\n"
                  "2021-01-01 00:10:00,theft,1\n"
                  "2021-01-01 05:59:59,THEFT,1\n"    // category is case-folded
                  "2021-01-01 06:00:00,theft,2\n"    // first second of bin 2
                  "2021-01-01 23:59:59,battery,2\n"
                  "\n"
                  "2020-12-31 23:59:59,theft,1\n"    // before span
                  "2021-01-02 00:00:00,theft,1\n"    // at exclusive end
                  "not-a-time,theft,1\n"
                  "2021-01-01 01:00:00,arson,1\n"    // unknown category
                  "2021-01-01 01:00:00,theft,99\n"   // unknown region
                  "2021-01-01 01:00:00,theft\n");    // malformed
  const RegionGraph g = two_regions();
  IngestReport rep;
  const CrimeTensor crimes = ingest_crimes(csv, g, {"theft", "battery"}, day_span(), rep);

  CHECK(rep.accepted == 4);
  CHECK(tensor_sum(crimes.values) == doctest::Approx(4.0));  // conservation
  CHECK(crimes.values.at(0, 0, 0) == 2.0);
  CHECK(crimes.values.at(0, 1, 1) == 1.0);
  CHECK(crimes.values.at(1, 1, 3) == 1.0);
  CHECK(rep.rejected.at("out_of_span") == 2);
  CHECK(rep.rejected.at("bad_timestamp") == 1);
  CHECK(rep.rejected.at("unknown_category") == 1);
  CHECK(rep.rejected.at("unknown_region") == 1);
  CHECK(rep.rejected.at("malformed_row") == 1);
  CHECK(rep.total_rejected() == 6);
  CHECK(crimes.num_steps == 4);
  CHECK(crimes.tau_hours == 6);
}

TEST_CASE("taxi sides are attributed independently") {
  const std::string csv = "/tmp/aist_test_taxi.csv";
  write_text_file(csv,
                  "pickup_ts,dropoff_ts,pickup_area,dropoff_area\n"
                  "2021-01-01 00:30:00,2021-01-01 01:00:00,1,2\n"
                  // dropoff lands after the span: pickup still counts
                  "2021-01-01 23:00:00,2021-01-02 00:30:00,2,1\n"
                  // pickup region unknown: dropoff still counts
                  "2021-01-01 10:00:00,2021-01-01 10:20:00,99,1\n");
  const RegionGraph g = two_regions();
  const IngestSpan span = day_span();
  FeatureTensor f = make_feature_tensor(g.num_regions(), span.total_steps());
  IngestReport rep;
  ingest_taxi(csv, g, span, f, rep);

  // 4 applied increments: 2 pickups + 2 dropoffs
  CHECK(rep.accepted == 4);
  CHECK(tensor_sum(f.values) == doctest::Approx(4.0));
  // F1 inflow from dropoffs
  CHECK(f.values.at(0, 1, 0) == 1.0);  // region 2, bin 0 (01:00)
  CHECK(f.values.at(0, 0, 1) == 1.0);  // region 1, bin 1 (10:20)
  // F2 outflow from pickups
  CHECK(f.values.at(1, 0, 0) == 1.0);  // region 1, bin 0 (00:30)
  CHECK(f.values.at(1, 1, 3) == 1.0);  // region 2, bin 3 (23:00)
  CHECK(rep.rejected.at("dropoff_out_of_span") == 1);
  CHECK(rep.rejected.at("pickup_unknown_region") == 1);
}

TEST_CASE("poi rows replicate along time") {
  const std::string csv = "/tmp/aist_test_poi.csv";
  write_text_file(csv,
                  "community_area,poi_category\n"
                  "1,food\n"
                  "1,food\n"
                  "2,education\n"
                  "2,unicorns\n"
                  "7,food\n");
  const RegionGraph g = two_regions();
  FeatureTensor f = make_feature_tensor(g.num_regions(), 4);
  IngestReport rep;
  ingest_poi(csv, g, f, rep);

  CHECK(rep.accepted == 3);
  for (int t = 0; t < 4; ++t) {
    CHECK(f.values.at(2, 0, t) == 2.0);  // F3_food, region 1
    CHECK(f.values.at(7, 1, t) == 1.0);  // F8_education, region 2
  }
  CHECK(rep.rejected.at("unknown_category") == 1);
  CHECK(rep.rejected.at("unknown_region") == 1);
}

TEST_CASE("missing and empty csv files") {
  IngestReport rep;
  const RegionGraph g = two_regions();
  CHECK_THROWS_AS(ingest_crimes("/tmp/no_such.csv", g, {"theft"}, day_span(), rep), IoError);
  write_text_file("/tmp/aist_empty.csv", "");
  CHECK_THROWS_AS(ingest_crimes("/tmp/aist_empty.csv", g, {"theft"}, day_span(), rep), DataError);
}

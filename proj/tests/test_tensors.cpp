#include <doctest.h>

#include <cstdint>
#include <cstring>

#include "core/errors.hpp"
#include "core/tensors.hpp"

using namespace aist;

namespace {

CrimeTensor small_crimes() {
  CrimeTensor c;
  c.categories = {"theft", "battery"};
  c.num_regions = 2;
  c.num_steps = 4;
  c.tau_hours = 6;
  c.origin = CivilTime{2021, 1, 1, 0, 0, 0};
  c.values = Tensor3(2, 2, 4);
  // theft, region 0: 0 1 2 3; theft, region 1: constant 5
  for (int t = 0; t < 4; ++t) {
    c.values.at(0, 0, t) = t;
    c.values.at(0, 1, t) = 5.0;
    c.values.at(1, 0, t) = 10.0 - t;
    c.values.at(1, 1, t) = t % 2;
  }
  return c;
}

}  // namespace

TEST_CASE("tensor3 indexing is row major") {
  Tensor3 t(2, 3, 4);
  t.at(1, 2, 3) = 7.5;
  CHECK(t.data[1 * 12 + 2 * 4 + 3] == 7.5);
}

TEST_CASE("tensor3 save/load round trips bit exactly") {
  Tensor3 t(2, 2, 3);
  for (size_t i = 0; i < t.data.size(); ++i)
    t.data[i] = 0.1 * static_cast<double>(i) + 1e-9;  // inexact binary fractions
  const std::string path = "/tmp/aist_test_tensor.bin";
  t.save(path);
  const Tensor3 back = Tensor3::load(path);
  CHECK(back.dims == t.dims);
  REQUIRE(back.data.size() == t.data.size());
  CHECK(std::memcmp(back.data.data(), t.data.data(), t.data.size() * sizeof(double)) == 0);
}

TEST_CASE("tensor3 load rejects junk") {
  write_text_file("/tmp/aist_bad_tensor.bin", "definitely not a tensor");
  CHECK_THROWS_AS(Tensor3::load("/tmp/aist_bad_tensor.bin"), DataError);
  CHECK_THROWS_AS(Tensor3::load("/tmp/missing_tensor.bin"), IoError);
}

TEST_CASE("category_index") {
  const CrimeTensor c = small_crimes();
  CHECK(c.category_index("theft") == 0);
  CHECK(c.category_index("battery") == 1);
  CHECK(c.category_index("arson") == -1);
}

TEST_CASE("default feature names: taxi pair plus ten POI columns") {
  const auto names = default_feature_names();
  REQUIRE(names.size() == 12);
  CHECK(names[0] == "F1_taxi_inflow");
  CHECK(names[1] == "F2_taxi_outflow");
  CHECK(names[2] == "F3_food");
  CHECK(names[11] == "F12_event");
  CHECK(kPoiCategories.size() == 10);
}

TEST_CASE("fit_normalizer maps train min/max to [-1, 1]") {
  const CrimeTensor c = small_crimes();
  const NormalizationSpec spec = fit_normalizer(c, 1, 4);
  // theft region 0: min 0 max 3
  CHECK(spec.apply(0.0, 0, 0) == doctest::Approx(-1.0));
  CHECK(spec.apply(3.0, 0, 0) == doctest::Approx(1.0));
  CHECK(spec.apply(1.5, 0, 0) == doctest::Approx(0.0));
  // invert is the exact inverse on the non-degenerate cell
  for (double x : {0.0, 0.7, 2.2, 3.0})
    CHECK(spec.invert(spec.apply(x, 0, 0), 0, 0) == doctest::Approx(x).epsilon(1e-12));
  // theft region 1 is constant -> degenerate, maps to 0, inverts to the constant
  CHECK(spec.is_degenerate(0, 1));
  CHECK(spec.apply(5.0, 0, 1) == 0.0);
  CHECK(spec.apply(123.0, 0, 1) == 0.0);
  CHECK(spec.invert(0.33, 0, 1) == 5.0);
  CHECK(!spec.is_degenerate(0, 0));
}

TEST_CASE("fit_normalizer respects the step range") {
  const CrimeTensor c = small_crimes();
  const NormalizationSpec spec = fit_normalizer(c, 1, 2);  // theft r0 sees {0, 1}
  CHECK(spec.apply(1.0, 0, 0) == doctest::Approx(1.0));
  CHECK(spec.apply(3.0, 0, 0) == doctest::Approx(5.0));  // linear extrapolation beyond train max
  CHECK_THROWS_AS(fit_normalizer(c, 0, 2), DataError);
  CHECK_THROWS_AS(fit_normalizer(c, 1, 5), DataError);
  CHECK_THROWS_AS(fit_normalizer(c, 3, 2), DataError);
}

TEST_CASE("apply_normalizer transforms the whole tensor") {
  const CrimeTensor c = small_crimes();
  const NormalizationSpec spec = fit_normalizer(c, 1, 4);
  const Tensor3 norm = apply_normalizer(spec, c);
  CHECK(norm.dims == c.values.dims);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int t = 0; t < 4; ++t)
        CHECK(norm.at(k, i, t) == doctest::Approx(spec.apply(c.values.at(k, i, t), k, i)));
  // values within the fitted range stay inside [-1, 1]
  for (double v : norm.data) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/text.hpp"

namespace aist {

// Dense row-major [d0][d1][d2] tensor of doubles with bit-exact binary IO.
struct Tensor3 {
  std::array<int64_t, 3> dims{0, 0, 0};
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int64_t a, int64_t b, int64_t c)
      : dims{a, b, c}, data(static_cast<size_t>(a * b * c), 0.0) {}

  double& at(int64_t a, int64_t b, int64_t c) {
    return data[static_cast<size_t>((a * dims[1] + b) * dims[2] + c)];
  }
  double at(int64_t a, int64_t b, int64_t c) const {
    return data[static_cast<size_t>((a * dims[1] + b) * dims[2] + c)];
  }

  void save(const std::string& path) const;
  static Tensor3 load(const std::string& path);
};

// Binned crime counts, [category][region index][bin]. Bin b (0-based array
// position) covers [origin + b*tau, origin + (b+1)*tau); elsewhere in the
// pipeline bins are referred to by 1-based step labels (label = b + 1).
struct CrimeTensor {
  std::vector<std::string> categories;
  int num_regions = 0;
  int num_steps = 0;
  int tau_hours = 0;
  CivilTime origin;
  Tensor3 values;

  int category_index(const std::string& name) const;  // -1 if unknown
};

// External features, [feature][region index][bin]. F1/F2 are taxi inflow and
// outflow; F3..F12 are POI category counts replicated along the time axis.
// Feature values are deliberately left unscaled.
struct FeatureTensor {
  std::vector<std::string> feature_names;
  Tensor3 values;
};

extern const std::vector<std::string> kPoiCategories;  // canonical order F3..F12
std::vector<std::string> default_feature_names();

// Per-(category, region) min/max fitted on the training slice. apply maps
// min -> -1 and max -> +1 linearly; degenerate pairs (max == min) are flagged
// and map to the constant 0.
struct NormalizationSpec {
  int num_categories = 0;
  int num_regions = 0;
  std::vector<double> min_v;       // [k * num_regions + i]
  std::vector<double> max_v;
  std::vector<uint8_t> degenerate;

  double apply(double x, int k, int i) const;
  double invert(double y, int k, int i) const;
  bool is_degenerate(int k, int i) const {
    return degenerate[static_cast<size_t>(k) * static_cast<size_t>(num_regions) +
                      static_cast<size_t>(i)] != 0;
  }
};

// Fit on bins [first_step, last_step] given as 1-based step labels.
NormalizationSpec fit_normalizer(const CrimeTensor& crimes, int first_step, int last_step);

// Normalized copy of the full crime tensor under a fitted spec.
Tensor3 apply_normalizer(const NormalizationSpec& spec, const CrimeTensor& crimes);

}  // namespace aist

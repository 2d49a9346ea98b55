#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/region_graph.hpp"
#include "core/tensors.hpp"

namespace aist {

// Immutable bundle produced by ingestion and cached on disk.
struct Dataset {
  RegionGraph graph;
  CrimeTensor crimes;
  FeatureTensor features;

  int num_features() const { return static_cast<int>(features.feature_names.size()); }
};

// Cache directory layout: regions.graph, crimes.bin, features.bin,
// tensor_meta.json. Binary tensors round-trip bit-exactly.
void save_cache(const Dataset& data, const std::string& dir);
Dataset load_cache(const std::string& dir);

// One training/eval instance. Step labels are 1-based bin labels (bin b
// covers [origin + (b-1)*tau, origin + b*tau)); every stored index is >= 1
// and < target_step. Sequences are ordered oldest -> newest.
struct SampleWindow {
  int region_index = 0;  // dense index into graph/tensors
  int category = 0;
  int target_step = 0;
  std::vector<int> recent;  // T consecutive steps ending at target-1
  std::vector<int> daily;   // target - t_d*m, m = 24/tau
  std::vector<int> weekly;  // target - t_w*7*m
  double y_raw = 0.0;       // ground-truth count at (category, region, target)
};

struct WindowReport {
  int64_t emitted = 0;
  int64_t skipped_insufficient_history = 0;
};

// All windows of one category, every region, every target step with full
// history; ordered by (target_step, region_index).
std::vector<SampleWindow> build_windows(const Config& cfg, const Dataset& data, int category,
                                        WindowReport* report = nullptr);

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Calendar mode: train = first `train_months` months, then the chronological
// first val_frac of the remaining windows is validation and the rest test.
// Fraction mode: chronological cuts at train_frac / train_frac+val_frac,
// advanced to bin boundaries so no target step straddles a partition.
SplitIndices split_dataset(const std::vector<SampleWindow>& windows, const Config& cfg,
                           const Dataset& data);

// Per-category model inputs: normalized crime plane, parent-sum plane, and
// raw external features, addressed by 1-based step labels.
struct CategoryView {
  const RegionGraph* graph = nullptr;
  const Tensor3* features = nullptr;
  int category = 0;
  int num_steps = 0;
  int num_features = 0;
  std::vector<double> xhat;  // [region][step-1]
  std::vector<double> z;     // parent sums of xhat, same layout

  double x(int i, int step) const {
    return xhat[static_cast<size_t>(i) * num_steps + step - 1];
  }
  double zv(int i, int step) const {
    return z[static_cast<size_t>(i) * num_steps + step - 1];
  }
  double f(int j, int i, int step) const { return features->at(j, i, step - 1); }
};

CategoryView build_category_view(const Dataset& data, const NormalizationSpec& spec,
                                 int category);

}  // namespace aist

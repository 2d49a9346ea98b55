#pragma once

#include <functional>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/dataset.hpp"
#include "core/model.hpp"

namespace aist {

// Everything train/eval needs for one category: windows, chronological split,
// the normalizer fitted on the training slice, and normalized input planes.
struct TrainContext {
  Config cfg;
  const Dataset* data = nullptr;
  int category = 0;
  std::vector<SampleWindow> windows;
  WindowReport window_report;
  SplitIndices split;
  NormalizationSpec norm;
  CategoryView view;
};

TrainContext make_train_context(const Config& cfg, const Dataset& data);

// Same windows/split, but reuses an already-fitted normalizer (checkpoint
// replay) instead of refitting on the training slice.
TrainContext make_eval_context(const Config& cfg, const Dataset& data,
                               const NormalizationSpec& norm);

struct RegionMetric {
  int region_id = 0;
  double mae = 0.0;
  double mse = 0.0;
  int64_t count = 0;
};

// MAE/MSE on denormalized counts plus the normalized-scale MSE (the training
// loss surface). MAE <= sqrt(MSE) is asserted on construction.
struct MetricReport {
  double mae = 0.0;
  double mse = 0.0;
  double norm_mse = 0.0;
  int64_t count = 0;
  std::vector<RegionMetric> per_region;
};

struct EpochLog {
  int epoch = 0;           // 1-based
  double batch_loss = 0.0; // mean train-mode batch MSE (normalized scale)
  double train_mse = 0.0;  // eval-mode MSE on the train split (normalized)
  double val_mae = 0.0;    // denormalized
  double val_mse = 0.0;
};

struct TrainResult {
  ParamStore best_params;  // lowest validation MAE
  int best_epoch = 0;
  double best_val_mae = 0.0;
  ParamStore final_params;
  std::vector<EpochLog> log;
};

// Called after every epoch with the current parameters (adversarial and
// snapshot protocols hook in here). Return false to stop early.
using EpochHook = std::function<bool(int epoch, const ParamStore&)>;

TrainResult train(const TrainContext& ctx, const EpochHook& hook = nullptr);

// Eval-mode metrics over the given window indices; optionally collects
// per-instance predictions and attention traces (trace collection is
// single-threaded to keep ordering trivially stable).
MetricReport evaluate(const TrainContext& ctx, const ParamStore& params,
                      const std::vector<int>& idx,
                      std::vector<PredictionRecord>* preds = nullptr,
                      std::vector<AttentionTrace>* traces = nullptr);

Checkpoint to_checkpoint(const TrainContext& ctx, const ParamStore& params);

}  // namespace aist

#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/params.hpp"
#include "core/rng.hpp"
#include "core/sab_lstm.hpp"
#include "core/tape.hpp"

namespace aist {

// Builds the parameter store for a config (group set depends on the variant
// flags; insertion order is fixed so initialization is reproducible).
ParamStore make_params(const Config& cfg, int num_features);

// Tape leaves mirroring a ParamStore, in group order. Bind once, freeze the
// tape, then refresh values in place after each optimizer step.
struct ModelNodes {
  std::vector<NodeId> groups;

  NodeId of(const ParamStore& store, const std::string& name) const;
};

ModelNodes bind_params(Tape& t, const ParamStore& store);
void refresh_params(Tape& t, const ModelNodes& nodes, const ParamStore& store);

// --- attention traces (recorded in eval/explain paths) ----------------------
struct StepTrace {
  int step = 0;                    // 1-based data step label
  std::vector<int> neighbor_ids;   // ascending, self included
  std::vector<double> x_vals;      // normalized crime per neighbor
  std::vector<double> z_vals;      // parent sums per neighbor
  std::vector<double> f_vals;      // n x J row-major raw features
  std::vector<double> alpha;       // spatial attention (pre-dropout)
  std::vector<double> beta;        // n x J row-major feature attention
  std::vector<double> c_pre;       // pre-activation crime embedding
  std::vector<double> e_pre;       // pre-activation feature embedding (fgat mode)
};

struct StreamTrace {
  std::string name;  // "recent" / "daily" / "weekly"
  std::vector<StepTrace> steps;
  std::vector<SabStream::StepRecord> temporal;  // one per step
  std::vector<double> h_final;
};

struct AttentionTrace {
  std::vector<StreamTrace> streams;
  std::vector<double> trend_scores;  // empty in uniform mode
  std::vector<double> trend_alpha;
  std::vector<double> context;
  double y_norm = 0.0;
};

struct PredictionRecord {
  int region_index = 0;
  int region_id = 0;
  int category = 0;
  int target_step = 0;
  double y_norm = 0.0;    // model output in [-1, 1]
  double y_denorm = 0.0;  // back on the count scale
  double y_true = 0.0;    // raw ground truth
};

enum class Mode { kTrain, kEval };

struct ForwardOut {
  NodeId yhat = -1;                   // scalar prediction node
  std::vector<NodeId> final_temporal; // last temporal attention per stream (-1 if none)
  AttentionTrace trace;               // filled when want_trace
};

// Builds the whole per-sample graph on the tape (params must already be bound
// and the tape frozen+reset around samples by the caller). dropout_rng is
// consumed only in train mode.
ForwardOut forward_window(Tape& t, const ModelNodes& nodes, const ParamStore& store,
                          const Config& cfg, const CategoryView& view,
                          const SampleWindow& w, Mode mode, Rng* dropout_rng,
                          bool want_trace);

// Scaled inverted-dropout mask: entries are 1/(1-p) with probability 1-p, else 0.
void dropout_mask(Rng& rng, double p, std::vector<double>& out, size_t n);

}  // namespace aist

#pragma once

// Shared test fixtures: a deterministic three-region dataset and a tiny model
// configuration sized so full training runs take well under a second.

#include <vector>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/training.hpp"

namespace aist::testfx {

// 1-2-3 path graph; regions 1,2 share a parent. Counts follow region-specific
// periodic patterns so normalization is non-degenerate everywhere.
inline Dataset toy_dataset(int num_steps) {
  Dataset d;
  d.graph = RegionGraph::build({{1, 2}, {2, 3}}, {{1, 10}, {2, 10}, {3, 20}});
  d.crimes.categories = {"theft"};
  d.crimes.num_regions = 3;
  d.crimes.num_steps = num_steps;
  d.crimes.tau_hours = 4;
  d.crimes.origin = CivilTime{2021, 1, 1, 0, 0, 0};
  d.crimes.values = Tensor3(1, 3, num_steps);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < num_steps; ++t)
      d.crimes.values.at(0, i, t) =
          static_cast<double>((t % (5 + i)) + ((i + 1) * (t / 7)) % 4);
  d.features.feature_names = {"F1_taxi_inflow", "F2_taxi_outflow"};
  d.features.values = Tensor3(2, 3, num_steps);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 3; ++i)
      for (int t = 0; t < num_steps; ++t)
        d.features.values.at(j, i, t) = 0.5 * j + 0.25 * i + 0.1 * (t % 4);
  return d;
}

// All three streams with short lookbacks; weekly reach (42 steps) dominates.
inline Config small_config() {
  Config cfg;
  cfg.tau_hours = 4;
  cfg.t_recent = 3;
  cfg.t_daily = 2;
  cfg.t_weekly = 1;
  cfg.embed_f = 3;
  cfg.d_qk = 4;
  cfg.hidden = 5;
  cfg.attn_a = 4;
  cfg.recent = {2, 2, 5};
  cfg.daily = {1, 2, 5};
  cfg.weekly = {1, 5, 1};
  cfg.batch = 8;
  cfg.lr = 0.01;
  cfg.epochs = 2;
  cfg.seed = 7;
  cfg.split_mode = SplitMode::kFraction;
  cfg.train_frac = 0.7;
  cfg.val_frac = 0.1;
  return cfg;
}

inline TrainContext small_context(const Dataset& data, const Config& cfg) {
  return make_train_context(cfg, data);
}

}  // namespace aist::testfx

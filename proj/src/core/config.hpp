#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace aist {

enum class SplitMode { kCalendar, kFraction };
enum class FeatureMode { kFgat, kNone, kRawConcat };

struct StreamConfig {
  int k_att = 5;
  int k_top = 5;
  int trunc = 5;
};

// Every tunable of the model and trainer; mirrored 1:1 by the flat key=value
// config-file keys (see kv_keys in config.cpp) and the AIST_* env overrides.
struct Config {
  std::string preset = "paper";
  std::string category = "theft";

  // window geometry
  int tau_hours = 4;
  int t_recent = 20;
  int t_daily = 20;
  int t_weekly = 3;

  // model dimensions
  int embed_f = 8;   // hGAT/fGAT output size F
  int d_qk = 40;     // fGAT query/key size
  int hidden = 40;   // SAB-LSTM hidden size H
  int attn_a = 30;   // location-attention size A

  // streams (recent / daily / weekly)
  bool use_recent = true;
  bool use_daily = true;
  bool use_weekly = true;
  StreamConfig recent{5, 5, 5};
  StreamConfig daily{5, 5, 5};
  StreamConfig weekly{1, 5, 1};

  // ablation / variant flags
  bool parent_attention = true;
  FeatureMode feature_mode = FeatureMode::kFgat;
  bool plain_lstm = false;
  bool uniform_attention = false;
  bool add_provisional = false;  // re-add h_hat to the attention summary

  // optimization
  int batch = 42;
  double lr = 0.001;
  int epochs = 30;
  uint64_t seed = 7;
  int threads = 1;
  double dropout_attn = 0.5;
  double dropout_stream = 0.2;
  double leaky_slope = 0.2;

  // split
  SplitMode split_mode = SplitMode::kCalendar;
  int train_months = 8;
  double val_frac = 0.1;    // of the tail (calendar) / of all windows (fraction)
  double train_frac = 0.7;  // fraction mode only

  // faithfulness protocol knobs
  int adv_epochs = 30;
  int adv_eval_every = 5;
  double jsd_select_threshold = 1.0;
  int seed_variants = 3;

  int steps_per_day() const { return 24 / tau_hours; }
  int num_streams() const {
    return (use_recent ? 1 : 0) + (use_daily ? 1 : 0) + (use_weekly ? 1 : 0);
  }
  // LSTM input dimension after the spatial module.
  int input_dim(int num_features) const;

  void validate() const;  // throws ConfigError
};

// Named presets: "paper" (Table-2 scale) and "desk" (CI scale).
void apply_preset(Config& c, const std::string& name);
// Named ablation variants aist_g/h/f/fp/r/d/w/l; "base" is a no-op.
void apply_variant(Config& c, const std::string& name);

// Set one key; unknown key or unparsable value throws ConfigError.
void apply_kv(Config& c, const std::string& key, const std::string& value);
// Flat key=value lines, '#' comments. Applied in file order.
void apply_config_file(Config& c, const std::string& path);
// AIST_<UPPER_KEY>=value environment overrides, in canonical key order.
void apply_env(Config& c);

// Canonical serialization (one key=value per line, fixed key order) —
// embedded in checkpoints and echoed into metrics.
std::string config_to_text(const Config& c);
Config config_from_text(const std::string& text);
std::vector<std::pair<std::string, std::string>> config_items(const Config& c);

}  // namespace aist

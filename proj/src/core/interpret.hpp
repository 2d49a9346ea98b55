#pragma once

#include <span>
#include <vector>

#include "core/model.hpp"
#include "core/training.hpp"

namespace aist {

// --- contribution coefficients (exact decompositions of pre-activations) ----
struct RegionContribution {
  int region_id = 0;
  std::vector<double> phi;  // length F: alpha_n * w_x * x_n
  double norm = 0.0;        // L2 norm of phi
  double mean = 0.0;        // signed mean of phi
};

struct FeatureContribution {
  int feature = 0;          // 0-based feature index
  std::vector<double> phi;  // length F: sum_n alpha_n beta_n^j * w_v * f_n^j
  double norm = 0.0;
  double mean = 0.0;
};

struct TrendContribution {
  std::string stream;
  double phi = 0.0;  // alpha_a * (w · h_a)
};

// Sum over neighbors reconstructs c_pre exactly.
std::vector<RegionContribution> region_contribution(const StepTrace& tr,
                                                    const ParamStore& params);
// Sum over features reconstructs e_pre exactly (fgat mode only).
std::vector<FeatureContribution> feature_contribution(const StepTrace& tr,
                                                      const ParamStore& params);
// Sum over streams plus bias b reconstructs the pre-tanh logit exactly.
std::vector<TrendContribution> trend_contribution(const AttentionTrace& trace,
                                                  const ParamStore& params);

// --- divergences -------------------------------------------------------------
double tvd(std::span<const double> p1, std::span<const double> p2);
// Both arguments floored at eps and renormalized first; natural log.
double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double eps = 1e-12);
// Jensen-Shannon divergence of one distribution pair; bounded by ln 2.
double jsd_pair(std::span<const double> p, std::span<const double> q);
// Summed over an instance's temporal distributions (one per stream; empty
// pairs contribute zero; lengths must agree pairwise).
double jsd_sets(const std::vector<std::vector<double>>& a,
                const std::vector<std::vector<double>>& b);

// --- faithfulness protocol ---------------------------------------------------
// Eval-mode outputs of one model on a fixed instance list: the normalized
// prediction and the final-step temporal attention distribution per stream.
struct AttentionTargets {
  std::vector<double> y_norm;                           // per instance
  std::vector<std::vector<std::vector<double>>> dists;  // [instance][stream]
};

AttentionTargets collect_attention(const TrainContext& ctx, const ParamStore& params,
                                   const std::vector<int>& idx);

struct InstanceMetric {
  int instance_id = 0;  // global window index
  double tvd = 0.0;
  double jsd = 0.0;
};

struct CurvePoint {
  double lambda = 0.0;
  int epoch = 0;
  double mean_tvd = 0.0;
  double mean_jsd = 0.0;
};

struct AdvRunReport {
  double lambda = 0.0;
  std::vector<CurvePoint> snapshots;         // one per evaluation epoch
  CurvePoint selected;                       // min TVD among JSD > threshold, else final
  std::vector<InstanceMetric> per_instance;  // selected model on the eval set
  MetricReport test_metrics;                 // selected model vs ground truth
};

// Adversary: fresh-init model minimizing mean(tvd(y_adv, y_base) - lambda *
// KL(base temporal attention || adversarial)) over the training split.
AdvRunReport train_adversarial(const TrainContext& ctx, const AttentionTargets& train_base,
                               const AttentionTargets& test_base, double lambda,
                               uint64_t adv_seed);

struct SeedPairMetric {
  uint64_t seed_a = 0;
  uint64_t seed_b = 0;
  double mean_tvd = 0.0;
  double mean_jsd = 0.0;
};

struct FaithfulnessReport {
  std::vector<int> instance_ids;  // eval instances (global window indices)
  MetricReport base_test;
  int base_best_epoch = 0;
  double base_best_val_mae = 0.0;
  MetricReport uniform_test;
  int uniform_best_epoch = 0;
  double uniform_best_val_mae = 0.0;
  double uniform_mark_tvd = 0.0;  // uniform variant vs base on the eval set
  double uniform_mark_jsd = 0.0;
  std::vector<uint64_t> seeds;
  std::vector<SeedPairMetric> seed_pairs;
  std::vector<double> seed_instance_jsd;  // per instance, mean over seed pairs
  std::vector<AdvRunReport> adversarial;  // one per lambda, input order
};

// Full protocol: base training, uniform-frozen variant, seed-variance band,
// and one adversarial run per lambda. Lambdas must be >= 0.
FaithfulnessReport run_faithfulness(const TrainContext& ctx,
                                    std::span<const double> lambdas);

}  // namespace aist

#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/interpret.hpp"
#include "fixtures.hpp"

using namespace aist;

namespace {

constexpr double kLn2 = 0.6931471805599453;

bool close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * (1.0 + std::fabs(b));
}

struct TraceRig {
  Dataset data;
  Config cfg;
  TrainContext ctx;
  ParamStore params;
  std::vector<PredictionRecord> preds;
  std::vector<AttentionTrace> traces;

  explicit TraceRig(Config c)
      : data(testfx::toy_dataset(60)),
        cfg(std::move(c)),
        ctx(testfx::small_context(data, cfg)),
        params(make_params(cfg, data.num_features())) {
    params.init_uniform(cfg.seed);
    evaluate(ctx, params, ctx.split.test, &preds, &traces);
  }
};

}  // namespace

TEST_CASE("total variation distance pins") {
  const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0}, c{0.25, 0.75};
  CHECK(tvd(a, b) == 1.0);
  CHECK(tvd(a, a) == 0.0);
  CHECK(tvd(std::vector<double>{0.5, 0.5}, c) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(tvd(a, c) == tvd(c, a));
  CHECK_THROWS_AS(tvd(a, std::vector<double>{1.0}), InternalError);
}

TEST_CASE("KL divergence floors and renormalizes both arguments") {
  const std::vector<double> p{1.0, 0.0}, q{0.5, 0.5};
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(q, q) == 0.0);
  // Floored mass at 1e-12 barely perturbs ln 2.
  CHECK(close(kl_divergence(p, q), kLn2, 1e-6));
  CHECK(kl_divergence(p, q) != kl_divergence(q, p));
  // Disjoint supports stay finite thanks to the floor: ~ ln(1/eps).
  const double disjoint = kl_divergence(p, std::vector<double>{0.0, 1.0});
  CHECK(close(disjoint, 12.0 * std::log(10.0), 1e-3));
  // A fat floor visibly reshapes both distributions: eps = 0.25 gives
  // [0.8, 0.2] vs [0.2, 0.8], KL = 0.6 * ln 4.
  const double fat = kl_divergence(p, std::vector<double>{0.0, 1.0}, 0.25);
  CHECK(fat == doctest::Approx(0.6 * std::log(4.0)).epsilon(1e-12));
  CHECK_THROWS_AS(kl_divergence(p, std::vector<double>{1.0}), InternalError);
}

TEST_CASE("Jensen-Shannon divergence is symmetric and bounded by ln 2") {
  const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
  CHECK(jsd_pair(a, a) == 0.0);
  CHECK(close(jsd_pair(a, b), kLn2, 1e-6));

  Rng rng = rng_for(11, "jsd");
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 2 + static_cast<size_t>(rng.uniform_int(5));
    std::vector<double> p(n), q(n);
    double ps = 0.0, qs = 0.0;
    for (size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform();
      q[i] = rng.uniform();
      ps += p[i];
      qs += q[i];
    }
    for (size_t i = 0; i < n; ++i) {
      p[i] /= ps;
      q[i] /= qs;
    }
    const double d = jsd_pair(p, q);
    CHECK(d >= 0.0);
    CHECK(d <= kLn2 + 1e-12);
    CHECK(d == jsd_pair(q, p));
  }
  CHECK_THROWS_AS(jsd_pair(a, std::vector<double>{1.0}), InternalError);
}

TEST_CASE("jsd_sets sums streams and skips empty pairs") {
  const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
  const std::vector<std::vector<double>> s1{a, a, a};
  const std::vector<std::vector<double>> s2{b, b, b};
  CHECK(close(jsd_sets(s1, s2), 3.0 * kLn2, 1e-6));
  CHECK(jsd_sets(s1, s1) == 0.0);

  // An empty pair contributes nothing; a half-empty pair is an error.
  CHECK(close(jsd_sets({{}, a}, {{}, b}), kLn2, 1e-6));
  CHECK_THROWS_AS(jsd_sets({{}}, {a}), InternalError);
  CHECK_THROWS_AS(jsd_sets({a}, {a, b}), InternalError);
}

TEST_CASE("region contributions reconstruct c_pre exactly") {
  const TraceRig rig(testfx::small_config());
  const auto& w_x = rig.params.group("hgat.w_x").data;
  int checked = 0;
  for (const AttentionTrace& trace : rig.traces) {
    for (const StreamTrace& stream : trace.streams) {
      for (const StepTrace& step : stream.steps) {
        const auto contrib = region_contribution(step, rig.params);
        REQUIRE(contrib.size() == step.neighbor_ids.size());
        for (size_t f = 0; f < w_x.size(); ++f) {
          double sum = 0.0;
          for (const auto& rc : contrib) sum += rc.phi[f];
          CHECK(close(sum, step.c_pre[f], 1e-12));
        }
        for (size_t n = 0; n < contrib.size(); ++n) {
          CHECK(contrib[n].region_id == step.neighbor_ids[n]);
          double sq = 0.0, sum = 0.0;
          for (double v : contrib[n].phi) {
            sq += v * v;
            sum += v;
          }
          CHECK(contrib[n].norm == std::sqrt(sq));
          CHECK(contrib[n].mean == sum / static_cast<double>(contrib[n].phi.size()));
        }
        ++checked;
      }
    }
    if (checked > 40) break;
  }
  CHECK(checked > 0);
}

TEST_CASE("feature contributions reconstruct e_pre exactly") {
  const TraceRig rig(testfx::small_config());
  const int J = rig.data.num_features();
  int checked = 0;
  for (const AttentionTrace& trace : rig.traces) {
    for (const StreamTrace& stream : trace.streams) {
      for (const StepTrace& step : stream.steps) {
        const auto contrib = feature_contribution(step, rig.params);
        REQUIRE(contrib.size() == static_cast<size_t>(J));
        for (size_t f = 0; f < step.e_pre.size(); ++f) {
          double sum = 0.0;
          for (const auto& fc : contrib) sum += fc.phi[f];
          CHECK(close(sum, step.e_pre[f], 1e-12));
        }
        for (int j = 0; j < J; ++j) CHECK(contrib[static_cast<size_t>(j)].feature == j);
        ++checked;
      }
    }
    if (checked > 40) break;
  }
  CHECK(checked > 0);

  // Without the feature branch there is no beta to decompose.
  Config none = testfx::small_config();
  none.feature_mode = FeatureMode::kNone;
  const TraceRig plain(none);
  CHECK(plain.traces.front().streams.front().steps.front().beta.empty());
  CHECK_THROWS_AS(
      feature_contribution(plain.traces.front().streams.front().steps.front(), plain.params),
      InternalError);
}

TEST_CASE("trend contributions reconstruct the pre-tanh logit") {
  const TraceRig rig(testfx::small_config());
  const auto& w = rig.params.group("fusion.w").data;
  const double bias = rig.params.group("fusion.b").data[0];
  for (const AttentionTrace& trace : rig.traces) {
    const auto contrib = trend_contribution(trace, rig.params);
    REQUIRE(contrib.size() == trace.streams.size());
    CHECK(contrib[0].stream == "recent");
    CHECK(contrib[1].stream == "daily");
    CHECK(contrib[2].stream == "weekly");
    double sum = 0.0;
    for (const auto& tc : contrib) sum += tc.phi;
    double ctx_dot = 0.0;
    for (size_t f = 0; f < w.size(); ++f) ctx_dot += w[f] * trace.context[f];
    CHECK(close(sum, ctx_dot, 1e-12));
    CHECK(close(std::tanh(sum + bias), trace.y_norm, 1e-9));
  }
}

TEST_CASE("collect_attention returns one prediction and one distribution set per instance") {
  const Dataset data = testfx::toy_dataset(60);
  const Config cfg = testfx::small_config();
  const TrainContext ctx = testfx::small_context(data, cfg);
  ParamStore params = make_params(cfg, data.num_features());
  params.init_uniform(cfg.seed);

  const AttentionTargets t = collect_attention(ctx, params, ctx.split.test);
  REQUIRE(t.y_norm.size() == ctx.split.test.size());
  REQUIRE(t.dists.size() == ctx.split.test.size());
  for (size_t i = 0; i < t.dists.size(); ++i) {
    CHECK(std::fabs(t.y_norm[i]) <= 1.0);
    REQUIRE(t.dists[i].size() == 3);
    // recent (T=3, k_att=2) and daily (T=2, k_att=1) hold one memory entry at
    // their final step; weekly (T=1) never attends.
    CHECK(t.dists[i][0].size() == 1);
    CHECK(t.dists[i][1].size() == 1);
    CHECK(t.dists[i][2].empty());
    for (const auto& d : t.dists[i]) {
      double sum = 0.0;
      for (double v : d) {
        CHECK(v >= 0.0);
        sum += v;
      }
      if (!d.empty()) CHECK(close(sum, 1.0, 1e-9));
    }
    CHECK(jsd_sets(t.dists[i], t.dists[i]) == 0.0);
  }
}

TEST_CASE("adversarial entry points validate lambda") {
  const Dataset data = testfx::toy_dataset(60);
  const Config cfg = testfx::small_config();
  const TrainContext ctx = testfx::small_context(data, cfg);
  CHECK_THROWS_AS(train_adversarial(ctx, {}, {}, -1.0, 1), ConfigError);
  // Sized targets are required before any training happens.
  CHECK_THROWS_AS(train_adversarial(ctx, {}, {}, 0.0, 1), InternalError);
  const std::vector<double> bad{0.0, -0.5};
  CHECK_THROWS_AS(run_faithfulness(ctx, bad), ConfigError);
}

TEST_CASE("run_faithfulness produces a structurally complete report") {
  const Dataset data = testfx::toy_dataset(60);
  Config cfg = testfx::small_config();
  cfg.epochs = 2;
  cfg.adv_epochs = 2;
  cfg.adv_eval_every = 1;
  cfg.seed_variants = 2;
  const TrainContext ctx = testfx::small_context(data, cfg);

  const std::vector<double> lambdas{0.0, 0.05};
  const FaithfulnessReport rep = run_faithfulness(ctx, lambdas);
  const size_t n = ctx.split.test.size();

  CHECK(rep.instance_ids == ctx.split.test);
  CHECK(rep.base_test.count == static_cast<int64_t>(n));
  CHECK(rep.uniform_test.count == static_cast<int64_t>(n));
  CHECK(rep.base_best_epoch >= 1);
  CHECK(rep.base_best_epoch <= 2);
  CHECK(rep.uniform_best_epoch >= 1);
  CHECK(std::isfinite(rep.base_best_val_mae));
  CHECK(rep.uniform_mark_tvd >= 0.0);
  CHECK(rep.uniform_mark_jsd >= 0.0);

  REQUIRE(rep.seeds.size() == 2);
  CHECK(rep.seeds[0] == cfg.seed);
  CHECK(rep.seeds[1] == cfg.seed + 1);
  REQUIRE(rep.seed_pairs.size() == 1);
  CHECK(rep.seed_pairs[0].seed_a == cfg.seed);
  CHECK(rep.seed_pairs[0].seed_b == cfg.seed + 1);
  CHECK(rep.seed_pairs[0].mean_jsd >= 0.0);
  REQUIRE(rep.seed_instance_jsd.size() == n);
  double inst_sum = 0.0;
  for (double v : rep.seed_instance_jsd) {
    CHECK(v >= 0.0);
    inst_sum += v;
  }
  // One seed pair: the per-instance mean averages back to the pair mean.
  CHECK(close(inst_sum / static_cast<double>(n), rep.seed_pairs[0].mean_jsd, 1e-12));

  REQUIRE(rep.adversarial.size() == lambdas.size());
  for (size_t li = 0; li < lambdas.size(); ++li) {
    const AdvRunReport& adv = rep.adversarial[li];
    CHECK(adv.lambda == lambdas[li]);
    REQUIRE(adv.snapshots.size() == 2);  // eval_every=1 over 2 epochs
    CHECK(adv.snapshots[0].epoch == 1);
    CHECK(adv.snapshots[1].epoch == 2);
    bool selected_is_snapshot = false;
    for (const CurvePoint& p : adv.snapshots) {
      CHECK(p.lambda == lambdas[li]);
      CHECK(p.mean_tvd >= 0.0);
      CHECK(p.mean_jsd >= 0.0);
      if (p.epoch == adv.selected.epoch && p.mean_tvd == adv.selected.mean_tvd)
        selected_is_snapshot = true;
    }
    CHECK(selected_is_snapshot);
    REQUIRE(adv.per_instance.size() == n);
    double tvd_sum = 0.0, jsd_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      CHECK(adv.per_instance[i].instance_id == ctx.split.test[i]);
      CHECK(adv.per_instance[i].tvd >= 0.0);
      CHECK(adv.per_instance[i].jsd >= 0.0);
      tvd_sum += adv.per_instance[i].tvd;
      jsd_sum += adv.per_instance[i].jsd;
    }
    CHECK(close(tvd_sum / static_cast<double>(n), adv.selected.mean_tvd, 1e-12));
    CHECK(close(jsd_sum / static_cast<double>(n), adv.selected.mean_jsd, 1e-12));
    CHECK(adv.test_metrics.count == static_cast<int64_t>(n));
  }
}

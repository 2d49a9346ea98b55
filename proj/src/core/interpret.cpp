#include "core/interpret.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace aist {

std::vector<RegionContribution> region_contribution(const StepTrace& tr,
                                                    const ParamStore& params) {
  const auto& w_x = params.group("hgat.w_x").data;
  std::vector<RegionContribution> out;
  out.reserve(tr.neighbor_ids.size());
  for (size_t n = 0; n < tr.neighbor_ids.size(); ++n) {
    RegionContribution rc;
    rc.region_id = tr.neighbor_ids[n];
    const double scale = tr.alpha[n] * tr.x_vals[n];
    rc.phi.resize(w_x.size());
    double sq = 0.0, sum = 0.0;
    for (size_t f = 0; f < w_x.size(); ++f) {
      rc.phi[f] = scale * w_x[f];
      sq += rc.phi[f] * rc.phi[f];
      sum += rc.phi[f];
    }
    rc.norm = std::sqrt(sq);
    rc.mean = sum / static_cast<double>(w_x.size());
    out.push_back(std::move(rc));
  }
  return out;
}

std::vector<FeatureContribution> feature_contribution(const StepTrace& tr,
                                                      const ParamStore& params) {
  const auto& w_v = params.group("fgat.w_v").data;
  const size_t n = tr.neighbor_ids.size();
  if (tr.beta.empty()) throw InternalError("feature_contribution: trace has no beta");
  const size_t J = tr.beta.size() / n;
  std::vector<FeatureContribution> out;
  out.reserve(J);
  for (size_t j = 0; j < J; ++j) {
    FeatureContribution fc;
    fc.feature = static_cast<int>(j);
    double scale = 0.0;
    for (size_t a = 0; a < n; ++a)
      scale += tr.alpha[a] * tr.beta[a * J + j] * tr.f_vals[a * J + j];
    fc.phi.resize(w_v.size());
    double sq = 0.0, sum = 0.0;
    for (size_t f = 0; f < w_v.size(); ++f) {
      fc.phi[f] = scale * w_v[f];
      sq += fc.phi[f] * fc.phi[f];
      sum += fc.phi[f];
    }
    fc.norm = std::sqrt(sq);
    fc.mean = sum / static_cast<double>(w_v.size());
    out.push_back(std::move(fc));
  }
  return out;
}

std::vector<TrendContribution> trend_contribution(const AttentionTrace& trace,
                                                  const ParamStore& params) {
  const auto& w = params.group("fusion.w").data;
  std::vector<TrendContribution> out;
  out.reserve(trace.streams.size());
  for (size_t a = 0; a < trace.streams.size(); ++a) {
    TrendContribution tc;
    tc.stream = trace.streams[a].name;
    const auto& h = trace.streams[a].h_final;
    double dot = 0.0;
    for (size_t f = 0; f < w.size(); ++f) dot += w[f] * h[f];
    tc.phi = trace.trend_alpha[a] * dot;
    out.push_back(std::move(tc));
  }
  return out;
}

double tvd(std::span<const double> p1, std::span<const double> p2) {
  if (p1.size() != p2.size()) throw InternalError("tvd: length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < p1.size(); ++i) s += std::abs(p1[i] - p2[i]);
  return 0.5 * s;
}

namespace {

std::vector<double> floor_renorm_vals(std::span<const double> p, double eps) {
  std::vector<double> out(p.size());
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    out[i] = std::max(p[i], eps);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q, double eps) {
  if (p.size() != q.size()) throw InternalError("kl: length mismatch");
  const auto pf = floor_renorm_vals(p, eps);
  const auto qf = floor_renorm_vals(q, eps);
  double s = 0.0;
  for (size_t i = 0; i < pf.size(); ++i) s += pf[i] * std::log(pf[i] / qf[i]);
  return s;
}

double jsd_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InternalError("jsd: length mismatch");
  const auto pf = floor_renorm_vals(p, 1e-12);
  const auto qf = floor_renorm_vals(q, 1e-12);
  double s = 0.0;
  for (size_t i = 0; i < pf.size(); ++i) {
    const double m = 0.5 * (pf[i] + qf[i]);
    s += 0.5 * pf[i] * std::log(pf[i] / m) + 0.5 * qf[i] * std::log(qf[i] / m);
  }
  return s;
}

double jsd_sets(const std::vector<std::vector<double>>& a,
                const std::vector<std::vector<double>>& b) {
  if (a.size() != b.size()) throw InternalError("jsd_sets: stream count mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].empty() && b[i].empty()) continue;
    s += jsd_pair(a[i], b[i]);
  }
  return s;
}

AttentionTargets collect_attention(const TrainContext& ctx, const ParamStore& params,
                                   const std::vector<int>& idx) {
  std::vector<PredictionRecord> preds;
  std::vector<AttentionTrace> traces;
  evaluate(ctx, params, idx, &preds, &traces);
  AttentionTargets t;
  t.y_norm.reserve(idx.size());
  t.dists.reserve(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) {
    t.y_norm.push_back(preds[i].y_norm);
    std::vector<std::vector<double>> per_stream;
    for (const auto& st : traces[i].streams) {
      if (st.temporal.empty())
        per_stream.emplace_back();
      else
        per_stream.push_back(st.temporal.back().temporal_alpha);
    }
    t.dists.push_back(std::move(per_stream));
  }
  return t;
}

namespace {

class AdvAdam {  // same update rule as the trainer's; duplicated for locality
 public:
  AdvAdam(const ParamStore& store, double lr) : lr_(lr), m_(store), v_(store) {}
  void step(ParamStore& store, const GradBuffer& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(0.9, t_);
    const double bc2 = 1.0 - std::pow(0.999, t_);
    for (int gi = 0; gi < store.num_groups(); ++gi) {
      auto& data = store.group(gi).data;
      const auto& g = grad.g[static_cast<size_t>(gi)];
      auto& m = m_.g[static_cast<size_t>(gi)];
      auto& v = v_.g[static_cast<size_t>(gi)];
      for (size_t j = 0; j < data.size(); ++j) {
        m[j] = 0.9 * m[j] + 0.1 * g[j];
        v[j] = 0.999 * v[j] + 0.001 * g[j] * g[j];
        data[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + 1e-8);
      }
    }
  }

 private:
  double lr_;
  int t_ = 0;
  GradBuffer m_, v_;
};

struct SnapshotEval {
  CurvePoint point;
  std::vector<InstanceMetric> per_instance;
  ParamStore params;
};

SnapshotEval eval_snapshot(const TrainContext& ctx, const ParamStore& params,
                           const AttentionTargets& test_base, double lambda, int epoch) {
  SnapshotEval snap;
  snap.params = params;
  const AttentionTargets adv = collect_attention(ctx, params, ctx.split.test);
  double tvd_sum = 0.0, jsd_sum = 0.0;
  snap.per_instance.reserve(ctx.split.test.size());
  for (size_t i = 0; i < ctx.split.test.size(); ++i) {
    InstanceMetric im;
    im.instance_id = ctx.split.test[i];
    im.tvd = 0.5 * std::abs(adv.y_norm[i] - test_base.y_norm[i]);
    im.jsd = jsd_sets(test_base.dists[i], adv.dists[i]);
    tvd_sum += im.tvd;
    jsd_sum += im.jsd;
    snap.per_instance.push_back(im);
  }
  snap.point.lambda = lambda;
  snap.point.epoch = epoch;
  snap.point.mean_tvd = tvd_sum / static_cast<double>(ctx.split.test.size());
  snap.point.mean_jsd = jsd_sum / static_cast<double>(ctx.split.test.size());
  return snap;
}

}  // namespace

AdvRunReport train_adversarial(const TrainContext& ctx, const AttentionTargets& train_base,
                               const AttentionTargets& test_base, double lambda,
                               uint64_t adv_seed) {
  if (lambda < 0.0) throw ConfigError("adversarial lambda must be >= 0");
  const Config& cfg = ctx.cfg;
  const size_t n_train = ctx.split.train.size();
  if (train_base.y_norm.size() != n_train)
    throw InternalError("train_adversarial: target/split size mismatch");

  // Pre-floor the base temporal distributions and their entropy terms so the
  // per-sample KL graph only contains the cross-entropy part as tape nodes.
  std::vector<std::vector<std::vector<double>>> p_floored(n_train);
  std::vector<std::vector<double>> p_self(n_train);  // sum p ln p per stream
  for (size_t i = 0; i < n_train; ++i) {
    p_floored[i].resize(train_base.dists[i].size());
    p_self[i].resize(train_base.dists[i].size(), 0.0);
    for (size_t s = 0; s < train_base.dists[i].size(); ++s) {
      if (train_base.dists[i][s].empty()) continue;
      p_floored[i][s] = floor_renorm_vals(train_base.dists[i][s], 1e-12);
      double e = 0.0;
      for (double p : p_floored[i][s]) e += p * std::log(p);
      p_self[i][s] = e;
    }
  }

  ParamStore params = make_params(cfg, ctx.data->num_features());
  params.init_uniform(adv_seed);
  AdvAdam adam(params, cfg.lr);
  GradBuffer grads(params);

  Tape tape;
  const ModelNodes nodes = bind_params(tape, params);
  tape.freeze();

  AdvRunReport report;
  report.lambda = lambda;
  std::vector<SnapshotEval> snapshots;

  std::vector<size_t> order(n_train);
  for (size_t i = 0; i < n_train; ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.adv_epochs; ++epoch) {
    Rng shuffle_rng = rng_for(adv_seed, "shuffle", static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);
    refresh_params(tape, nodes, params);
    int batch_no = 0;
    for (size_t b0 = 0; b0 < order.size(); b0 += static_cast<size_t>(cfg.batch)) {
      const size_t bn = std::min(order.size() - b0, static_cast<size_t>(cfg.batch));
      grads.zero();
      double batch_loss = 0.0;
      for (size_t s = 0; s < bn; ++s) {
        const size_t pos = order[b0 + s];
        const int wi = ctx.split.train[pos];
        const SampleWindow& win = ctx.windows[static_cast<size_t>(wi)];
        tape.reset();
        Rng drop = rng_for(adv_seed, "dropout", static_cast<uint64_t>(epoch),
                           static_cast<uint64_t>(wi));
        const ForwardOut fwd = forward_window(tape, nodes, params, cfg, ctx.view, win,
                                              Mode::kTrain, &drop, false);
        NodeId loss = tape.scale_const(
            tape.abs(tape.sub(fwd.yhat, tape.constant(train_base.y_norm[pos]))), 0.5);
        if (lambda > 0.0) {
          for (size_t st = 0; st < p_floored[pos].size(); ++st) {
            const auto& p = p_floored[pos][st];
            if (p.empty()) continue;
            if (st >= fwd.final_temporal.size() || fwd.final_temporal[st] < 0)
              throw InternalError("train_adversarial: missing temporal attention node");
            const NodeId q = tape.floor_renorm(fwd.final_temporal[st], 1e-12);
            const NodeId cross = tape.dot_const(tape.log(q), p);  // sum p ln q
            // KL(p||q) = sum p ln p - sum p ln q; loss -= lambda*KL
            const NodeId kl =
                tape.affine2(tape.constant(p_self[pos][st]), cross, 1.0, -1.0);
            loss = tape.affine2(loss, kl, 1.0, -lambda);
          }
        }
        batch_loss += tape.scalar(loss);
        tape.backward(loss, 1.0 / static_cast<double>(bn));
        for (int gi = 0; gi < params.num_groups(); ++gi) {
          const auto gspan = tape.grad(nodes.groups[static_cast<size_t>(gi)]);
          auto dst = grads.of(gi);
          for (size_t j = 0; j < dst.size(); ++j) dst[j] += gspan[j];
        }
      }
      if (!std::isfinite(batch_loss))
        throw DivergenceError("adversarial loss non-finite at epoch " +
                              std::to_string(epoch) + ", batch " + std::to_string(batch_no + 1));
      adam.step(params, grads);
      refresh_params(tape, nodes, params);
      ++batch_no;
    }
    if (epoch % cfg.adv_eval_every == 0 || epoch == cfg.adv_epochs) {
      if (!snapshots.empty() && snapshots.back().point.epoch == epoch) continue;
      snapshots.push_back(eval_snapshot(ctx, params, test_base, lambda, epoch));
    }
  }
  if (snapshots.empty())
    snapshots.push_back(eval_snapshot(ctx, params, test_base, lambda, cfg.adv_epochs));

  // Best model: lowest TVD among snapshots whose mean JSD clears the
  // threshold; if none does, the final snapshot stands.
  int sel = -1;
  for (size_t i = 0; i < snapshots.size(); ++i) {
    if (snapshots[i].point.mean_jsd <= cfg.jsd_select_threshold) continue;
    if (sel < 0 || snapshots[i].point.mean_tvd < snapshots[static_cast<size_t>(sel)].point.mean_tvd)
      sel = static_cast<int>(i);
  }
  if (sel < 0) sel = static_cast<int>(snapshots.size()) - 1;

  for (const auto& s : snapshots) report.snapshots.push_back(s.point);
  report.selected = snapshots[static_cast<size_t>(sel)].point;
  report.per_instance = snapshots[static_cast<size_t>(sel)].per_instance;
  report.test_metrics =
      evaluate(ctx, snapshots[static_cast<size_t>(sel)].params, ctx.split.test);
  return report;
}

FaithfulnessReport run_faithfulness(const TrainContext& ctx,
                                    std::span<const double> lambdas) {
  for (double l : lambdas)
    if (l < 0.0) throw ConfigError("adversarial lambda must be >= 0");

  FaithfulnessReport rep;
  rep.instance_ids = ctx.split.test;

  TrainContext base_ctx = ctx;
  base_ctx.cfg.uniform_attention = false;
  const TrainResult base = train(base_ctx);
  rep.base_best_epoch = base.best_epoch;
  rep.base_best_val_mae = base.best_val_mae;
  rep.base_test = evaluate(base_ctx, base.best_params, base_ctx.split.test);
  const AttentionTargets base_test =
      collect_attention(base_ctx, base.best_params, base_ctx.split.test);
  const AttentionTargets base_train =
      collect_attention(base_ctx, base.best_params, base_ctx.split.train);

  TrainContext uni_ctx = ctx;
  uni_ctx.cfg.uniform_attention = true;
  const TrainResult uni = train(uni_ctx);
  rep.uniform_best_epoch = uni.best_epoch;
  rep.uniform_best_val_mae = uni.best_val_mae;
  rep.uniform_test = evaluate(uni_ctx, uni.best_params, uni_ctx.split.test);
  const AttentionTargets uni_test =
      collect_attention(uni_ctx, uni.best_params, uni_ctx.split.test);
  {
    double tvd_sum = 0.0, jsd_sum = 0.0;
    for (size_t i = 0; i < rep.instance_ids.size(); ++i) {
      tvd_sum += 0.5 * std::abs(uni_test.y_norm[i] - base_test.y_norm[i]);
      jsd_sum += jsd_sets(base_test.dists[i], uni_test.dists[i]);
    }
    rep.uniform_mark_tvd = tvd_sum / static_cast<double>(rep.instance_ids.size());
    rep.uniform_mark_jsd = jsd_sum / static_cast<double>(rep.instance_ids.size());
  }

  // Seed-variance band: the base seed plus (seed_variants - 1) fresh ones.
  std::vector<AttentionTargets> seed_targets;
  for (int v = 0; v < ctx.cfg.seed_variants; ++v) {
    const uint64_t s = ctx.cfg.seed + static_cast<uint64_t>(v);
    rep.seeds.push_back(s);
    if (v == 0) {
      seed_targets.push_back(base_test);
      continue;
    }
    TrainContext sctx = base_ctx;
    sctx.cfg.seed = s;
    const TrainResult r = train(sctx);
    seed_targets.push_back(collect_attention(sctx, r.best_params, sctx.split.test));
  }
  rep.seed_instance_jsd.assign(rep.instance_ids.size(), 0.0);
  size_t n_pairs = 0;
  for (size_t a = 0; a < seed_targets.size(); ++a) {
    for (size_t b = a + 1; b < seed_targets.size(); ++b) {
      SeedPairMetric pm;
      pm.seed_a = rep.seeds[a];
      pm.seed_b = rep.seeds[b];
      double tvd_sum = 0.0, jsd_sum = 0.0;
      for (size_t i = 0; i < rep.instance_ids.size(); ++i) {
        const double tv = 0.5 * std::abs(seed_targets[a].y_norm[i] - seed_targets[b].y_norm[i]);
        const double js = jsd_sets(seed_targets[a].dists[i], seed_targets[b].dists[i]);
        tvd_sum += tv;
        jsd_sum += js;
        rep.seed_instance_jsd[i] += js;
      }
      pm.mean_tvd = tvd_sum / static_cast<double>(rep.instance_ids.size());
      pm.mean_jsd = jsd_sum / static_cast<double>(rep.instance_ids.size());
      rep.seed_pairs.push_back(pm);
      ++n_pairs;
    }
  }
  if (n_pairs > 0)
    for (double& v : rep.seed_instance_jsd) v /= static_cast<double>(n_pairs);

  uint64_t adv_state = ctx.cfg.seed ^ hash_label("adversary");
  const uint64_t adv_base = splitmix64(adv_state);
  for (size_t li = 0; li < lambdas.size(); ++li) {
    const uint64_t adv_seed = adv_base + static_cast<uint64_t>(li);
    rep.adversarial.push_back(
        train_adversarial(base_ctx, base_train, base_test, lambdas[li], adv_seed));
  }
  return rep;
}

}  // namespace aist

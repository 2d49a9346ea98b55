#include "core/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "core/errors.hpp"

namespace aist {

namespace {

TrainContext base_context(const Config& cfg, const Dataset& data) {
  cfg.validate();
  TrainContext ctx;
  ctx.cfg = cfg;
  ctx.data = &data;
  ctx.category = data.crimes.category_index(cfg.category);
  if (ctx.category < 0) throw DataError("unknown crime category '" + cfg.category + "'");
  ctx.windows = build_windows(cfg, data, ctx.category, &ctx.window_report);
  ctx.split = split_dataset(ctx.windows, cfg, data);
  return ctx;
}

}  // namespace

TrainContext make_train_context(const Config& cfg, const Dataset& data) {
  TrainContext ctx = base_context(cfg, data);
  // split.train is ordered by target step, so the last index carries the
  // newest training bin; the normalizer sees nothing past it.
  const int last_train_step =
      ctx.windows[static_cast<size_t>(ctx.split.train.back())].target_step;
  ctx.norm = fit_normalizer(data.crimes, 1, last_train_step);
  ctx.view = build_category_view(data, ctx.norm, ctx.category);
  return ctx;
}

TrainContext make_eval_context(const Config& cfg, const Dataset& data,
                               const NormalizationSpec& norm) {
  TrainContext ctx = base_context(cfg, data);
  if (norm.num_regions != data.crimes.num_regions ||
      norm.num_categories != static_cast<int>(data.crimes.categories.size()))
    throw DataError("normalizer shape does not match the dataset");
  ctx.norm = norm;
  ctx.view = build_category_view(data, ctx.norm, ctx.category);
  return ctx;
}

namespace {

struct EvalAccum {
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double norm_sq_sum = 0.0;
  int64_t n = 0;
  std::vector<double> region_abs, region_sq;
  std::vector<int64_t> region_n;

  explicit EvalAccum(int num_regions)
      : region_abs(static_cast<size_t>(num_regions), 0.0),
        region_sq(static_cast<size_t>(num_regions), 0.0),
        region_n(static_cast<size_t>(num_regions), 0) {}

  void merge(const EvalAccum& o) {
    abs_sum += o.abs_sum;
    sq_sum += o.sq_sum;
    norm_sq_sum += o.norm_sq_sum;
    n += o.n;
    for (size_t i = 0; i < region_abs.size(); ++i) {
      region_abs[i] += o.region_abs[i];
      region_sq[i] += o.region_sq[i];
      region_n[i] += o.region_n[i];
    }
  }
};

void eval_chunk(const TrainContext& ctx, const ParamStore& params,
                std::span<const int> idx, EvalAccum& acc,
                std::vector<PredictionRecord>* preds,
                std::vector<AttentionTrace>* traces) {
  Tape t;
  const ModelNodes nodes = bind_params(t, params);
  t.freeze();
  for (int wi : idx) {
    const SampleWindow& w = ctx.windows[static_cast<size_t>(wi)];
    t.reset();
    const ForwardOut fwd = forward_window(t, nodes, params, ctx.cfg, ctx.view, w,
                                          Mode::kEval, nullptr, traces != nullptr);
    const double y_norm = t.scalar(fwd.yhat);
    const double y_denorm = ctx.norm.invert(y_norm, w.category, w.region_index);
    const double err = y_denorm - w.y_raw;
    const double norm_err = y_norm - ctx.view.x(w.region_index, w.target_step);
    acc.abs_sum += std::abs(err);
    acc.sq_sum += err * err;
    acc.norm_sq_sum += norm_err * norm_err;
    acc.n += 1;
    acc.region_abs[static_cast<size_t>(w.region_index)] += std::abs(err);
    acc.region_sq[static_cast<size_t>(w.region_index)] += err * err;
    acc.region_n[static_cast<size_t>(w.region_index)] += 1;
    if (preds) {
      PredictionRecord rec;
      rec.region_index = w.region_index;
      rec.region_id = ctx.data->graph.id_at(w.region_index);
      rec.category = w.category;
      rec.target_step = w.target_step;
      rec.y_norm = y_norm;
      rec.y_denorm = y_denorm;
      rec.y_true = w.y_raw;
      preds->push_back(rec);
    }
    if (traces) traces->push_back(std::move(fwd.trace));
  }
}

// Runs fn(k, begin, end) over `threads` contiguous chunks of [0, n).
// Results must be reduced in chunk order by the caller for determinism.
template <class Fn>
void parallel_chunks(int threads, size_t n, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    fn(0, size_t{0}, n);
    return;
  }
  const size_t t = std::min<size_t>(static_cast<size_t>(threads), n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  const size_t per = (n + t - 1) / t;
  for (size_t k = 0; k < t; ++k) {
    const size_t lo = k * per;
    const size_t hi = std::min(n, lo + per);
    pool.emplace_back([&, k, lo, hi] {
      try {
        fn(k, lo, hi);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

MetricReport evaluate(const TrainContext& ctx, const ParamStore& params,
                      const std::vector<int>& idx,
                      std::vector<PredictionRecord>* preds,
                      std::vector<AttentionTrace>* traces) {
  if (idx.empty()) throw DataError("evaluate: empty split");
  const int num_regions = ctx.data->crimes.num_regions;
  EvalAccum total(num_regions);
  const bool collect = preds != nullptr || traces != nullptr;
  const int threads = collect ? 1 : ctx.cfg.threads;
  if (threads <= 1) {
    eval_chunk(ctx, params, idx, total, preds, traces);
  } else {
    std::vector<EvalAccum> parts(static_cast<size_t>(threads), EvalAccum(num_regions));
    parallel_chunks(threads, idx.size(), [&](size_t k, size_t lo, size_t hi) {
      eval_chunk(ctx, params, std::span<const int>(idx).subspan(lo, hi - lo), parts[k],
                 nullptr, nullptr);
    });
    for (const auto& p : parts) total.merge(p);
  }

  MetricReport rep;
  rep.count = total.n;
  rep.mae = total.abs_sum / static_cast<double>(total.n);
  rep.mse = total.sq_sum / static_cast<double>(total.n);
  rep.norm_mse = total.norm_sq_sum / static_cast<double>(total.n);
  for (int i = 0; i < num_regions; ++i) {
    if (total.region_n[static_cast<size_t>(i)] == 0) continue;
    RegionMetric rm;
    rm.region_id = ctx.data->graph.id_at(i);
    rm.count = total.region_n[static_cast<size_t>(i)];
    rm.mae = total.region_abs[static_cast<size_t>(i)] / static_cast<double>(rm.count);
    rm.mse = total.region_sq[static_cast<size_t>(i)] / static_cast<double>(rm.count);
    rep.per_region.push_back(rm);
  }
  if (!(rep.mae <= std::sqrt(rep.mse) + 1e-12))
    throw InternalError("metric invariant violated: MAE > sqrt(MSE)");
  return rep;
}

namespace {

class Adam {
 public:
  Adam(const ParamStore& store, double lr) : lr_(lr), m_(store), v_(store) {}

  void step(ParamStore& store, const GradBuffer& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    for (int gi = 0; gi < store.num_groups(); ++gi) {
      auto& data = store.group(gi).data;
      const auto& g = grad.g[static_cast<size_t>(gi)];
      auto& m = m_.g[static_cast<size_t>(gi)];
      auto& v = v_.g[static_cast<size_t>(gi)];
      for (size_t j = 0; j < data.size(); ++j) {
        m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g[j];
        v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g[j] * g[j];
        data[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  int t_ = 0;
  GradBuffer m_, v_;
};

struct Worker {
  Tape tape;
  ModelNodes nodes;
  GradBuffer grads;
  double loss_sum = 0.0;

  Worker(const ParamStore& params) : grads(params) {
    nodes = bind_params(tape, params);
    tape.freeze();
  }
};

}  // namespace

TrainResult train(const TrainContext& ctx, const EpochHook& hook) {
  const Config& cfg = ctx.cfg;
  const int J = ctx.data->num_features();
  ParamStore params = make_params(cfg, J);
  params.init_uniform(cfg.seed);
  Adam adam(params, cfg.lr);
  GradBuffer total_grads(params);

  const int threads = std::max(1, cfg.threads);
  std::vector<Worker> workers;
  workers.reserve(static_cast<size_t>(threads));
  for (int k = 0; k < threads; ++k) workers.emplace_back(params);

  TrainResult result;
  result.best_params = params;
  result.best_val_mae = std::numeric_limits<double>::infinity();

  std::vector<int> order = ctx.split.train;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng = rng_for(cfg.seed, "shuffle", static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss_sum = 0.0;
    int batches = 0;
    for (size_t b0 = 0; b0 < order.size(); b0 += static_cast<size_t>(cfg.batch)) {
      const size_t bn = std::min(order.size() - b0, static_cast<size_t>(cfg.batch));
      for (auto& w : workers) {
        refresh_params(w.tape, w.nodes, params);
        w.grads.zero();
        w.loss_sum = 0.0;
      }
      parallel_chunks(threads, bn, [&](size_t k, size_t lo, size_t hi) {
        Worker& w = workers[k];
        for (size_t s = lo; s < hi; ++s) {
          const int wi = order[b0 + s];
          const SampleWindow& win = ctx.windows[static_cast<size_t>(wi)];
          w.tape.reset();
          Rng drop = rng_for(cfg.seed, "dropout", static_cast<uint64_t>(epoch),
                             static_cast<uint64_t>(wi));
          const ForwardOut fwd = forward_window(w.tape, w.nodes, params, cfg, ctx.view,
                                                win, Mode::kTrain, &drop, false);
          const double err =
              w.tape.scalar(fwd.yhat) - ctx.view.x(win.region_index, win.target_step);
          w.loss_sum += err * err;
          w.tape.backward(fwd.yhat, 2.0 * err / static_cast<double>(bn));
          for (int gi = 0; gi < params.num_groups(); ++gi) {
            const auto gspan = w.tape.grad(w.nodes.groups[static_cast<size_t>(gi)]);
            auto dst = w.grads.of(gi);
            for (size_t j = 0; j < dst.size(); ++j) dst[j] += gspan[j];
          }
        }
      });
      total_grads.zero();
      double batch_loss = 0.0;
      for (auto& w : workers) {
        total_grads.add(w.grads);
        batch_loss += w.loss_sum;
      }
      batch_loss /= static_cast<double>(bn);
      if (!std::isfinite(batch_loss))
        throw DivergenceError("training loss non-finite at epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(batches + 1));
      epoch_loss_sum += batch_loss;
      ++batches;
      adam.step(params, total_grads);
    }

    EpochLog log;
    log.epoch = epoch;
    log.batch_loss = batches > 0 ? epoch_loss_sum / batches : 0.0;
    log.train_mse = evaluate(ctx, params, ctx.split.train).norm_mse;
    const MetricReport val = evaluate(ctx, params, ctx.split.val);
    log.val_mae = val.mae;
    log.val_mse = val.mse;
    result.log.push_back(log);
    if (val.mae < result.best_val_mae) {
      result.best_val_mae = val.mae;
      result.best_epoch = epoch;
      result.best_params = params;
    }
    if (hook && !hook(epoch, params)) break;
  }
  result.final_params = params;
  if (result.best_epoch == 0) {  // epochs == 0: fall back to the initialization
    result.best_params = params;
  }
  return result;
}

Checkpoint to_checkpoint(const TrainContext& ctx, const ParamStore& params) {
  Checkpoint ckpt;
  ckpt.config = ctx.cfg;
  ckpt.norm = ctx.norm;
  ckpt.params = params;
  return ckpt;
}

}  // namespace aist

#include "core/model.hpp"

#include <algorithm>

#include "core/errors.hpp"
#include "core/fgat.hpp"
#include "core/hgat.hpp"

namespace aist {

namespace {

struct StreamDef {
  const char* prefix;  // parameter-group prefix
  const char* name;    // human-readable trace name
  bool enabled;
  const StreamConfig* sc;
  const std::vector<int>* steps;
};

std::vector<StreamDef> stream_defs(const Config& cfg, const SampleWindow* w) {
  return {
      {"r", "recent", cfg.use_recent, &cfg.recent, w ? &w->recent : nullptr},
      {"d", "daily", cfg.use_daily, &cfg.daily, w ? &w->daily : nullptr},
      {"w", "weekly", cfg.use_weekly, &cfg.weekly, w ? &w->weekly : nullptr},
  };
}

}  // namespace

ParamStore make_params(const Config& cfg, int num_features) {
  cfg.validate();
  const int F = cfg.embed_f;
  const int H = cfg.hidden;
  const int A = cfg.attn_a;
  const int D = cfg.input_dim(num_features);

  ParamStore store;
  store.add("hgat.w_x", F, 1, 1);
  store.add("hgat.a_x", 2 * F, 1, 2 * F);
  if (cfg.parent_attention) {
    store.add("hgat.w_z", F, 1, 1);
    store.add("hgat.a_z", 2 * F, 1, 2 * F);
  }
  if (cfg.feature_mode == FeatureMode::kFgat) {
    store.add("fgat.w_q", cfg.d_qk, 2, 2);
    store.add("fgat.w_k", cfg.d_qk, 2, 2);
    store.add("fgat.w_v", F, 1, 1);
  }
  for (const auto& sd : stream_defs(cfg, nullptr)) {
    if (!sd.enabled) continue;
    const std::string p = sd.prefix;
    store.add(p + ".lstm_w", 4 * H, D + H, D + H);
    store.add(p + ".lstm_b", 4 * H, 1, D + H);
    if (!cfg.plain_lstm) store.add(p + ".attn_w", 2 * H, 1, 2 * H);
  }
  store.add("fusion.w_h", H, A, H);
  store.add("fusion.b_h", A, 1, H);
  store.add("fusion.v_h", A, 1, A);
  store.add("fusion.w", H, 1, H);
  store.add("fusion.b", 1, 1, H);
  return store;
}

NodeId ModelNodes::of(const ParamStore& store, const std::string& name) const {
  return groups[static_cast<size_t>(store.index_of(name))];
}

ModelNodes bind_params(Tape& t, const ParamStore& store) {
  ModelNodes nodes;
  nodes.groups.reserve(static_cast<size_t>(store.num_groups()));
  for (int i = 0; i < store.num_groups(); ++i)
    nodes.groups.push_back(t.leaf(store.group(i).data));
  return nodes;
}

void refresh_params(Tape& t, const ModelNodes& nodes, const ParamStore& store) {
  for (int i = 0; i < store.num_groups(); ++i)
    t.set_leaf(nodes.groups[static_cast<size_t>(i)], store.group(i).data);
}

void dropout_mask(Rng& rng, double p, std::vector<double>& out, size_t n) {
  out.resize(n);
  const double keep = 1.0 / (1.0 - p);
  for (size_t i = 0; i < n; ++i) out[i] = rng.uniform() < p ? 0.0 : keep;
}

ForwardOut forward_window(Tape& t, const ModelNodes& nodes, const ParamStore& store,
                          const Config& cfg, const CategoryView& view,
                          const SampleWindow& w, Mode mode, Rng* dropout_rng,
                          bool want_trace) {
  const bool train = mode == Mode::kTrain;
  if (train && dropout_rng == nullptr)
    throw InternalError("forward_window: train mode requires a dropout rng");

  const int F = cfg.embed_f;
  const int H = cfg.hidden;
  const int A = cfg.attn_a;
  const int J = view.num_features;
  const int D = cfg.input_dim(J);
  const bool uniform = cfg.uniform_attention;
  const bool fgat_mode = cfg.feature_mode == FeatureMode::kFgat;

  const auto& nbr = view.graph->neighborhood_indices(w.region_index);
  const int n = static_cast<int>(nbr.size());
  const int self_pos = static_cast<int>(
      std::lower_bound(nbr.begin(), nbr.end(), w.region_index) - nbr.begin());
  if (self_pos >= n || nbr[static_cast<size_t>(self_pos)] != w.region_index)
    throw InternalError("forward_window: region missing from its own neighborhood");

  HgatParamNodes hp;
  hp.w_x = nodes.of(store, "hgat.w_x");
  hp.a_x = nodes.of(store, "hgat.a_x");
  if (cfg.parent_attention) {
    hp.w_z = nodes.of(store, "hgat.w_z");
    hp.a_z = nodes.of(store, "hgat.a_z");
  }
  FgatParamNodes fp;
  if (fgat_mode) {
    fp.w_q = nodes.of(store, "fgat.w_q");
    fp.w_k = nodes.of(store, "fgat.w_k");
    fp.w_v = nodes.of(store, "fgat.w_v");
  }

  ForwardOut out;
  std::vector<NodeId> stream_h;
  std::vector<double> x_nbr(static_cast<size_t>(n)), z_nbr(static_cast<size_t>(n));
  std::vector<double> f_nbr(static_cast<size_t>(n) * static_cast<size_t>(J));
  std::vector<double> mask_ec, mask_ep, mask_alpha, mask_h;
  std::vector<std::vector<double>> beta_masks;

  for (const auto& sd : stream_defs(cfg, &w)) {
    if (!sd.enabled) continue;
    const std::string prefix = sd.prefix;
    SabParamNodes sp;
    sp.w = nodes.of(store, prefix + ".lstm_w");
    sp.b = nodes.of(store, prefix + ".lstm_b");
    if (!cfg.plain_lstm) sp.attn_w = nodes.of(store, prefix + ".attn_w");
    SabStream stream(t, sp, D, H, *sd.sc, cfg.plain_lstm, uniform, cfg.add_provisional);

    StreamTrace st;
    if (want_trace) st.name = sd.name;

    for (int step : *sd.steps) {
      for (int a = 0; a < n; ++a) {
        const int r = nbr[static_cast<size_t>(a)];
        x_nbr[static_cast<size_t>(a)] = view.x(r, step);
        z_nbr[static_cast<size_t>(a)] = view.zv(r, step);
        for (int j = 0; j < J; ++j)
          f_nbr[static_cast<size_t>(a) * J + j] = view.f(j, r, step);
      }

      HgatDropout hd;
      if (train) {
        if (!uniform) {
          dropout_mask(*dropout_rng, cfg.dropout_attn, mask_ec, static_cast<size_t>(n));
          hd.ec = mask_ec;
          if (cfg.parent_attention) {
            dropout_mask(*dropout_rng, cfg.dropout_attn, mask_ep, static_cast<size_t>(n));
            hd.ep = mask_ep;
          }
        }
        dropout_mask(*dropout_rng, cfg.dropout_attn, mask_alpha, static_cast<size_t>(n));
        hd.alpha = mask_alpha;
      }
      const HgatOut hg = hgat_forward(t, hp, F, x_nbr, z_nbr, self_pos,
                                      cfg.parent_attention, cfg.leaky_slope, hd, uniform);

      NodeId s = hg.c;
      FgatOut fg;
      if (fgat_mode) {
        if (train) {
          beta_masks.assign(static_cast<size_t>(n), {});
          for (auto& m : beta_masks)
            dropout_mask(*dropout_rng, cfg.dropout_attn, m, static_cast<size_t>(J));
        } else {
          beta_masks.clear();
        }
        fg = fgat_forward(t, fp, cfg.d_qk, hg.alpha_used, x_nbr, self_pos, f_nbr, J,
                          beta_masks, uniform);
        s = t.concat2(hg.c, fg.e);
      } else if (cfg.feature_mode == FeatureMode::kRawConcat) {
        const std::span<const double> f_self(
            f_nbr.data() + static_cast<size_t>(self_pos) * J, static_cast<size_t>(J));
        s = t.concat2(hg.c, t.constant(f_self));
      }
      stream.step(s);

      if (want_trace) {
        StepTrace tr;
        tr.step = step;
        tr.neighbor_ids.reserve(static_cast<size_t>(n));
        for (int a : nbr) tr.neighbor_ids.push_back(view.graph->id_at(a));
        tr.x_vals = x_nbr;
        tr.z_vals = z_nbr;
        tr.f_vals = f_nbr;
        const auto av = t.val(hg.alpha);
        tr.alpha.assign(av.begin(), av.end());
        if (fgat_mode) {
          tr.beta.resize(static_cast<size_t>(n) * static_cast<size_t>(J));
          for (int a = 0; a < n; ++a) {
            const auto bv = t.val(fg.beta[static_cast<size_t>(a)]);
            std::copy(bv.begin(), bv.end(), tr.beta.begin() + static_cast<ptrdiff_t>(a) * J);
          }
          const auto ev = t.val(fg.e_pre);
          tr.e_pre.assign(ev.begin(), ev.end());
        }
        const auto cv = t.val(hg.c_pre);
        tr.c_pre.assign(cv.begin(), cv.end());
        st.steps.push_back(std::move(tr));
      }
    }

    NodeId h = stream.h();
    if (train) {
      dropout_mask(*dropout_rng, cfg.dropout_stream, mask_h, static_cast<size_t>(H));
      h = t.dropout(h, mask_h);
    }
    stream_h.push_back(h);
    out.final_temporal.push_back(stream.last_alpha_node());

    if (want_trace) {
      st.temporal = stream.records();
      const auto hv = t.val(h);
      st.h_final.assign(hv.begin(), hv.end());
      out.trace.streams.push_back(std::move(st));
    }
  }

  if (stream_h.empty()) throw InternalError("forward_window: no streams enabled");
  const int S = static_cast<int>(stream_h.size());

  NodeId alpha_tr;
  NodeId scores_tr = -1;
  if (uniform) {
    const std::vector<double> u(static_cast<size_t>(S), 1.0 / S);
    alpha_tr = t.constant(u);
  } else {
    const NodeId w_h = nodes.of(store, "fusion.w_h");
    const NodeId b_h = nodes.of(store, "fusion.b_h");
    const NodeId v_h = nodes.of(store, "fusion.v_h");
    std::vector<NodeId> scores(static_cast<size_t>(S));
    for (int a = 0; a < S; ++a)
      scores[static_cast<size_t>(a)] =
          t.dot(v_h, t.tanh(t.add(t.mat_t_vec(w_h, stream_h[static_cast<size_t>(a)], H, A), b_h)));
    scores_tr = t.stack(scores);
    alpha_tr = t.softmax(scores_tr);
  }
  const NodeId ctx = t.weighted_sum(alpha_tr, stream_h);
  const NodeId pre = t.add(t.dot(nodes.of(store, "fusion.w"), ctx), nodes.of(store, "fusion.b"));
  out.yhat = t.tanh(pre);

  if (want_trace) {
    if (scores_tr >= 0) {
      const auto sv = t.val(scores_tr);
      out.trace.trend_scores.assign(sv.begin(), sv.end());
    }
    const auto av = t.val(alpha_tr);
    out.trace.trend_alpha.assign(av.begin(), av.end());
    const auto cv = t.val(ctx);
    out.trace.context.assign(cv.begin(), cv.end());
    out.trace.y_norm = t.scalar(out.yhat);
  }
  return out;
}

}  // namespace aist

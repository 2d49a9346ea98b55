#include "core/sab_lstm.hpp"

#include "core/errors.hpp"

namespace aist {

SabStream::SabStream(Tape& t, const SabParamNodes& p, int input_dim, int hidden,
                     StreamConfig sc, bool plain_lstm, bool uniform, bool add_provisional)
    : t_(t),
      p_(p),
      input_dim_(input_dim),
      hidden_(hidden),
      sc_(sc),
      plain_(plain_lstm),
      uniform_(uniform),
      add_provisional_(add_provisional) {
  if (sc_.k_att < 1 || sc_.k_top < 1 || sc_.trunc < 1)
    throw InternalError("sab_lstm: stream constants must be >= 1");
  const std::vector<double> zeros(static_cast<size_t>(hidden_), 0.0);
  h_ = t_.constant(zeros);
  c_ = t_.constant(zeros);
}

NodeId SabStream::step(NodeId s) {
  if (t_.len(s) != input_dim_) throw InternalError("sab_lstm: input length mismatch");
  ++step_count_;
  const int st = step_count_;

  NodeId h_prev = h_;
  NodeId c_prev = c_;
  if (st > 1 && (st - 1) % sc_.trunc == 0) {
    h_prev = t_.detach(h_prev);
    c_prev = t_.detach(c_prev);
  }
  const NodeId z = t_.affine_concat(p_.w, p_.b, s, h_prev);
  const NodeId cell = t_.lstm_cell(z, c_prev);
  c_ = t_.slice(cell, 0, hidden_);
  const NodeId hhat = t_.slice(cell, hidden_, hidden_);

  if (plain_) {
    h_ = hhat;
    records_.push_back({});
    return h_;
  }

  StepRecord rec;
  if (memory_.empty()) {
    h_ = hhat;
  } else {
    NodeId alpha;
    if (uniform_) {
      const std::vector<double> u(memory_.size(), 1.0 / static_cast<double>(memory_.size()));
      alpha = t_.constant(u);
    } else {
      std::vector<NodeId> scores(memory_.size());
      for (size_t m = 0; m < memory_.size(); ++m)
        scores[m] = t_.dot(p_.attn_w, t_.tanh(t_.concat2(hhat, memory_[m])));
      alpha = t_.sparse_attn(t_.stack(scores), sc_.k_top);
    }
    h_ = t_.weighted_sum(alpha, memory_);
    if (add_provisional_) h_ = t_.add(h_, hhat);
    last_alpha_node_ = alpha;
    const auto av = t_.val(alpha);
    rec.temporal_alpha.assign(av.begin(), av.end());
    rec.memory_steps = memory_steps_;
  }
  if (st % sc_.k_att == 0) {
    memory_.push_back(hhat);
    memory_steps_.push_back(st);
  }
  records_.push_back(std::move(rec));
  return h_;
}

}  // namespace aist

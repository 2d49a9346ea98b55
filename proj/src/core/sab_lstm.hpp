#pragma once

#include <span>
#include <vector>

#include "core/config.hpp"
#include "core/tape.hpp"

namespace aist {

// One stream's parameters: w is (4H x (D+H)) gate weights over [s_t || h_prev]
// (gate order i,f,g,o), b the 4H bias, attn_w the length-2H memory-attention
// reducer (-1 when running as a plain LSTM).
struct SabParamNodes {
  NodeId w = -1;
  NodeId b = -1;
  NodeId attn_w = -1;
};

// Sparse attentive-backtracking stream. Per step: a standard LSTM cell emits
// the provisional state h_hat and cell state; with memory present the emitted
// hidden state is the sparse attention-weighted sum of memory entries, scored
// by attn_w · tanh([h_hat || h_m]); h_hat itself is appended to memory every
// k_att steps (after attention). Recurrent-state gradients are cut at every
// trunc-step boundary; attention edges into memory stay live.
class SabStream {
 public:
  struct StepRecord {
    std::vector<double> temporal_alpha;  // empty when no attention ran
    std::vector<int> memory_steps;       // 1-based in-stream step of each entry
  };

  SabStream(Tape& t, const SabParamNodes& p, int input_dim, int hidden,
            StreamConfig sc, bool plain_lstm, bool uniform, bool add_provisional);

  NodeId step(NodeId s);  // consume one input, return the emitted hidden state
  NodeId h() const { return h_; }
  // Temporal attention node of the most recent step that ran attention
  // (-1 if none ever did).
  NodeId last_alpha_node() const { return last_alpha_node_; }
  const std::vector<StepRecord>& records() const { return records_; }
  int steps_taken() const { return step_count_; }

 private:
  Tape& t_;
  SabParamNodes p_;
  int input_dim_;
  int hidden_;
  StreamConfig sc_;
  bool plain_;
  bool uniform_;
  bool add_provisional_;
  int step_count_ = 0;
  NodeId h_ = -1;
  NodeId c_ = -1;
  NodeId last_alpha_node_ = -1;
  std::vector<NodeId> memory_;
  std::vector<int> memory_steps_;
  std::vector<StepRecord> records_;
};

}  // namespace aist

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace aist {

// Reverse-mode autodiff tape over flat double arenas. Forward evaluation is
// eager; backward() walks the node list in reverse. Parameter leaves can be
// frozen as a persistent prefix so one tape is reused across samples: reset()
// truncates everything created after the freeze mark but keeps leaf values
// (refreshable in place via set_leaf).
//
// Sizing note: a desk-profile sample graph is ~3k nodes; arenas are reused,
// so steady-state allocation is zero.
using NodeId = int32_t;

class Tape {
 public:
  // --- construction of values -------------------------------------------
  NodeId leaf(std::span<const double> v);          // differentiable input
  NodeId constant(std::span<const double> v);      // no gradient propagation
  NodeId constant(double v);
  void set_leaf(NodeId id, std::span<const double> v);  // refresh in place

  // --- elementwise (any length; scalars are length-1 nodes) --------------
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);        // Hadamard
  NodeId abs(NodeId a);                  // subgradient 0 at 0
  NodeId log(NodeId a);                  // caller guarantees positive input
  NodeId tanh(NodeId a);
  NodeId elu(NodeId a);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId scale_const(NodeId a, double k);
  NodeId dropout(NodeId a, std::span<const double> mask);  // mask already scaled
  NodeId detach(NodeId a);               // identity value, blocks gradient

  // --- structure ----------------------------------------------------------
  NodeId concat2(NodeId a, NodeId b);
  NodeId slice(NodeId a, int offset, int len);
  NodeId stack(std::span<const NodeId> scalars);   // k scalars -> length-k vector
  NodeId sum(NodeId a);                            // vector -> scalar

  // --- reductions & linear maps -------------------------------------------
  NodeId dot(NodeId a, NodeId b);
  NodeId dot_const(NodeId a, std::span<const double> c);
  // sum_i b[i] * a[offset+i] — picks a contiguous slice of `a` without a copy.
  NodeId dot_slice(NodeId a, NodeId b, int offset);
  // c1*a + c2*b for scalar nodes a, b with constant coefficients.
  NodeId affine2(NodeId a, NodeId b, double c1, double c2);
  // rows x 2 matrix node W -> W * [c1, c2]^T (constant 2-vector input).
  NodeId affine_cols2(NodeId w, int rows, double c1, double c2);
  // W (rows x (la+lb), row-major) * [u || v] + b.
  NodeId affine_concat(NodeId w, NodeId b, NodeId u, NodeId v);
  // W^T x for W rows x cols (row-major), x length rows -> output length cols.
  NodeId mat_t_vec(NodeId w, NodeId x, int rows, int cols);
  // out = sum_m weights[m] * vs[m]; all vs share one length.
  NodeId weighted_sum(NodeId weights, std::span<const NodeId> vs);

  // --- attention ------------------------------------------------------------
  NodeId softmax(NodeId a);
  // Sparse attentive-backtracking weights; see sparse_attention_forward for
  // the exact forward semantics shared with the oracle tests.
  NodeId sparse_attn(NodeId scores, int k_top);
  // max(a, eps) / sum(max(a, eps)); smooths attention vectors before log/KL.
  NodeId floor_renorm(NodeId a, double eps);

  // --- fused LSTM cell -------------------------------------------------------
  // z = gate pre-activations (4H: i,f,g,o), c_prev length H.
  // Output is [c_t || h_hat_t] (2H).
  NodeId lstm_cell(NodeId z, NodeId c_prev);

  // --- access / control -------------------------------------------------------
  std::span<const double> val(NodeId id) const;
  std::span<double> grad(NodeId id);
  int len(NodeId id) const;
  double scalar(NodeId id) const { return val(id)[0]; }

  void backward(NodeId root, double seed = 1.0);
  void freeze();   // current contents become the persistent prefix
  void reset();    // drop everything after the freeze mark

  size_t num_nodes() const { return nodes_.size(); }

 private:
  enum class Op : uint8_t {
    kLeaf, kConst, kAdd, kSub, kMul, kAbs, kLog, kTanh, kElu, kLeakyRelu,
    kScaleConst, kDropout, kDetach, kConcat2, kSlice, kStack, kSum, kDot,
    kDotConst, kDotSlice, kAffine2, kAffineCols2, kAffineConcat, kMatTVec,
    kWeightedSum, kSoftmax, kSparseAttn, kFloorRenorm, kLstmCell,
  };

  struct Node {
    Op op;
    int32_t len;
    NodeId a = -1;
    NodeId b = -1;
    int32_t p = 0;   // op-specific: offset / rows / k_top
    int32_t q = 0;   // op-specific: cols / aux length
    int64_t val_off = 0;
    int64_t auxd_off = -1;  // doubles: masks, coefficients, eps
    int64_t auxi_off = -1;  // ints: node lists
  };

  NodeId push(Op op, int len, NodeId a, NodeId b, int p = 0, int q = 0);
  int64_t push_auxd(std::span<const double> v);
  int64_t push_auxi(std::span<const NodeId> v);
  double* out(NodeId id) { return val_.data() + nodes_[static_cast<size_t>(id)].val_off; }
  const double* in(NodeId id) const {
    return val_.data() + nodes_[static_cast<size_t>(id)].val_off;
  }
  double* gr(NodeId id) { return grad_.data() + nodes_[static_cast<size_t>(id)].val_off; }
  void backward_node(NodeId id);

  std::vector<Node> nodes_;
  std::vector<double> val_;
  std::vector<double> grad_;
  std::vector<double> auxd_;
  std::vector<NodeId> auxi_;
  size_t frozen_nodes_ = 0;
  size_t frozen_vals_ = 0;
  size_t frozen_auxd_ = 0;
  size_t frozen_auxi_ = 0;
};

// Shared forward semantics for sparse attention (also used by value-level
// oracles and the uniform-attention code path). Writes weights into `out`.
// Rules: with more than k_top scores the (k_top+1)-th largest is subtracted,
// negatives clamp to zero, and the retained mass is normalized; with at most
// k_top scores the minimum is subtracted instead and all entries are kept.
// A zero denominator (ties) falls back to uniform weights over the top-k_top
// positions (earlier index wins ties).
void sparse_attention_forward(std::span<const double> scores, int k_top,
                              std::span<double> out);

}  // namespace aist

#include "core/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "core/errors.hpp"

namespace aist {

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

NodeId Tape::push(Op op, int len, NodeId a, NodeId b, int p, int q) {
  Node n;
  n.op = op;
  n.len = len;
  n.a = a;
  n.b = b;
  n.p = p;
  n.q = q;
  n.val_off = static_cast<int64_t>(val_.size());
  val_.resize(val_.size() + static_cast<size_t>(len), 0.0);
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size() - 1);
}

int64_t Tape::push_auxd(std::span<const double> v) {
  const int64_t off = static_cast<int64_t>(auxd_.size());
  auxd_.insert(auxd_.end(), v.begin(), v.end());
  return off;
}

int64_t Tape::push_auxi(std::span<const NodeId> v) {
  const int64_t off = static_cast<int64_t>(auxi_.size());
  auxi_.insert(auxi_.end(), v.begin(), v.end());
  return off;
}

NodeId Tape::leaf(std::span<const double> v) {
  const NodeId id = push(Op::kLeaf, static_cast<int>(v.size()), -1, -1);
  std::copy(v.begin(), v.end(), out(id));
  return id;
}

NodeId Tape::constant(std::span<const double> v) {
  const NodeId id = push(Op::kConst, static_cast<int>(v.size()), -1, -1);
  std::copy(v.begin(), v.end(), out(id));
  return id;
}

NodeId Tape::constant(double v) { return constant(std::span<const double>(&v, 1)); }

void Tape::set_leaf(NodeId id, std::span<const double> v) {
  Node& n = nodes_.at(static_cast<size_t>(id));
  if (n.op != Op::kLeaf && n.op != Op::kConst)
    throw InternalError("set_leaf on non-leaf node");
  if (static_cast<size_t>(n.len) != v.size()) throw InternalError("set_leaf length mismatch");
  std::copy(v.begin(), v.end(), out(id));
}

std::span<const double> Tape::val(NodeId id) const {
  const Node& n = nodes_.at(static_cast<size_t>(id));
  return {val_.data() + n.val_off, static_cast<size_t>(n.len)};
}

std::span<double> Tape::grad(NodeId id) {
  const Node& n = nodes_.at(static_cast<size_t>(id));
  if (grad_.size() < val_.size()) grad_.resize(val_.size(), 0.0);
  return {grad_.data() + n.val_off, static_cast<size_t>(n.len)};
}

int Tape::len(NodeId id) const { return nodes_.at(static_cast<size_t>(id)).len; }

#define AIST_CHECK_LEN(cond) \
  do {                       \
    if (!(cond)) throw InternalError("tape shape mismatch: " #cond); \
  } while (0)

NodeId Tape::add(NodeId a, NodeId b) {
  AIST_CHECK_LEN(len(a) == len(b));
  const NodeId id = push(Op::kAdd, len(a), a, b);
  const double* x = in(a);
  const double* y = in(b);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = x[i] + y[i];
  return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
  AIST_CHECK_LEN(len(a) == len(b));
  const NodeId id = push(Op::kSub, len(a), a, b);
  const double* x = in(a);
  const double* y = in(b);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = x[i] - y[i];
  return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
  AIST_CHECK_LEN(len(a) == len(b));
  const NodeId id = push(Op::kMul, len(a), a, b);
  const double* x = in(a);
  const double* y = in(b);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = x[i] * y[i];
  return id;
}

NodeId Tape::abs(NodeId a) {
  const NodeId id = push(Op::kAbs, len(a), a, -1);
  const double* x = in(a);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = std::fabs(x[i]);
  return id;
}

NodeId Tape::log(NodeId a) {
  const NodeId id = push(Op::kLog, len(a), a, -1);
  const double* x = in(a);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = std::log(x[i]);
  return id;
}

NodeId Tape::tanh(NodeId a) {
  const NodeId id = push(Op::kTanh, len(a), a, -1);
  const double* x = in(a);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = std::tanh(x[i]);
  return id;
}

NodeId Tape::elu(NodeId a) {
  const NodeId id = push(Op::kElu, len(a), a, -1);
  const double* x = in(a);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = x[i] > 0.0 ? x[i] : std::expm1(x[i]);
  return id;
}

NodeId Tape::leaky_relu(NodeId a, double slope) {
  const NodeId id = push(Op::kLeakyRelu, len(a), a, -1);
  nodes_.back().auxd_off = push_auxd(std::span<const double>(&slope, 1));
  const double* x = in(a);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
  return id;
}

NodeId Tape::scale_const(NodeId a, double k) {
  const NodeId id = push(Op::kScaleConst, len(a), a, -1);
  nodes_.back().auxd_off = push_auxd(std::span<const double>(&k, 1));
  const double* x = in(a);
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = k * x[i];
  return id;
}

NodeId Tape::dropout(NodeId a, std::span<const double> mask) {
  AIST_CHECK_LEN(static_cast<size_t>(len(a)) == mask.size());
  const NodeId id = push(Op::kDropout, len(a), a, -1);
  nodes_.back().auxd_off = push_auxd(mask);
  const double* x = in(a);
  const double* m = auxd_.data() + nodes_.back().auxd_off;
  double* o = out(id);
  for (int i = 0; i < len(id); ++i) o[i] = x[i] * m[i];
  return id;
}

NodeId Tape::detach(NodeId a) {
  const NodeId id = push(Op::kDetach, len(a), a, -1);
  std::memcpy(out(id), in(a), static_cast<size_t>(len(id)) * sizeof(double));
  return id;
}

NodeId Tape::concat2(NodeId a, NodeId b) {
  const NodeId id = push(Op::kConcat2, len(a) + len(b), a, b);
  std::memcpy(out(id), in(a), static_cast<size_t>(len(a)) * sizeof(double));
  std::memcpy(out(id) + len(a), in(b), static_cast<size_t>(len(b)) * sizeof(double));
  return id;
}

NodeId Tape::slice(NodeId a, int offset, int length) {
  AIST_CHECK_LEN(offset >= 0 && offset + length <= len(a));
  const NodeId id = push(Op::kSlice, length, a, -1, offset);
  std::memcpy(out(id), in(a) + offset, static_cast<size_t>(length) * sizeof(double));
  return id;
}

NodeId Tape::stack(std::span<const NodeId> scalars) {
  AIST_CHECK_LEN(!scalars.empty());
  const NodeId id = push(Op::kStack, static_cast<int>(scalars.size()), -1, -1);
  nodes_.back().auxi_off = push_auxi(scalars);
  double* o = out(id);
  for (size_t i = 0; i < scalars.size(); ++i) {
    AIST_CHECK_LEN(len(scalars[i]) == 1);
    o[i] = in(scalars[i])[0];
  }
  return id;
}

NodeId Tape::sum(NodeId a) {
  const NodeId id = push(Op::kSum, 1, a, -1);
  const double* x = in(a);
  out(id)[0] = std::accumulate(x, x + len(a), 0.0);
  return id;
}

NodeId Tape::dot(NodeId a, NodeId b) {
  AIST_CHECK_LEN(len(a) == len(b));
  const NodeId id = push(Op::kDot, 1, a, b);
  const double* x = in(a);
  const double* y = in(b);
  double acc = 0.0;
  for (int i = 0; i < len(a); ++i) acc += x[i] * y[i];
  out(id)[0] = acc;
  return id;
}

NodeId Tape::dot_const(NodeId a, std::span<const double> c) {
  AIST_CHECK_LEN(static_cast<size_t>(len(a)) == c.size());
  const NodeId id = push(Op::kDotConst, 1, a, -1);
  nodes_.back().auxd_off = push_auxd(c);
  const double* x = in(a);
  const double* k = auxd_.data() + nodes_.back().auxd_off;
  double acc = 0.0;
  for (int i = 0; i < len(a); ++i) acc += x[i] * k[i];
  out(id)[0] = acc;
  return id;
}

NodeId Tape::dot_slice(NodeId a, NodeId b, int offset) {
  AIST_CHECK_LEN(offset >= 0 && offset + len(b) <= len(a));
  const NodeId id = push(Op::kDotSlice, 1, a, b, offset);
  const double* x = in(a) + offset;
  const double* y = in(b);
  double acc = 0.0;
  for (int i = 0; i < len(b); ++i) acc += x[i] * y[i];
  out(id)[0] = acc;
  return id;
}

NodeId Tape::affine2(NodeId a, NodeId b, double c1, double c2) {
  AIST_CHECK_LEN(len(a) == 1 && len(b) == 1);
  const double cs[2] = {c1, c2};
  const NodeId id = push(Op::kAffine2, 1, a, b);
  nodes_.back().auxd_off = push_auxd(std::span<const double>(cs, 2));
  out(id)[0] = c1 * in(a)[0] + c2 * in(b)[0];
  return id;
}

NodeId Tape::affine_cols2(NodeId w, int rows, double c1, double c2) {
  AIST_CHECK_LEN(len(w) == rows * 2);
  const double cs[2] = {c1, c2};
  const NodeId id = push(Op::kAffineCols2, rows, w, -1, rows);
  nodes_.back().auxd_off = push_auxd(std::span<const double>(cs, 2));
  const double* W = in(w);
  double* o = out(id);
  for (int r = 0; r < rows; ++r) o[r] = c1 * W[2 * r] + c2 * W[2 * r + 1];
  return id;
}

NodeId Tape::affine_concat(NodeId w, NodeId bias, NodeId u, NodeId v) {
  const int rows = len(bias);
  const int la = len(u);
  const int lb = len(v);
  AIST_CHECK_LEN(len(w) == rows * (la + lb));
  const NodeId extra[2] = {u, v};
  const NodeId id = push(Op::kAffineConcat, rows, w, bias);
  nodes_.back().auxi_off = push_auxi(std::span<const NodeId>(extra, 2));
  const double* W = in(w);
  const double* B = in(bias);
  const double* U = in(u);
  const double* V = in(v);
  double* o = out(id);
  const int cols = la + lb;
  for (int r = 0; r < rows; ++r) {
    const double* row = W + static_cast<int64_t>(r) * cols;
    double acc = B[r];
    for (int i = 0; i < la; ++i) acc += row[i] * U[i];
    for (int i = 0; i < lb; ++i) acc += row[la + i] * V[i];
    o[r] = acc;
  }
  return id;
}

NodeId Tape::mat_t_vec(NodeId w, NodeId x, int rows, int cols) {
  AIST_CHECK_LEN(len(w) == rows * cols && len(x) == rows);
  const NodeId id = push(Op::kMatTVec, cols, w, x, rows, cols);
  const double* W = in(w);
  const double* X = in(x);
  double* o = out(id);
  std::fill(o, o + cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* row = W + static_cast<int64_t>(r) * cols;
    const double xv = X[r];
    for (int c = 0; c < cols; ++c) o[c] += row[c] * xv;
  }
  return id;
}

NodeId Tape::weighted_sum(NodeId weights, std::span<const NodeId> vs) {
  AIST_CHECK_LEN(static_cast<size_t>(len(weights)) == vs.size() && !vs.empty());
  const int n = len(vs[0]);
  for (NodeId v : vs) AIST_CHECK_LEN(len(v) == n);
  const NodeId id = push(Op::kWeightedSum, n, weights, -1);
  nodes_.back().auxi_off = push_auxi(vs);
  nodes_.back().q = static_cast<int>(vs.size());
  const double* wv = in(weights);
  double* o = out(id);
  std::fill(o, o + n, 0.0);
  for (size_t m = 0; m < vs.size(); ++m) {
    const double* x = in(vs[m]);
    for (int i = 0; i < n; ++i) o[i] += wv[m] * x[i];
  }
  return id;
}

NodeId Tape::softmax(NodeId a) {
  const NodeId id = push(Op::kSoftmax, len(a), a, -1);
  const double* x = in(a);
  double* o = out(id);
  const int n = len(id);
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    o[i] = std::exp(x[i] - mx);
    z += o[i];
  }
  for (int i = 0; i < n; ++i) o[i] /= z;
  return id;
}

namespace {

// Deterministic plan shared by forward and backward.
struct SparsePlan {
  int jthr = -1;        // subtracted element (threshold or minimum)
  double denom = 0.0;   // sum of retained positive shifts
  std::vector<int> order;  // indices by (score desc, index asc)
};

SparsePlan sparse_plan(std::span<const double> scores, int k_top) {
  SparsePlan plan;
  const int m = static_cast<int>(scores.size());
  plan.order.resize(static_cast<size_t>(m));
  std::iota(plan.order.begin(), plan.order.end(), 0);
  std::stable_sort(plan.order.begin(), plan.order.end(),
                   [&](int a, int b) { return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)]; });
  plan.jthr = m > k_top ? plan.order[static_cast<size_t>(k_top)] : plan.order.back();
  const double thr = scores[static_cast<size_t>(plan.jthr)];
  for (int i = 0; i < m; ++i) {
    const double shift = scores[static_cast<size_t>(i)] - thr;
    if (shift > 0.0) plan.denom += shift;
  }
  return plan;
}

}  // namespace

void sparse_attention_forward(std::span<const double> scores, int k_top,
                              std::span<double> out) {
  const int m = static_cast<int>(scores.size());
  if (m == 0 || k_top < 1) throw InternalError("sparse_attention_forward: bad arguments");
  const SparsePlan plan = sparse_plan(scores, k_top);
  std::fill(out.begin(), out.end(), 0.0);
  if (plan.denom > 0.0) {
    const double thr = scores[static_cast<size_t>(plan.jthr)];
    for (int i = 0; i < m; ++i) {
      const double shift = scores[static_cast<size_t>(i)] - thr;
      if (shift > 0.0) out[static_cast<size_t>(i)] = shift / plan.denom;
    }
  } else {
    // All candidate scores tie: uniform over the top-k_top positions
    // (all positions when the memory is not larger than k_top).
    const int kept = std::min(m, k_top);
    for (int r = 0; r < kept; ++r)
      out[static_cast<size_t>(plan.order[static_cast<size_t>(r)])] = 1.0 / kept;
  }
}

NodeId Tape::sparse_attn(NodeId scores, int k_top) {
  AIST_CHECK_LEN(k_top >= 1 && len(scores) >= 1);
  const NodeId id = push(Op::kSparseAttn, len(scores), scores, -1, k_top);
  sparse_attention_forward(val(scores), k_top,
                           std::span<double>(out(id), static_cast<size_t>(len(id))));
  return id;
}

NodeId Tape::floor_renorm(NodeId a, double eps) {
  const NodeId id = push(Op::kFloorRenorm, len(a), a, -1);
  nodes_.back().auxd_off = push_auxd(std::span<const double>(&eps, 1));
  const double* x = in(a);
  double* o = out(id);
  const int n = len(id);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    o[i] = std::max(x[i], eps);
    z += o[i];
  }
  for (int i = 0; i < n; ++i) o[i] /= z;
  return id;
}

NodeId Tape::lstm_cell(NodeId z, NodeId c_prev) {
  const int h = len(c_prev);
  AIST_CHECK_LEN(len(z) == 4 * h);
  const NodeId id = push(Op::kLstmCell, 2 * h, z, c_prev, h);
  const double* zp = in(z);
  const double* cp = in(c_prev);
  double* o = out(id);
  for (int i = 0; i < h; ++i) {
    const double gi = sigmoid(zp[i]);
    const double gf = sigmoid(zp[h + i]);
    const double gg = std::tanh(zp[2 * h + i]);
    const double go = sigmoid(zp[3 * h + i]);
    const double ct = gf * cp[i] + gi * gg;
    o[i] = ct;                       // c_t
    o[h + i] = go * std::tanh(ct);   // h_hat_t
  }
  return id;
}

void Tape::freeze() {
  frozen_nodes_ = nodes_.size();
  frozen_vals_ = val_.size();
  frozen_auxd_ = auxd_.size();
  frozen_auxi_ = auxi_.size();
}

void Tape::reset() {
  nodes_.resize(frozen_nodes_);
  val_.resize(frozen_vals_);
  auxd_.resize(frozen_auxd_);
  auxi_.resize(frozen_auxi_);
}

void Tape::backward(NodeId root, double seed) {
  if (grad_.size() < val_.size()) grad_.resize(val_.size());
  std::fill(grad_.begin(), grad_.end(), 0.0);
  double* gout = gr(root);
  for (int i = 0; i < len(root); ++i) gout[i] = seed;
  for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) backward_node(id);
}

void Tape::backward_node(NodeId id) {
  const Node& n = nodes_[static_cast<size_t>(id)];
  const double* g = grad_.data() + n.val_off;
  switch (n.op) {
    case Op::kLeaf:
    case Op::kConst:
    case Op::kDetach:
      return;
    case Op::kAdd: {
      double* ga = gr(n.a);
      double* gb = gr(n.b);
      for (int i = 0; i < n.len; ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
      return;
    }
    case Op::kSub: {
      double* ga = gr(n.a);
      double* gb = gr(n.b);
      for (int i = 0; i < n.len; ++i) {
        ga[i] += g[i];
        gb[i] -= g[i];
      }
      return;
    }
    case Op::kMul: {
      double* ga = gr(n.a);
      double* gb = gr(n.b);
      const double* xa = in(n.a);
      const double* xb = in(n.b);
      for (int i = 0; i < n.len; ++i) {
        ga[i] += g[i] * xb[i];
        gb[i] += g[i] * xa[i];
      }
      return;
    }
    case Op::kAbs: {
      double* ga = gr(n.a);
      const double* x = in(n.a);
      for (int i = 0; i < n.len; ++i)
        ga[i] += g[i] * (x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0));
      return;
    }
    case Op::kLog: {
      double* ga = gr(n.a);
      const double* x = in(n.a);
      for (int i = 0; i < n.len; ++i) ga[i] += g[i] / x[i];
      return;
    }
    case Op::kTanh: {
      double* ga = gr(n.a);
      const double* y = in(id);
      for (int i = 0; i < n.len; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
      return;
    }
    case Op::kElu: {
      double* ga = gr(n.a);
      const double* x = in(n.a);
      const double* y = in(id);
      for (int i = 0; i < n.len; ++i) ga[i] += g[i] * (x[i] > 0.0 ? 1.0 : y[i] + 1.0);
      return;
    }
    case Op::kLeakyRelu: {
      double* ga = gr(n.a);
      const double* x = in(n.a);
      const double slope = auxd_[static_cast<size_t>(n.auxd_off)];
      for (int i = 0; i < n.len; ++i) ga[i] += g[i] * (x[i] >= 0.0 ? 1.0 : slope);
      return;
    }
    case Op::kScaleConst: {
      double* ga = gr(n.a);
      const double k = auxd_[static_cast<size_t>(n.auxd_off)];
      for (int i = 0; i < n.len; ++i) ga[i] += g[i] * k;
      return;
    }
    case Op::kDropout: {
      double* ga = gr(n.a);
      const double* m = auxd_.data() + n.auxd_off;
      for (int i = 0; i < n.len; ++i) ga[i] += g[i] * m[i];
      return;
    }
    case Op::kConcat2: {
      double* ga = gr(n.a);
      double* gb = gr(n.b);
      const int la = len(n.a);
      for (int i = 0; i < la; ++i) ga[i] += g[i];
      for (int i = 0; i < n.len - la; ++i) gb[i] += g[la + i];
      return;
    }
    case Op::kSlice: {
      double* ga = gr(n.a);
      for (int i = 0; i < n.len; ++i) ga[n.p + i] += g[i];
      return;
    }
    case Op::kStack: {
      const NodeId* ids = auxi_.data() + n.auxi_off;
      for (int i = 0; i < n.len; ++i) gr(ids[i])[0] += g[i];
      return;
    }
    case Op::kSum: {
      double* ga = gr(n.a);
      for (int i = 0; i < len(n.a); ++i) ga[i] += g[0];
      return;
    }
    case Op::kDot: {
      double* ga = gr(n.a);
      double* gb = gr(n.b);
      const double* xa = in(n.a);
      const double* xb = in(n.b);
      for (int i = 0; i < len(n.a); ++i) {
        ga[i] += g[0] * xb[i];
        gb[i] += g[0] * xa[i];
      }
      return;
    }
    case Op::kDotConst: {
      double* ga = gr(n.a);
      const double* k = auxd_.data() + n.auxd_off;
      for (int i = 0; i < len(n.a); ++i) ga[i] += g[0] * k[i];
      return;
    }
    case Op::kDotSlice: {
      double* ga = gr(n.a);
      double* gb = gr(n.b);
      const double* xa = in(n.a) + n.p;
      const double* xb = in(n.b);
      for (int i = 0; i < len(n.b); ++i) {
        ga[n.p + i] += g[0] * xb[i];
        gb[i] += g[0] * xa[i];
      }
      return;
    }
    case Op::kAffine2: {
      const double* cs = auxd_.data() + n.auxd_off;
      gr(n.a)[0] += g[0] * cs[0];
      gr(n.b)[0] += g[0] * cs[1];
      return;
    }
    case Op::kAffineCols2: {
      double* gw = gr(n.a);
      const double* cs = auxd_.data() + n.auxd_off;
      for (int r = 0; r < n.len; ++r) {
        gw[2 * r] += g[r] * cs[0];
        gw[2 * r + 1] += g[r] * cs[1];
      }
      return;
    }
    case Op::kAffineConcat: {
      const NodeId u = auxi_[static_cast<size_t>(n.auxi_off)];
      const NodeId v = auxi_[static_cast<size_t>(n.auxi_off) + 1];
      const int la = len(u);
      const int lb = len(v);
      const int cols = la + lb;
      double* gw = gr(n.a);
      double* gbias = gr(n.b);
      double* gu = gr(u);
      double* gv = gr(v);
      const double* W = in(n.a);
      const double* U = in(u);
      const double* V = in(v);
      for (int r = 0; r < n.len; ++r) {
        const double gr_r = g[r];
        if (gr_r == 0.0) continue;
        gbias[r] += gr_r;
        double* gwrow = gw + static_cast<int64_t>(r) * cols;
        const double* wrow = W + static_cast<int64_t>(r) * cols;
        for (int i = 0; i < la; ++i) {
          gwrow[i] += gr_r * U[i];
          gu[i] += gr_r * wrow[i];
        }
        for (int i = 0; i < lb; ++i) {
          gwrow[la + i] += gr_r * V[i];
          gv[i] += gr_r * wrow[la + i];
        }
      }
      return;
    }
    case Op::kMatTVec: {
      const int rows = n.p;
      const int cols = n.q;
      double* gw = gr(n.a);
      double* gx = gr(n.b);
      const double* W = in(n.a);
      const double* X = in(n.b);
      for (int r = 0; r < rows; ++r) {
        const double* wrow = W + static_cast<int64_t>(r) * cols;
        double* gwrow = gw + static_cast<int64_t>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) {
          gwrow[c] += g[c] * X[r];
          acc += wrow[c] * g[c];
        }
        gx[r] += acc;
      }
      return;
    }
    case Op::kWeightedSum: {
      const int m = n.q;
      const NodeId* ids = auxi_.data() + n.auxi_off;
      double* gw = gr(n.a);
      const double* wv = in(n.a);
      for (int k = 0; k < m; ++k) {
        const double* x = in(ids[k]);
        double* gx = gr(ids[k]);
        double acc = 0.0;
        for (int i = 0; i < n.len; ++i) {
          acc += g[i] * x[i];
          gx[i] += g[i] * wv[k];
        }
        gw[k] += acc;
      }
      return;
    }
    case Op::kSoftmax: {
      double* ga = gr(n.a);
      const double* y = in(id);
      double dotgy = 0.0;
      for (int i = 0; i < n.len; ++i) dotgy += g[i] * y[i];
      for (int i = 0; i < n.len; ++i) ga[i] += y[i] * (g[i] - dotgy);
      return;
    }
    case Op::kSparseAttn: {
      const SparsePlan plan = sparse_plan(val(n.a), n.p);
      if (plan.denom <= 0.0) return;  // uniform fallback: locally constant
      double* ga = gr(n.a);
      const double* y = in(id);
      double s = 0.0;       // sum of g_m * alpha_m over retained entries
      double gsum = 0.0;    // sum of g_m over retained entries
      int retained = 0;
      for (int i = 0; i < n.len; ++i) {
        if (y[i] > 0.0) {
          s += g[i] * y[i];
          gsum += g[i];
          ++retained;
        }
      }
      for (int i = 0; i < n.len; ++i)
        if (y[i] > 0.0) ga[i] += (g[i] - s) / plan.denom;
      ga[plan.jthr] += (s * retained - gsum) / plan.denom;
      return;
    }
    case Op::kFloorRenorm: {
      double* ga = gr(n.a);
      const double* x = in(n.a);
      const double* y = in(id);
      const double eps = auxd_[static_cast<size_t>(n.auxd_off)];
      double z = 0.0;
      for (int i = 0; i < n.len; ++i) z += std::max(x[i], eps);
      double dotgy = 0.0;
      for (int i = 0; i < n.len; ++i) dotgy += g[i] * y[i];
      for (int i = 0; i < n.len; ++i)
        if (x[i] > eps) ga[i] += (g[i] - dotgy) / z;
      return;
    }
    case Op::kLstmCell: {
      const int h = n.p;
      const double* zp = in(n.a);
      const double* cp = in(n.b);
      const double* y = in(id);
      double* gz = gr(n.a);
      double* gc = gr(n.b);
      for (int i = 0; i < h; ++i) {
        const double gi = sigmoid(zp[i]);
        const double gf = sigmoid(zp[h + i]);
        const double gg = std::tanh(zp[2 * h + i]);
        const double go = sigmoid(zp[3 * h + i]);
        const double ct = y[i];
        const double tct = std::tanh(ct);
        const double ghat = g[h + i];
        const double gct = g[i] + ghat * go * (1.0 - tct * tct);
        gz[i] += gct * gg * gi * (1.0 - gi);
        gz[h + i] += gct * cp[i] * gf * (1.0 - gf);
        gz[2 * h + i] += gct * gi * (1.0 - gg * gg);
        gz[3 * h + i] += ghat * tct * go * (1.0 - go);
        gc[i] += gct * gf;
      }
      return;
    }
  }
  throw InternalError("unhandled op in backward");
}

#undef AIST_CHECK_LEN

}  // namespace aist

#include "core/fgat.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace aist {

FgatOut fgat_forward(Tape& t, const FgatParamNodes& p, int d_qk,
                     NodeId alpha_used, std::span<const double> x_nbr, int self_pos,
                     std::span<const double> f_nbr, int J,
                     std::span<const std::vector<double>> beta_masks, bool uniform) {
  const int n = static_cast<int>(x_nbr.size());
  if (n < 1 || J < 1) throw InternalError("fgat: empty neighborhood or feature set");
  if (f_nbr.size() != static_cast<size_t>(n) * static_cast<size_t>(J))
    throw InternalError("fgat: feature block shape mismatch");

  const double xi = x_nbr[static_cast<size_t>(self_pos)];
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d_qk));

  FgatOut out;
  out.beta.resize(static_cast<size_t>(n));
  std::vector<NodeId> fsum(static_cast<size_t>(n));
  std::vector<double> uniform_beta;
  if (uniform) uniform_beta.assign(static_cast<size_t>(J), 1.0 / J);

  for (int i = 0; i < n; ++i) {
    const std::span<const double> f_row = f_nbr.subspan(static_cast<size_t>(i) * J, static_cast<size_t>(J));
    NodeId beta;
    if (uniform) {
      beta = t.constant(uniform_beta);
    } else {
      const NodeId q = t.affine_cols2(p.w_q, d_qk, xi, x_nbr[static_cast<size_t>(i)]);
      std::vector<NodeId> logits(static_cast<size_t>(J));
      for (int j = 0; j < J; ++j) {
        const double fi = f_nbr[static_cast<size_t>(self_pos) * J + j];
        const NodeId k = t.affine_cols2(p.w_k, d_qk, fi, f_row[static_cast<size_t>(j)]);
        logits[static_cast<size_t>(j)] = t.scale_const(t.dot(q, k), inv_sqrt_d);
      }
      beta = t.softmax(t.stack(logits));
    }
    out.beta[static_cast<size_t>(i)] = beta;
    const NodeId beta_used =
        beta_masks.empty() ? beta : t.dropout(beta, beta_masks[static_cast<size_t>(i)]);
    fsum[static_cast<size_t>(i)] = t.dot_const(beta_used, f_row);
  }

  const NodeId inner = t.dot(alpha_used, t.stack(fsum));
  const NodeId wv[] = {p.w_v};
  out.e_pre = t.weighted_sum(inner, wv);
  out.e = t.elu(out.e_pre);
  return out;
}

}  // namespace aist

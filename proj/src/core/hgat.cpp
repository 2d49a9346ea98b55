#include "core/hgat.hpp"

#include <vector>

#include "core/errors.hpp"

namespace aist {

HgatOut hgat_forward(Tape& t, const HgatParamNodes& p, int F,
                     std::span<const double> x_nbr, std::span<const double> z_nbr,
                     int self_pos, bool parent_attention, double leaky_slope,
                     const HgatDropout& drop, bool uniform) {
  const int n = static_cast<int>(x_nbr.size());
  if (n < 1) throw InternalError("hgat: empty neighborhood");
  if (parent_attention && z_nbr.size() != x_nbr.size())
    throw InternalError("hgat: x/z neighbor lists disagree");
  if (self_pos < 0 || self_pos >= n) throw InternalError("hgat: bad self position");

  HgatOut out;
  if (uniform) {
    std::vector<double> u(static_cast<size_t>(n), 1.0 / n);
    out.alpha = t.constant(u);
  } else {
    const double xi = x_nbr[static_cast<size_t>(self_pos)];
    // a_x·[w_x x_i || w_x x_n] = (a_x[0:F]·w_x) x_i + (a_x[F:2F]·w_x) x_n.
    const NodeId sx_self = t.dot_slice(p.a_x, p.w_x, 0);
    const NodeId sx_nbr = t.dot_slice(p.a_x, p.w_x, F);
    NodeId sz_self = -1, sz_nbr = -1;
    double zi = 0.0;
    if (parent_attention) {
      zi = z_nbr[static_cast<size_t>(self_pos)];
      sz_self = t.dot_slice(p.a_z, p.w_z, 0);
      sz_nbr = t.dot_slice(p.a_z, p.w_z, F);
    }
    std::vector<NodeId> ec(static_cast<size_t>(n));
    std::vector<NodeId> ep;
    for (int i = 0; i < n; ++i)
      ec[static_cast<size_t>(i)] =
          t.leaky_relu(t.affine2(sx_self, sx_nbr, xi, x_nbr[static_cast<size_t>(i)]), leaky_slope);
    NodeId ec_vec = t.stack(ec);
    if (!drop.ec.empty()) ec_vec = t.dropout(ec_vec, drop.ec);
    NodeId scores = ec_vec;
    if (parent_attention) {
      ep.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i)
        ep[static_cast<size_t>(i)] = t.leaky_relu(
            t.affine2(sz_self, sz_nbr, zi, z_nbr[static_cast<size_t>(i)]), leaky_slope);
      NodeId ep_vec = t.stack(ep);
      if (!drop.ep.empty()) ep_vec = t.dropout(ep_vec, drop.ep);
      scores = t.add(ec_vec, ep_vec);
    }
    out.scores = scores;
    out.alpha = t.softmax(scores);
  }
  out.alpha_used = drop.alpha.empty() ? out.alpha : t.dropout(out.alpha, drop.alpha);

  const NodeId xsum = t.dot_const(out.alpha_used, x_nbr);
  const NodeId wx[] = {p.w_x};
  out.c_pre = t.weighted_sum(xsum, wx);
  out.c = t.elu(out.c_pre);
  return out;
}

}  // namespace aist

#pragma once

#include <span>
#include <vector>

#include "core/tape.hpp"

namespace aist {

// Scaled dot-product feature attention parameters: W_q, W_k are (d x 2),
// w_v is length F.
struct FgatParamNodes {
  NodeId w_q = -1;
  NodeId w_k = -1;
  NodeId w_v = -1;
};

struct FgatOut {
  std::vector<NodeId> beta;  // per neighbor, length-J distributions (pre-dropout)
  NodeId e_pre = -1;         // pre-activation feature embedding, length F
  NodeId e = -1;             // ELU(e_pre)
};

// For each neighbor n: q = W_q[x_i || x_n], k^j = W_k[f_i^j || f_n^j],
// beta^j = softmax_j(q·k^j / sqrt(d)); the embedding is
// ELU(sum_n alpha_n (sum_j beta^j f_n^j) * w_v). f_nbr is n x J row-major.
// beta_masks, when non-empty, is one scaled dropout mask of length J per
// neighbor. uniform freezes every beta at 1/J.
FgatOut fgat_forward(Tape& t, const FgatParamNodes& p, int d_qk,
                     NodeId alpha_used, std::span<const double> x_nbr, int self_pos,
                     std::span<const double> f_nbr, int J,
                     std::span<const std::vector<double>> beta_masks, bool uniform);

}  // namespace aist

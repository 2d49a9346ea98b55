#pragma once

#include <span>

#include "core/tape.hpp"

namespace aist {

// Node-level attention parameters (and optional parent-level pair) as tape
// leaves. w_x/w_z are length F, a_x/a_z length 2F.
struct HgatParamNodes {
  NodeId w_x = -1;
  NodeId a_x = -1;
  NodeId w_z = -1;  // -1 when parent attention is disabled
  NodeId a_z = -1;
};

// Train-mode dropout masks (already scaled by 1/(1-p)); empty spans = eval.
struct HgatDropout {
  std::span<const double> ec;
  std::span<const double> ep;
  std::span<const double> alpha;
};

struct HgatOut {
  NodeId scores = -1;      // combined pairwise scores (-1 in uniform mode)
  NodeId alpha = -1;       // normalized attention (pre-dropout)
  NodeId alpha_used = -1;  // what downstream sums consume (post-dropout)
  NodeId c_pre = -1;       // pre-activation embedding, length F
  NodeId c = -1;           // ELU(c_pre)
};

// One target region against its neighborhood (self included at self_pos).
// Score per neighbor: LeakyReLU(a_x·[w_x x_i || w_x x_n]) plus, with parent
// attention, LeakyReLU(a_z·[w_z z_i || w_z z_n]); alpha = softmax; the
// embedding is ELU((sum alpha_n x_n) * w_x). uniform freezes alpha at 1/n.
HgatOut hgat_forward(Tape& t, const HgatParamNodes& p, int F,
                     std::span<const double> x_nbr, std::span<const double> z_nbr,
                     int self_pos, bool parent_attention, double leaky_slope,
                     const HgatDropout& drop, bool uniform);

}  // namespace aist

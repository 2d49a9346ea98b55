#pragma once

#include <string>

#include "core/config.hpp"
#include "core/params.hpp"
#include "core/tensors.hpp"

namespace aist {

// Self-contained trained model: full hyperparameter config (canonical text),
// the fitted normalizer, and every named parameter group. Binary round-trip
// is bit-exact.
struct Checkpoint {
  Config config;
  NormalizationSpec norm;
  ParamStore params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aist

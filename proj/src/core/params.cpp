#include "core/params.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace aist {

int ParamStore::add(const std::string& name, int rows, int cols, int fan_in) {
  if (index_.count(name)) throw InternalError("duplicate parameter group: " + name);
  if (rows < 1 || cols < 1 || fan_in < 1)
    throw InternalError("bad parameter group shape: " + name);
  ParamGroup g;
  g.name = name;
  g.rows = rows;
  g.cols = cols;
  g.fan_in = fan_in;
  g.data.assign(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0);
  groups_.push_back(std::move(g));
  const int id = static_cast<int>(groups_.size()) - 1;
  index_[name] = id;
  return id;
}

int ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter group: " + name);
  return it->second;
}

ParamGroup& ParamStore::group(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter group: " + name);
  return groups_[static_cast<size_t>(it->second)];
}

const ParamGroup& ParamStore::group(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter group: " + name);
  return groups_[static_cast<size_t>(it->second)];
}

size_t ParamStore::total_size() const {
  size_t n = 0;
  for (const auto& g : groups_) n += g.size();
  return n;
}

void ParamStore::init_uniform(uint64_t seed) {
  Rng rng = rng_for(seed, "init");
  for (auto& g : groups_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(g.fan_in));
    for (double& v : g.data) v = rng.uniform(-bound, bound);
  }
}

GradBuffer::GradBuffer(const ParamStore& store) {
  g.resize(static_cast<size_t>(store.num_groups()));
  for (int i = 0; i < store.num_groups(); ++i)
    g[static_cast<size_t>(i)].assign(store.group(i).size(), 0.0);
}

void GradBuffer::zero() {
  for (auto& v : g) std::fill(v.begin(), v.end(), 0.0);
}

void GradBuffer::add(const GradBuffer& other) {
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = 0; j < g[i].size(); ++j) g[i][j] += other.g[i][j];
}

}  // namespace aist

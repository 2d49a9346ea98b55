#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace aist {

// One named weight group (vector when cols == 1, row-major matrix otherwise).
struct ParamGroup {
  std::string name;
  int rows = 0;
  int cols = 1;
  int fan_in = 1;  // drives uniform(+-1/sqrt(fan_in)) initialization
  std::vector<double> data;

  size_t size() const { return data.size(); }
};

class ParamStore {
 public:
  int add(const std::string& name, int rows, int cols, int fan_in);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  int index_of(const std::string& name) const;  // throws on unknown name
  ParamGroup& group(const std::string& name);
  const ParamGroup& group(const std::string& name) const;
  ParamGroup& group(int i) { return groups_[static_cast<size_t>(i)]; }
  const ParamGroup& group(int i) const { return groups_[static_cast<size_t>(i)]; }
  int num_groups() const { return static_cast<int>(groups_.size()); }
  size_t total_size() const;

  // Fills every group in insertion order from one deterministic stream.
  void init_uniform(uint64_t seed);

 private:
  std::vector<ParamGroup> groups_;
  std::map<std::string, int> index_;
};

// Gradient (or optimizer-state) buffers shaped like a ParamStore.
struct GradBuffer {
  std::vector<std::vector<double>> g;

  explicit GradBuffer(const ParamStore& store);
  void zero();
  void add(const GradBuffer& other);
  std::span<double> of(int group) { return g[static_cast<size_t>(group)]; }
};

}  // namespace aist

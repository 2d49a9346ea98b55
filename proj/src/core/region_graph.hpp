#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace aist {

// Undirected region adjacency plus a two-level containment hierarchy
// (region -> parent side/district). Region ids are arbitrary distinct
// non-negative integers (the bundled Chicago file uses community-area
// numbers 1..77); a dense internal index is kept for tensor addressing.
class RegionGraph {
 public:
  static RegionGraph build(const std::vector<std::pair<int, int>>& edges,
                           const std::map<int, int>& parent_of);
  static RegionGraph load(const std::string& path);
  void save(const std::string& path) const;  // load(save(g)) == g

  int num_regions() const { return static_cast<int>(ids_.size()); }
  int num_parents() const { return static_cast<int>(parent_ids_.size()); }

  // Region ids in ascending order; index i in all dense arrays refers to ids()[i].
  const std::vector<int>& ids() const { return ids_; }
  const std::vector<int>& parent_ids() const { return parent_ids_; }

  bool has_region(int id) const;
  int index_of(int id) const;        // dense index; throws on unknown id
  int id_at(int index) const { return ids_.at(static_cast<size_t>(index)); }

  // First-order neighbors including self, ascending id order.
  std::vector<int> neighborhood(int id) const;
  // Same, but as dense indices (ascending, since ids are sorted).
  const std::vector<int>& neighborhood_indices(int index) const;

  int parent_of(int id) const;
  int parent_index_of_region(int index) const {
    return parent_index_[static_cast<size_t>(index)];
  }
  std::vector<int> children_of(int parent_id) const;

  bool connected() const;

  // z_i = sum of x over all regions sharing parent(i); x is indexed densely.
  std::vector<double> parent_feature(std::span<const double> x) const;

 private:
  std::vector<int> ids_;                         // sorted region ids
  std::vector<int> parent_ids_;                  // sorted parent ids
  std::vector<int> parent_index_;                // per region index -> parent index
  std::vector<std::vector<int>> adj_indices_;    // neighborhood incl. self, by index
  std::map<int, int> index_by_id_;
};

}  // namespace aist

#include "core/region_graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "core/errors.hpp"
#include "core/text.hpp"

namespace aist {

RegionGraph RegionGraph::build(const std::vector<std::pair<int, int>>& edges,
                               const std::map<int, int>& parent_of) {
  RegionGraph g;
  for (const auto& [id, parent] : parent_of) {
    if (id < 0) throw DataError("negative region id");
    if (parent < 0) throw DataError("negative parent id");
    g.ids_.push_back(id);
  }
  if (g.ids_.empty()) throw DataError("graph has no regions");
  for (size_t i = 0; i < g.ids_.size(); ++i) g.index_by_id_[g.ids_[i]] = static_cast<int>(i);

  std::set<int> parents;
  for (const auto& [id, parent] : parent_of) parents.insert(parent);
  g.parent_ids_.assign(parents.begin(), parents.end());
  std::map<int, int> parent_index_by_id;
  for (size_t p = 0; p < g.parent_ids_.size(); ++p)
    parent_index_by_id[g.parent_ids_[p]] = static_cast<int>(p);
  g.parent_index_.resize(g.ids_.size());
  for (size_t i = 0; i < g.ids_.size(); ++i)
    g.parent_index_[i] = parent_index_by_id.at(parent_of.at(g.ids_[i]));

  std::vector<std::set<int>> adj(g.ids_.size());
  for (const auto& [a, b] : edges) {
    if (a == b) throw DataError("self-loop edge on region " + std::to_string(a));
    auto ia = g.index_by_id_.find(a);
    auto ib = g.index_by_id_.find(b);
    if (ia == g.index_by_id_.end())
      throw DataError("edge references region " + std::to_string(a) + " with no parent record");
    if (ib == g.index_by_id_.end())
      throw DataError("edge references region " + std::to_string(b) + " with no parent record");
    // Duplicate edges collapse silently: adjacency is a set.
    adj[static_cast<size_t>(ia->second)].insert(ib->second);
    adj[static_cast<size_t>(ib->second)].insert(ia->second);
  }
  g.adj_indices_.resize(g.ids_.size());
  for (size_t i = 0; i < g.ids_.size(); ++i) {
    adj[i].insert(static_cast<int>(i));  // neighborhood includes self
    g.adj_indices_[i].assign(adj[i].begin(), adj[i].end());
  }
  return g;
}

RegionGraph RegionGraph::load(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::pair<int, int>> edges;
  std::map<int, int> parent_of;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto tok = split(t, ' ');
    std::vector<std::string> parts;
    for (const auto& s : tok)
      if (!s.empty()) parts.push_back(s);
    const auto where = [&] { return path + ":" + std::to_string(lineno); };
    if (parts.size() != 3) throw DataError("bad graph record at " + where());
    const auto a = parse_int(parts[1]);
    const auto b = parse_int(parts[2]);
    if (!a || !b) throw DataError("non-integer id at " + where());
    if (parts[0] == "edge") {
      edges.emplace_back(static_cast<int>(*a), static_cast<int>(*b));
    } else if (parts[0] == "parent") {
      auto [it, fresh] = parent_of.emplace(static_cast<int>(*a), static_cast<int>(*b));
      if (!fresh && it->second != static_cast<int>(*b))
        throw DataError("conflicting parent for region " + parts[1] + " at " + where());
    } else {
      throw DataError("unknown record type '" + parts[0] + "' at " + where());
    }
  }
  return build(edges, parent_of);
}

void RegionGraph::save(const std::string& path) const {
  std::ostringstream out;
  out << "# region graph: parent <region> <side>, edge <a> <b>\n";
  for (size_t i = 0; i < ids_.size(); ++i)
    out << "parent " << ids_[i] << " " << parent_ids_[static_cast<size_t>(parent_index_[i])]
        << "\n";
  for (size_t i = 0; i < ids_.size(); ++i)
    for (int j : adj_indices_[i])
      if (static_cast<size_t>(j) > i) out << "edge " << ids_[i] << " " << ids_[static_cast<size_t>(j)] << "\n";
  write_text_file(path, out.str());
}

bool RegionGraph::has_region(int id) const { return index_by_id_.count(id) > 0; }

int RegionGraph::index_of(int id) const {
  auto it = index_by_id_.find(id);
  if (it == index_by_id_.end()) throw DataError("unknown region id " + std::to_string(id));
  return it->second;
}

std::vector<int> RegionGraph::neighborhood(int id) const {
  const auto& idx = adj_indices_[static_cast<size_t>(index_of(id))];
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(ids_[static_cast<size_t>(i)]);
  return out;  // indices ascend, and ids_ is sorted, so ids ascend too
}

const std::vector<int>& RegionGraph::neighborhood_indices(int index) const {
  return adj_indices_.at(static_cast<size_t>(index));
}

int RegionGraph::parent_of(int id) const {
  return parent_ids_[static_cast<size_t>(parent_index_[static_cast<size_t>(index_of(id))])];
}

std::vector<int> RegionGraph::children_of(int parent_id) const {
  std::vector<int> out;
  for (size_t i = 0; i < ids_.size(); ++i)
    if (parent_ids_[static_cast<size_t>(parent_index_[i])] == parent_id) out.push_back(ids_[i]);
  if (out.empty()) throw DataError("unknown parent id " + std::to_string(parent_id));
  return out;
}

bool RegionGraph::connected() const {
  if (ids_.empty()) return false;
  std::vector<char> seen(ids_.size(), 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  size_t visited = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j : adj_indices_[static_cast<size_t>(i)]) {
      if (!seen[static_cast<size_t>(j)]) {
        seen[static_cast<size_t>(j)] = 1;
        ++visited;
        stack.push_back(j);
      }
    }
  }
  return visited == ids_.size();
}

std::vector<double> RegionGraph::parent_feature(std::span<const double> x) const {
  if (x.size() != ids_.size())
    throw DataError("parent_feature: expected " + std::to_string(ids_.size()) +
                    " values, got " + std::to_string(x.size()));
  std::vector<double> per_parent(parent_ids_.size(), 0.0);
  for (size_t i = 0; i < x.size(); ++i)
    per_parent[static_cast<size_t>(parent_index_[i])] += x[i];
  std::vector<double> z(x.size());
  for (size_t i = 0; i < x.size(); ++i) z[i] = per_parent[static_cast<size_t>(parent_index_[i])];
  return z;
}

}  // namespace aist

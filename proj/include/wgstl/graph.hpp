#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wgstl/error.hpp"

namespace wgstl {

using NodeIndex = std::size_t;

// Undirected simple graph over string-named nodes. Neighbor lists follow node
// declaration order so that per-neighbor weight vectors index reproducibly.
class Graph {
 public:
  Graph() = default;

  Graph(std::vector<std::string> nodes,
        const std::vector<std::pair<std::string, std::string>>& edges)
      : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
      if (!index_.emplace(nodes_[i], i).second) {
        throw ValidationError("duplicate node id '" + nodes_[i] + "'");
      }
    }
    for (const auto& [a, b] : edges) {
      auto ia = find(a);
      auto ib = find(b);
      if (ia == npos) throw ValidationError("edge endpoint '" + a + "' is not a declared node");
      if (ib == npos) throw ValidationError("edge endpoint '" + b + "' is not a declared node");
      if (ia == ib) throw ValidationError("self-loop on node '" + a + "'");
      auto& la = adjacency_[ia];
      if (std::find(la.begin(), la.end(), ib) != la.end()) continue;
      la.push_back(ib);
      adjacency_[ib].push_back(ia);
      ++edge_count_;
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  }

  static constexpr NodeIndex npos = static_cast<NodeIndex>(-1);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::string& name(NodeIndex i) const { return nodes_.at(i); }

  NodeIndex find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? npos : it->second;
  }

  NodeIndex index(const std::string& id) const {
    auto i = find(id);
    if (i == npos) throw ValidationError("unknown node '" + id + "'");
    return i;
  }

  std::span<const NodeIndex> neighbors(NodeIndex v) const { return adjacency_.at(v); }

  std::vector<std::string> neighbors(const std::string& id) const {
    std::vector<std::string> out;
    for (auto u : adjacency_[index(id)]) out.push_back(nodes_[u]);
    return out;
  }

  bool adjacent(NodeIndex a, NodeIndex b) const {
    const auto& l = adjacency_.at(a);
    return std::binary_search(l.begin(), l.end(), b);
  }

  // Each undirected edge once, smaller declaration index first.
  std::vector<std::pair<std::string, std::string>> edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (NodeIndex a = 0; a < size(); ++a) {
      for (auto b : adjacency_[a]) {
        if (a < b) out.emplace_back(nodes_[a], nodes_[b]);
      }
    }
    return out;
  }

  bool operator==(const Graph& o) const {
    return nodes_ == o.nodes_ && adjacency_ == o.adjacency_;
  }

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::vector<NodeIndex>> adjacency_;
  std::size_t edge_count_ = 0;
};

inline Graph build_graph(std::vector<std::string> nodes,
                         const std::vector<std::pair<std::string, std::string>>& edges) {
  return Graph(std::move(nodes), edges);
}

struct LatLon {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;

inline double haversine_km(LatLon a, LatLon b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat_deg - a.lat_deg) * rad;
  const double dlon = (b.lon_deg - a.lon_deg) * rad;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat_deg * rad) * std::cos(b.lat_deg * rad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

// Edge between every pair of nodes whose great-circle distance is within
// radius_km. Node order follows the order of `coords`.
inline Graph radius_graph(const std::vector<std::pair<std::string, LatLon>>& coords,
                          double radius_km) {
  if (!(radius_km > 0.0) || !std::isfinite(radius_km)) {
    throw ValidationError("radius must be a positive finite number of km");
  }
  std::vector<std::string> nodes;
  for (const auto& [id, c] : coords) {
    if (!std::isfinite(c.lat_deg) || !std::isfinite(c.lon_deg)) {
      throw ValidationError("non-finite coordinate for node '" + id + "'");
    }
    nodes.push_back(id);
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      if (haversine_km(coords[i].second, coords[j].second) <= radius_km) {
        edges.emplace_back(coords[i].first, coords[j].first);
      }
    }
  }
  return Graph(std::move(nodes), edges);
}

// Per-node, per-step, d-dimensional values; storage is [node][step][dim] with
// nodes in graph declaration order. NaN marks a missing entry until imputed.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t nodes, std::size_t horizon, std::size_t dim, double fill = 0.0)
      : nodes_(nodes), horizon_(horizon), dim_(dim),
        values_(nodes * (horizon + 1) * dim, fill) {
    if (dim == 0) throw ValidationError("trajectory dimension must be >= 1");
  }

  std::size_t node_count() const noexcept { return nodes_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t length() const noexcept { return horizon_ + 1; }
  std::size_t dim() const noexcept { return dim_; }

  double& at(NodeIndex v, std::size_t k, std::size_t j) { return values_[offset(v, k) + j]; }
  double at(NodeIndex v, std::size_t k, std::size_t j) const { return values_[offset(v, k) + j]; }

  std::span<const double> row(NodeIndex v, std::size_t k) const {
    return {values_.data() + offset(v, k), dim_};
  }
  std::span<double> row(NodeIndex v, std::size_t k) {
    return {values_.data() + offset(v, k), dim_};
  }

  std::span<const double> raw() const noexcept { return values_; }
  std::span<double> raw() noexcept { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
  }

  // Steps [first, first + count) of every node.
  Trajectory slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > length()) {
      throw ValidationError("trajectory slice out of range");
    }
    Trajectory out(nodes_, count - 1, dim_);
    for (NodeIndex v = 0; v < nodes_; ++v) {
      for (std::size_t k = 0; k < count; ++k) {
        auto src = row(v, first + k);
        std::copy(src.begin(), src.end(), out.row(v, k).begin());
      }
    }
    return out;
  }

  bool operator==(const Trajectory& o) const {
    if (nodes_ != o.nodes_ || horizon_ != o.horizon_ || dim_ != o.dim_) return false;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double a = values_[i], b = o.values_[i];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
    }
    return true;
  }

 private:
  std::size_t offset(NodeIndex v, std::size_t k) const { return (v * (horizon_ + 1) + k) * dim_; }

  std::size_t nodes_ = 0;
  std::size_t horizon_ = 0;
  std::size_t dim_ = 1;
  std::vector<double> values_;
};

struct Sample {
  Trajectory trajectory;
  int label = 1;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  Graph graph;
  std::vector<std::string> dim_names;
  std::vector<Sample> samples;
  // Optional node coordinates, carried through file round-trips.
  std::map<std::string, LatLon> coords;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::size_t dim() const noexcept { return dim_names.size(); }
  std::size_t horizon() const { return samples.empty() ? 0 : samples.front().trajectory.horizon(); }

  std::size_t count_label(int label) const {
    return static_cast<std::size_t>(std::count_if(
        samples.begin(), samples.end(), [label](const Sample& s) { return s.label == label; }));
  }

  // Throws unless every sample matches the graph, d and a common horizon.
  void validate() const {
    if (dim_names.empty()) throw ValidationError("dataset has no dimensions");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (s.label != 1 && s.label != -1) {
        throw ValidationError("sample " + std::to_string(i) + ": label must be -1 or 1");
      }
      if (s.trajectory.node_count() != graph.size()) {
        throw ValidationError("sample " + std::to_string(i) + ": node count does not match graph");
      }
      if (s.trajectory.dim() != dim()) {
        throw ValidationError("sample " + std::to_string(i) + ": has " +
                              std::to_string(s.trajectory.dim()) + " dimensions, dataset declares " +
                              std::to_string(dim()));
      }
      if (s.trajectory.horizon() != samples.front().trajectory.horizon()) {
        throw ValidationError("sample " + std::to_string(i) + ": horizon differs from sample 0");
      }
    }
  }
};

}  // namespace wgstl

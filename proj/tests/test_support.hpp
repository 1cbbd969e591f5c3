#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "wgstl/wgstl.hpp"

namespace wgstl::fixtures {

// Connected-enough random graph: nodes v0..v{n-1}, each node gets at least one
// neighbor so graph quantifiers are always defined.
inline Graph random_graph(Rng& rng, std::size_t min_nodes, std::size_t max_nodes, double edge_p = 0.5) {
  const std::size_t n = min_nodes + rng.index(max_nodes - min_nodes + 1);
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("v" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<int> degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < edge_p) {
        edges.emplace_back(nodes[i], nodes[j]);
        ++degree[i];
        ++degree[j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] > 0) continue;
    std::size_t j = rng.index(n - 1);
    if (j >= i) ++j;
    edges.emplace_back(nodes[i], nodes[j]);
    ++degree[i];
    ++degree[j];
  }
  return Graph(std::move(nodes), edges);
}

inline Trajectory random_trajectory(Rng& rng, const Graph& g, std::size_t horizon, std::size_t dim,
                                    double lo = -3.0, double hi = 3.0) {
  Trajectory t(g.size(), horizon, dim);
  for (double& x : t.raw()) x = rng.uniform(lo, hi);
  return t;
}

struct FormulaShape {
  std::size_t max_depth = 4;
  std::size_t max_nodes = 5;
  std::size_t max_reach = 6;  // deepest time step touched from k = 0
  std::size_t predicates = 2;
  bool flexible = false;      // may use tempX / graphX
  bool concrete = true;       // may use always / eventually / forall / exists
};

namespace detail {

inline std::string random_node(Rng& rng, const FormulaShape& s, std::size_t depth, std::size_t& budget,
                               std::size_t reach_left) {
  --budget;
  auto pred = [&] { return "(pred p" + std::to_string(rng.index(s.predicates)) + ")"; };
  if (depth + 1 >= s.max_depth || budget == 0) return pred();
  std::vector<std::string> kinds{"pred", "not"};
  if (budget >= 2) kinds.insert(kinds.end(), {"and", "or"});
  if (s.concrete) kinds.insert(kinds.end(), {"always", "eventually", "forall", "exists"});
  if (s.flexible) kinds.insert(kinds.end(), {"tempX", "graphX"});
  const auto& k = kinds[rng.index(kinds.size())];
  if (k == "pred") return pred();
  if (k == "not") return "(not " + random_node(rng, s, depth + 1, budget, reach_left) + ")";
  if (k == "and" || k == "or") {
    auto a = random_node(rng, s, depth + 1, budget, reach_left);
    if (budget == 0) return a;
    auto b = random_node(rng, s, depth + 1, budget, reach_left);
    return "(" + k + " " + a + " " + b + ")";
  }
  if (k == "always" || k == "eventually" || k == "tempX") {
    const std::size_t hi = rng.index(std::min<std::size_t>(reach_left, 3) + 1);
    const std::size_t lo = rng.index(hi + 1);
    return "(" + k + " [" + std::to_string(lo) + " " + std::to_string(hi) + "] " +
           random_node(rng, s, depth + 1, budget, reach_left - hi) + ")";
  }
  return "(" + k + " " + random_node(rng, s, depth + 1, budget, reach_left) + ")";
}

}  // namespace detail

// Random formula text in the structure grammar.
inline std::string random_formula_text(Rng& rng, const FormulaShape& s) {
  std::size_t budget = s.max_nodes;
  return detail::random_node(rng, s, 0, budget, s.max_reach);
}

// Random structure with at least one temporal and one graph operator.
inline Formula random_structure(Rng& rng, FormulaShape s) {
  for (;;) {
    auto f = parse_formula(random_formula_text(rng, s));
    if (f.count_if(is_temporal) > 0 && f.count_if(is_graph) > 0) return f;
  }
}

inline std::vector<Predicate> random_predicates(Rng& rng, const Formula& f, std::size_t dim) {
  std::vector<Predicate> out;
  for (const auto& d : f.predicates()) {
    Predicate p{d.name, {}, rng.uniform(-1.0, 1.0)};
    for (std::size_t j = 0; j < dim; ++j) p.a.push_back(rng.uniform(-1.0, 1.0));
    out.push_back(std::move(p));
  }
  return out;
}

// Random operator choice for every flexible slot.
inline OperatorAssignment random_assignment(Rng& rng, const Formula& f) {
  OperatorAssignment out;
  for (auto id : f.flexible_slots()) {
    const bool first = rng.uniform() < 0.5;
    out[id] = f.node(id).op == Op::TempX ? (first ? Op::Always : Op::Eventually) : (first ? Op::Forall : Op::Exists);
  }
  return out;
}

}  // namespace wgstl::fixtures

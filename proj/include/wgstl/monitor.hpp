#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/graph.hpp"

namespace wgstl {

// Orders a name-keyed predicate list to match formula.predicates().
inline std::vector<Predicate> resolve_predicates(const Formula& f, std::span<const Predicate> preds) {
  std::vector<Predicate> out;
  for (const auto& decl : f.predicates()) {
    auto it = std::find_if(preds.begin(), preds.end(), [&](const Predicate& p) { return p.name == decl.name; });
    if (it == preds.end()) throw ValidationError("no coefficients for predicate '" + decl.name + "'");
    out.push_back(*it);
  }
  return out;
}

inline double eval_predicate(const Predicate& p, std::span<const double> x) {
  double s = -p.c;
  for (std::size_t j = 0; j < x.size(); ++j) s += p.a[j] * x[j];
  return s;
}

namespace detail {

// Checks shared by the crisp and smooth evaluators.
inline void check_evaluable(const Trajectory& traj, const Graph& g, NodeIndex v, std::size_t k, const Formula& f,
                            std::span<const Predicate> preds) {
  if (f.size() == 0) throw ValidationError("empty formula");
  if (traj.node_count() != g.size()) throw ValidationError("trajectory node count does not match graph");
  if (v >= g.size()) throw ValidationError("evaluation node out of range");
  if (k + f.required_horizon() > traj.horizon()) {
    throw ValidationError("time index " + std::to_string(k + f.required_horizon()) + " beyond horizon " +
                          std::to_string(traj.horizon()));
  }
  if (preds.size() != f.predicates().size()) throw ValidationError("predicate table does not match formula");
  for (const auto& p : preds) {
    if (p.a.size() != traj.dim()) {
      throw ValidationError("predicate '" + p.name + "' has " + std::to_string(p.a.size()) +
                            " coefficients, samples have " + std::to_string(traj.dim()) + " dimensions");
    }
  }
}

[[noreturn]] inline void no_neighbors(const Graph& g, NodeIndex v) {
  throw ValidationError("graph quantifier at node '" + g.name(v) + "' which has no neighbors");
}

class CrispEvaluator {
 public:
  CrispEvaluator(const Trajectory& t, const Graph& g, const Formula& f, std::span<const Predicate> p)
      : traj_(t), graph_(g), f_(f), preds_(p) {}

  double robustness(std::size_t id, NodeIndex v, std::size_t k) const {
    const auto& n = f_.node(id);
    switch (n.op) {
      case Op::Pred: return eval_predicate(preds_[n.predicate], traj_.row(v, k));
      case Op::Not: return -robustness(n.children[0], v, k);
      case Op::And:
        return std::min(robustness(n.children[0], v, k), robustness(n.children[1], v, k));
      case Op::Or:
        return std::max(robustness(n.children[0], v, k), robustness(n.children[1], v, k));
      case Op::Always:
      case Op::Eventually: {
        const bool all = n.op == Op::Always;
        double acc = all ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        for (std::size_t t = k + n.lo; t <= k + n.hi; ++t) {
          const double r = robustness(n.children[0], v, t);
          acc = all ? std::min(acc, r) : std::max(acc, r);
        }
        return acc;
      }
      case Op::Forall:
      case Op::Exists: {
        const auto nbrs = graph_.neighbors(v);
        if (nbrs.empty()) no_neighbors(graph_, v);
        const bool all = n.op == Op::Forall;
        double acc = all ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        for (auto u : nbrs) {
          const double r = robustness(n.children[0], u, k);
          acc = all ? std::min(acc, r) : std::max(acc, r);
        }
        return acc;
      }
      case Op::TempX:
      case Op::GraphX: break;
    }
    throw ValidationError("formula has undetermined operators; harden it first");
  }

  bool satisfied(std::size_t id, NodeIndex v, std::size_t k) const {
    const auto& n = f_.node(id);
    switch (n.op) {
      case Op::Pred: return eval_predicate(preds_[n.predicate], traj_.row(v, k)) > 0.0;
      case Op::Not: return !satisfied(n.children[0], v, k);
      case Op::And: return satisfied(n.children[0], v, k) && satisfied(n.children[1], v, k);
      case Op::Or: return satisfied(n.children[0], v, k) || satisfied(n.children[1], v, k);
      case Op::Always:
      case Op::Eventually: {
        const bool all = n.op == Op::Always;
        for (std::size_t t = k + n.lo; t <= k + n.hi; ++t) {
          if (satisfied(n.children[0], v, t) != all) return !all;
        }
        return all;
      }
      case Op::Forall:
      case Op::Exists: {
        const auto nbrs = graph_.neighbors(v);
        if (nbrs.empty()) no_neighbors(graph_, v);
        const bool all = n.op == Op::Forall;
        for (auto u : nbrs) {
          if (satisfied(n.children[0], u, k) != all) return !all;
        }
        return all;
      }
      case Op::TempX:
      case Op::GraphX: break;
    }
    throw ValidationError("formula has undetermined operators; harden it first");
  }

 private:
  const Trajectory& traj_;
  const Graph& graph_;
  const Formula& f_;
  std::span<const Predicate> preds_;
};

}  // namespace detail

// Boolean satisfaction of a hardened formula at (v, k). `preds` is aligned
// with f.predicates() (see resolve_predicates); importance weights play no
// role here.
inline bool boolean_sat(const Trajectory& traj, const Graph& g, NodeIndex v, std::size_t k, const Formula& f,
                        std::span<const Predicate> preds) {
  detail::check_evaluable(traj, g, v, k, f, preds);
  return detail::CrispEvaluator(traj, g, f, preds).satisfied(0, v, k);
}

// Min/max robustness: and/always/forall take the minimum, or/eventually/exists
// the maximum, not negates.
inline double crisp_robustness(const Trajectory& traj, const Graph& g, NodeIndex v, std::size_t k, const Formula& f,
                               std::span<const Predicate> preds) {
  detail::check_evaluable(traj, g, v, k, f, preds);
  return detail::CrispEvaluator(traj, g, f, preds).robustness(0, v, k);
}

}  // namespace wgstl

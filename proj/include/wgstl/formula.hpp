#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wgstl/error.hpp"

namespace wgstl {

enum class Op {
  Pred,
  Not,
  And,
  Or,
  Always,
  Eventually,
  TempX,  // temporal operator whose kind is learned
  Forall,
  Exists,
  GraphX,  // neighbor quantifier whose kind is learned
};

constexpr bool is_temporal(Op op) { return op == Op::Always || op == Op::Eventually || op == Op::TempX; }
constexpr bool is_graph(Op op) { return op == Op::Forall || op == Op::Exists || op == Op::GraphX; }
constexpr bool is_flexible(Op op) { return op == Op::TempX || op == Op::GraphX; }
constexpr bool is_connective(Op op) { return op == Op::And || op == Op::Or; }

// Operators that aggregate with softmin (+1) resolve to min in the crisp
// limit; softmax (-1) ones to max.
constexpr double selection_sign(Op op) {
  switch (op) {
    case Op::And:
    case Op::Always:
    case Op::Forall: return 1.0;
    case Op::Or:
    case Op::Eventually:
    case Op::Exists: return -1.0;
    default: return 0.0;
  }
}

inline std::string_view keyword(Op op) {
  switch (op) {
    case Op::Pred: return "pred";
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Always: return "always";
    case Op::Eventually: return "eventually";
    case Op::TempX: return "tempX";
    case Op::Forall: return "forall";
    case Op::Exists: return "exists";
    case Op::GraphX: return "graphX";
  }
  return "?";
}

inline std::optional<Op> op_from_keyword(std::string_view s) {
  for (Op op : {Op::Pred, Op::Not, Op::And, Op::Or, Op::Always, Op::Eventually, Op::TempX, Op::Forall,
                Op::Exists, Op::GraphX}) {
    if (keyword(op) == s) return op;
  }
  return std::nullopt;
}

struct FormulaNode {
  Op op = Op::Pred;
  // Temporal interval [lo, hi]; unused by other kinds.
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::vector<std::size_t> children;
  // Index into Formula::predicates() for Op::Pred.
  std::size_t predicate = 0;

  bool operator==(const FormulaNode&) const = default;
};

struct PredicateDecl {
  std::string name;
  // Declared dimension count, if the structure file states one.
  std::optional<std::size_t> dims;

  bool operator==(const PredicateDecl&) const = default;
};

// Map from flexible node id to the concrete operator picked for it.
using OperatorAssignment = std::map<std::size_t, Op>;

// Formula (template) AST stored as a preorder arena: node 0 is the root and
// node ids double as stable parameter addresses. Predicates with the same
// name share one declaration and therefore one set of coefficients.
class Formula {
 public:
  Formula() = default;

  const std::vector<FormulaNode>& nodes() const noexcept { return nodes_; }
  const FormulaNode& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<PredicateDecl>& predicates() const noexcept { return predicates_; }

  std::vector<std::size_t> flexible_slots() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (is_flexible(nodes_[i].op)) out.push_back(i);
    }
    return out;
  }

  std::size_t count_if(bool (*pred)(Op)) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [pred](const FormulaNode& n) { return pred(n.op); }));
  }

  bool is_hardened() const { return flexible_slots().empty(); }

  // Latest time step touched when the formula is evaluated at step 0.
  std::size_t required_horizon() const { return nodes_.empty() ? 0 : reach(0); }

  void check_horizon(std::size_t horizon) const {
    if (required_horizon() > horizon) {
      throw ValidationError("formula reaches time step " + std::to_string(required_horizon()) +
                            " but samples have horizon " + std::to_string(horizon));
    }
  }

  // At least one temporal and one neighbor operator.
  void check_structure() const {
    if (count_if(is_temporal) == 0 || count_if(is_graph) == 0) {
      throw ValidationError("structure needs at least one temporal operator and one graph operator");
    }
  }

  Formula harden(const OperatorAssignment& assignment) const {
    const auto slots = flexible_slots();
    for (const auto& [id, op] : assignment) {
      if (std::find(slots.begin(), slots.end(), id) == slots.end()) {
        throw ValidationError("assignment names node " + std::to_string(id) + " which is not a flexible slot");
      }
    }
    Formula out = *this;
    for (auto id : slots) {
      auto it = assignment.find(id);
      if (it == assignment.end()) {
        throw ValidationError("assignment does not cover flexible node " + std::to_string(id));
      }
      const Op want = it->second;
      const bool ok = nodes_[id].op == Op::TempX ? (want == Op::Always || want == Op::Eventually)
                                                 : (want == Op::Forall || want == Op::Exists);
      if (!ok) {
        throw ValidationError("operator '" + std::string(keyword(want)) + "' does not fit flexible node " +
                              std::to_string(id));
      }
      out.nodes_[id].op = want;
    }
    return out;
  }

  bool operator==(const Formula&) const = default;

  // Construction helpers used by the parser and by generators.
  std::size_t add_node(FormulaNode n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }
  FormulaNode& mutable_node(std::size_t id) { return nodes_.at(id); }

  std::size_t intern_predicate(const std::string& name) {
    for (std::size_t i = 0; i < predicates_.size(); ++i) {
      if (predicates_[i].name == name) return i;
    }
    predicates_.push_back({name, std::nullopt});
    return predicates_.size() - 1;
  }
  std::vector<PredicateDecl>& mutable_predicates() { return predicates_; }

 private:
  std::size_t reach(std::size_t id) const {
    const auto& n = nodes_[id];
    std::size_t below = 0;
    for (auto c : n.children) below = std::max(below, reach(c));
    return is_temporal(n.op) ? n.hi + below : below;
  }

  std::vector<FormulaNode> nodes_;
  std::vector<PredicateDecl> predicates_;
};

// Linear predicate a . x - c > 0 over one node's d-vector.
struct Predicate {
  std::string name;
  std::vector<double> a;
  double c = 0.0;

  bool operator==(const Predicate&) const = default;
};

}  // namespace wgstl

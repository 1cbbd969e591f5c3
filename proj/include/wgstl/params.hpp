#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/graph.hpp"
#include "wgstl/random.hpp"

namespace wgstl {

// Floor added to |raw| so mapped importance weights stay strictly positive.
inline constexpr double kWeightFloor = 1e-6;

inline double positive_weight(double raw) { return std::abs(raw) + kWeightFloor; }
inline double positive_weight_slope(double raw) { return static_cast<double>((raw > 0.0) - (raw < 0.0)); }

enum class SlotKind {
  PredicateCoef,    // a, length d
  PredicateOffset,  // c, length 1
  ChildWeights,     // and/or, one per child
  TimeWeights,      // temporal operator, one per step of the interval
  NeighborWeights,  // graph operator at one evaluation node, one per neighbor
  OperatorSelect,   // b of a flexible operator, length 1
};

inline const char* slot_kind_name(SlotKind k) {
  switch (k) {
    case SlotKind::PredicateCoef: return "predicate_coef";
    case SlotKind::PredicateOffset: return "predicate_offset";
    case SlotKind::ChildWeights: return "child_weights";
    case SlotKind::TimeWeights: return "time_weights";
    case SlotKind::NeighborWeights: return "neighbor_weights";
    case SlotKind::OperatorSelect: return "operator_select";
  }
  return "?";
}

inline bool is_weight_slot(SlotKind k) {
  return k == SlotKind::ChildWeights || k == SlotKind::TimeWeights || k == SlotKind::NeighborWeights;
}

struct ParamSlot {
  std::string id;
  SlotKind kind = SlotKind::PredicateCoef;
  std::size_t owner = 0;           // formula node id, or predicate index for predicate slots
  std::optional<std::string> at;   // evaluation node, neighbor weights only
  std::vector<std::string> labels; // neighbor names, neighbor weights only
  std::size_t offset = 0;
  std::size_t size = 0;

  bool operator==(const ParamSlot&) const = default;
};

struct ParamInit {
  double weight = 0.5;
  double offset = 0.0;
  double select = 0.0;
  // Predicate coefficients start uniform in [-coef_scale, coef_scale].
  double coef_scale = 0.1;
  std::uint64_t seed = 0;
};

// Every trainable scalar of a formula instance, in one flat vector addressed
// through named slots. Slot layout depends on the formula, the graph and the
// root node (neighbor weight vectors exist per evaluation node).
class ParamStore {
 public:
  ParamStore() = default;

  static ParamStore create(const Formula& f, const Graph& g, const std::string& root, std::size_t dim,
                           const ParamInit& init = {}) {
    ParamStore ps;
    const NodeIndex root_index = g.index(root);
    Rng rng(init.seed);
    for (std::size_t i = 0; i < f.predicates().size(); ++i) {
      const auto& decl = f.predicates()[i];
      if (decl.dims && *decl.dims != dim) {
        throw ValidationError("predicate '" + decl.name + "' declares " + std::to_string(*decl.dims) +
                              " dims, data has " + std::to_string(dim));
      }
      auto& a = ps.add({"pred:" + decl.name + ":a", SlotKind::PredicateCoef, i, {}, {}, 0, dim});
      for (std::size_t j = 0; j < dim; ++j) ps.raw_[a.offset + j] = rng.uniform(-init.coef_scale, init.coef_scale);
      auto& c = ps.add({"pred:" + decl.name + ":c", SlotKind::PredicateOffset, i, {}, {}, 0, 1});
      ps.raw_[c.offset] = init.offset;
    }

    // Nodes at which each formula node can be evaluated, starting from the root.
    std::vector<std::set<NodeIndex>> where(f.size());
    if (f.size() > 0) where[0] = {root_index};
    for (std::size_t id = 0; id < f.size(); ++id) {
      const auto& n = f.node(id);
      for (auto c : n.children) {
        if (is_graph(n.op)) {
          for (auto v : where[id]) {
            for (auto u : g.neighbors(v)) where[c].insert(u);
          }
        } else {
          where[c].insert(where[id].begin(), where[id].end());
        }
      }
    }

    for (std::size_t id = 0; id < f.size(); ++id) {
      const auto& n = f.node(id);
      const std::string prefix = "n" + std::to_string(id) + ":";
      if (is_connective(n.op)) {
        ps.fill(ps.add({prefix + "w", SlotKind::ChildWeights, id, {}, {}, 0, n.children.size()}), init.weight);
      } else if (is_temporal(n.op)) {
        ps.fill(ps.add({prefix + "omega", SlotKind::TimeWeights, id, {}, {}, 0, n.hi - n.lo + 1}), init.weight);
      } else if (is_graph(n.op)) {
        for (auto v : where[id]) {
          const auto nbrs = g.neighbors(v);
          if (nbrs.empty()) continue;
          std::vector<std::string> labels;
          for (auto u : nbrs) labels.push_back(g.name(u));
          ps.fill(ps.add({prefix + "W@" + g.name(v), SlotKind::NeighborWeights, id, g.name(v), std::move(labels), 0,
                          nbrs.size()}),
                  init.weight);
        }
      }
      if (is_flexible(n.op)) {
        ps.fill(ps.add({prefix + "b", SlotKind::OperatorSelect, id, {}, {}, 0, 1}), init.select);
      }
    }
    return ps;
  }

  std::size_t size() const noexcept { return raw_.size(); }
  const std::vector<double>& raw() const noexcept { return raw_; }
  std::vector<double>& raw() noexcept { return raw_; }
  const std::vector<ParamSlot>& slots() const noexcept { return slots_; }

  const ParamSlot* find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &slots_[it->second];
  }

  const ParamSlot& slot(const std::string& id) const {
    const auto* s = find(id);
    if (!s) throw ValidationError("no parameter slot '" + id + "'");
    return *s;
  }

  std::span<const double> values(const ParamSlot& s) const { return {raw_.data() + s.offset, s.size}; }
  std::span<double> values(const ParamSlot& s) { return {raw_.data() + s.offset, s.size}; }

  // Mapped positive weights |raw| + floor.
  std::vector<double> effective(const ParamSlot& s) const {
    std::vector<double> out;
    for (double x : values(s)) out.push_back(positive_weight(x));
    return out;
  }

  // Mapped weights divided by their group sum.
  std::vector<double> normalized(const ParamSlot& s) const {
    auto w = effective(s);
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    return w;
  }

  const ParamSlot* predicate_coef(std::size_t pred) const { return lookup(pred_a_, pred); }
  const ParamSlot* predicate_offset(std::size_t pred) const { return lookup(pred_c_, pred); }
  const ParamSlot* child_weights(std::size_t node) const { return lookup(child_w_, node); }
  const ParamSlot* time_weights(std::size_t node) const { return lookup(time_w_, node); }
  const ParamSlot* operator_select(std::size_t node) const { return lookup(select_, node); }
  const ParamSlot* neighbor_weights(std::size_t node, const std::string& at) const {
    auto it = neighbor_w_.find({node, at});
    return it == neighbor_w_.end() ? nullptr : &slots_[it->second];
  }

  // Predicates in formula order.
  std::vector<Predicate> predicates(const Formula& f) const {
    std::vector<Predicate> out;
    for (std::size_t i = 0; i < f.predicates().size(); ++i) {
      const auto* a = predicate_coef(i);
      const auto* c = predicate_offset(i);
      if (!a || !c) throw ValidationError("missing parameters for predicate '" + f.predicates()[i].name + "'");
      auto av = values(*a);
      out.push_back({f.predicates()[i].name, {av.begin(), av.end()}, values(*c)[0]});
    }
    return out;
  }

  void set_predicate(std::size_t pred, const Predicate& p) {
    const auto* a = predicate_coef(pred);
    const auto* c = predicate_offset(pred);
    if (!a || !c || a->size != p.a.size()) throw ValidationError("predicate shape mismatch for '" + p.name + "'");
    std::copy(p.a.begin(), p.a.end(), raw_.begin() + static_cast<std::ptrdiff_t>(a->offset));
    raw_[c->offset] = p.c;
  }

  // Same slots, fresh raw values; for rebuilding from a file.
  static ParamStore from_slots(std::vector<ParamSlot> slots, std::vector<double> raw) {
    ParamStore ps;
    std::size_t offset = 0;
    for (auto& s : slots) {
      s.offset = offset;
      offset += s.size;
      ps.index(std::move(s));
    }
    if (raw.size() != offset) throw ValidationError("parameter vector length does not match slot layout");
    ps.raw_ = std::move(raw);
    return ps;
  }

  // Keeps only slots whose id passes `keep`.
  template <typename Pred>
  ParamStore filtered(Pred keep) const {
    std::vector<ParamSlot> slots;
    std::vector<double> raw;
    for (const auto& s : slots_) {
      if (!keep(s)) continue;
      slots.push_back(s);
      auto v = values(s);
      raw.insert(raw.end(), v.begin(), v.end());
    }
    return from_slots(std::move(slots), std::move(raw));
  }

  bool operator==(const ParamStore& o) const { return slots_ == o.slots_ && raw_ == o.raw_; }

 private:
  ParamSlot& add(ParamSlot s) {
    s.offset = raw_.size();
    raw_.resize(raw_.size() + s.size, 0.0);
    return index(std::move(s));
  }

  ParamSlot& index(ParamSlot s) {
    const std::size_t at = slots_.size();
    if (!by_id_.emplace(s.id, at).second) throw ValidationError("duplicate parameter slot '" + s.id + "'");
    switch (s.kind) {
      case SlotKind::PredicateCoef: pred_a_[s.owner] = at; break;
      case SlotKind::PredicateOffset: pred_c_[s.owner] = at; break;
      case SlotKind::ChildWeights: child_w_[s.owner] = at; break;
      case SlotKind::TimeWeights: time_w_[s.owner] = at; break;
      case SlotKind::NeighborWeights:
        if (!s.at) throw ValidationError("neighbor weight slot '" + s.id + "' lacks its node");
        neighbor_w_[{s.owner, *s.at}] = at;
        break;
      case SlotKind::OperatorSelect: select_[s.owner] = at; break;
    }
    slots_.push_back(std::move(s));
    return slots_.back();
  }

  void fill(const ParamSlot& s, double v) {
    std::fill_n(raw_.begin() + static_cast<std::ptrdiff_t>(s.offset), s.size, v);
  }

  const ParamSlot* lookup(const std::map<std::size_t, std::size_t>& m, std::size_t key) const {
    auto it = m.find(key);
    return it == m.end() ? nullptr : &slots_[it->second];
  }

  std::vector<double> raw_;
  std::vector<ParamSlot> slots_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::size_t, std::size_t> pred_a_, pred_c_, child_w_, time_w_, select_;
  std::map<std::pair<std::size_t, std::string>, std::size_t> neighbor_w_;
};

}  // namespace wgstl

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/graph.hpp"
#include "wgstl/monitor.hpp"
#include "wgstl/params.hpp"
#include "wgstl/soft.hpp"

namespace wgstl {

inline constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();

// One evaluated (formula node, graph node, time step) instance.
struct TraceEntry {
  std::size_t node = 0;
  NodeIndex v = 0;
  std::size_t k = 0;
  double value = 0.0;
  std::vector<std::size_t> inputs;  // entry indices of the aggregated children
  std::size_t weight_slot = kNoSlot;
  std::size_t select_slot = kNoSlot;  // set when b is a trainable parameter
  double b = 0.0;
  std::vector<double> mix;
};

// Record of one forward pass. Children always precede their parents, so the
// last entry is the root and a reverse sweep visits parents first.
struct EvalTrace {
  std::vector<TraceEntry> entries;
  const Formula* formula = nullptr;
  const Trajectory* trajectory = nullptr;
  double sigma = 1.0;
  std::size_t param_count = 0;
  std::size_t slot_count = 0;

  double value() const { return entries.back().value; }
};

namespace detail {

class SmoothEvaluator {
 public:
  SmoothEvaluator(const Formula& f, const ParamStore& ps, const Trajectory& t, const Graph& g,
                  std::span<const Predicate> preds, double sigma, EvalTrace& trace)
      : f_(f), ps_(ps), traj_(t), graph_(g), preds_(preds), sigma_(sigma), trace_(trace) {}

  std::size_t eval(std::size_t id, NodeIndex v, std::size_t k) {
    const auto& n = f_.node(id);
    TraceEntry e;
    e.node = id;
    e.v = v;
    e.k = k;
    switch (n.op) {
      case Op::Pred:
        e.value = eval_predicate(preds_[n.predicate], traj_.row(v, k));
        break;
      case Op::Not: {
        const auto c = eval(n.children[0], v, k);
        e.inputs = {c};
        e.value = -trace_.entries[c].value;
        break;
      }
      case Op::And:
      case Op::Or:
        for (auto c : n.children) e.inputs.push_back(eval(c, v, k));
        aggregate(e, n, slot_of(ps_.child_weights(id), id, "child"));
        break;
      case Op::Always:
      case Op::Eventually:
      case Op::TempX:
        for (std::size_t t = k + n.lo; t <= k + n.hi; ++t) e.inputs.push_back(eval(n.children[0], v, t));
        aggregate(e, n, slot_of(ps_.time_weights(id), id, "time"));
        break;
      case Op::Forall:
      case Op::Exists:
      case Op::GraphX: {
        const auto nbrs = graph_.neighbors(v);
        if (nbrs.empty()) no_neighbors(graph_, v);
        for (auto u : nbrs) e.inputs.push_back(eval(n.children[0], u, k));
        aggregate(e, n, slot_of(ps_.neighbor_weights(id, graph_.name(v)), id, "neighbor"));
        break;
      }
    }
    trace_.entries.push_back(std::move(e));
    return trace_.entries.size() - 1;
  }

 private:
  std::size_t slot_of(const ParamSlot* s, std::size_t id, const char* what) {
    if (!s) throw ValidationError(std::string("no ") + what + " weights for formula node " + std::to_string(id));
    return static_cast<std::size_t>(s - ps_.slots().data());
  }

  void aggregate(TraceEntry& e, const FormulaNode& n, std::size_t slot) {
    const auto& s = ps_.slots()[slot];
    if (s.size != e.inputs.size()) throw ValidationError("weight slot '" + s.id + "' has the wrong length");
    e.weight_slot = slot;
    if (is_flexible(n.op)) {
      const ParamSlot* b = ps_.operator_select(e.node);
      if (!b) throw ValidationError("no operator selection coefficient for formula node " + std::to_string(e.node));
      e.select_slot = static_cast<std::size_t>(b - ps_.slots().data());
      e.b = ps_.values(*b)[0];
    } else {
      e.b = selection_sign(n.op);
    }
    r_.clear();
    for (auto i : e.inputs) r_.push_back(trace_.entries[i].value);
    w_ = ps_.effective(s);
    auto agg = soft_aggregate_detail(r_, w_, e.b, sigma_);
    e.value = agg.value;
    e.mix = std::move(agg.mix);
  }

  const Formula& f_;
  const ParamStore& ps_;
  const Trajectory& traj_;
  const Graph& graph_;
  std::span<const Predicate> preds_;
  double sigma_;
  EvalTrace& trace_;
  std::vector<double> r_, w_;
};

}  // namespace detail

// Weighted smooth robustness of `f` at (root, 0). Flexible operators use
// their trainable selection coefficient b; fixed ones use b = +1 (and,
// always, forall) or b = -1 (or, eventually, exists).
inline EvalTrace forward(const Formula& f, const ParamStore& ps, const Trajectory& traj, const Graph& g,
                         NodeIndex root, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  const auto preds = ps.predicates(f);
  detail::check_evaluable(traj, g, root, 0, f, preds);
  EvalTrace trace;
  trace.formula = &f;
  trace.trajectory = &traj;
  trace.sigma = sigma;
  trace.param_count = ps.size();
  trace.slot_count = ps.slots().size();
  detail::SmoothEvaluator(f, ps, traj, g, preds, sigma, trace).eval(0, root, 0);
  return trace;
}

// Adds seed * d(trace.value())/d(raw) into `grad` (length ps.size()).
inline void backward(const EvalTrace& trace, const ParamStore& ps, double seed, std::vector<double>& grad) {
  if (trace.param_count != ps.size() || trace.slot_count != ps.slots().size() || trace.entries.empty() ||
      trace.formula == nullptr) {
    throw ValidationError("trace was not produced with this parameter store");
  }
  if (grad.size() != ps.size()) throw ValidationError("gradient buffer has the wrong length");
  const Formula& f = *trace.formula;
  const auto& raw = ps.raw();
  std::vector<double> adj(trace.entries.size(), 0.0);
  adj.back() = seed;
  std::vector<double> r, w;
  for (std::size_t i = trace.entries.size(); i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const auto& e = trace.entries[i];
    const auto& n = f.node(e.node);
    if (n.op == Op::Pred) {
      const auto& coef = *ps.predicate_coef(n.predicate);
      const auto& off = *ps.predicate_offset(n.predicate);
      const auto x = trace.trajectory->row(e.v, e.k);
      for (std::size_t j = 0; j < x.size(); ++j) grad[coef.offset + j] += a * x[j];
      grad[off.offset] -= a;
      continue;
    }
    if (n.op == Op::Not) {
      adj[e.inputs[0]] -= a;
      continue;
    }
    const auto& slot = ps.slots()[e.weight_slot];
    r.clear();
    for (auto in : e.inputs) r.push_back(trace.entries[in].value);
    w = ps.effective(slot);
    const SoftAggregate fwd{e.value, e.mix};
    const auto g = soft_aggregate_grad(r, w, e.b, trace.sigma, fwd);
    for (std::size_t m = 0; m < e.inputs.size(); ++m) {
      adj[e.inputs[m]] += a * g.d_r[m];
      grad[slot.offset + m] += a * g.d_w[m] * positive_weight_slope(raw[slot.offset + m]);
    }
    if (e.select_slot != kNoSlot) grad[ps.slots()[e.select_slot].offset] += a * g.d_b;
  }
}

inline std::vector<double> backward(const EvalTrace& trace, const ParamStore& ps) {
  std::vector<double> grad(ps.size(), 0.0);
  backward(trace, ps, 1.0, grad);
  return grad;
}

// Gradient regrouped by slot id.
inline std::map<std::string, std::vector<double>> gradient_by_slot(const ParamStore& ps,
                                                                   const std::vector<double>& grad) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& s : ps.slots()) {
    out[s.id] = {grad.begin() + static_cast<std::ptrdiff_t>(s.offset),
                 grad.begin() + static_cast<std::ptrdiff_t>(s.offset + s.size)};
  }
  return out;
}

inline double smooth_robustness(const Formula& f, const ParamStore& ps, const Trajectory& traj, const Graph& g,
                                NodeIndex root, double sigma) {
  return forward(f, ps, traj, g, root, sigma).value();
}

}  // namespace wgstl

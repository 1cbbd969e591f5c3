#pragma once

#include <string>
#include <vector>

#include "wgstl/engine.hpp"
#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/graph.hpp"
#include "wgstl/params.hpp"
#include "wgstl/trainer.hpp"

namespace wgstl {

// A learned classifier: the structure it was trained from, the operators
// chosen for its flexible slots, and the fitted parameters of the hardened
// formula, evaluated at `root`.
struct TrainedModel {
  Formula structure;
  OperatorAssignment assignment;
  std::string root;
  std::vector<std::string> dim_names;
  ParamStore params;
  TrainConfig config;
  TrainingLog log;

  Formula formula() const { return structure.harden(assignment); }

  bool operator==(const TrainedModel& o) const {
    return structure == o.structure && assignment == o.assignment && root == o.root && dim_names == o.dim_names &&
           params == o.params && log == o.log;
  }
};

// Two-step inference: operator selection, then parameter fitting.
inline TrainedModel train(const Dataset& ds, const Formula& structure, const std::string& root,
                          const TrainConfig& cfg) {
  cfg.validate();
  structure.check_structure();
  check_training_data(ds, structure, root);
  TrainedModel m;
  m.structure = structure;
  m.root = root;
  m.dim_names = ds.dim_names;
  m.config = cfg;
  m.assignment = step1_learn_operators(ds, structure, root, cfg, &m.log);
  m.params = step2_learn_parameters(ds, structure, m.assignment, root, cfg, &m.log);
  return m;
}

// Throws unless `ds` matches what the model was trained on: dimension count,
// root node, horizon, and the neighbor lists behind every neighbor weight
// vector.
inline void check_compatible(const TrainedModel& m, const Dataset& ds) {
  if (ds.dim() != m.dim_names.size()) {
    throw ValidationError("dataset has " + std::to_string(ds.dim()) + " dimensions, model expects " +
                          std::to_string(m.dim_names.size()));
  }
  ds.validate();
  if (ds.graph.find(m.root) == Graph::npos) throw ValidationError("root node '" + m.root + "' is not in the graph");
  if (!ds.empty()) m.formula().check_horizon(ds.horizon());
  for (const auto& s : m.params.slots()) {
    if (s.kind != SlotKind::NeighborWeights) continue;
    const auto at = ds.graph.find(*s.at);
    if (at == Graph::npos) throw ValidationError("model refers to node '" + *s.at + "' which is not in the graph");
    if (ds.graph.neighbors(*s.at) != s.labels) {
      throw ValidationError("neighbors of '" + *s.at + "' differ from those the model was trained with");
    }
  }
}

inline double model_robustness(const TrainedModel& m, const Trajectory& traj, const Graph& g) {
  const Formula f = m.formula();
  return smooth_robustness(f, m.params, traj, g, g.index(m.root), m.config.sigma);
}

// +1 when the smooth robustness is >= 0 (ties go to +1), else -1.
inline int classify(const TrainedModel& m, const Trajectory& traj, const Graph& g) {
  if (traj.dim() != m.dim_names.size()) {
    throw ValidationError("sample has " + std::to_string(traj.dim()) + " dimensions, model expects " +
                          std::to_string(m.dim_names.size()));
  }
  return model_robustness(m, traj, g) >= 0.0 ? 1 : -1;
}

// Percentage of samples whose predicted label matches.
inline double evaluate(const TrainedModel& m, const Dataset& ds, std::size_t jobs = 1) {
  if (ds.empty()) throw ValidationError("cannot evaluate on an empty dataset");
  check_compatible(m, ds);
  const Formula f = m.formula();
  const auto r = robustness_all(f, m.params, ds, ds.graph.index(m.root), m.config.sigma, jobs);
  return accuracy_of(r, ds);
}

}  // namespace wgstl

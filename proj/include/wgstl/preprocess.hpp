#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/graph.hpp"
#include "wgstl/random.hpp"

namespace wgstl {

// Replaces every missing (NaN) entry by 0.0.
inline Dataset impute_zeros(Dataset ds) {
  for (auto& s : ds.samples) {
    for (double& x : s.trajectory.raw()) {
      if (std::isnan(x)) x = 0.0;
    }
  }
  return ds;
}

// Label of a window: the value of one dimension at the step right after the
// window, compared against a threshold, at a given node.
struct NextStepDim {
  std::string node;
  std::size_t dim = 0;
  double threshold = 0.0;
};

// Label of a window: inherited from the sample it was cut from.
struct ConstantFromSample {};

using LabelRule = std::variant<ConstantFromSample, NextStepDim>;

// Cuts every trajectory into length-`steps` windows starting at 0, stride,
// 2*stride, ... . With NextStepDim, windows with no following step are dropped.
inline Dataset window(const Dataset& ds, std::size_t steps, std::size_t stride,
                      const LabelRule& rule = ConstantFromSample{}) {
  if (steps == 0) throw ValidationError("window length must be >= 1");
  if (stride == 0) throw ValidationError("window stride must be >= 1");
  Dataset out;
  out.graph = ds.graph;
  out.dim_names = ds.dim_names;
  out.coords = ds.coords;

  const auto* next = std::get_if<NextStepDim>(&rule);
  NodeIndex label_node = Graph::npos;
  if (next) {
    label_node = ds.graph.index(next->node);
    if (next->dim >= ds.dim()) throw ValidationError("label dimension out of range");
  }

  for (const auto& s : ds.samples) {
    const std::size_t len = s.trajectory.length();
    if (steps > len) {
      throw ValidationError("window length " + std::to_string(steps) + " exceeds trajectory length " +
                            std::to_string(len));
    }
    for (std::size_t first = 0; first + steps <= len; first += stride) {
      int label = s.label;
      if (next) {
        if (first + steps >= len) break;
        const double target = s.trajectory.at(label_node, first + steps, next->dim);
        label = target > next->threshold ? 1 : -1;
      }
      out.samples.push_back({s.trajectory.slice(first, steps), label});
    }
  }
  return out;
}

// Seeded shuffle, then the first round(train_fraction * N) samples go to the
// training side.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                         std::uint64_t seed) {
  if (ds.empty()) throw ValidationError("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.size())));
  std::pair<Dataset, Dataset> out;
  for (Dataset* part : {&out.first, &out.second}) {
    part->graph = ds.graph;
    part->dim_names = ds.dim_names;
    part->coords = ds.coords;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).samples.push_back(ds.samples[order[i]]);
  }
  return out;
}

}  // namespace wgstl

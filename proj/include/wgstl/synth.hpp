#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/graph.hpp"
#include "wgstl/monitor.hpp"
#include "wgstl/random.hpp"

namespace wgstl {

struct SynthOptions {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  // Std-dev of Gaussian jitter added to every entry.
  double noise = 0.0;
  // Emitted samples satisfy |crisp robustness| > margin with the right sign.
  double margin = 1.0;
  // Defaults to the formula's required horizon.
  std::optional<std::size_t> horizon;
  // Proposal: per-sample level uniform in [-level_range, level_range] (one per
  // dimension), plus per-entry uniform spread in [-spread, spread].
  double level_range = 3.0;
  double spread = 1.5;
  // Proposals allowed per requested sample before giving up.
  std::size_t attempts_per_sample = 2000;
  std::uint64_t seed = 0;
};

// Rejection-samples labeled trajectories: positives have crisp robustness >
// margin at (root, 0), negatives < -margin. Labels are re-checked by the crisp
// monitor, so a generated set agrees with the formula by construction.
inline Dataset synth_dataset(const Graph& g, const Formula& f, std::span<const Predicate> preds,
                             const std::string& root, const std::vector<std::string>& dim_names,
                             const SynthOptions& opt) {
  if (!f.is_hardened()) throw ValidationError("synthesis needs a formula without undetermined operators");
  if (dim_names.empty()) throw ValidationError("synthesis needs at least one dimension");
  if (!(opt.margin >= 0.0) || !(opt.noise >= 0.0)) throw ValidationError("margin and noise must be >= 0");
  const auto resolved = resolve_predicates(f, preds);
  const NodeIndex r = g.index(root);
  const std::size_t horizon = opt.horizon.value_or(f.required_horizon());
  f.check_horizon(horizon);

  Dataset ds;
  ds.graph = g;
  ds.dim_names = dim_names;
  const std::size_t dim = dim_names.size();
  for (const auto& p : resolved) {
    if (p.a.size() != dim) throw ValidationError("predicate '" + p.name + "' does not match the dimension count");
  }

  Rng rng(opt.seed);
  std::size_t need_pos = opt.n_pos, need_neg = opt.n_neg;
  const std::size_t budget = (opt.n_pos + opt.n_neg) * opt.attempts_per_sample;
  std::vector<double> level(dim);
  for (std::size_t attempt = 0; (need_pos > 0 || need_neg > 0); ++attempt) {
    if (attempt >= budget) {
      throw NumericError("could not generate " + std::to_string(need_pos) + " positive and " +
                         std::to_string(need_neg) + " negative samples within " + std::to_string(budget) +
                         " proposals; margin too large for this formula?");
    }
    Trajectory t(g.size(), horizon, dim);
    for (auto& l : level) l = rng.uniform(-opt.level_range, opt.level_range);
    for (NodeIndex v = 0; v < g.size(); ++v) {
      for (std::size_t k = 0; k <= horizon; ++k) {
        auto row = t.row(v, k);
        for (std::size_t j = 0; j < dim; ++j) {
          row[j] = level[j] + rng.uniform(-opt.spread, opt.spread);
          if (opt.noise > 0.0) row[j] += opt.noise * rng.normal();
        }
      }
    }
    const double rho = crisp_robustness(t, g, r, 0, f, resolved);
    if (rho > opt.margin && need_pos > 0) {
      ds.samples.push_back({std::move(t), 1});
      --need_pos;
    } else if (rho < -opt.margin && need_neg > 0) {
      ds.samples.push_back({std::move(t), -1});
      --need_neg;
    }
  }
  return ds;
}

}  // namespace wgstl

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "wgstl/engine.hpp"
#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/graph.hpp"
#include "wgstl/optim.hpp"
#include "wgstl/params.hpp"
#include "wgstl/random.hpp"

namespace wgstl {

struct TrainConfig {
  double eta = 1.0;
  double sigma = 1.0;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Initial raw value of every importance weight.
  double weight_init = 0.5;
  double coef_init_scale = 0.1;
  // Worker threads for per-sample gradients; results do not depend on it.
  std::size_t jobs = 1;

  void validate() const {
    if (!(eta > 0.0)) throw ValidationError("eta must be positive");
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
    if (batch_size == 0) throw ValidationError("batch size must be >= 1");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
      throw ValidationError("Adam betas must lie in (0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ValidationError("Adam eps must be positive");
    if (!(weight_init != 0.0)) throw ValidationError("weight init must be nonzero");
  }

  AdamOptions adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }

  ParamInit init() const { return {weight_init, 0.0, 0.0, coef_init_scale, seed}; }
};

struct EpochRecord {
  int stage = 0;  // 1: operator selection, 2: parameter fitting
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double best_loss = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

using TrainingLog = std::vector<EpochRecord>;

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Runs `fn(i)` for i in [0, n), split into contiguous chunks over `jobs`
// threads. Callers write results into per-index slots so the merge order
// stays fixed.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&, j] {
      try {
        for (std::size_t i = j * chunk; i < std::min(n, (j + 1) * chunk); ++i) fn(i);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// Smooth robustness of every sample at (root, 0).
inline std::vector<double> robustness_all(const Formula& f, const ParamStore& ps, const Dataset& ds, NodeIndex root,
                                          double sigma, std::size_t jobs = 1) {
  std::vector<double> out(ds.size());
  detail::parallel_for(ds.size(), jobs, [&](std::size_t i) {
    out[i] = smooth_robustness(f, ps, ds.samples[i].trajectory, ds.graph, root, sigma);
  });
  return out;
}

inline double accuracy_of(std::span<const double> r, const Dataset& ds) {
  if (ds.empty()) throw ValidationError("accuracy of an empty dataset is undefined");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int predicted = r[i] >= 0.0 ? 1 : -1;
    if (predicted == ds.samples[i].label) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(ds.size());
}

struct FitResult {
  ParamStore best;
  double best_loss = 0.0;
};

// Mini-batch Adam on the exponential margin loss. Keeps the parameters with
// the lowest full-dataset loss seen (epoch 0 = initial parameters).
inline FitResult fit(const Dataset& ds, const Formula& f, NodeIndex root, ParamStore ps, const TrainConfig& cfg,
                     int stage, TrainingLog& log) {
  std::vector<int> labels;
  for (const auto& s : ds.samples) labels.push_back(s.label);

  auto measure = [&](const ParamStore& p, std::size_t epoch, double best_so_far) {
    const auto r = robustness_all(f, p, ds, root, cfg.sigma, cfg.jobs);
    const auto l = loss(r, labels, cfg.eta);
    if (!std::isfinite(l.value)) {
      throw NumericError("stage " + std::to_string(stage) + " epoch " + std::to_string(epoch) +
                         ": training loss is not finite");
    }
    EpochRecord rec{stage, epoch, l.value, accuracy_of(r, ds), std::min(best_so_far, l.value)};
    log.push_back(rec);
    return l.value;
  };

  FitResult out{ps, measure(ps, 0, INFINITY)};
  if (cfg.epochs == 0) return out;

  Adam adam(ps.size(), cfg.adam());
  Rng rng(detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(stage)));
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> grad(ps.size());
  std::vector<std::vector<double>> per_sample;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      // Per-sample buffers summed in batch order keep the result independent of jobs.
      per_sample.resize(count);
      detail::parallel_for(count, cfg.jobs, [&](std::size_t b) {
        per_sample[b].assign(ps.size(), 0.0);
        const auto& s = ds.samples[order[start + b]];
        const auto trace = forward(f, ps, s.trajectory, ds.graph, root, cfg.sigma);
        backward(trace, ps, sample_loss_slope(trace.value(), s.label, cfg.eta), per_sample[b]);
      });
      for (std::size_t b = 0; b < count; ++b) {
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += per_sample[b][i];
      }
      for (double g : grad) {
        if (!std::isfinite(g)) {
          throw NumericError("stage " + std::to_string(stage) + " epoch " + std::to_string(epoch) +
                             ": gradient is not finite");
        }
      }
      adam.step(ps.raw(), grad);
    }
    const double l = measure(ps, epoch, out.best_loss);
    if (l < out.best_loss) {
      out.best_loss = l;
      out.best = ps;
    }
  }
  return out;
}

inline void check_training_data(const Dataset& ds, const Formula& f, const std::string& root) {
  if (ds.empty()) throw ValidationError("training dataset is empty");
  ds.validate();
  ds.graph.index(root);
  if (ds.count_label(1) == 0 || ds.count_label(-1) == 0) {
    throw ValidationError("training dataset must contain both labels");
  }
  f.check_horizon(ds.horizon());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.samples[i].trajectory.all_finite()) {
      throw ValidationError("sample " + std::to_string(i) + " has missing or non-finite values; impute first");
    }
  }
}

// Step 1: train the relaxed network (flexible operators driven by their
// selection coefficients b, started at 0) jointly with provisional predicate
// and weight parameters; keep only the signs of b.
inline OperatorAssignment step1_learn_operators(const Dataset& ds, const Formula& tmpl, const std::string& root,
                                                const TrainConfig& cfg, TrainingLog* log = nullptr) {
  cfg.validate();
  OperatorAssignment out;
  const auto slots = tmpl.flexible_slots();
  if (slots.empty()) return out;
  check_training_data(ds, tmpl, root);

  TrainingLog local;
  auto ps = ParamStore::create(tmpl, ds.graph, root, ds.dim(), cfg.init());
  const auto fitted = fit(ds, tmpl, ds.graph.index(root), std::move(ps), cfg, 1, log ? *log : local);
  for (auto id : slots) {
    const double b = fitted.best.values(*fitted.best.operator_select(id))[0];
    if (tmpl.node(id).op == Op::TempX) {
      out[id] = b >= 0.0 ? Op::Always : Op::Eventually;
    } else {
      out[id] = b >= 0.0 ? Op::Forall : Op::Exists;
    }
  }
  return out;
}

// Step 2: fit predicates and importance weights with the operators fixed.
inline ParamStore step2_learn_parameters(const Dataset& ds, const Formula& tmpl, const OperatorAssignment& assignment,
                                         const std::string& root, const TrainConfig& cfg,
                                         TrainingLog* log = nullptr) {
  cfg.validate();
  const Formula hardened = tmpl.harden(assignment);
  check_training_data(ds, hardened, root);
  TrainingLog local;
  auto ps = ParamStore::create(hardened, ds.graph, root, ds.dim(), cfg.init());
  return fit(ds, hardened, ds.graph.index(root), std::move(ps), cfg, 2, log ? *log : local).best;
}

}  // namespace wgstl

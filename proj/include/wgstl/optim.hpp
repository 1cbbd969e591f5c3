#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wgstl/error.hpp"

namespace wgstl {

inline constexpr double kLossExponentCap = 700.0;

struct LossValue {
  double value = 0.0;
  // True when some exp(-eta l r) hit the exponent cap.
  bool saturated = false;
};

// exp(-eta * label * r), with the exponent capped so one badly misclassified
// sample cannot overflow the sum.
inline double sample_loss(double r, int label, double eta, bool* saturated = nullptr) {
  double z = -eta * static_cast<double>(label) * r;
  if (z > kLossExponentCap) {
    z = kLossExponentCap;
    if (saturated) *saturated = true;
  }
  return std::exp(z);
}

// d/dr of sample_loss; zero past the cap.
inline double sample_loss_slope(double r, int label, double eta) {
  const double z = -eta * static_cast<double>(label) * r;
  if (z > kLossExponentCap) return 0.0;
  return -eta * static_cast<double>(label) * std::exp(z);
}

// J = sum_i exp(-eta l_i r_i).
inline LossValue loss(std::span<const double> r, std::span<const int> labels, double eta) {
  if (r.size() != labels.size()) throw ValidationError("robustness and label counts differ");
  if (!(eta > 0.0)) throw ValidationError("eta must be positive");
  LossValue out;
  for (std::size_t i = 0; i < r.size(); ++i) out.value += sample_loss(r[i], labels[i], eta, &out.saturated);
  return out;
}

struct AdamOptions {
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction.
class Adam {
 public:
  Adam(std::size_t n, AdamOptions opt) : opt_(opt), m_(n, 0.0), v_(n, 0.0) {
    if (!(opt.beta1 > 0.0 && opt.beta1 < 1.0) || !(opt.beta2 > 0.0 && opt.beta2 < 1.0)) {
      throw ValidationError("Adam betas must lie in (0, 1)");
    }
    if (!(opt.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  }

  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
      throw ValidationError("Adam state and parameter sizes differ");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * grad[i];
      v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= opt_.learning_rate * mhat / (std::sqrt(vhat) + opt_.eps);
    }
  }

  std::size_t steps() const noexcept { return t_; }

 private:
  AdamOptions opt_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace wgstl

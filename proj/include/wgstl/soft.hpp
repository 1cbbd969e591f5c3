#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "wgstl/error.hpp"

namespace wgstl {

// Result of one weighted smooth aggregation. The output is a convex
// combination of the inputs, sum_m p_m r_m, with mixing coefficients
//   p_m = wbar_m s_m / sum_l wbar_l s_l,   s_m = softmax_m(-b r / sigma).
// b = +1 gives the smooth minimum (and / always / forall), b = -1 the smooth
// maximum (or / eventually / exists); any real b interpolates.
struct SoftAggregate {
  double value = 0.0;
  std::vector<double> mix;  // p_m
};

inline void check_aggregate_args(std::span<const double> r, std::span<const double> w, double sigma) {
  if (r.empty()) throw ValidationError("empty aggregation group");
  if (w.size() != r.size()) throw ValidationError("weight and value counts differ");
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  for (double x : w) {
    if (!(x > 0.0)) throw ValidationError("importance weights must be positive");
  }
}

inline SoftAggregate soft_aggregate_detail(std::span<const double> r, std::span<const double> w, double b,
                                           double sigma) {
  check_aggregate_args(r, w, sigma);
  const std::size_t n = r.size();
  SoftAggregate out;
  out.mix.resize(n);
  // Normalizations of w and s cancel in the ratio; work with log(w) - b r / sigma.
  double top = -INFINITY;
  for (std::size_t m = 0; m < n; ++m) {
    out.mix[m] = std::log(w[m]) - b * r[m] / sigma;
    top = std::max(top, out.mix[m]);
  }
  double z = 0.0;
  for (auto& p : out.mix) {
    p = std::exp(p - top);
    z += p;
  }
  for (std::size_t m = 0; m < n; ++m) {
    out.mix[m] /= z;
    out.value += out.mix[m] * r[m];
  }
  // Rounding can push a convex combination a hair outside the hull.
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  out.value = std::clamp(out.value, *lo, *hi);
  return out;
}

inline double soft_aggregate(std::span<const double> r, std::span<const double> w, double b, double sigma) {
  return soft_aggregate_detail(r, w, b, sigma).value;
}

// Partial derivatives of y = soft_aggregate(r, w, b, sigma):
//   dy/dr_m = p_m (1 - b (r_m - y) / sigma)
//   dy/dw_m = p_m (r_m - y) / w_m
//   dy/db   = -(1/sigma) sum_m p_m (r_m - y)^2
struct SoftAggregateGrad {
  std::vector<double> d_r;
  std::vector<double> d_w;
  double d_b = 0.0;
};

inline SoftAggregateGrad soft_aggregate_grad(std::span<const double> r, std::span<const double> w, double b,
                                             double sigma, const SoftAggregate& fwd) {
  const std::size_t n = r.size();
  SoftAggregateGrad g;
  g.d_r.resize(n);
  g.d_w.resize(n);
  const double y = fwd.value;
  for (std::size_t m = 0; m < n; ++m) {
    const double p = fwd.mix[m];
    const double dev = r[m] - y;
    g.d_r[m] = p * (1.0 - b * dev / sigma);
    g.d_w[m] = p * dev / w[m];
    g.d_b -= p * dev * dev / sigma;
  }
  return g;
}

}  // namespace wgstl

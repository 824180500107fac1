#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/rng.hpp"

namespace aoi {

// Discrete distribution of feature transmission times T >= 1 slots.
class ServiceTimeDistribution {
 public:
  // pmf as (value, probability) pairs; values distinct and >= 1
  explicit ServiceTimeDistribution(std::vector<std::pair<int, double>> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.empty()) throw input_error("service distribution: empty pmf");
    std::sort(pmf_.begin(), pmf_.end());
    double sum = 0.0;
    int prev = 0;
    for (auto& [v, p] : pmf_) {
      if (v < 1) throw input_error("service distribution: transmission times must be >= 1 slot");
      if (v == prev) throw input_error("service distribution: duplicate support value");
      if (!(p >= 0.0)) throw input_error("service distribution: negative probability");
      prev = v;
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw input_error("service distribution: pmf does not sum to 1");
    mean_ = 0.0;
    cumulative_.reserve(pmf_.size());
    double c = 0.0;
    for (auto& [v, p] : pmf_) {
      mean_ += static_cast<double>(v) * p;
      c += p;
      cumulative_.push_back(c);
    }
    cumulative_.back() = 1.0;
  }

  const std::vector<std::pair<int, double>>& pmf() const { return pmf_; }
  double mean() const { return mean_; }
  int min_value() const { return pmf_.front().first; }
  int max_value() const { return pmf_.back().first; }

  int sample(Rng& rng) const {
    double u = rng.next_double();
    std::size_t lo = 0, hi = cumulative_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (u < cumulative_[mid])
        hi = mid;
      else
        lo = mid + 1;
    }
    return pmf_[lo].first;
  }

 private:
  std::vector<std::pair<int, double>> pmf_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
};

inline ServiceTimeDistribution service_constant(int t) {
  if (t < 1) throw input_error("constant service: T must be >= 1");
  return ServiceTimeDistribution({{t, 1.0}});
}

// Geometric on {1, 2, ...} with success probability q, truncated at t_max and
// renormalized.
inline ServiceTimeDistribution service_geometric(double q, int t_max) {
  if (!(q > 0.0) || q > 1.0) throw input_error("geometric service: q must be in (0, 1]");
  if (t_max < 1) throw input_error("geometric service: t_max must be >= 1");
  std::vector<std::pair<int, double>> pmf;
  double p = q, total = 0.0;
  for (int k = 1; k <= t_max; ++k) {
    pmf.emplace_back(k, p);
    total += p;
    p *= (1.0 - q);
    if (p == 0.0) break;
  }
  for (auto& [v, pr] : pmf) pr /= total;
  return ServiceTimeDistribution(std::move(pmf));
}

namespace detail {
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace detail

// Discretized log-normal T = ceil(alpha * e^{sigma Z} / E[e^{sigma Z}]) with
// Z standard normal and E[e^{sigma Z}] = e^{sigma^2/2}. Probabilities come
// from normal CDF differences on the ceiling cells; mass beyond t_max must be
// below 1e-6 and is renormalized away.
inline ServiceTimeDistribution service_lognormal_discretized(double alpha, double sigma, int t_max) {
  if (!(alpha > 0.0)) throw input_error("log-normal service: alpha must be > 0");
  if (sigma < 0.0) throw input_error("log-normal service: sigma must be >= 0");
  int min_t = static_cast<int>(std::ceil(alpha));
  if (t_max < min_t) throw input_error("log-normal service: t_max below ceil(alpha)");
  if (sigma == 0.0) return service_constant(min_t);

  // T = k  <=>  Z in ( z(k-1), z(k) ] with z(k) = (ln(k/alpha) + sigma^2/2)/sigma
  auto z_at = [&](int k) { return (std::log(static_cast<double>(k) / alpha) + 0.5 * sigma * sigma) / sigma; };
  std::vector<std::pair<int, double>> pmf;
  double covered = 0.0;
  double prev_cdf = 0.0;
  for (int k = 1; k <= t_max; ++k) {
    double cdf = detail::std_normal_cdf(z_at(k));
    double p = cdf - prev_cdf;
    prev_cdf = cdf;
    if (p > 0.0) pmf.emplace_back(k, p);
    covered = cdf;
  }
  double tail = 1.0 - covered;
  if (tail >= 1e-6)
    throw input_error("log-normal service: truncation mass " + std::to_string(tail) +
                      " at t_max=" + std::to_string(t_max) + " exceeds 1e-6");
  for (auto& [v, p] : pmf) p /= covered;
  return ServiceTimeDistribution(std::move(pmf));
}

}  // namespace aoi

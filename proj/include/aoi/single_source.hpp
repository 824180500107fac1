#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/gittins.hpp"
#include "aoi/penalty.hpp"
#include "aoi/service.hpp"

namespace aoi {

// Smallest waiting time z >= 0 after a delivery with service realization T
// and offset b such that w * gamma(T + b + z) >= beta. The index is constant
// at its plateau beyond the penalty table, so the search is bounded; if even
// the plateau cannot reach beta the threshold is unreachable.
inline int charged_waiting_time(int t, int b, double beta, double weight, const GittinsTable& gittins) {
  if (t < 1) throw input_error("waiting time: service realization must be >= 1");
  if (weight * gittins.sup() < beta)
    throw computation_error("waiting time: threshold exceeds sup of the Gittins index");
  long long a = static_cast<long long>(t) + b;
  int z = 0;
  while (weight * gittins.value(a + z) < beta) ++z;
  return z;
}

inline int waiting_time(int t, int b, double beta, const GittinsTable& gittins) {
  return charged_waiting_time(t, b, beta, 1.0, gittins);
}

struct CycleStatistics {
  double expected_cost;    // E[sum of w*p over one delivery-to-delivery cycle]
  double expected_length;  // E[cycle length in slots]
};

namespace detail {

// Prefix sums of p(k + b): psum[j] = sum_{k=0}^{j-1} p(k+b).
inline std::vector<double> penalty_prefix(const PenaltyCurve& p, int b, std::size_t len) {
  std::vector<double> ps(len + 1, 0.0);
  KahanSum acc;
  for (std::size_t k = 0; k < len; ++k) {
    acc.add(p.value(static_cast<long long>(k) + b));
    ps[k + 1] = acc.sum;
  }
  return ps;
}

}  // namespace detail

// Exact renewal-cycle statistics of the threshold policy: cost
// E[sum_{k=T}^{T+z+T'-1} w*p(k+b)] and length E[z + T'] over independent
// service draws T, T'.
inline CycleStatistics charged_cycle_statistics(const PenaltyCurve& p, const ServiceTimeDistribution& s, int b,
                                                double beta, double weight, const GittinsTable& gittins) {
  const int t_max = s.max_value();
  // z <= delta_max: the index reaches its plateau by then
  std::size_t prefix_len = static_cast<std::size_t>(t_max) * 2 + static_cast<std::size_t>(p.delta_max()) + 2;
  std::vector<double> ps = detail::penalty_prefix(p, b, prefix_len);
  double cost = 0.0, length = 0.0;
  for (const auto& [t1, p1] : s.pmf()) {
    int z = charged_waiting_time(t1, b, beta, weight, gittins);
    double c = 0.0;
    for (const auto& [t2, p2] : s.pmf()) {
      std::size_t hi = static_cast<std::size_t>(t1 + z + t2);
      c += p2 * (ps[hi] - ps[static_cast<std::size_t>(t1)]);
    }
    cost += p1 * weight * c;
    length += p1 * (static_cast<double>(z) + s.mean());
  }
  return {cost, length};
}

inline CycleStatistics cycle_statistics(const PenaltyCurve& p, const ServiceTimeDistribution& s, int b,
                                        double beta, const GittinsTable& gittins) {
  return charged_cycle_statistics(p, s, b, beta, 1.0, gittins);
}

struct ThresholdRoot {
  double beta;
  // True when no beta below w*plateau solves the renewal equation; the
  // never-transmit limit is then optimal and beta saturates at w*plateau.
  bool saturated;
};

// Root of f(beta) = w*cost(beta) + lambda*E[T] - beta*length(beta), bisected
// on [w*min p, w*plateau]. f is decreasing in beta, so the bracket pins the
// unique crossing.
inline ThresholdRoot charged_threshold_root(const PenaltyCurve& p, const ServiceTimeDistribution& s, int b,
                                            double weight, double lambda, const GittinsTable& gittins) {
  const double charge = lambda * s.mean();
  auto f = [&](double beta) {
    CycleStatistics c = charged_cycle_statistics(p, s, b, beta, weight, gittins);
    return c.expected_cost + charge - beta * c.expected_length;
  };
  double lo = weight * p.min_value();
  double hi = weight * gittins.plateau();
  if (hi <= lo) return {hi, false};  // constant penalty
  if (f(hi) > 0.0) return {hi, true};
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++iter) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

// beta_b: the unique root of E[cycle cost] - beta * E[cycle length] = 0.
// Equals the optimal long-run average inference error for offset b.
inline double threshold_root(const PenaltyCurve& p, const ServiceTimeDistribution& s, int b,
                             const GittinsTable& gittins) {
  return charged_threshold_root(p, s, b, 1.0, 0.0, gittins).beta;
}

inline double threshold_root(const PenaltyCurve& p, const ServiceTimeDistribution& s, int b) {
  return threshold_root(p, s, b, gittins_table(p, s));
}

struct BufferOffsetResult {
  int b_star;
  double beta_star;
  std::vector<double> betas;  // beta_b for b = 0..B-1
};

// b* = argmin_b beta_b (ties to the smallest b) and the attained minimum.
inline BufferOffsetResult optimal_buffer_offset(const PenaltyCurve& p, const ServiceTimeDistribution& s, int buffer) {
  if (buffer < 1) throw input_error("optimal buffer offset: B must be >= 1");
  GittinsTable g = gittins_table(p, s);
  BufferOffsetResult r;
  r.betas.reserve(static_cast<std::size_t>(buffer));
  r.b_star = 0;
  r.beta_star = std::numeric_limits<double>::infinity();
  for (int b = 0; b < buffer; ++b) {
    double beta = threshold_root(p, s, b, g);
    r.betas.push_back(beta);
    if (beta < r.beta_star) {
      r.beta_star = beta;
      r.b_star = b;
    }
  }
  return r;
}

struct MdpSolution {
  double gain;               // optimal long-run average cost
  std::vector<int> policy;   // per AoI state: -1 = idle, otherwise offset b
  int sweeps;
};

// Brute-force optimality oracle: relative value iteration on the decision
// process embedded at idle slots. State is the AoI; actions are idle (advance
// one slot) or send-with-offset-b (accrue sum_{k<T} p(delta+k), then jump to
// T+b). Durations differ per action, so the semi-Markov equations are solved
// through the standard uniformization transform with self-loop weight eta.
inline MdpSolution mdp_oracle_average_cost(const PenaltyCurve& p, const ServiceTimeDistribution& s, int buffer,
                                           int delta_truncate) {
  if (buffer < 1) throw input_error("mdp oracle: B must be >= 1");
  if (delta_truncate < 4 * (p.delta_max() + s.max_value()))
    throw input_error("mdp oracle: delta_truncate below 4*(delta_max + T_max)");
  const int n = delta_truncate + 1;
  if (s.max_value() + buffer - 1 > delta_truncate)
    throw input_error("mdp oracle: T_max + B - 1 exceeds delta_truncate");

  // expected lump cost of the send action (independent of b)
  std::vector<double> send_cost(static_cast<std::size_t>(n));
  {
    for (int d = 0; d < n; ++d) {
      double c = 0.0;
      for (const auto& [t, prob] : s.pmf()) {
        double acc = 0.0;
        for (int k = 0; k < t; ++k) acc += p.value(static_cast<long long>(d) + k);
        c += prob * acc;
      }
      send_cost[static_cast<std::size_t>(d)] = c;
    }
  }

  const double eta = 0.5;
  const double et = s.mean();
  const double send_rate = eta / et;        // transformed jump probability of send
  const double idle_rate = eta;             // tau(idle) = 1
  const int anchor = s.min_value();         // recurrent under every stationary policy

  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  std::vector<double> tv(static_cast<std::size_t>(n), 0.0);
  const int max_sweeps = 1000000;
  double gain_scaled = 0.0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    // E[V(T + b)] per offset
    double u_min = std::numeric_limits<double>::infinity();
    for (int b = 0; b < buffer; ++b) {
      double u = 0.0;
      for (const auto& [t, prob] : s.pmf()) u += prob * v[static_cast<std::size_t>(t + b)];
      u_min = std::min(u_min, u);
    }
    double span_lo = std::numeric_limits<double>::infinity();
    double span_hi = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d) {
      const std::size_t i = static_cast<std::size_t>(d);
      double q_idle = idle_rate * (p.value(d) + v[static_cast<std::size_t>(std::min(d + 1, n - 1))]) +
                      (1.0 - idle_rate) * v[i];
      double q_send = send_rate * (send_cost[i] + u_min) + (1.0 - send_rate) * v[i];
      double best = std::min(q_idle, q_send);
      tv[i] = best;
      double diff = best - v[i];
      span_lo = std::min(span_lo, diff);
      span_hi = std::max(span_hi, diff);
    }
    gain_scaled = 0.5 * (span_lo + span_hi);
    double shift = tv[static_cast<std::size_t>(anchor)];
    for (int d = 0; d < n; ++d) v[static_cast<std::size_t>(d)] = tv[static_cast<std::size_t>(d)] - shift;
    if (span_hi - span_lo < 1e-11) {
      // greedy policy at the fixed point; ties resolve toward sending,
      // and toward the smallest offset
      std::vector<int> policy(static_cast<std::size_t>(n), -1);
      double u_min2 = std::numeric_limits<double>::infinity();
      int b_best = 0;
      for (int b = 0; b < buffer; ++b) {
        double ub = 0.0;
        for (const auto& [t, prob] : s.pmf()) ub += prob * v[static_cast<std::size_t>(t + b)];
        if (ub < u_min2 - 1e-12) {
          u_min2 = ub;
          b_best = b;
        }
      }
      for (int d = 0; d < n; ++d) {
        const std::size_t i = static_cast<std::size_t>(d);
        double q_idle = idle_rate * (p.value(d) + v[static_cast<std::size_t>(std::min(d + 1, n - 1))]) +
                        (1.0 - idle_rate) * v[i];
        double q_send = send_rate * (send_cost[i] + u_min2) + (1.0 - send_rate) * v[i];
        policy[i] = (q_send <= q_idle + 1e-12) ? b_best : -1;
      }
      return {gain_scaled / eta, std::move(policy), sweep};
    }
  }
  throw computation_error("mdp oracle: relative value iteration did not converge");
}

}  // namespace aoi

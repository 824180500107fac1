#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/penalty.hpp"
#include "aoi/service.hpp"

namespace aoi {

// E[p(a + T)] for AoI a and service time T ~ S.
inline double expected_penalty_after_service(const PenaltyCurve& p, const ServiceTimeDistribution& s,
                                             long long a) {
  double e = 0.0;
  for (const auto& [t, prob] : s.pmf()) e += prob * p.value(a + t);
  return e;
}

namespace detail {

// Compensated running sum for the long prefix sums inside the index search.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

inline int default_tau_max(const PenaltyCurve& p, const ServiceTimeDistribution& s) {
  return p.delta_max() + s.max_value() + 1;
}

// gamma(delta) = inf over tau >= 1 of the running average of
// h(delta), h(delta+1), ..., where h(a) = E[p(a+T)].  Once a >= delta_max the
// sequence h is constant at the plateau p(delta_max) and the running average
// is monotone toward it, so the infimum over all tau equals the minimum over
// tau <= tau_max taken together with the plateau value.
inline double gittins_from_h(const std::vector<double>& h, std::size_t offset, int tau_max, double plateau) {
  KahanSum acc;
  double best = h[offset];
  for (int tau = 1; tau <= tau_max; ++tau) {
    acc.add(h[offset + static_cast<std::size_t>(tau) - 1]);
    double avg = acc.sum / static_cast<double>(tau);
    if (avg < best) best = avg;
  }
  return std::min(best, plateau);
}

}  // namespace detail

// Gittins index of the AoI bandit with termination delay T ~ S, tabulated for
// delta = 0..delta_cap. Beyond the penalty plateau the index is constant, so
// lookups clamp.
class GittinsTable {
 public:
  GittinsTable(const PenaltyCurve& p, const ServiceTimeDistribution& s, int delta_cap, int tau_max)
      : plateau_(p.last_value()) {
    if (delta_cap < 0) throw input_error("gittins table: delta_cap must be >= 0");
    if (tau_max < detail::default_tau_max(p, s))
      throw input_error("gittins table: tau_max below the safe horizon delta_max + T_max + 1");
    // h(a) = E[p(a+T)] for a = 0..delta_cap + tau_max - 1
    std::size_t need = static_cast<std::size_t>(delta_cap) + static_cast<std::size_t>(tau_max);
    std::vector<double> h(need);
    for (std::size_t a = 0; a < need; ++a)
      h[a] = expected_penalty_after_service(p, s, static_cast<long long>(a));
    values_.resize(static_cast<std::size_t>(delta_cap) + 1);
    for (int d = 0; d <= delta_cap; ++d)
      values_[static_cast<std::size_t>(d)] = detail::gittins_from_h(h, static_cast<std::size_t>(d), tau_max, plateau_);
  }

  int delta_cap() const { return static_cast<int>(values_.size()) - 1; }
  double plateau() const { return plateau_; }

  // sup over all delta; the index never exceeds the plateau value
  double sup() const { return plateau_; }

  double value(long long delta) const {
    if (delta < 0) throw input_error("gittins table: negative delta");
    std::size_t i = static_cast<std::size_t>(delta);
    return i < values_.size() ? values_[i] : plateau_;
  }

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
  double plateau_;
};

// Single-delta evaluation of the index.
inline double gittins_index(const PenaltyCurve& p, const ServiceTimeDistribution& s, long long delta,
                            int tau_max) {
  if (delta < 0) throw input_error("gittins index: delta must be >= 0");
  if (tau_max < detail::default_tau_max(p, s))
    throw input_error("gittins index: tau_max below the safe horizon delta_max + T_max + 1");
  double plateau = p.last_value();
  if (delta >= p.delta_max()) return plateau;
  std::vector<double> h(static_cast<std::size_t>(tau_max));
  for (int k = 0; k < tau_max; ++k) h[static_cast<std::size_t>(k)] = expected_penalty_after_service(p, s, delta + k);
  return detail::gittins_from_h(h, 0, tau_max, plateau);
}

inline double gittins_index(const PenaltyCurve& p, const ServiceTimeDistribution& s, long long delta) {
  return gittins_index(p, s, delta, detail::default_tau_max(p, s));
}

// Tabulate the index for delta = 0..delta_cap (defaults to the penalty's
// delta_max, past which the index is flat).
inline GittinsTable gittins_table(const PenaltyCurve& p, const ServiceTimeDistribution& s, int delta_cap,
                                  int tau_max) {
  return GittinsTable(p, s, delta_cap, tau_max);
}

inline GittinsTable gittins_table(const PenaltyCurve& p, const ServiceTimeDistribution& s) {
  return GittinsTable(p, s, p.delta_max(), detail::default_tau_max(p, s));
}

}  // namespace aoi

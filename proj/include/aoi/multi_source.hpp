#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/gittins.hpp"
#include "aoi/penalty.hpp"
#include "aoi/service.hpp"
#include "aoi/single_source.hpp"

namespace aoi {

// One restless-bandit arm: the (b+1)-th freshest feature of a source.
struct Arm {
  int source;     // source id l
  int offset;     // b_l
  double weight;  // w_l > 0
  PenaltyCurve penalty;
  ServiceTimeDistribution service;
  GittinsTable gittins;

  Arm(int source_id, int offset_b, double w, PenaltyCurve p, ServiceTimeDistribution s)
      : source(source_id),
        offset(offset_b),
        weight(w),
        penalty(std::move(p)),
        service(std::move(s)),
        gittins(gittins_table(penalty, service)) {
    if (!(weight > 0.0)) throw input_error("arm: weight must be > 0");
    if (offset < 0) throw input_error("arm: offset must be >= 0");
  }
};

// z(T, b, delta) = inf{z >= 0 : gamma(T + b + z) >= gamma(delta)}. Always
// finite: the index plateau dominates every index value.
inline int whittle_waiting_time(const Arm& arm, int t, long long delta) {
  if (t < 1) throw input_error("whittle waiting time: service realization must be >= 1");
  if (delta < 0) throw input_error("whittle waiting time: delta must be >= 0");
  const double target = arm.gittins.value(delta);
  long long a = static_cast<long long>(t) + arm.offset;
  int z = 0;
  while (arm.gittins.value(a + z) < target) ++z;
  return z;
}

// Whittle index of the arm at AoI delta:
//   W(delta) = (w/E[T1]) * ( E[z + T2] * gamma(delta)
//                            - E[ sum_{t=T1}^{T1+z+T2-1} p(t + b) ] )
// with independent service draws T1, T2 and z = z(T1, b, delta).
inline double whittle_index(const Arm& arm, long long delta) {
  const auto& pmf = arm.service.pmf();
  const double gamma_delta = arm.gittins.value(delta);
  const int t_max = arm.service.max_value();
  std::size_t prefix_len =
      static_cast<std::size_t>(t_max) * 2 + static_cast<std::size_t>(arm.penalty.delta_max()) + 2;
  std::vector<double> ps = detail::penalty_prefix(arm.penalty, arm.offset, prefix_len);

  double reward = 0.0, cost = 0.0;
  for (const auto& [t1, p1] : pmf) {
    int z = whittle_waiting_time(arm, t1, delta);
    reward += p1 * (static_cast<double>(z) + arm.service.mean());
    double c = 0.0;
    for (const auto& [t2, p2] : pmf)
      c += p2 * (ps[static_cast<std::size_t>(t1 + z + t2)] - ps[static_cast<std::size_t>(t1)]);
    cost += p1 * c;
  }
  return arm.weight / arm.service.mean() * (reward * gamma_delta - cost);
}

// Closed form W(delta) = w * [delta * p(delta+1) - sum_{t=1}^{delta} p(t)] for
// non-decreasing penalties with unit service time.
inline double whittle_special_case(double weight, const PenaltyCurve& p, long long delta) {
  if (!p.nondecreasing())
    throw input_error("whittle special case: penalty must be non-decreasing");
  if (delta < 1) throw input_error("whittle special case: delta must be >= 1");
  double s = 0.0;
  for (long long t = 1; t <= delta; ++t) s += p.value(t);
  return weight * (static_cast<double>(delta) * p.value(delta + 1) - s);
}

// Whittle indices tabulated per arm for delta = 0..delta_cap. The index
// depends on delta only through gamma(delta), which is flat past the penalty
// table, so lookups clamp.
class WhittleTable {
 public:
  WhittleTable(const Arm& arm, int delta_cap) {
    if (delta_cap < 1) throw input_error("whittle table: delta_cap must be >= 1");
    values_.resize(static_cast<std::size_t>(delta_cap) + 1);
    for (int d = 0; d <= delta_cap; ++d) values_[static_cast<std::size_t>(d)] = whittle_index(arm, d);
  }

  double value(long long delta) const {
    if (delta < 0) throw input_error("whittle table: negative delta");
    std::size_t i = static_cast<std::size_t>(delta);
    return i < values_.size() ? values_[i] : values_.back();
  }

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

inline WhittleTable whittle_table(const Arm& arm) { return WhittleTable(arm, arm.penalty.delta_max()); }

struct IndexabilityPoint {
  double lambda;
  double beta_bar;           // optimal per-arm average cost at charge lambda
  bool saturated;            // never-transmit became optimal
  std::vector<char> passive;  // passive set {delta : w*gamma(delta) <= beta_bar}
};

struct IndexabilityReport {
  std::vector<IndexabilityPoint> points;
  bool strictly_increasing;  // beta_bar strictly increasing over the grid
  bool nested;               // passive sets nested along the grid
};

// Evaluates beta_bar(lambda) over a sorted charge grid and checks the two
// indexability signatures: beta_bar strictly increasing, passive sets nested.
inline IndexabilityReport indexability_diagnostic(const Arm& arm, const std::vector<double>& lambda_grid) {
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
    throw input_error("indexability diagnostic: lambda grid must be sorted");
  IndexabilityReport report;
  report.strictly_increasing = true;
  report.nested = true;
  const int delta_cap = arm.penalty.delta_max();
  for (double lambda : lambda_grid) {
    ThresholdRoot root =
        charged_threshold_root(arm.penalty, arm.service, arm.offset, arm.weight, lambda, arm.gittins);
    IndexabilityPoint pt;
    pt.lambda = lambda;
    pt.beta_bar = root.beta;
    pt.saturated = root.saturated;
    pt.passive.resize(static_cast<std::size_t>(delta_cap) + 1);
    for (int d = 0; d <= delta_cap; ++d)
      pt.passive[static_cast<std::size_t>(d)] = arm.weight * arm.gittins.value(d) <= pt.beta_bar ? 1 : 0;
    if (!report.points.empty()) {
      const IndexabilityPoint& prev = report.points.back();
      if (!(pt.beta_bar > prev.beta_bar)) report.strictly_increasing = false;
      for (std::size_t i = 0; i < pt.passive.size(); ++i)
        if (prev.passive[i] && !pt.passive[i]) report.nested = false;
    }
    report.points.push_back(std::move(pt));
  }
  return report;
}

struct ArmState {
  int source;
  int offset;
  double whittle;  // W_{l,b}(current AoI of source l)
};

struct ScheduleDecision {
  int source;
  int offset;
};

// Whittle scheduler decision rule: when the channel is idle and the largest
// index is non-negative, schedule the argmax arm; ties break toward the
// smaller source id, then the smaller offset. Otherwise schedule nothing.
inline std::optional<ScheduleDecision> whittle_decide(const std::vector<ArmState>& arms, bool channel_idle) {
  if (!channel_idle || arms.empty()) return std::nullopt;
  const ArmState* best = nullptr;
  for (const ArmState& a : arms) {
    if (!best || a.whittle > best->whittle ||
        (a.whittle == best->whittle &&
         (a.source < best->source || (a.source == best->source && a.offset < best->offset))))
      best = &a;
  }
  if (best->whittle < 0.0) return std::nullopt;
  return ScheduleDecision{best->source, best->offset};
}

}  // namespace aoi

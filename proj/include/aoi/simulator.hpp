#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/gittins.hpp"
#include "aoi/multi_source.hpp"
#include "aoi/penalty.hpp"
#include "aoi/rng.hpp"
#include "aoi/service.hpp"
#include "aoi/single_source.hpp"

namespace aoi {

// --- policies ---------------------------------------------------------------

struct ZeroWaitPolicy {};  // generate-at-will, submit whenever the channel idles

// Submit the (offset+1)-th freshest feature at the earliest idle slot with
// gamma(AoI) >= beta. The single-source optimum uses a fixed offset with
// beta = beta_b; the buffer-offset optimum uses (b*, beta*).
struct ThresholdPolicy {
  int offset = 0;
  double beta = 0.0;
};

// Generate a feature every `period` slots into a FIFO queue of capacity
// `queue_capacity` (a full queue drops the new feature), serve FCFS.
struct PeriodicPolicy {
  int period = 1;
  int queue_capacity = 1;
};

struct MafZeroWaitPolicy {};   // schedule the freshest feature of the max-age source
struct WhittleGawPolicy {};    // Whittle index over offsets {0}
struct WhittleSfbPolicy {};    // Whittle index over offsets {0..B-1}

using PolicySpec = std::variant<ZeroWaitPolicy, ThresholdPolicy, PeriodicPolicy, MafZeroWaitPolicy,
                                WhittleGawPolicy, WhittleSfbPolicy>;

inline std::string policy_name(const PolicySpec& p) {
  struct V {
    std::string operator()(const ZeroWaitPolicy&) const { return "zero_wait"; }
    std::string operator()(const ThresholdPolicy&) const { return "threshold"; }
    std::string operator()(const PeriodicPolicy&) const { return "periodic"; }
    std::string operator()(const MafZeroWaitPolicy&) const { return "maf_zero_wait"; }
    std::string operator()(const WhittleGawPolicy&) const { return "whittle_gaw"; }
    std::string operator()(const WhittleSfbPolicy&) const { return "whittle_sfb"; }
  };
  return std::visit(V{}, p);
}

// --- configuration ----------------------------------------------------------

struct SourceSpec {
  PenaltyCurve penalty;
  ServiceTimeDistribution service;
  double weight = 1.0;
  int buffer = 1;
  PolicySpec policy = ZeroWaitPolicy{};
};

struct SimConfig {
  long long horizon = 0;
  long long warmup = 0;
  std::uint64_t seed = 1;
  int replications = 1;
  bool multi = false;
  std::vector<SourceSpec> sources;

  void validate() const {
    if (sources.empty()) throw input_error("simulation: no sources");
    if (!(horizon > warmup) || warmup < 0) throw input_error("simulation: need horizon > warmup >= 0");
    if (replications < 1) throw input_error("simulation: replications must be >= 1");
    for (const auto& s : sources) {
      if (s.buffer < 1) throw input_error("simulation: buffer size must be >= 1");
      if (!(s.weight > 0.0)) throw input_error("simulation: weights must be > 0");
    }
    if (!multi) {
      if (sources.size() != 1) throw input_error("simulation: single mode takes exactly one source");
      if (!is_single_policy(sources[0].policy))
        throw input_error("simulation: policy '" + policy_name(sources[0].policy) + "' is not a single-source policy");
    } else {
      std::size_t kind = sources[0].policy.index();
      for (const auto& s : sources) {
        if (!is_multi_policy(s.policy))
          throw input_error("simulation: policy '" + policy_name(s.policy) + "' is not a multi-source policy");
        if (s.policy.index() != kind)
          throw input_error("simulation: sources mix incompatible policies");
      }
    }
  }

  static bool is_single_policy(const PolicySpec& p) {
    return std::holds_alternative<ZeroWaitPolicy>(p) || std::holds_alternative<ThresholdPolicy>(p) ||
           std::holds_alternative<PeriodicPolicy>(p);
  }
  static bool is_multi_policy(const PolicySpec& p) {
    return std::holds_alternative<MafZeroWaitPolicy>(p) || std::holds_alternative<WhittleGawPolicy>(p) ||
           std::holds_alternative<WhittleSfbPolicy>(p);
  }
};

// --- results ----------------------------------------------------------------

struct SourceResult {
  double average_error = 0.0;  // unweighted time-average of p(AoI)
  double aoi_mean = 0.0;
  long long aoi_max = 0;
  long long submissions = 0;
  long long deliveries = 0;
  long long drops = 0;  // periodic policy only
};

struct SimResult {
  double average_error = 0.0;  // sum_l w_l * per-source average
  std::vector<SourceResult> per_source;
  long long slots_counted = 0;
};

struct TraceRow {
  long long t;
  int source;
  long long aoi;
  char event;  // 's' submission, 'd' delivery, '.' plain slot
};

// --- single-source engine ---------------------------------------------------

namespace detail {

struct PenaltyLookup {
  const std::vector<double>* table;
  double last;
  double operator()(long long age) const {
    std::size_t i = static_cast<std::size_t>(age);
    return i < table->size() ? (*table)[i] : last;
  }
};

inline PenaltyLookup lookup(const PenaltyCurve& p) { return {&p.table(), p.last_value()}; }

inline void trace_push(std::vector<TraceRow>* trace, std::size_t cap, long long t, int source, long long aoi,
                       char event) {
  if (trace && trace->size() < cap) trace->push_back({t, source, aoi, event});
}

}  // namespace detail

inline SimResult simulate_single(const SourceSpec& src, long long horizon, long long warmup, std::uint64_t seed,
                                 std::uint64_t stream = 0, std::vector<TraceRow>* trace = nullptr,
                                 std::size_t trace_cap = 10000) {
  if (!(horizon > warmup) || warmup < 0) throw input_error("simulation: need horizon > warmup >= 0");
  Rng rng(seed, stream);
  const auto p = detail::lookup(src.penalty);

  // threshold policies consult the Gittins index of the source
  std::optional<GittinsTable> gittins;
  int send_offset = 0;
  double beta = -std::numeric_limits<double>::infinity();
  bool periodic = false;
  int period = 1;
  int queue_cap = 1;
  if (const auto* tp = std::get_if<ThresholdPolicy>(&src.policy)) {
    if (tp->offset < 0 || tp->offset >= src.buffer)
      throw input_error("simulation: threshold offset outside the buffer");
    gittins.emplace(gittins_table(src.penalty, src.service));
    if (tp->beta > gittins->sup())
      throw computation_error("simulation: threshold beta exceeds sup of the Gittins index");
    send_offset = tp->offset;
    beta = tp->beta;
  } else if (const auto* pp = std::get_if<PeriodicPolicy>(&src.policy)) {
    if (pp->period < 1) throw input_error("simulation: periodic period must be >= 1");
    periodic = true;
    period = pp->period;
    queue_cap = pp->queue_capacity;
    if (queue_cap < 1) throw input_error("simulation: periodic queue capacity must be >= 1");
  } else if (!std::holds_alternative<ZeroWaitPolicy>(src.policy)) {
    throw input_error("simulation: unknown single-source policy");
  }

  long long age = 1 + src.service.min_value();  // finite Delta(0); transient dies in warmup
  bool busy = false;
  long long delivery_t = 0;
  long long inflight_reset = 0;  // AoI value at the delivery slot
  long long inflight_gen = 0;    // generation slot (periodic)
  std::deque<long long> queue;   // queued generation times (periodic)

  detail::KahanSum penalty_sum;
  detail::KahanSum aoi_sum;
  SourceResult res;
  long long counted = 0;

  for (long long t = 0; t < horizon; ++t) {
    char event = '.';
    if (busy && t == delivery_t) {
      busy = false;
      ++res.deliveries;
      age = periodic ? t - inflight_gen : inflight_reset;
      event = 'd';
    } else if (t > 0) {
      ++age;
    }
    assert(age >= 0);

    if (periodic && t % period == 0) {
      if (static_cast<int>(queue.size()) < queue_cap)
        queue.push_back(t);
      else
        ++res.drops;
    }

    if (!busy) {
      bool send = false;
      if (periodic) {
        if (!queue.empty()) {
          inflight_gen = queue.front();
          queue.pop_front();
          send = true;
        }
      } else if (!gittins || gittins->value(age) >= beta) {
        send = true;  // zero-wait, or threshold satisfied
      }
      if (send) {
        int t_service = src.service.sample(rng);
        busy = true;
        delivery_t = t + t_service;
        inflight_reset = static_cast<long long>(t_service) + send_offset;
        ++res.submissions;
        event = event == 'd' ? 'b' : 's';  // 'b': delivery and submission share the slot
      }
    }
    detail::trace_push(trace, trace_cap, t, 0, age, event);

    if (t >= warmup) {
      penalty_sum.add(p(age));
      aoi_sum.add(static_cast<double>(age));
      res.aoi_max = std::max(res.aoi_max, age);
      ++counted;
    }
  }

  res.average_error = penalty_sum.sum / static_cast<double>(counted);
  res.aoi_mean = aoi_sum.sum / static_cast<double>(counted);
  SimResult out;
  out.per_source.push_back(res);
  out.average_error = src.weight * res.average_error;
  out.slots_counted = counted;
  return out;
}

// --- multi-source engine ----------------------------------------------------

inline SimResult simulate_multi(const SimConfig& config, std::uint64_t stream = 0,
                                std::vector<TraceRow>* trace = nullptr, std::size_t trace_cap = 10000) {
  config.validate();
  if (!config.multi) throw input_error("simulate_multi: config is single-mode");
  const std::size_t m = config.sources.size();
  Rng rng(config.seed, stream);

  enum class Kind { maf, gaw, sfb };
  Kind kind = std::holds_alternative<MafZeroWaitPolicy>(config.sources[0].policy) ? Kind::maf
              : std::holds_alternative<WhittleGawPolicy>(config.sources[0].policy) ? Kind::gaw
                                                                                   : Kind::sfb;

  // Per-source Whittle tables, reduced over offsets: best_w[l][delta] is the
  // max over b of W_{l,b}(delta) with the smallest maximizing b recorded, so
  // the slot loop is O(m).
  std::vector<detail::PenaltyLookup> p;
  std::vector<std::vector<double>> best_w(m);
  std::vector<std::vector<int>> best_b(m);
  for (std::size_t l = 0; l < m; ++l) {
    const SourceSpec& s = config.sources[l];
    p.push_back(detail::lookup(s.penalty));
    if (kind == Kind::maf) continue;
    int n_offsets = kind == Kind::gaw ? 1 : s.buffer;
    int cap = s.penalty.delta_max();
    best_w[l].assign(static_cast<std::size_t>(cap) + 1, -std::numeric_limits<double>::infinity());
    best_b[l].assign(static_cast<std::size_t>(cap) + 1, 0);
    for (int b = 0; b < n_offsets; ++b) {
      Arm arm(static_cast<int>(l), b, s.weight, s.penalty, s.service);
      for (int d = 0; d <= cap; ++d) {
        double w = whittle_index(arm, d);
        if (w > best_w[l][static_cast<std::size_t>(d)]) {
          best_w[l][static_cast<std::size_t>(d)] = w;
          best_b[l][static_cast<std::size_t>(d)] = b;
        }
      }
    }
  }
  auto whittle_at = [&](std::size_t l, long long age) {
    std::size_t i = std::min(static_cast<std::size_t>(age), best_w[l].size() - 1);
    return std::pair<double, int>(best_w[l][i], best_b[l][i]);
  };

  std::vector<long long> age(m);
  for (std::size_t l = 0; l < m; ++l) age[l] = 1 + config.sources[l].service.min_value();

  bool busy = false;
  long long delivery_t = 0;
  std::size_t inflight_l = 0;
  long long inflight_reset = 0;

  std::vector<SourceResult> res(m);
  std::vector<detail::KahanSum> penalty_sum(m), aoi_sum(m);
  detail::KahanSum weighted_sum;
  long long counted = 0;

  for (long long t = 0; t < config.horizon; ++t) {
    std::size_t delivered = m;  // sentinel: no delivery this slot
    std::size_t submitted = m;
    if (busy && t == delivery_t) {
      busy = false;
      delivered = inflight_l;
      ++res[delivered].deliveries;
    }
    for (std::size_t l = 0; l < m; ++l) {
      if (l == delivered)
        age[l] = inflight_reset;
      else if (t > 0)
        ++age[l];
    }

    if (!busy) {
      int pick_l = -1, pick_b = 0;
      if (kind == Kind::maf) {
        std::size_t l_star = 0;
        for (std::size_t l = 1; l < m; ++l)
          if (age[l] > age[l_star]) l_star = l;
        pick_l = static_cast<int>(l_star);
        pick_b = 0;
      } else {
        double w_star = -std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < m; ++l) {
          auto [w, b] = whittle_at(l, age[l]);
          if (w > w_star) {
            w_star = w;
            pick_l = static_cast<int>(l);
            pick_b = b;
          }
        }
        if (w_star < 0.0) pick_l = -1;  // every index negative: stay silent
      }
      if (pick_l >= 0) {
        const SourceSpec& s = config.sources[static_cast<std::size_t>(pick_l)];
        int t_service = s.service.sample(rng);
        busy = true;
        inflight_l = static_cast<std::size_t>(pick_l);
        delivery_t = t + t_service;
        inflight_reset = static_cast<long long>(t_service) + pick_b;
        ++res[inflight_l].submissions;
        submitted = inflight_l;
      }
    }
    if (trace)
      for (std::size_t l = 0; l < m; ++l) {
        char event = l == delivered ? (l == submitted ? 'b' : 'd') : (l == submitted ? 's' : '.');
        detail::trace_push(trace, trace_cap, t, static_cast<int>(l), age[l], event);
      }

    if (t >= config.warmup) {
      double wsum = 0.0;
      for (std::size_t l = 0; l < m; ++l) {
        double pl = p[l](age[l]);
        penalty_sum[l].add(pl);
        aoi_sum[l].add(static_cast<double>(age[l]));
        res[l].aoi_max = std::max(res[l].aoi_max, age[l]);
        wsum += config.sources[l].weight * pl;
      }
      weighted_sum.add(wsum);
      ++counted;
    }
  }

  SimResult out;
  for (std::size_t l = 0; l < m; ++l) {
    res[l].average_error = penalty_sum[l].sum / static_cast<double>(counted);
    res[l].aoi_mean = aoi_sum[l].sum / static_cast<double>(counted);
    out.per_source.push_back(res[l]);
  }
  out.average_error = weighted_sum.sum / static_cast<double>(counted);
  out.slots_counted = counted;
  return out;
}

// Entry point covering both modes for one replication stream.
inline SimResult simulate(const SimConfig& config, std::uint64_t stream = 0,
                          std::vector<TraceRow>* trace = nullptr, std::size_t trace_cap = 10000) {
  config.validate();
  if (config.multi) return simulate_multi(config, stream, trace, trace_cap);
  return simulate_single(config.sources[0], config.horizon, config.warmup, config.seed, stream, trace, trace_cap);
}

// --- replication ------------------------------------------------------------

struct Aggregate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard error of the mean
};

struct ReplicateResult {
  Aggregate average_error;                  // weighted total
  std::vector<Aggregate> source_error;      // per-source unweighted averages
  std::vector<Aggregate> source_aoi_mean;
  int replications = 0;
};

namespace detail {

inline Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) a.mean += x;
  a.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return a;
}

}  // namespace detail

// Runs n independent replications on disjoint counter-derived RNG streams.
// Replications are deterministic per (seed, index), so threading does not
// affect the results.
inline ReplicateResult replicate(const SimConfig& config, int n) {
  if (n < 1) throw input_error("replicate: n must be >= 1");
  config.validate();
  std::vector<SimResult> results(static_cast<std::size_t>(n));
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) results[static_cast<std::size_t>(i)] = simulate(config, static_cast<std::uint64_t>(i));
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (static_cast<std::size_t>(n) + workers - 1) / workers;
    for (unsigned wkr = 0; wkr < workers; ++wkr) {
      std::size_t lo = wkr * chunk;
      std::size_t hi = std::min<std::size_t>(lo + chunk, static_cast<std::size_t>(n));
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) results[i] = simulate(config, static_cast<std::uint64_t>(i));
      });
    }
    for (auto& th : pool) th.join();
  }

  ReplicateResult agg;
  agg.replications = n;
  std::vector<double> tmp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = results[static_cast<std::size_t>(i)].average_error;
  agg.average_error = detail::aggregate(tmp);
  const std::size_t m = config.sources.size();
  for (std::size_t l = 0; l < m; ++l) {
    for (int i = 0; i < n; ++i)
      tmp[static_cast<std::size_t>(i)] = results[static_cast<std::size_t>(i)].per_source[l].average_error;
    agg.source_error.push_back(detail::aggregate(tmp));
    for (int i = 0; i < n; ++i)
      tmp[static_cast<std::size_t>(i)] = results[static_cast<std::size_t>(i)].per_source[l].aoi_mean;
    agg.source_aoi_mean.push_back(detail::aggregate(tmp));
  }
  return agg;
}

}  // namespace aoi

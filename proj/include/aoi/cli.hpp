#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoi/csv.hpp"
#include "aoi/errors.hpp"
#include "aoi/freshness.hpp"
#include "aoi/gittins.hpp"
#include "aoi/info_metrics.hpp"
#include "aoi/multi_source.hpp"
#include "aoi/penalty.hpp"
#include "aoi/service.hpp"
#include "aoi/simulator.hpp"
#include "aoi/single_source.hpp"
#include "aoi/timeseries.hpp"

namespace aoi::cli {

using nlohmann::json;

// Flag overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> replications;
  bool oracle = false;
};

namespace detail {

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config file: " + path);
  try {
    return json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

// Unknown keys are config bugs; reject them early.
inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw input_error(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw input_error(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw input_error(where + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw input_error(where + ": bad value for '" + key + "'");
  }
}

template <typename T>
T optional_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw input_error(where + ": bad value for '" + key + "'");
  }
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const json& resolved) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(resolved.dump())));
  return buf;
}

struct OutputTarget {
  std::optional<csv::Writer> file;
  csv::Writer* writer = nullptr;
  csv::Writer& get() { return *writer; }
};

inline OutputTarget open_output(const json& cfg, const Overrides& ov) {
  OutputTarget t;
  std::string out = ov.out.value_or(optional_or<std::string>(cfg, "out", "", "config"));
  if (out.empty()) {
    static csv::Writer stdout_writer(std::cout);
    t.writer = &stdout_writer;
  } else {
    t.file.emplace(out);
    t.writer = &*t.file;
  }
  return t;
}

// service spec: {"kind":"constant","t":..} | {"kind":"geometric","q":..,"t_max":..}
//             | {"kind":"lognormal","alpha":..,"sigma":..,"t_max":..}
struct ServiceSpec {
  std::string kind;
  double q = 0.5, alpha = 1.0, sigma = 0.0;
  int t = 1, t_max = 64;

  static ServiceSpec parse(const json& obj, const std::string& where) {
    ServiceSpec s;
    s.kind = require<std::string>(obj, "kind", where);
    if (s.kind == "constant") {
      check_keys(obj, {"kind", "t"}, where);
      s.t = require<int>(obj, "t", where);
    } else if (s.kind == "geometric") {
      check_keys(obj, {"kind", "q", "t_max"}, where);
      s.q = require<double>(obj, "q", where);
      s.t_max = require<int>(obj, "t_max", where);
    } else if (s.kind == "lognormal") {
      check_keys(obj, {"kind", "alpha", "sigma", "t_max"}, where);
      s.alpha = require<double>(obj, "alpha", where);
      s.sigma = require<double>(obj, "sigma", where);
      s.t_max = require<int>(obj, "t_max", where);
    } else {
      throw input_error(where + ": unknown service kind '" + s.kind + "'");
    }
    return s;
  }

  ServiceTimeDistribution build(std::optional<double> sigma_override = std::nullopt) const {
    if (kind == "constant") return service_constant(t);
    if (kind == "geometric") return service_geometric(q, t_max);
    return service_lognormal_discretized(alpha, sigma_override.value_or(sigma), t_max);
  }
};

inline LossFunction parse_loss(const json& obj, const std::string& where) {
  check_keys(obj, {"family", "alpha"}, where);
  std::string fam = require<std::string>(obj, "family", where);
  if (fam == "log") return LossFunction::log_loss();
  if (fam == "brier") return LossFunction::brier();
  if (fam == "zero_one") return LossFunction::zero_one();
  if (fam == "quadratic") return LossFunction::quadratic();
  if (fam == "alpha") return LossFunction::alpha_loss(require<double>(obj, "alpha", where));
  throw input_error(where + ": unknown loss family '" + fam + "'");
}

inline std::string fmt(double v) { return csv::format_double(v); }

}  // namespace detail

// --- metrics ----------------------------------------------------------------
// Emits theta,value,g1,g2,eps_markov. value is the decomposition's direct
// curve (so value == g1 - g2), or the train/infer cross-entropy curve when a
// training dataset is supplied. eps_markov at row theta covers the triple
// (Y_0, X_-theta, X_-theta-1).
inline void run_metrics(const json& cfg, const Overrides& ov) {
  detail::check_keys(cfg, {"timeseries", "train_timeseries", "loss", "window", "theta_max", "out", "penalty_out"},
                     "metrics");
  const std::string ts_path = detail::require<std::string>(cfg, "timeseries", "metrics");
  const int window = detail::optional_or<int>(cfg, "window", 1, "metrics");
  const int theta_max = detail::require<int>(cfg, "theta_max", "metrics");
  if (theta_max < 1) throw input_error("metrics: theta_max must be >= 1");
  if (!cfg.contains("loss")) throw input_error("metrics: missing key 'loss'");
  LossFunction loss = detail::parse_loss(cfg.at("loss"), "metrics.loss");

  TimeSeriesDataset data = TimeSeriesDataset::from_csv(ts_path, window);
  MonotoneDecomposition dec = monotone_decomposition(data, loss, theta_max);

  std::vector<double> values = dec.direct.values();
  if (cfg.contains("train_timeseries")) {
    TimeSeriesDataset train =
        TimeSeriesDataset::from_csv(cfg.at("train_timeseries").get<std::string>(), window);
    values = freshness_curve(data, train, loss, theta_max).values();
  }

  // eps-Markov coefficient per theta-lag triple, on the decomposition's range
  Alphabet la = data.label_alphabet();
  Alphabet fa = data.feature_alphabet();
  std::size_t t0 = data.first_valid_t(theta_max);
  std::vector<double> eps;
  for (int k = 0; k < theta_max; ++k)
    eps.push_back(epsilon_markov_coefficient(data.triple_joint(k, la, fa, t0)));

  json resolved = cfg;
  auto out = detail::open_output(cfg, ov);
  out.get().comment("config_hash=" + detail::config_hash(resolved));
  out.get().raw_line("theta,value,g1,g2,eps_markov");
  for (int th = 0; th <= theta_max; ++th) {
    std::vector<std::string> row{std::to_string(th), detail::fmt(values[static_cast<std::size_t>(th)]),
                                 detail::fmt(dec.g1.value(th)), detail::fmt(dec.g2.value(th)),
                                 th < theta_max ? detail::fmt(eps[static_cast<std::size_t>(th)]) : ""};
    out.get().row(row);
  }

  // optionally re-emit the curve as a delta,penalty table so the measured
  // errors can feed the gittins/threshold/whittle/simulate commands directly
  if (cfg.contains("penalty_out")) {
    csv::Writer pw(cfg.at("penalty_out").get<std::string>());
    pw.comment("config_hash=" + detail::config_hash(resolved));
    pw.raw_line("delta,penalty");
    for (int th = 0; th <= theta_max; ++th)
      pw.row({std::to_string(th), detail::fmt(values[static_cast<std::size_t>(th)])});
  }
}

// --- gittins ----------------------------------------------------------------
inline void run_gittins(const json& cfg, const Overrides& ov) {
  detail::check_keys(cfg, {"penalty", "service", "delta_max", "tau_max", "out"}, "gittins");
  PenaltyCurve p = penalty_from_csv(detail::require<std::string>(cfg, "penalty", "gittins"));
  if (!cfg.contains("service")) throw input_error("gittins: missing key 'service'");
  ServiceTimeDistribution s = detail::ServiceSpec::parse(cfg.at("service"), "gittins.service").build();
  const int delta_cap = detail::optional_or<int>(cfg, "delta_max", p.delta_max(), "gittins");
  const int tau_max = detail::optional_or<int>(cfg, "tau_max", p.delta_max() + s.max_value() + 1, "gittins");
  GittinsTable table(p, s, delta_cap, tau_max);

  auto out = detail::open_output(cfg, ov);
  out.get().comment("config_hash=" + detail::config_hash(cfg));
  out.get().raw_line("delta,gittins");
  for (int d = 0; d <= delta_cap; ++d)
    out.get().row({std::to_string(d), detail::fmt(table.value(d))});
}

// --- threshold ----------------------------------------------------------------
inline void run_threshold(const json& cfg, const Overrides& ov) {
  detail::check_keys(cfg, {"penalty", "service", "buffer", "oracle", "delta_truncate", "out"}, "threshold");
  PenaltyCurve p = penalty_from_csv(detail::require<std::string>(cfg, "penalty", "threshold"));
  if (!cfg.contains("service")) throw input_error("threshold: missing key 'service'");
  ServiceTimeDistribution s = detail::ServiceSpec::parse(cfg.at("service"), "threshold.service").build();
  const int buffer = detail::require<int>(cfg, "buffer", "threshold");
  const bool oracle = ov.oracle || detail::optional_or<bool>(cfg, "oracle", false, "threshold");

  BufferOffsetResult r = optimal_buffer_offset(p, s, buffer);

  auto out = detail::open_output(cfg, ov);
  out.get().comment("config_hash=" + detail::config_hash(cfg));
  out.get().raw_line("b,beta");
  for (int b = 0; b < buffer; ++b)
    out.get().row({std::to_string(b), detail::fmt(r.betas[static_cast<std::size_t>(b)])});
  out.get().comment("optimal b=" + std::to_string(r.b_star) + " beta=" + detail::fmt(r.beta_star));
  if (oracle) {
    int trunc = detail::optional_or<int>(cfg, "delta_truncate", 4 * (p.delta_max() + s.max_value()), "threshold");
    MdpSolution sol = mdp_oracle_average_cost(p, s, buffer, trunc);
    out.get().comment("oracle gain=" + detail::fmt(sol.gain) +
                      " delta=" + detail::fmt(std::abs(sol.gain - r.beta_star)));
  }
}

// --- whittle ----------------------------------------------------------------
inline void run_whittle(const json& cfg, const Overrides& ov) {
  detail::check_keys(cfg, {"arms", "delta_max", "out"}, "whittle");
  if (!cfg.contains("arms") || !cfg.at("arms").is_array() || cfg.at("arms").empty())
    throw input_error("whittle: 'arms' must be a non-empty array");

  auto out = detail::open_output(cfg, ov);
  out.get().comment("config_hash=" + detail::config_hash(cfg));
  out.get().raw_line("l,b,delta,whittle");
  int l = 0;
  for (const auto& arm_cfg : cfg.at("arms")) {
    const std::string where = "whittle.arms[" + std::to_string(l) + "]";
    detail::check_keys(arm_cfg, {"penalty", "service", "weight", "buffer"}, where);
    PenaltyCurve p = penalty_from_csv(detail::require<std::string>(arm_cfg, "penalty", where));
    if (!arm_cfg.contains("service")) throw input_error(where + ": missing key 'service'");
    ServiceTimeDistribution s = detail::ServiceSpec::parse(arm_cfg.at("service"), where + ".service").build();
    const double weight = detail::optional_or<double>(arm_cfg, "weight", 1.0, where);
    const int buffer = detail::require<int>(arm_cfg, "buffer", where);
    const int cap = detail::optional_or<int>(cfg, "delta_max", p.delta_max(), "whittle");
    for (int b = 0; b < buffer; ++b) {
      Arm arm(l, b, weight, p, s);
      for (int d = 0; d <= cap; ++d)
        out.get().row({std::to_string(l), std::to_string(b), std::to_string(d),
                       detail::fmt(whittle_index(arm, d))});
    }
    ++l;
  }
}

// --- simulate ----------------------------------------------------------------

namespace detail {

struct SimSourceSpec {
  std::string penalty_path;
  ServiceSpec service;
  double weight = 1.0;
  int buffer = 1;
};

inline PolicySpec parse_policy(const json& v, const std::string& where, bool* needs_gaw, bool* needs_sfb) {
  if (v.is_string()) {
    std::string name = v.get<std::string>();
    if (name == "zero_wait") return ZeroWaitPolicy{};
    if (name == "gaw_optimal") {
      *needs_gaw = true;
      return ThresholdPolicy{};
    }
    if (name == "sfb_optimal") {
      *needs_sfb = true;
      return ThresholdPolicy{};
    }
    if (name == "maf_zero_wait") return MafZeroWaitPolicy{};
    if (name == "whittle_gaw") return WhittleGawPolicy{};
    if (name == "whittle_sfb") return WhittleSfbPolicy{};
    throw input_error(where + ": unknown policy '" + name + "'");
  }
  check_keys(v, {"kind", "offset", "beta", "period", "queue"}, where);
  std::string kind = require<std::string>(v, "kind", where);
  if (kind == "threshold")
    return ThresholdPolicy{require<int>(v, "offset", where), require<double>(v, "beta", where)};
  if (kind == "periodic")
    return PeriodicPolicy{require<int>(v, "period", where), require<int>(v, "queue", where)};
  throw input_error(where + ": unknown policy kind '" + kind + "'");
}

}  // namespace detail

// Runs replicate() for every configured policy (and sweep point) and writes
// rows policy,source,metric,value,stderr. Sweep points land in the metric
// name, e.g. avg_weighted_error[sigma=0.3].
inline void run_simulate(const json& cfg, const Overrides& ov) {
  detail::check_keys(cfg,
                     {"mode", "horizon", "warmup", "seed", "replications", "sources", "policies", "sweep",
                      "out", "trace", "trace_limit"},
                     "simulate");
  const std::string mode = detail::require<std::string>(cfg, "mode", "simulate");
  if (mode != "single" && mode != "multi") throw input_error("simulate: mode must be 'single' or 'multi'");
  const bool multi = mode == "multi";
  const long long horizon = detail::require<long long>(cfg, "horizon", "simulate");
  const std::uint64_t seed = ov.seed.value_or(detail::optional_or<std::uint64_t>(cfg, "seed", 1, "simulate"));
  const int replications =
      ov.replications.value_or(detail::optional_or<int>(cfg, "replications", 1, "simulate"));

  if (!cfg.contains("sources") || !cfg.at("sources").is_array() || cfg.at("sources").empty())
    throw input_error("simulate: 'sources' must be a non-empty array");
  std::vector<detail::SimSourceSpec> specs;
  int si = 0;
  for (const auto& sc : cfg.at("sources")) {
    const std::string where = "simulate.sources[" + std::to_string(si++) + "]";
    detail::check_keys(sc, {"penalty", "service", "weight", "buffer"}, where);
    detail::SimSourceSpec spec;
    spec.penalty_path = detail::require<std::string>(sc, "penalty", where);
    if (!sc.contains("service")) throw input_error(where + ": missing key 'service'");
    spec.service = detail::ServiceSpec::parse(sc.at("service"), where + ".service");
    spec.weight = detail::optional_or<double>(sc, "weight", 1.0, where);
    spec.buffer = detail::require<int>(sc, "buffer", where);
    specs.push_back(std::move(spec));
  }

  if (!cfg.contains("policies") || !cfg.at("policies").is_array() || cfg.at("policies").empty())
    throw input_error("simulate: 'policies' must be a non-empty array");

  // sweep: sigma replaces the scale of every log-normal service; w1 replaces
  // the weight of source 0
  std::string sweep_param;
  std::vector<double> sweep_values{0.0};
  bool has_sweep = false;
  if (cfg.contains("sweep")) {
    detail::check_keys(cfg.at("sweep"), {"parameter", "values"}, "simulate.sweep");
    sweep_param = detail::require<std::string>(cfg.at("sweep"), "parameter", "simulate.sweep");
    if (sweep_param != "sigma" && sweep_param != "w1")
      throw input_error("simulate.sweep: parameter must be 'sigma' or 'w1'");
    sweep_values = detail::require<std::vector<double>>(cfg.at("sweep"), "values", "simulate.sweep");
    if (sweep_values.empty()) throw input_error("simulate.sweep: empty values");
    if (sweep_param == "sigma") {
      bool any = false;
      for (const auto& spec : specs) any = any || spec.service.kind == "lognormal";
      if (!any) throw input_error("simulate.sweep: sigma sweep needs a lognormal service");
    }
    has_sweep = true;
  }

  json resolved = cfg;
  resolved["seed"] = seed;
  resolved["replications"] = replications;
  auto out = detail::open_output(cfg, ov);
  out.get().comment("config_hash=" + detail::config_hash(resolved));
  out.get().raw_line("policy,source,metric,value,stderr");

  std::optional<csv::Writer> trace_out;
  std::size_t trace_cap = detail::optional_or<std::size_t>(cfg, "trace_limit", 10000, "simulate");
  if (cfg.contains("trace")) {
    if (has_sweep) throw input_error("simulate: trace output does not combine with a sweep");
    if (cfg.at("policies").size() != 1)
      throw input_error("simulate: trace output requires exactly one policy");
    trace_out.emplace(cfg.at("trace").get<std::string>());
    trace_out->comment("config_hash=" + detail::config_hash(resolved));
    trace_out->raw_line("t,source,aoi,event");
  }

  for (double sweep_v : sweep_values) {
    std::string tag;
    if (has_sweep) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "[%s=%g]", sweep_param.c_str(), sweep_v);
      tag = buf;
    }
    // resolve sources at this sweep point
    SimConfig base;
    base.horizon = horizon;
    base.seed = seed;
    base.multi = multi;
    long long warm_default = 0;
    for (const auto& spec : specs) {
      std::optional<double> sigma;
      if (has_sweep && sweep_param == "sigma" && spec.service.kind == "lognormal") sigma = sweep_v;
      SourceSpec s{penalty_from_csv(spec.penalty_path), spec.service.build(sigma), spec.weight, spec.buffer,
                   ZeroWaitPolicy{}};
      warm_default = std::max<long long>(
          warm_default, 10LL * (s.penalty.delta_max() + s.service.max_value()));
      base.sources.push_back(std::move(s));
    }
    if (has_sweep && sweep_param == "w1") base.sources[0].weight = sweep_v;
    base.warmup = detail::optional_or<long long>(cfg, "warmup", warm_default, "simulate");
    if (base.warmup >= horizon) throw input_error("simulate: warmup must be below horizon");

    int pi = 0;
    for (const auto& pv : cfg.at("policies")) {
      const std::string where = "simulate.policies[" + std::to_string(pi++) + "]";
      bool needs_gaw = false, needs_sfb = false;
      PolicySpec policy = detail::parse_policy(pv, where, &needs_gaw, &needs_sfb);
      std::string pname = pv.is_string() ? pv.get<std::string>() : policy_name(policy);

      SimConfig run = base;
      for (auto& s : run.sources) {
        PolicySpec resolved_policy = policy;
        if (needs_gaw) {
          double beta = threshold_root(s.penalty, s.service, 0);
          resolved_policy = ThresholdPolicy{0, beta};
        } else if (needs_sfb) {
          BufferOffsetResult r = optimal_buffer_offset(s.penalty, s.service, s.buffer);
          resolved_policy = ThresholdPolicy{r.b_star, r.beta_star};
        }
        s.policy = resolved_policy;
      }
      run.replications = replications;

      ReplicateResult agg = replicate(run, replications);
      const std::string metric_all = (multi ? "avg_weighted_error" : "avg_error") + tag;
      out.get().row({pname, "all", metric_all, detail::fmt(agg.average_error.mean),
                     detail::fmt(agg.average_error.stderr_)});
      for (std::size_t l = 0; l < run.sources.size(); ++l) {
        out.get().row({pname, std::to_string(l), "avg_error" + tag, detail::fmt(agg.source_error[l].mean),
                       detail::fmt(agg.source_error[l].stderr_)});
        out.get().row({pname, std::to_string(l), "aoi_mean" + tag, detail::fmt(agg.source_aoi_mean[l].mean),
                       detail::fmt(agg.source_aoi_mean[l].stderr_)});
      }

      if (trace_out) {
        std::vector<TraceRow> trace;
        simulate(run, 0, &trace, trace_cap);
        for (const auto& row : trace)
          trace_out->row({std::to_string(row.t), std::to_string(row.source), std::to_string(row.aoi),
                          std::string(1, row.event)});
      }
    }
  }
}

// Dispatch; returns the process exit code.
inline int run_command(const std::string& command, const std::string& config_path, const Overrides& ov) {
  try {
    json cfg = detail::load_config(config_path);
    if (command == "metrics")
      run_metrics(cfg, ov);
    else if (command == "gittins")
      run_gittins(cfg, ov);
    else if (command == "threshold")
      run_threshold(cfg, ov);
    else if (command == "whittle")
      run_whittle(cfg, ov);
    else if (command == "simulate")
      run_simulate(cfg, ov);
    else
      throw input_error("unknown command: " + command);
    return 0;
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const computation_error& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace aoi::cli

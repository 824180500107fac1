#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "aoi/distribution.hpp"
#include "aoi/errors.hpp"

namespace aoi {

enum class LossFamily { log_loss, brier, zero_one, alpha_loss, quadratic };

// One of the supported loss families together with its parameter.
// Log, Brier and alpha losses score a distribution-valued action, the 0-1
// loss scores a symbol, the quadratic loss scores a real (numeric alphabets).
class LossFunction {
 public:
  static LossFunction log_loss() { return LossFunction(LossFamily::log_loss, 0.0); }
  static LossFunction brier() { return LossFunction(LossFamily::brier, 0.0); }
  static LossFunction zero_one() { return LossFunction(LossFamily::zero_one, 0.0); }
  static LossFunction quadratic() { return LossFunction(LossFamily::quadratic, 0.0); }
  static LossFunction alpha_loss(double alpha) {
    if (!(alpha > 0.0) || alpha == 1.0) throw input_error("alpha loss requires alpha > 0, alpha != 1");
    return LossFunction(LossFamily::alpha_loss, alpha);
  }

  LossFamily family() const { return family_; }
  double alpha() const { return alpha_; }

  std::string name() const {
    switch (family_) {
      case LossFamily::log_loss: return "log";
      case LossFamily::brier: return "brier";
      case LossFamily::zero_one: return "zero_one";
      case LossFamily::alpha_loss: return "alpha(" + std::to_string(alpha_) + ")";
      case LossFamily::quadratic: return "quadratic";
    }
    return "?";
  }

 private:
  LossFunction(LossFamily f, double a) : family_(f), alpha_(a) {}
  LossFamily family_;
  double alpha_;
};

// Distribution-valued, symbol-valued, or real-valued action.
struct BayesAction {
  std::variant<std::vector<double>, std::size_t, double> value;

  const std::vector<double>& dist() const { return std::get<std::vector<double>>(value); }
  std::size_t symbol() const { return std::get<std::size_t>(value); }
  double real() const { return std::get<double>(value); }
};

struct BayesResult {
  BayesAction action;
  double entropy;  // attained minimum expected loss
};

namespace detail {

inline std::size_t argmax_lowest_index(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace detail

// E_{Y~p}[L(Y, a)] for an arbitrary action of the loss family's action space.
inline double expected_loss(const Distribution& p, const BayesAction& a, const LossFunction& loss) {
  const std::size_t n = p.size();
  switch (loss.family()) {
    case LossFamily::log_loss: {
      const auto& q = a.dist();
      double s = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        if (p.p(y) == 0.0) continue;
        if (q[y] <= 0.0) return std::numeric_limits<double>::infinity();
        s -= p.p(y) * std::log(q[y]);
      }
      return s;
    }
    case LossFamily::brier: {
      const auto& q = a.dist();
      double qq = 0.0, pq = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        qq += q[y] * q[y];
        pq += p.p(y) * q[y];
      }
      return qq - 2.0 * pq + 1.0;
    }
    case LossFamily::zero_one:
      return 1.0 - p.p(a.symbol());
    case LossFamily::alpha_loss: {
      const auto& q = a.dist();
      const double al = loss.alpha();
      const double e = (al - 1.0) / al;
      double s = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        if (p.p(y) == 0.0) continue;
        if (q[y] <= 0.0) {
          if (al < 1.0) return std::numeric_limits<double>::infinity();
          continue;  // q^e -> 0 for alpha > 1
        }
        s += p.p(y) * std::pow(q[y], e);
      }
      return al / (al - 1.0) * (1.0 - s);
    }
    case LossFamily::quadratic: {
      const double ahat = a.real();
      double s = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        double d = p.alphabet().numeric_value(y) - ahat;
        s += p.p(y) * d * d;
      }
      return s;
    }
  }
  throw computation_error("unknown loss family");
}

// Minimizer of E[L(Y, a)] and the attained minimum (the L-entropy).
// Closed forms per family; ties resolved toward the lowest alphabet index.
inline BayesResult bayes_action(const Distribution& p, const LossFunction& loss) {
  const std::size_t n = p.size();
  switch (loss.family()) {
    case LossFamily::log_loss: {
      double h = 0.0;
      for (std::size_t y = 0; y < n; ++y)
        if (p.p(y) > 0.0) h -= p.p(y) * std::log(p.p(y));
      return {BayesAction{p.mass()}, h};
    }
    case LossFamily::brier: {
      double s2 = 0.0;
      for (std::size_t y = 0; y < n; ++y) s2 += p.p(y) * p.p(y);
      return {BayesAction{p.mass()}, 1.0 - s2};
    }
    case LossFamily::zero_one: {
      std::size_t mode = detail::argmax_lowest_index(p.mass());
      return {BayesAction{mode}, 1.0 - p.p(mode)};
    }
    case LossFamily::alpha_loss: {
      const double al = loss.alpha();
      std::vector<double> tilted(n);
      double s = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        tilted[y] = std::pow(p.p(y), al);
        s += tilted[y];
      }
      for (double& t : tilted) t /= s;
      double h = al / (al - 1.0) * (1.0 - std::pow(s, 1.0 / al));
      return {BayesAction{std::move(tilted)}, h};
    }
    case LossFamily::quadratic: {
      if (!p.alphabet().numeric())
        throw input_error("quadratic loss requires a numeric alphabet");
      double mean = 0.0;
      for (std::size_t y = 0; y < n; ++y) mean += p.p(y) * p.alphabet().numeric_value(y);
      double var = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        double d = p.alphabet().numeric_value(y) - mean;
        var += p.p(y) * d * d;
      }
      return {BayesAction{mean}, var};
    }
  }
  throw computation_error("unknown loss family");
}

// H_L(Y): the minimum expected loss attainable from P_Y alone.
inline double l_entropy(const Distribution& p, const LossFunction& loss) {
  return bayes_action(p, loss).entropy;
}

}  // namespace aoi

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "aoi/chain_model.hpp"
#include "aoi/distribution.hpp"
#include "aoi/errors.hpp"
#include "aoi/info_metrics.hpp"
#include "aoi/loss.hpp"
#include "aoi/timeseries.hpp"

namespace aoi {

// Inference (or training) error as a function of the AoI theta.
class FreshnessCurve {
 public:
  FreshnessCurve(std::vector<double> values, LossFunction loss)
      : values_(std::move(values)), loss_(loss) {
    if (values_.empty()) throw input_error("freshness curve: no values");
    for (double v : values_)
      if (!std::isfinite(v)) throw computation_error("freshness curve: non-finite value");
  }

  int theta_max() const { return static_cast<int>(values_.size()) - 1; }
  double value(int theta) const { return values_[static_cast<std::size_t>(theta)]; }
  const std::vector<double>& values() const { return values_; }
  const LossFunction& loss() const { return loss_; }

 private:
  std::vector<double> values_;
  LossFunction loss_;
};

// H_L(Y_0 | X_-theta) for theta = 0..theta_max from exact chain joints.
inline FreshnessCurve freshness_curve(const MarkovChainModel& model, const LossFunction& loss, int theta_max) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(theta_max) + 1);
  for (int theta = 0; theta <= theta_max; ++theta)
    v.push_back(l_conditional_entropy(model.pair_joint(theta), loss));
  return FreshnessCurve(std::move(v), loss);
}

// Empirical curve: conditional entropy of the per-theta empirical joint.
inline FreshnessCurve freshness_curve(const TimeSeriesDataset& data, const LossFunction& loss, int theta_max) {
  Alphabet la = data.label_alphabet();
  Alphabet fa = data.feature_alphabet();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(theta_max) + 1);
  for (int theta = 0; theta <= theta_max; ++theta)
    v.push_back(l_conditional_entropy(data.pair_joint(theta, la, fa, data.first_valid_t(theta)), loss));
  return FreshnessCurve(std::move(v), loss);
}

// Cross-entropy curve: actions trained on `train`, evaluated on `infer`.
inline FreshnessCurve freshness_curve(const TimeSeriesDataset& infer, const TimeSeriesDataset& train,
                                      const LossFunction& loss, int theta_max) {
  if (infer.window() != train.window())
    throw input_error("freshness curve: train and infer datasets must share the window length");
  Alphabet la = TimeSeriesDataset::merged(infer.label_alphabet(), train.label_alphabet());
  Alphabet fa = TimeSeriesDataset::merged(infer.feature_alphabet(), train.feature_alphabet());
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(theta_max) + 1);
  for (int theta = 0; theta <= theta_max; ++theta) {
    auto ij = infer.pair_joint(theta, la, fa, infer.first_valid_t(theta));
    auto tj = train.pair_joint(theta, la, fa, train.first_valid_t(theta));
    v.push_back(l_conditional_cross_entropy(ij, tj, loss));
  }
  return FreshnessCurve(std::move(v), loss);
}

// H_L(Y_0 | X_-Theta, Theta) = sum_theta P_Theta(theta) * curve(theta).
inline double expected_under_theta(const FreshnessCurve& curve, const Distribution& theta_dist) {
  double h = 0.0;
  for (std::size_t i = 0; i < theta_dist.size(); ++i) {
    if (theta_dist.p(i) <= 0.0) continue;
    long long theta = 0;
    try {
      theta = std::stoll(theta_dist.alphabet().symbol(i));
    } catch (const std::exception&) {
      throw input_error("theta distribution symbols must be integers");
    }
    if (theta < 0 || theta > curve.theta_max())
      throw input_error("theta distribution support exceeds theta_max of the curve");
    h += theta_dist.p(i) * curve.value(static_cast<int>(theta));
  }
  return h;
}

struct MonotoneDecomposition {
  FreshnessCurve g1;      // non-decreasing part
  FreshnessCurve g2;      // non-decreasing correction; O(eps) for eps-Markov data
  FreshnessCurve direct;  // H_L(Y_0|X_-theta) from the same joints; equals g1 - g2
};

namespace detail {

template <typename TripleAt, typename PairAt>
MonotoneDecomposition decompose_monotone(TripleAt&& triple_at, PairAt&& pair_at, const LossFunction& loss,
                                         int theta_max) {
  std::vector<double> g1(static_cast<std::size_t>(theta_max) + 1, 0.0);
  std::vector<double> g2(static_cast<std::size_t>(theta_max) + 1, 0.0);
  std::vector<double> direct(static_cast<std::size_t>(theta_max) + 1, 0.0);
  direct[0] = l_conditional_entropy(pair_at(0), loss);
  g1[0] = direct[0];
  double acc1 = g1[0], acc2 = 0.0;
  for (int k = 0; k < theta_max; ++k) {
    TripleDistribution t = triple_at(k);  // (Y_0, X_-k, X_-k-1)
    acc1 += l_conditional_mutual_information(t, loss);             // I_L(Y0; X_-k | X_-k-1)
    acc2 += l_conditional_mutual_information(t.swapped_xz(), loss);  // I_L(Y0; X_-k-1 | X_-k)
    g1[static_cast<std::size_t>(k) + 1] = acc1;
    g2[static_cast<std::size_t>(k) + 1] = acc2;
    direct[static_cast<std::size_t>(k) + 1] = l_conditional_entropy(pair_at(k + 1), loss);
  }
  return {FreshnessCurve(std::move(g1), loss), FreshnessCurve(std::move(g2), loss),
          FreshnessCurve(std::move(direct), loss)};
}

}  // namespace detail

inline MonotoneDecomposition monotone_decomposition(const MarkovChainModel& model, const LossFunction& loss,
                                                    int theta_max) {
  return detail::decompose_monotone([&](int k) { return model.triple_joint(k); },
                                    [&](int theta) { return model.pair_joint(theta); }, loss, theta_max);
}

// Empirical variant. All joints are built over the common sample range
// t >= theta_max + u - 1 so the telescoping identity g1 - g2 == direct holds
// exactly; per-theta ranges would shift the marginals between terms.
inline MonotoneDecomposition monotone_decomposition(const TimeSeriesDataset& data, const LossFunction& loss,
                                                    int theta_max) {
  Alphabet la = data.label_alphabet();
  Alphabet fa = data.feature_alphabet();
  std::size_t t0 = data.first_valid_t(theta_max);
  return detail::decompose_monotone([&](int k) { return data.triple_joint(k, la, fa, t0); },
                                    [&](int theta) { return data.pair_joint(theta, la, fa, t0); }, loss,
                                    theta_max);
}

struct StochasticOrderReport {
  double h1;
  double h2;
  bool ordered;  // h1 <= h2 + tol; reported, not asserted (the guarantee is O(eps))
};

// Theta1 must be stochastically smaller than Theta2 (CDF-wise).
inline StochasticOrderReport stochastic_order_check(const FreshnessCurve& curve, const Distribution& theta1,
                                                    const Distribution& theta2, double tol = 1e-9) {
  if (theta1.alphabet() != theta2.alphabet())
    throw input_error("stochastic order check: theta distributions must share the alphabet");
  // the CDF comparison below needs the support listed in ascending theta order
  long long prev = -1;
  for (std::size_t i = 0; i < theta1.size(); ++i) {
    long long v = 0;
    try {
      v = std::stoll(theta1.alphabet().symbol(i));
    } catch (const std::exception&) {
      throw input_error("stochastic order check: theta symbols must be integers");
    }
    if (v <= prev) throw input_error("stochastic order check: theta symbols must be ascending");
    prev = v;
  }
  // verify Theta1 <=_st Theta2: P(Theta1 > x) <= P(Theta2 > x) for all x
  double c1 = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < theta1.size(); ++i) {
    c1 += theta1.p(i);
    c2 += theta2.p(i);
    if (c1 < c2 - 1e-12)
      throw input_error("stochastic order check: Theta1 is not stochastically smaller than Theta2");
  }
  double h1 = expected_under_theta(curve, theta1);
  double h2 = expected_under_theta(curve, theta2);
  return {h1, h2, h1 <= h2 + tol};
}

}  // namespace aoi

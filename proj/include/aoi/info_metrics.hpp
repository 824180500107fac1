#pragma once

#include <cmath>
#include <string>

#include "aoi/distribution.hpp"
#include "aoi/errors.hpp"
#include "aoi/loss.hpp"

namespace aoi {

// H_L(Y|X) = sum_x P_X(x) min_a E_{Y~P_{Y|X=x}}[L(Y,a)].
// Features with zero mass contribute nothing.
inline double l_conditional_entropy(const JointDistribution& joint, const LossFunction& loss) {
  double h = 0.0;
  for (std::size_t x = 0; x < joint.feature_alphabet().size(); ++x) {
    double px = joint.feature_mass(x);
    if (px <= 0.0) continue;
    h += px * l_entropy(joint.conditional_label(x), loss);
  }
  return h;
}

// H_L(Y; Ytilde | X): the expected loss when actions are Bayes-optimal for the
// training conditionals but evaluated under the inference conditionals.
inline double l_conditional_cross_entropy(const JointDistribution& infer, const JointDistribution& train,
                                          const LossFunction& loss) {
  if (infer.label_alphabet() != train.label_alphabet() || infer.feature_alphabet() != train.feature_alphabet())
    throw input_error("conditional cross entropy: joints must share alphabets");
  double h = 0.0;
  for (std::size_t x = 0; x < infer.feature_alphabet().size(); ++x) {
    double px = infer.feature_mass(x);
    if (px <= 0.0) continue;
    if (train.feature_mass(x) <= 0.0)
      throw computation_error("conditional cross entropy: training conditional undefined for feature '" +
                              infer.feature_alphabet().symbol(x) + "'");
    BayesAction a = bayes_action(train.conditional_label(x), loss).action;
    h += px * expected_loss(infer.conditional_label(x), a, loss);
  }
  return h;
}

// D_L(p || q) = E_{Y~q}[L(Y, a_p)] - E_{Y~q}[L(Y, a_q)]; the expectation runs
// under the second argument.
inline double l_divergence(const Distribution& p, const Distribution& q, const LossFunction& loss) {
  if (p.alphabet() != q.alphabet()) throw input_error("l_divergence: distributions must share an alphabet");
  BayesResult bq = bayes_action(q, loss);
  BayesAction ap = bayes_action(p, loss).action;
  return expected_loss(q, ap, loss) - bq.entropy;
}

// I_L(Y;X) = H_L(Y) - H_L(Y|X) >= 0. Not symmetric in general; evaluate the
// reverse direction on joint.swapped().
inline double l_mutual_information(const JointDistribution& joint, const LossFunction& loss) {
  return l_entropy(joint.label_marginal(), loss) - l_conditional_entropy(joint, loss);
}

// I_L(Y;X|Z) = H_L(Y|Z) - H_L(Y|X,Z) >= 0.
inline double l_conditional_mutual_information(const TripleDistribution& triple, const LossFunction& loss) {
  return l_conditional_entropy(triple.joint_yz(), loss) - l_conditional_entropy(triple.joint_y_xz(), loss);
}

// Neyman chi-squared divergence sum_y (p(y)-q(y))^2 / q(y), with the 0^2/0 = 0
// convention. Requires p absolutely continuous w.r.t. q.
inline double chi2_divergence(const Distribution& p, const Distribution& q) {
  if (p.alphabet() != q.alphabet()) throw input_error("chi2_divergence: distributions must share an alphabet");
  double s = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (q.p(y) <= 0.0) {
      if (p.p(y) > 0.0)
        throw computation_error("chi2_divergence: p(y) > 0 where q(y) = 0 (absolute continuity violated)");
      continue;
    }
    double d = p.p(y) - q.p(y);
    s += d * d / q.p(y);
  }
  return s;
}

// I_{chi^2}(Y;Z|X) = E_{X,Z}[ D_{chi^2}(P_{Y|X,Z} || P_{Y|X}) ].
inline double chi2_conditional_mutual_information(const TripleDistribution& triple) {
  const std::size_t ny = triple.y_alphabet().size();
  const std::size_t nx = triple.x_alphabet().size();
  const std::size_t nz = triple.z_alphabet().size();
  double total = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    // P(x), P(y|x)
    double px = 0.0;
    std::vector<double> py_x(ny, 0.0);
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) {
        px += triple.p(y, x, z);
        py_x[y] += triple.p(y, x, z);
      }
    if (px <= 0.0) continue;
    for (double& v : py_x) v /= px;
    for (std::size_t z = 0; z < nz; ++z) {
      double pxz = 0.0;
      for (std::size_t y = 0; y < ny; ++y) pxz += triple.p(y, x, z);
      if (pxz <= 0.0) continue;
      double d = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        double pyxz = triple.p(y, x, z) / pxz;
        if (py_x[y] <= 0.0) {
          if (pyxz > 0.0)
            throw computation_error("chi2 conditional MI: inconsistent conditional support");
          continue;
        }
        double diff = pyxz - py_x[y];
        d += diff * diff / py_x[y];
      }
      total += pxz * d;
    }
  }
  return total;
}

// Smallest eps for which the triple is an eps-Markov chain Z -> X -> Y;
// exactly 0 iff Z -> X -> Y is Markov.
inline double epsilon_markov_coefficient(const TripleDistribution& triple) {
  double v = chi2_conditional_mutual_information(triple);
  return std::sqrt(v > 0.0 ? v : 0.0);
}

}  // namespace aoi

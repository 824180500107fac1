#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "aoi/distribution.hpp"
#include "aoi/errors.hpp"

namespace aoi {

// Analytic model of a stationary finite Markov chain V_t with the label taken
// as a delayed copy, Y_t = V_{t-d}. Joints over lagged observations are exact
// (transition-matrix powers), so identities can be tested without sampling
// noise.
class MarkovChainModel {
 public:
  // row-stochastic transition matrix, delay d >= 0
  MarkovChainModel(std::vector<std::vector<double>> transition, int delay)
      : transition_(std::move(transition)), delay_(delay) {
    n_ = transition_.size();
    if (n_ == 0) throw input_error("chain model: empty transition matrix");
    for (const auto& row : transition_) {
      if (row.size() != n_) throw input_error("chain model: transition matrix not square");
      double s = 0.0;
      for (double v : row) {
        if (!(v >= 0.0)) throw input_error("chain model: negative transition probability");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-9) throw input_error("chain model: transition row does not sum to 1");
    }
    if (delay_ < 0) throw input_error("chain model: delay must be >= 0");
    compute_stationary();
  }

  static MarkovChainModel symmetric_binary(double flip, int delay = 0) {
    return MarkovChainModel({{1.0 - flip, flip}, {flip, 1.0 - flip}}, delay);
  }

  std::size_t num_states() const { return n_; }
  int delay() const { return delay_; }
  const std::vector<double>& stationary() const { return pi_; }
  Alphabet state_alphabet() const { return Alphabet::integers(n_); }

  // k-step transition matrix P^k
  std::vector<std::vector<double>> power(int k) const {
    std::vector<std::vector<double>> r = identity();
    std::vector<std::vector<double>> base = transition_;
    while (k > 0) {
      if (k & 1) r = multiply(r, base);
      base = multiply(base, base);
      k >>= 1;
    }
    return r;
  }

  // Exact joint of (Y_0, X_{-theta}) = (V_{-d}, V_{-theta}).
  JointDistribution pair_joint(int theta) const {
    auto m = lagged_mass({delay_, theta});
    return JointDistribution(state_alphabet(), state_alphabet(), std::move(m));
  }

  // Exact joint of (Y_0, X_{-k}, X_{-k-1}) = (V_{-d}, V_{-k}, V_{-k-1}).
  TripleDistribution triple_joint(int k) const {
    auto m = lagged_mass({delay_, k, k + 1});
    return TripleDistribution(state_alphabet(), state_alphabet(), state_alphabet(), std::move(m));
  }

  // Joint mass of (V_{-lags[0]}, ..., V_{-lags[m-1]}), duplicates allowed.
  std::vector<double> lagged_mass(const std::vector<int>& lags) const {
    // distinct lags sorted from oldest (largest lag) to newest
    std::vector<int> distinct = lags;
    std::sort(distinct.begin(), distinct.end(), std::greater<int>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const std::size_t m = distinct.size();

    // transition powers between consecutive time points
    std::vector<std::vector<std::vector<double>>> steps;
    for (std::size_t i = 0; i + 1 < m; ++i) steps.push_back(power(distinct[i] - distinct[i + 1]));

    std::size_t total = 1;
    for (std::size_t i = 0; i < lags.size(); ++i) total *= n_;
    std::vector<double> mass(total, 0.0);

    // enumerate assignments of the distinct time points
    std::vector<std::size_t> assign(m, 0);
    while (true) {
      double prob = pi_[assign[0]];
      for (std::size_t i = 0; i + 1 < m && prob > 0.0; ++i) prob *= steps[i][assign[i]][assign[i + 1]];
      if (prob > 0.0) {
        std::size_t idx = 0;
        for (int lag : lags) {
          std::size_t pos = std::find(distinct.begin(), distinct.end(), lag) - distinct.begin();
          idx = idx * n_ + assign[pos];
        }
        mass[idx] += prob;
      }
      // odometer increment
      std::size_t i = m;
      while (i > 0) {
        --i;
        if (++assign[i] < n_) break;
        assign[i] = 0;
        if (i == 0) return mass;
      }
    }
  }

 private:
  std::vector<std::vector<double>> identity() const {
    std::vector<std::vector<double>> r(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) r[i][i] = 1.0;
    return r;
  }

  std::vector<std::vector<double>> multiply(const std::vector<std::vector<double>>& a,
                                            const std::vector<std::vector<double>>& b) const {
    std::vector<std::vector<double>> r(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) {
        double aik = a[i][k];
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < n_; ++j) r[i][j] += aik * b[k][j];
      }
    return r;
  }

  void compute_stationary() {
    pi_.assign(n_, 1.0 / static_cast<double>(n_));
    for (int iter = 0; iter < 100000; ++iter) {
      std::vector<double> next(n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) next[j] += pi_[i] * transition_[i][j];
      double diff = 0.0;
      for (std::size_t j = 0; j < n_; ++j) diff += std::abs(next[j] - pi_[j]);
      pi_.swap(next);
      if (diff < 1e-15) return;
    }
    throw computation_error("chain model: stationary distribution did not converge");
  }

  std::vector<std::vector<double>> transition_;
  int delay_;
  std::size_t n_ = 0;
  std::vector<double> pi_;
};

}  // namespace aoi

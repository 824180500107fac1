#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

inline constexpr double kMassTolerance = 1e-9;

// Ordered set of distinct discrete symbols; index <-> symbol is a bijection.
class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw input_error("alphabet must be non-empty");
    numeric_ok_ = true;
    numeric_.reserve(symbols_.size());
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (!index_.emplace(symbols_[i], i).second)
        throw input_error("duplicate symbol in alphabet: '" + symbols_[i] + "'");
      try {
        std::size_t pos = 0;
        double v = std::stod(symbols_[i], &pos);
        if (pos != symbols_[i].size()) throw std::invalid_argument(symbols_[i]);
        numeric_.push_back(v);
      } catch (const std::exception&) {
        numeric_ok_ = false;
      }
    }
  }

  // "0", "1", ..., "n-1"
  static Alphabet integers(std::size_t n) {
    std::vector<std::string> s;
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.push_back(std::to_string(i));
    return Alphabet(std::move(s));
  }

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(std::size_t i) const { return symbols_[i]; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::optional<std::size_t> index_of(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool numeric() const { return numeric_ok_; }

  double numeric_value(std::size_t i) const {
    if (!numeric_ok_) throw input_error("alphabet symbol '" + symbols_[i] + "' is not numeric");
    return numeric_[i];
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.symbols_ == b.symbols_; }
  friend bool operator!=(const Alphabet& a, const Alphabet& b) { return !(a == b); }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> numeric_;
  bool numeric_ok_ = false;
};

namespace detail {
inline void check_mass(const std::vector<double>& mass, const char* what) {
  double sum = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) throw input_error(std::string(what) + ": negative or NaN probability mass");
    sum += m;
  }
  if (std::abs(sum - 1.0) > kMassTolerance)
    throw input_error(std::string(what) + ": probability mass sums to " + std::to_string(sum));
}
}  // namespace detail

// Finite discrete probability distribution over an alphabet.
class Distribution {
 public:
  Distribution(Alphabet alphabet, std::vector<double> mass)
      : alphabet_(std::move(alphabet)), mass_(std::move(mass)) {
    if (mass_.size() != alphabet_.size()) throw input_error("distribution: mass size != alphabet size");
    detail::check_mass(mass_, "distribution");
  }

  static Distribution uniform(Alphabet alphabet) {
    std::vector<double> m(alphabet.size(), 1.0 / static_cast<double>(alphabet.size()));
    return Distribution(std::move(alphabet), std::move(m));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t size() const { return mass_.size(); }
  double p(std::size_t i) const { return mass_[i]; }
  const std::vector<double>& mass() const { return mass_; }

 private:
  Alphabet alphabet_;
  std::vector<double> mass_;
};

// Joint distribution of a label Y and a feature X; mass indexed y-major.
class JointDistribution {
 public:
  JointDistribution(Alphabet label_alphabet, Alphabet feature_alphabet, std::vector<double> mass)
      : label_(std::move(label_alphabet)), feature_(std::move(feature_alphabet)), mass_(std::move(mass)) {
    if (mass_.size() != label_.size() * feature_.size())
      throw input_error("joint distribution: mass size != |Y|*|X|");
    detail::check_mass(mass_, "joint distribution");
  }

  const Alphabet& label_alphabet() const { return label_; }
  const Alphabet& feature_alphabet() const { return feature_; }
  double p(std::size_t y, std::size_t x) const { return mass_[y * feature_.size() + x]; }

  Distribution label_marginal() const {
    std::vector<double> m(label_.size(), 0.0);
    for (std::size_t y = 0; y < label_.size(); ++y)
      for (std::size_t x = 0; x < feature_.size(); ++x) m[y] += p(y, x);
    return Distribution(label_, std::move(m));
  }

  Distribution feature_marginal() const {
    std::vector<double> m(feature_.size(), 0.0);
    for (std::size_t y = 0; y < label_.size(); ++y)
      for (std::size_t x = 0; x < feature_.size(); ++x) m[x] += p(y, x);
    return Distribution(feature_, std::move(m));
  }

  double feature_mass(std::size_t x) const {
    double s = 0.0;
    for (std::size_t y = 0; y < label_.size(); ++y) s += p(y, x);
    return s;
  }

  // P_{Y|X=x}; only defined when P_X(x) > 0.
  Distribution conditional_label(std::size_t x) const {
    double px = feature_mass(x);
    if (px <= 0.0) throw computation_error("conditional undefined: P_X(x) = 0");
    std::vector<double> m(label_.size());
    double sum = 0.0;
    for (std::size_t y = 0; y < label_.size(); ++y) {
      m[y] = p(y, x) / px;
      sum += m[y];
    }
    // renormalize rounding dust so the conditional is a valid distribution
    for (double& v : m) v /= sum;
    return Distribution(label_, std::move(m));
  }

  // Roles of label and feature exchanged.
  JointDistribution swapped() const {
    std::vector<double> m(mass_.size());
    for (std::size_t y = 0; y < label_.size(); ++y)
      for (std::size_t x = 0; x < feature_.size(); ++x) m[x * label_.size() + y] = p(y, x);
    return JointDistribution(feature_, label_, std::move(m));
  }

 private:
  Alphabet label_;
  Alphabet feature_;
  std::vector<double> mass_;
};

// Joint distribution of three variables (Y, X, Z).
class TripleDistribution {
 public:
  TripleDistribution(Alphabet y, Alphabet x, Alphabet z, std::vector<double> mass)
      : y_(std::move(y)), x_(std::move(x)), z_(std::move(z)), mass_(std::move(mass)) {
    if (mass_.size() != y_.size() * x_.size() * z_.size())
      throw input_error("triple distribution: mass size != |Y|*|X|*|Z|");
    detail::check_mass(mass_, "triple distribution");
  }

  const Alphabet& y_alphabet() const { return y_; }
  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& z_alphabet() const { return z_; }

  double p(std::size_t y, std::size_t x, std::size_t z) const {
    return mass_[(y * x_.size() + x) * z_.size() + z];
  }

  // (Y, X) with Z marginalized out.
  JointDistribution joint_yx() const {
    std::vector<double> m(y_.size() * x_.size(), 0.0);
    for (std::size_t y = 0; y < y_.size(); ++y)
      for (std::size_t x = 0; x < x_.size(); ++x)
        for (std::size_t z = 0; z < z_.size(); ++z) m[y * x_.size() + x] += p(y, x, z);
    return JointDistribution(y_, x_, std::move(m));
  }

  // (Y, Z) with X marginalized out.
  JointDistribution joint_yz() const {
    std::vector<double> m(y_.size() * z_.size(), 0.0);
    for (std::size_t y = 0; y < y_.size(); ++y)
      for (std::size_t x = 0; x < x_.size(); ++x)
        for (std::size_t z = 0; z < z_.size(); ++z) m[y * z_.size() + z] += p(y, x, z);
    return JointDistribution(y_, z_, std::move(m));
  }

  // (Y, (X,Z)) with the pair as a product-alphabet feature.
  JointDistribution joint_y_xz() const {
    std::vector<std::string> pair_symbols;
    pair_symbols.reserve(x_.size() * z_.size());
    for (std::size_t x = 0; x < x_.size(); ++x)
      for (std::size_t z = 0; z < z_.size(); ++z)
        pair_symbols.push_back(x_.symbol(x) + "|" + z_.symbol(z));
    std::vector<double> m(y_.size() * pair_symbols.size(), 0.0);
    for (std::size_t y = 0; y < y_.size(); ++y)
      for (std::size_t x = 0; x < x_.size(); ++x)
        for (std::size_t z = 0; z < z_.size(); ++z)
          m[y * pair_symbols.size() + x * z_.size() + z] = p(y, x, z);
    return JointDistribution(y_, Alphabet(std::move(pair_symbols)), std::move(m));
  }

  TripleDistribution swapped_yz() const {
    std::vector<double> m(mass_.size());
    for (std::size_t y = 0; y < y_.size(); ++y)
      for (std::size_t x = 0; x < x_.size(); ++x)
        for (std::size_t z = 0; z < z_.size(); ++z)
          m[(z * x_.size() + x) * y_.size() + y] = p(y, x, z);
    return TripleDistribution(z_, x_, y_, std::move(m));
  }

  TripleDistribution swapped_xz() const {
    std::vector<double> m(mass_.size());
    for (std::size_t y = 0; y < y_.size(); ++y)
      for (std::size_t x = 0; x < x_.size(); ++x)
        for (std::size_t z = 0; z < z_.size(); ++z)
          m[(y * z_.size() + z) * x_.size() + x] = p(y, x, z);
    return TripleDistribution(y_, z_, x_, std::move(m));
  }

 private:
  Alphabet y_;
  Alphabet x_;
  Alphabet z_;
  std::vector<double> mass_;
};

}  // namespace aoi

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aoi/csv.hpp"
#include "aoi/errors.hpp"
#include "aoi/freshness.hpp"

namespace aoi {

// Tabulated AoI penalty p(delta) for delta = 0..delta_max, extended beyond
// delta_max by holding the last value. Hold-last keeps |p| <= M everywhere,
// which the index theory requires.
class PenaltyCurve {
 public:
  explicit PenaltyCurve(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw input_error("penalty curve: need values for delta = 0..delta_max, delta_max >= 1");
    bound_ = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) throw input_error("penalty curve: non-finite value");
      bound_ = std::max(bound_, std::abs(v));
    }
  }

  int delta_max() const { return static_cast<int>(values_.size()) - 1; }
  double bound() const { return bound_; }  // M
  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  double last_value() const { return values_.back(); }  // hold-last plateau
  const std::vector<double>& table() const { return values_; }

  double value(long long delta) const {
    if (delta < 0) throw input_error("penalty curve: negative delta");
    std::size_t i = static_cast<std::size_t>(delta);
    return i < values_.size() ? values_[i] : values_.back();
  }

  bool nondecreasing() const {
    for (std::size_t i = 1; i < values_.size(); ++i)
      if (values_[i] < values_[i - 1]) return false;
    return true;
  }

 private:
  std::vector<double> values_;
  double bound_ = 0.0;
};

// CSV with header delta,penalty and contiguous delta from 0.
inline PenaltyCurve penalty_from_csv(const std::string& path) {
  auto rows = csv::read_file(path);
  if (rows.empty()) throw input_error(path + ": empty penalty file");
  const auto& header = rows.front().fields;
  if (header.size() != 2 || header[0] != "delta" || header[1] != "penalty")
    throw input_error(path + ":" + std::to_string(rows.front().line) + ": expected header delta,penalty");
  std::vector<double> values;
  long long expect = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 2)
      throw input_error(path + ":" + std::to_string(row.line) + ": expected two columns");
    long long delta = csv::parse_int(row.fields[0], path, row.line);
    if (delta != expect)
      throw input_error(path + ":" + std::to_string(row.line) + ": delta values must be contiguous from 0");
    ++expect;
    values.push_back(csv::parse_double(row.fields[1], path, row.line));
  }
  if (values.empty()) throw input_error(path + ": no penalty rows");
  return PenaltyCurve(std::move(values));
}

// p(delta) := inference-error curve value at delta.
inline PenaltyCurve penalty_from_inference_curve(const FreshnessCurve& curve) {
  return PenaltyCurve(curve.values());
}

}  // namespace aoi

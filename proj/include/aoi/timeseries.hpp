#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "aoi/csv.hpp"
#include "aoi/distribution.hpp"
#include "aoi/errors.hpp"

namespace aoi {

// Slotted time series of labels y_t and per-slot feature vectors V_t.
// The windowed feature X_{t-theta} = (V_{t-theta}, ..., V_{t-theta-u+1}).
class TimeSeriesDataset {
 public:
  TimeSeriesDataset(std::vector<std::string> labels, std::vector<std::string> slot_features, int window)
      : labels_(std::move(labels)), slot_features_(std::move(slot_features)), window_(window) {
    if (labels_.size() != slot_features_.size()) throw input_error("time series: labels/features misaligned");
    if (labels_.empty()) throw input_error("time series: empty dataset");
    if (window_ < 1) throw input_error("time series: window must be >= 1");
  }

  // CSV with header t,y,v1[,v2,...]; t contiguous from 0, one row per slot.
  static TimeSeriesDataset from_csv(const std::string& path, int window) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw input_error(path + ": empty time-series file");
    const auto& header = rows.front().fields;
    if (header.size() < 3 || header[0] != "t" || header[1] != "y")
      throw input_error(path + ":" + std::to_string(rows.front().line) + ": expected header t,y,v1[,v2,...]");
    std::vector<std::string> labels;
    std::vector<std::string> feats;
    long long expect = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.fields.size() != header.size())
        throw input_error(path + ":" + std::to_string(row.line) + ": wrong number of columns");
      long long t = csv::parse_int(row.fields[0], path, row.line);
      if (t != expect)
        throw input_error(path + ":" + std::to_string(row.line) + ": slot indices must be contiguous from 0");
      ++expect;
      labels.push_back(row.fields[1]);
      std::string v = row.fields[2];
      for (std::size_t c = 3; c < row.fields.size(); ++c) v += ";" + row.fields[c];
      feats.push_back(std::move(v));
    }
    return TimeSeriesDataset(std::move(labels), std::move(feats), window);
  }

  std::size_t length() const { return labels_.size(); }
  int window() const { return window_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // feature window symbol observed at slot s (covers slots s-u+1..s)
  std::string window_symbol(std::size_t s) const {
    std::string out = slot_features_[s];
    for (int k = 1; k < window_; ++k) out += "|" + slot_features_[s - static_cast<std::size_t>(k)];
    return out;
  }

  // first t for which (y_t, X_{t-theta}) is constructible
  std::size_t first_valid_t(int theta) const { return static_cast<std::size_t>(theta + window_ - 1); }

  // Empirical joint of (Y_t, X_{t-theta}) over t in [t_begin, length), all
  // windows equally weighted. Alphabets are fixed by the caller so that joints
  // built over different ranges or datasets stay comparable.
  JointDistribution pair_joint(int theta, const Alphabet& label_alpha, const Alphabet& feature_alpha,
                               std::size_t t_begin) const {
    if (t_begin < first_valid_t(theta)) t_begin = first_valid_t(theta);
    if (t_begin >= length())
      throw input_error("insufficient data for theta=" + std::to_string(theta));
    std::vector<double> mass(label_alpha.size() * feature_alpha.size(), 0.0);
    const double w = 1.0 / static_cast<double>(length() - t_begin);
    for (std::size_t t = t_begin; t < length(); ++t) {
      auto y = label_alpha.index_of(labels_[t]);
      auto x = feature_alpha.index_of(window_symbol(t - static_cast<std::size_t>(theta)));
      if (!y || !x) throw input_error("time series: symbol outside supplied alphabet");
      mass[*y * feature_alpha.size() + *x] += w;
    }
    return JointDistribution(label_alpha, feature_alpha, std::move(mass));
  }

  JointDistribution pair_joint(int theta) const {
    return pair_joint(theta, label_alphabet(), feature_alphabet(), first_valid_t(theta));
  }

  // Empirical joint of (Y_t, X_{t-k}, X_{t-k-1}).
  TripleDistribution triple_joint(int k, const Alphabet& label_alpha, const Alphabet& feature_alpha,
                                  std::size_t t_begin) const {
    if (t_begin < first_valid_t(k + 1)) t_begin = first_valid_t(k + 1);
    if (t_begin >= length()) throw input_error("insufficient data for theta=" + std::to_string(k + 1));
    const std::size_t nx = feature_alpha.size();
    std::vector<double> mass(label_alpha.size() * nx * nx, 0.0);
    const double w = 1.0 / static_cast<double>(length() - t_begin);
    for (std::size_t t = t_begin; t < length(); ++t) {
      auto y = label_alpha.index_of(labels_[t]);
      auto x = feature_alpha.index_of(window_symbol(t - static_cast<std::size_t>(k)));
      auto z = feature_alpha.index_of(window_symbol(t - static_cast<std::size_t>(k) - 1));
      if (!y || !x || !z) throw input_error("time series: symbol outside supplied alphabet");
      mass[(*y * nx + *x) * nx + *z] += w;
    }
    return TripleDistribution(label_alpha, feature_alpha, feature_alpha, std::move(mass));
  }

  Alphabet label_alphabet() const { return build_alphabet(labels_); }

  Alphabet feature_alphabet() const {
    std::vector<std::string> syms;
    syms.reserve(length());
    for (std::size_t s = static_cast<std::size_t>(window_ - 1); s < length(); ++s)
      syms.push_back(window_symbol(s));
    return build_alphabet(syms);
  }

  // Shared alphabets for two datasets (union of observed symbols).
  static Alphabet merged(const Alphabet& a, const Alphabet& b) {
    std::vector<std::string> syms = a.symbols();
    for (const auto& s : b.symbols()) syms.push_back(s);
    return build_alphabet(syms);
  }

 private:
  // Distinct symbols in a reproducible order: numeric when every symbol
  // parses as an integer, lexicographic otherwise.
  static Alphabet build_alphabet(const std::vector<std::string>& raw) {
    std::vector<std::string> syms = raw;
    std::sort(syms.begin(), syms.end());
    syms.erase(std::unique(syms.begin(), syms.end()), syms.end());
    bool all_int = true;
    for (const auto& s : syms) {
      try {
        std::size_t pos = 0;
        (void)std::stoll(s, &pos);
        if (pos != s.size()) all_int = false;
      } catch (const std::exception&) {
        all_int = false;
      }
      if (!all_int) break;
    }
    if (all_int)
      std::sort(syms.begin(), syms.end(),
                [](const std::string& a, const std::string& b) { return std::stoll(a) < std::stoll(b); });
    return Alphabet(std::move(syms));
  }

  std::vector<std::string> labels_;
  std::vector<std::string> slot_features_;  // per-slot feature symbol (columns joined)
  int window_;
};

}  // namespace aoi

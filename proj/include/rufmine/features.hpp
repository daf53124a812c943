#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rufmine/decision_table.hpp"

namespace rufmine {

// Daily bars, dates strictly increasing, closes positive.
struct PriceSeries {
  struct Bar {
    std::string date;  // ISO-8601
    double close = 0.0;
    std::optional<double> open, high, low, volume;
  };
  std::vector<Bar> bars;

  void validate() const;
};

// CSV columns: date,close[,open,high,low,volume] with a header row.
PriceSeries read_price_csv(const std::string& path);
PriceSeries parse_price_csv(const std::string& content);

// Per day t (needs k days of history and h days of lookahead):
//   f1 = k-day return, f2 = close / k-day moving average,
//   f3 = k-day daily-return volatility.
// The class label is the forward h-day return's rank bucket in 1..l, so the
// label histogram is uniform up to one object per bucket. Values are raw;
// scaling is a separate, train-fitted step.
DecisionTable derive_features(const PriceSeries& s, int window, int horizon, int classes,
                              Diagnostics* diag = nullptr);

// Gaussian blobs in three features whose centers sit on axis offsets, so
// one- and two-literal linguistic rules separate the classes once the
// separation is large enough. separation 0 collapses all centers.
DecisionTable make_synthetic(int per_class, int classes, double separation, uint64_t seed);

// Min-max scaler fitted on selected rows only (the training span); applying
// it never looks at the remaining rows.
struct MinMaxScaler {
  std::vector<double> min, max;

  static MinMaxScaler fit(const DecisionTable& t, const std::vector<size_t>& rows);
  DecisionTable apply(const DecisionTable& t) const;
};

}  // namespace rufmine

#include "rufmine/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "rufmine/rng.hpp"
#include "rufmine/util.hpp"

namespace rufmine {

void PriceSeries::validate() const {
  if (bars.empty()) throw ValidationError("price series is empty");
  for (size_t i = 0; i < bars.size(); ++i) {
    if (!(bars[i].close > 0.0))
      throw ValidationError("bar " + std::to_string(i) + ": close must be positive");
    if (i > 0 && !(bars[i - 1].date < bars[i].date))
      throw ValidationError("bar " + std::to_string(i) + ": dates must be strictly increasing");
  }
}

PriceSeries parse_price_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw IoError("price CSV is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header[0]) != "date" || trim(header[1]) != "close")
    throw IoError("price CSV must start with columns date,close");

  PriceSeries s;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() < 2)
      throw IoError("line " + std::to_string(line_no) + ": expected at least date,close");
    PriceSeries::Bar bar;
    bar.date = trim(cells[0]);
    try {
      bar.close = std::stod(trim(cells[1]));
      auto opt = [&](size_t idx) -> std::optional<double> {
        if (idx >= cells.size() || trim(cells[idx]).empty()) return std::nullopt;
        return std::stod(trim(cells[idx]));
      };
      bar.open = opt(2);
      bar.high = opt(3);
      bar.low = opt(4);
      bar.volume = opt(5);
    } catch (const std::exception&) {
      throw IoError("line " + std::to_string(line_no) + ": bad number");
    }
    s.bars.push_back(std::move(bar));
  }
  s.validate();
  return s;
}

PriceSeries read_price_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_price_csv(buf.str());
}

DecisionTable derive_features(const PriceSeries& s, int window, int horizon, int classes,
                              Diagnostics* diag) {
  s.validate();
  if (window < 1 || horizon < 1) throw ParameterError("window and horizon must be >= 1");
  if (classes < 2) throw ParameterError("at least two classes required");
  const size_t n = s.bars.size();
  if (n <= static_cast<size_t>(window + horizon))
    throw ValidationError("price series has " + std::to_string(n) +
                          " bars; needs more than window + horizon = " +
                          std::to_string(window + horizon));

  DecisionTable t;
  t.base.attribute_names = {"f1", "f2", "f3"};

  std::vector<double> forward_return;
  for (size_t i = static_cast<size_t>(window); i + static_cast<size_t>(horizon) < n; ++i) {
    const double close = s.bars[i].close;
    const double past = s.bars[i - static_cast<size_t>(window)].close;
    const double f1 = close / past - 1.0;

    double sma = 0.0;
    for (size_t j = i + 1 - static_cast<size_t>(window); j <= i; ++j) sma += s.bars[j].close;
    sma /= static_cast<double>(window);
    const double f2 = close / sma;

    // Population SD of the window's daily returns.
    double mean_r = 0.0;
    std::vector<double> rets;
    for (size_t j = i + 1 - static_cast<size_t>(window); j <= i; ++j) {
      const double r = s.bars[j].close / s.bars[j - 1].close - 1.0;
      rets.push_back(r);
      mean_r += r;
    }
    mean_r /= static_cast<double>(rets.size());
    double var = 0.0;
    for (double r : rets) var += (r - mean_r) * (r - mean_r);
    const double f3 = std::sqrt(var / static_cast<double>(rets.size()));

    t.base.rows.push_back({f1, f2, f3});
    forward_return.push_back(s.bars[i + static_cast<size_t>(horizon)].close / close - 1.0);
  }

  // Rank bucketing keeps the label histogram uniform up to one object.
  const size_t rows = t.base.rows.size();
  std::vector<size_t> order(rows);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (forward_return[a] != forward_return[b]) return forward_return[a] < forward_return[b];
    return a < b;
  });
  t.decisions.assign(rows, 0);
  for (size_t rank = 0; rank < rows; ++rank)
    t.decisions[order[rank]] =
        static_cast<int>(rank * static_cast<size_t>(classes) / rows) + 1;

  for (size_t a = 0; a < 3; ++a) {
    double lo = t.base.rows[0][a], hi = t.base.rows[0][a];
    for (const auto& row : t.base.rows) {
      lo = std::min(lo, row[a]);
      hi = std::max(hi, row[a]);
    }
    if (lo == hi)
      warn_into(diag, "degenerate feature '" + t.base.attribute_names[a] +
                          "': constant over the derived table");
  }

  t.validate();
  return t;
}

DecisionTable make_synthetic(int per_class, int classes, double separation, uint64_t seed) {
  if (classes < 2) throw ParameterError("at least two classes required");
  if (per_class < 1) throw ParameterError("per_class must be >= 1");
  if (separation < 0.0) throw ParameterError("separation must be >= 0");

  // Class centers sit on a low/mid/high level grid arranged so every
  // feature's marginal is balanced across the three levels (the first six
  // rows form a Latin square). Balanced marginals keep the quartile-seeded
  // linguistic terms aligned with the blob levels, which is what makes
  // one- and two-literal rules recoverable.
  static const int levels[][3] = {
      {0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {1, 0, 2}, {2, 1, 0},
      {0, 0, 0}, {2, 2, 2}, {0, 0, 2}, {2, 2, 0}, {0, 2, 0}, {2, 0, 2},
  };
  const int max_classes = static_cast<int>(sizeof(levels) / sizeof(levels[0]));
  if (classes > max_classes)
    throw ParameterError("synthetic generator supports at most " + std::to_string(max_classes) +
                         " classes");

  const double step = 0.12 * separation;
  const double sigma = 0.08;

  Rng rng(seed);
  DecisionTable t;
  t.base.attribute_names = {"f1", "f2", "f3"};
  for (int k = 0; k < classes; ++k) {
    for (int i = 0; i < per_class; ++i) {
      std::vector<double> row(3);
      for (int j = 0; j < 3; ++j)
        row[static_cast<size_t>(j)] =
            0.5 + step * static_cast<double>(levels[k][j] - 1) + sigma * rng.gaussian();
      t.base.rows.push_back(std::move(row));
      t.decisions.push_back(k + 1);
    }
  }
  t.validate();
  return t;
}

MinMaxScaler MinMaxScaler::fit(const DecisionTable& t, const std::vector<size_t>& rows) {
  if (rows.empty()) throw ParameterError("scaler: no rows to fit on");
  const size_t m = t.attribute_count();
  MinMaxScaler s;
  s.min.assign(m, std::numeric_limits<double>::infinity());
  s.max.assign(m, -std::numeric_limits<double>::infinity());
  for (size_t idx : rows) {
    if (idx >= t.object_count()) throw ParameterError("scaler: row index out of range");
    for (size_t a = 0; a < m; ++a) {
      s.min[a] = std::min(s.min[a], t.base.rows[idx][a]);
      s.max[a] = std::max(s.max[a], t.base.rows[idx][a]);
    }
  }
  return s;
}

DecisionTable MinMaxScaler::apply(const DecisionTable& t) const {
  if (min.size() != t.attribute_count()) throw ParameterError("scaler: attribute count mismatch");
  DecisionTable out = t;
  for (auto& row : out.base.rows) {
    for (size_t a = 0; a < row.size(); ++a) {
      const double range = max[a] - min[a];
      row[a] = range > 0.0 ? (row[a] - min[a]) / range : 0.5;
    }
  }
  return out;
}

}  // namespace rufmine

#include "rufmine/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rufmine {

double pi_membership(double x, const PiParams& p) {
  if (!(p.radius > 0.0)) throw ParameterError("pi-function radius must be > 0");
  const double d = std::abs(x - p.center);
  if (d >= p.radius) return 0.0;
  const double r = d / p.radius;
  if (d <= 0.5 * p.radius) return 1.0 - 2.0 * r * r;
  const double s = 1.0 - r;
  return 2.0 * s * s;
}

const PiParams& FuzzyEncoding::term(size_t feature, int term_index) const {
  const auto& f = features.at(feature);
  switch (term_index) {
    case 0: return f.low;
    case 1: return f.medium;
    default: return f.high;
  }
}

std::vector<double> fuzzify(std::span<const double> pattern, const FuzzyEncoding& enc) {
  if (pattern.size() != enc.feature_count())
    throw ParameterError("fuzzify: pattern has " + std::to_string(pattern.size()) +
                         " features, encoding expects " + std::to_string(enc.feature_count()));
  std::vector<double> out;
  out.reserve(3 * pattern.size());
  for (size_t j = 0; j < pattern.size(); ++j) {
    const auto& f = enc.features[j];
    out.push_back(pi_membership(pattern[j], f.low));
    out.push_back(pi_membership(pattern[j], f.medium));
    out.push_back(pi_membership(pattern[j], f.high));
  }
  return out;
}

namespace {

// Linear-interpolated percentile of a sorted sample.
double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

FuzzyEncoding init_encoding(const DecisionTable& train) {
  train.validate();
  if (train.base.has_missing()) throw ValidationError("init_encoding requires a complete table");

  FuzzyEncoding enc;
  const size_t n = train.attribute_count();
  for (size_t j = 0; j < n; ++j) {
    std::vector<double> values;
    values.reserve(train.object_count());
    for (const auto& row : train.base.rows) values.push_back(row[j]);
    std::sort(values.begin(), values.end());
    const double range = values.back() - values.front();
    if (range <= 0.0)
      throw ValidationError("degenerate feature '" + train.base.attribute_names[j] +
                            "': constant over the training set");

    const double c_low = percentile(values, 0.25);
    const double c_med = percentile(values, 0.50);
    const double c_high = percentile(values, 0.75);

    // Radius floor keeps tie-heavy features usable; only a fully constant
    // feature is an error.
    const double floor_r = 1e-3 * range;
    const double r_low = std::max(c_med - c_low, floor_r);
    const double r_high = std::max(c_high - c_med, floor_r);
    const double r_med = std::max(0.5 * (r_low + r_high), floor_r);

    enc.features.push_back({{c_low, r_low}, {c_med, r_med}, {c_high, r_high}});
  }
  return enc;
}

ClassStatistics compute_class_statistics(const DecisionTable& train) {
  train.validate();
  if (train.base.has_missing())
    throw ValidationError("class statistics require a complete table");
  const size_t n = train.attribute_count();
  const int l = train.class_count();

  std::vector<double> global_min(n, std::numeric_limits<double>::infinity());
  std::vector<double> global_max(n, -std::numeric_limits<double>::infinity());
  for (const auto& row : train.base.rows)
    for (size_t j = 0; j < n; ++j) {
      global_min[j] = std::min(global_min[j], row[j]);
      global_max[j] = std::max(global_max[j], row[j]);
    }

  ClassStatistics stats;
  stats.mean.assign(static_cast<size_t>(l), std::vector<double>(n, 0.0));
  stats.spread.assign(static_cast<size_t>(l), std::vector<double>(n, 0.0));
  std::vector<size_t> counts(static_cast<size_t>(l), 0);

  for (size_t i = 0; i < train.object_count(); ++i) {
    const size_t k = static_cast<size_t>(train.decisions[i] - 1);
    ++counts[k];
    for (size_t j = 0; j < n; ++j) stats.mean[k][j] += train.base.rows[i][j];
  }
  for (int k = 0; k < l; ++k)
    for (size_t j = 0; j < n; ++j) stats.mean[static_cast<size_t>(k)][j] /= static_cast<double>(counts[static_cast<size_t>(k)]);

  for (size_t i = 0; i < train.object_count(); ++i) {
    const size_t k = static_cast<size_t>(train.decisions[i] - 1);
    for (size_t j = 0; j < n; ++j) {
      const double d = train.base.rows[i][j] - stats.mean[k][j];
      stats.spread[k][j] += d * d;
    }
  }
  for (int k = 0; k < l; ++k) {
    for (size_t j = 0; j < n; ++j) {
      auto& v = stats.spread[static_cast<size_t>(k)][j];
      v = std::sqrt(v / static_cast<double>(counts[static_cast<size_t>(k)]));
      if (v <= 0.0) {
        const double range = global_max[j] - global_min[j];
        v = 1e-6 * (range > 0.0 ? range : 1.0);
      }
    }
  }
  return stats;
}

double weighted_distance(std::span<const double> pattern, const ClassStatistics& stats, int k) {
  if (k < 1 || static_cast<size_t>(k) > stats.class_count())
    throw ParameterError("weighted_distance: class " + std::to_string(k) + " out of range");
  const auto& mean = stats.mean[static_cast<size_t>(k - 1)];
  const auto& spread = stats.spread[static_cast<size_t>(k - 1)];
  if (pattern.size() != mean.size())
    throw ParameterError("weighted_distance: dimension mismatch");
  double sum = 0.0;
  for (size_t j = 0; j < pattern.size(); ++j) {
    const double z = (pattern[j] - mean[j]) / spread[j];
    sum += z * z;
  }
  return std::sqrt(sum);
}

FuzzyGenerators init_generators(const DecisionTable& train, const ClassStatistics& stats) {
  double sum = 0.0;
  for (size_t i = 0; i < train.object_count(); ++i)
    sum += weighted_distance(train.base.rows[i], stats, train.decisions[i]);
  FuzzyGenerators gen;
  gen.f_d = std::max(sum / static_cast<double>(train.object_count()), 1e-6);
  gen.f_e = 1.0;
  return gen;
}

std::vector<double> class_membership(std::span<const double> pattern, const ClassStatistics& stats,
                                     const FuzzyGenerators& gen) {
  if (!(gen.f_d > 0.0) || !(gen.f_e > 0.0))
    throw ParameterError("fuzzy generators must be positive");
  std::vector<double> mu(stats.class_count(), 0.0);
  for (size_t k = 0; k < stats.class_count(); ++k) {
    const double z = weighted_distance(pattern, stats, static_cast<int>(k) + 1);
    mu[k] = 1.0 / (1.0 + std::pow(z / gen.f_d, gen.f_e));
  }
  return mu;
}

namespace {

nlohmann::json pi_to_json(const PiParams& p) {
  return {{"c", p.center}, {"lambda", p.radius}};
}

PiParams pi_from_json(const nlohmann::json& j) {
  PiParams p;
  p.center = j.at("c").get<double>();
  p.radius = j.at("lambda").get<double>();
  return p;
}

}  // namespace

std::string encoding_to_json(const FuzzyEncoding& enc, const FuzzyGenerators& gen) {
  nlohmann::json root;
  root["features"] = nlohmann::json::array();
  for (const auto& f : enc.features) {
    nlohmann::json e;
    e["L"] = pi_to_json(f.low);
    e["M"] = pi_to_json(f.medium);
    e["H"] = pi_to_json(f.high);
    root["features"].push_back(e);
  }
  root["generators"] = {{"f_d", gen.f_d}, {"f_e", gen.f_e}};
  return root.dump(2) + "\n";
}

void write_encoding_json(const FuzzyEncoding& enc, const FuzzyGenerators& gen,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << encoding_to_json(enc, gen);
}

void parse_encoding_json(const std::string& content, FuzzyEncoding& enc, FuzzyGenerators& gen) {
  nlohmann::json root = nlohmann::json::parse(content);
  enc.features.clear();
  for (const auto& e : root.at("features"))
    enc.features.push_back({pi_from_json(e.at("L")), pi_from_json(e.at("M")), pi_from_json(e.at("H"))});
  gen.f_d = root.at("generators").at("f_d").get<double>();
  gen.f_e = root.at("generators").at("f_e").get<double>();
}

void read_encoding_json(const std::string& path, FuzzyEncoding& enc, FuzzyGenerators& gen) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  parse_encoding_json(buf.str(), enc, gen);
}

}  // namespace rufmine

#include "rufmine/metrics.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace rufmine {

ConfusionMatrix::ConfusionMatrix(int l) : classes(l) {
  counts.assign(static_cast<size_t>(l) * static_cast<size_t>(l), 0);
  no_fire.assign(static_cast<size_t>(l), 0);
}

void ConfusionMatrix::add(int actual, int predicted) {
  if (actual < 1 || actual > classes) throw ParameterError("actual class out of range");
  if (predicted == 0) {
    no_fire[static_cast<size_t>(actual - 1)]++;
    return;
  }
  if (predicted < 1 || predicted > classes) throw ParameterError("predicted class out of range");
  counts[static_cast<size_t>(actual - 1) * static_cast<size_t>(classes) +
         static_cast<size_t>(predicted - 1)]++;
}

int64_t ConfusionMatrix::at(int actual, int predicted) const {
  return counts[static_cast<size_t>(actual - 1) * static_cast<size_t>(classes) +
                static_cast<size_t>(predicted - 1)];
}

int64_t ConfusionMatrix::row_sum(int actual) const {
  int64_t s = 0;
  for (int j = 1; j <= classes; ++j) s += at(actual, j);
  return s;
}

int64_t ConfusionMatrix::column_sum(int predicted) const {
  int64_t s = 0;
  for (int i = 1; i <= classes; ++i) s += at(i, predicted);
  return s;
}

int64_t ConfusionMatrix::total() const {
  int64_t s = 0;
  for (int64_t c : counts) s += c;
  return s;
}

int64_t ConfusionMatrix::total_no_fire() const {
  int64_t s = 0;
  for (int64_t c : no_fire) s += c;
  return s;
}

void ConfusionMatrix::validate() const {
  if (classes < 1) throw ValidationError("confusion matrix needs at least one class");
  for (int64_t c : counts)
    if (c < 0) throw ValidationError("negative count");
}

PerClassReport accuracy(const ConfusionMatrix& m) {
  m.validate();
  PerClassReport r;
  int64_t correct = 0, seen = 0;
  for (int i = 1; i <= m.classes; ++i) {
    const int64_t row = m.row_sum(i);
    if (row == 0) {
      r.per_class.push_back(std::nullopt);
      continue;
    }
    correct += m.at(i, i);
    seen += row;
    r.per_class.push_back(100.0 * static_cast<double>(m.at(i, i)) / static_cast<double>(row));
  }
  if (seen > 0) r.overall = 100.0 * static_cast<double>(correct) / static_cast<double>(seen);
  return r;
}

std::vector<std::optional<double>> users_accuracy(const ConfusionMatrix& m) {
  m.validate();
  std::vector<std::optional<double>> out;
  for (int i = 1; i <= m.classes; ++i) {
    const int64_t col = m.column_sum(i);
    if (col == 0) {
      out.push_back(std::nullopt);
      continue;
    }
    out.push_back(static_cast<double>(m.at(i, i)) / static_cast<double>(col));
  }
  return out;
}

PerClassReport kappa(const ConfusionMatrix& m) {
  m.validate();
  const double n = static_cast<double>(m.total());
  if (n <= 0.0) throw ValidationError("kappa needs a nonempty matrix");
  PerClassReport r;
  double num_sum = 0.0, den_sum = 0.0;
  for (int i = 1; i <= m.classes; ++i) {
    const double ni = static_cast<double>(m.row_sum(i));
    const double ci = static_cast<double>(m.column_sum(i));
    const double nic = static_cast<double>(m.at(i, i));
    const double num = n * nic - ni * ci;
    const double den = n * ni - ni * ci;
    if (den == 0.0) {
      r.per_class.push_back(std::nullopt);
      continue;
    }
    r.per_class.push_back(num / den);
    num_sum += num;
    den_sum += den;
  }
  if (den_sum != 0.0) r.overall = num_sum / den_sum;
  return r;
}

ConfusionIndexReport confusion_index(const ConfusionMatrix& m) {
  m.validate();
  if (m.classes < 2) throw ParameterError("confusion index needs at least two classes");
  const int64_t cells = static_cast<int64_t>(m.classes) * (m.classes - 1);
  int64_t off_sum = 0;
  for (int i = 1; i <= m.classes; ++i)
    for (int j = 1; j <= m.classes; ++j)
      if (i != j) off_sum += m.at(i, j);
  const double mean = static_cast<double>(off_sum) / static_cast<double>(cells);

  ConfusionIndexReport r;
  r.degenerate = off_sum == 0;
  int64_t above = 0;
  for (int i = 1; i <= m.classes; ++i)
    for (int j = 1; j <= m.classes; ++j)
      if (i != j && static_cast<double>(m.at(i, j)) >= mean) ++above;
  r.value = static_cast<double>(above) / static_cast<double>(m.classes);
  return r;
}

double behrens_fisher(double mean1, double sd1, int n1, double mean2, double sd2, int n2) {
  if (n1 < 2 || n2 < 2) throw ParameterError("behrens_fisher needs n >= 2 per sample");
  if (sd1 < 0.0 || sd2 < 0.0) throw ParameterError("behrens_fisher needs nonnegative spreads");
  if (sd1 == 0.0 && sd2 == 0.0)
    throw NumericError("behrens_fisher undefined: both sample spreads are zero");
  const double var = sd1 * sd1 / static_cast<double>(n1) + sd2 * sd2 / static_cast<double>(n2);
  return (mean1 - mean2) / std::sqrt(var);
}

namespace {

bool network_asserts(const NetworkOutput& out) { return out.classified; }

}  // namespace

double fidelity(const ModularNetwork& net, std::span<const ExtractedRule> rules,
                std::span<const std::vector<double>> fuzzified_test, double crispness) {
  if (fuzzified_test.empty()) throw ParameterError("fidelity: empty test set");
  size_t agree = 0;
  for (const auto& pattern : fuzzified_test) {
    const NetworkOutput out = net.forward(pattern);
    const InferResult fired =
        rules.empty() ? InferResult{} : infer(rules, pattern, crispness);
    if (fired.fired()) {
      if (fired.class_label == out.predicted_class) ++agree;
    } else {
      if (!network_asserts(out)) ++agree;
    }
  }
  return 100.0 * static_cast<double>(agree) / static_cast<double>(fuzzified_test.size());
}

double cover_uncovered(std::span<const ExtractedRule> rules,
                       std::span<const std::vector<double>> fuzzified_test, double crispness) {
  if (fuzzified_test.empty()) throw ParameterError("cover: empty test set");
  size_t missed = 0;
  for (const auto& pattern : fuzzified_test) {
    const InferResult fired =
        rules.empty() ? InferResult{} : infer(rules, pattern, crispness);
    if (!fired.fired()) ++missed;
  }
  return 100.0 * static_cast<double>(missed) / static_cast<double>(fuzzified_test.size());
}

namespace {

nlohmann::json optional_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::optional<double> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json optionals_to_json(const std::vector<std::optional<double>>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& x : v) arr.push_back(optional_to_json(x));
  return arr;
}

std::vector<std::optional<double>> optionals_from_json(const nlohmann::json& j) {
  std::vector<std::optional<double>> out;
  for (const auto& e : j) out.push_back(optional_from_json(e));
  return out;
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::json root;
  root["model"] = model;
  root["accuracy"] = optional_to_json(accuracy);
  root["accuracy_per_class"] = optionals_to_json(accuracy_per_class);
  root["network_accuracy"] = optional_to_json(network_accuracy);
  root["users_accuracy"] = optionals_to_json(users_accuracy);
  root["kappa"] = optional_to_json(kappa);
  root["kappa_per_class"] = optionals_to_json(kappa_per_class);
  root["fidelity"] = fidelity;
  root["conf"] = conf;
  root["conf_degenerate"] = conf_degenerate;
  root["uncovered"] = uncovered;
  root["rules"] = rules;
  root["cpu_sec"] = cpu_sec;
  root["certainty_mean"] = certainty_mean;
  root["certainty_min"] = certainty_min;
  return root.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(const std::string& content) {
  nlohmann::json root = nlohmann::json::parse(content);
  MetricsReport r;
  r.model = root.at("model").get<std::string>();
  r.accuracy = optional_from_json(root.at("accuracy"));
  r.accuracy_per_class = optionals_from_json(root.at("accuracy_per_class"));
  r.network_accuracy = optional_from_json(root.at("network_accuracy"));
  r.users_accuracy = optionals_from_json(root.at("users_accuracy"));
  r.kappa = optional_from_json(root.at("kappa"));
  r.kappa_per_class = optionals_from_json(root.at("kappa_per_class"));
  r.fidelity = root.at("fidelity").get<double>();
  r.conf = root.at("conf").get<double>();
  r.conf_degenerate = root.at("conf_degenerate").get<bool>();
  r.uncovered = root.at("uncovered").get<double>();
  r.rules = root.at("rules").get<int64_t>();
  r.cpu_sec = root.at("cpu_sec").get<double>();
  r.certainty_mean = root.at("certainty_mean").get<double>();
  r.certainty_min = root.at("certainty_min").get<double>();
  return r;
}

void MetricsReport::write_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_json();
}

}  // namespace rufmine

#include "rufmine/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rufmine/evolution.hpp"
#include "rufmine/extraction.hpp"
#include "rufmine/features.hpp"
#include "rufmine/fuzzy.hpp"
#include "rufmine/rough.hpp"
#include "rufmine/util.hpp"

namespace rufmine {

namespace fs = std::filesystem;

Model model_from_string(const std::string& s) {
  if (s == "S") return Model::S;
  if (s == "O") return Model::O;
  if (s == "F") return Model::F;
  if (s == "R") return Model::R;
  if (s == "FM") return Model::FM;
  throw ParameterError("unknown model '" + s + "' (expected S|O|F|R|FM)");
}

std::string model_to_string(Model m) {
  switch (m) {
    case Model::S: return "S";
    case Model::O: return "O";
    case Model::F: return "F";
    case Model::R: return "R";
    case Model::FM: return "FM";
  }
  return "?";
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Ingest: return "ingest";
    case Phase::Preprocess: return "preprocess";
    case Phase::Analysis: return "analysis";
    case Phase::Rules: return "rules";
    case Phase::Classification: return "classification";
    case Phase::Extraction: return "extraction";
    case Phase::Evaluation: return "evaluation";
  }
  return "?";
}

void PipelineConfig::validate() const {
  if (window < 1 || horizon < 1) throw ParameterError("window and horizon must be >= 1");
  if (classes < 2) throw ParameterError("classes must be >= 2");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ParameterError("fraction must lie in (0,1)");
  if (input_kind != "prices" && input_kind != "table")
    throw ParameterError("input_kind must be prices|table");
  completion_policy_from_string(completion);
  if (th && !(*th > 0.0 && *th < 1.0)) throw ParameterError("th must lie in (0,1)");
  if (!(crispness > 0.0 && crispness < 1.0)) throw ParameterError("crispness must lie in (0,1)");
  if (max_antecedent < 1 || max_rules < 1 || encode_max_conjuncts < 1 || rules_per_class < 1)
    throw ParameterError("rule budgets must be >= 1");
  if (hidden1 < 1 || hidden2 < 1 || fm_hidden_per_class < 1)
    throw ParameterError("hidden sizes must be >= 1");
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (rate <= 0.0) throw ParameterError("rate must be > 0");
  if (decay < 0.0) throw ParameterError("decay must be >= 0");
  ga.validate();
}

std::string PipelineConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["input"] = input;
  kv["input_kind"] = input_kind;
  kv["window"] = std::to_string(window);
  kv["horizon"] = std::to_string(horizon);
  kv["classes"] = std::to_string(classes);
  kv["fraction"] = format_double(fraction);
  kv["completion"] = completion;
  kv["th"] = th ? format_double(*th) : "adaptive";
  kv["crispness"] = format_double(crispness);
  kv["max_antecedent"] = std::to_string(max_antecedent);
  kv["max_rules"] = std::to_string(max_rules);
  kv["encode_max_conjuncts"] = std::to_string(encode_max_conjuncts);
  kv["rules_per_class"] = std::to_string(rules_per_class);
  kv["hidden1"] = std::to_string(hidden1);
  kv["hidden2"] = std::to_string(hidden2);
  kv["fm_hidden_per_class"] = std::to_string(fm_hidden_per_class);
  kv["epochs"] = std::to_string(epochs);
  kv["rate"] = format_double(rate);
  kv["decay"] = format_double(decay);
  kv["ga.population"] = std::to_string(ga.population);
  kv["ga.crossover"] = format_double(ga.crossover_prob);
  kv["ga.pmut_max"] = format_double(ga.pmut_max);
  kv["ga.pmut_min"] = format_double(ga.pmut_min);
  kv["ga.intra_divisor"] = format_double(ga.intra_divisor);
  kv["ga.alpha1"] = format_double(ga.alpha1);
  kv["ga.alpha2"] = format_double(ga.alpha2);
  kv["ga.stage1_sweeps"] = std::to_string(ga.stage1_sweeps);
  kv["ga.generations"] = std::to_string(ga.generations);
  kv["ga.combo_cap"] = std::to_string(ga.combo_cap);
  kv["ga.inter_weight_range"] = format_double(ga.inter_weight_range);
  kv["ga.perturb_sigma"] = format_double(ga.perturb_sigma);
  kv["ga.parallel"] = ga.parallel ? "true" : "false";
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    auto as_int = [&]() { return std::stoi(value); };
    auto as_double = [&]() { return std::stod(value); };
    auto as_bool = [&]() {
      if (value == "true") return true;
      if (value == "false") return false;
      throw ParameterError("config line " + std::to_string(line_no) + ": expected true|false");
    };

    try {
      if (key == "input") cfg.input = value;
      else if (key == "input_kind") cfg.input_kind = value;
      else if (key == "window") cfg.window = as_int();
      else if (key == "horizon") cfg.horizon = as_int();
      else if (key == "classes") cfg.classes = as_int();
      else if (key == "fraction") cfg.fraction = as_double();
      else if (key == "completion") cfg.completion = value;
      else if (key == "th") cfg.th = value == "adaptive" ? std::optional<double>{} : std::optional<double>{as_double()};
      else if (key == "crispness") cfg.crispness = as_double();
      else if (key == "max_antecedent") cfg.max_antecedent = as_int();
      else if (key == "max_rules") cfg.max_rules = as_int();
      else if (key == "encode_max_conjuncts") cfg.encode_max_conjuncts = as_int();
      else if (key == "rules_per_class") cfg.rules_per_class = as_int();
      else if (key == "hidden1") cfg.hidden1 = as_int();
      else if (key == "hidden2") cfg.hidden2 = as_int();
      else if (key == "fm_hidden_per_class") cfg.fm_hidden_per_class = as_int();
      else if (key == "epochs") cfg.epochs = as_int();
      else if (key == "rate") cfg.rate = as_double();
      else if (key == "decay") cfg.decay = as_double();
      else if (key == "ga.population") cfg.ga.population = as_int();
      else if (key == "ga.crossover") cfg.ga.crossover_prob = as_double();
      else if (key == "ga.pmut_max") cfg.ga.pmut_max = as_double();
      else if (key == "ga.pmut_min") cfg.ga.pmut_min = as_double();
      else if (key == "ga.intra_divisor") cfg.ga.intra_divisor = as_double();
      else if (key == "ga.alpha1") cfg.ga.alpha1 = as_double();
      else if (key == "ga.alpha2") cfg.ga.alpha2 = as_double();
      else if (key == "ga.stage1_sweeps") cfg.ga.stage1_sweeps = as_int();
      else if (key == "ga.generations") cfg.ga.generations = as_int();
      else if (key == "ga.combo_cap") cfg.ga.combo_cap = as_int();
      else if (key == "ga.inter_weight_range") cfg.ga.inter_weight_range = as_double();
      else if (key == "ga.perturb_sigma") cfg.ga.perturb_sigma = as_double();
      else if (key == "ga.parallel") cfg.ga.parallel = as_bool();
      else
        throw ParameterError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const ParameterError&) {
      throw;
    } catch (const std::exception&) {
      throw ParameterError("config line " + std::to_string(line_no) + ": bad value '" + value + "'");
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_hash(const PipelineConfig& cfg) { return hex64(fnv1a64(cfg.canonical())); }

namespace {

constexpr const char* kVersion = "0.1.0";

struct PhaseScope {
  // Tracks the phase in flight via the run.partial marker.
  fs::path marker;
  Phase current = Phase::Ingest;

  void enter(Phase p) {
    current = p;
    std::ofstream out(marker, std::ios::binary);
    out << phase_name(p) << "\n";
  }
};

std::vector<std::vector<double>> fuzzify_rows(const DecisionTable& t, const FuzzyEncoding& enc) {
  std::vector<std::vector<double>> out;
  out.reserve(t.object_count());
  for (const auto& row : t.base.rows) out.push_back(fuzzify(row, enc));
  return out;
}

DecisionTable table_from_indices(const DecisionTable& source, const std::vector<size_t>& rows) {
  DecisionTable out;
  out.base.attribute_names = source.base.attribute_names;
  for (size_t idx : rows) {
    out.base.rows.push_back(source.base.rows[idx]);
    out.decisions.push_back(source.decisions[idx]);
  }
  return out;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, uint64_t seed, const std::string& out_dir,
                            Model model) {
  cfg.validate();
  fs::create_directories(out_dir);
  PhaseScope scope{fs::path(out_dir) / "run.partial"};

  PipelineResult result;
  result.out_dir = out_dir;
  Diagnostics& diag = result.diag;

  auto guard = [&](Phase p, auto&& fn) {
    scope.enter(p);
    try {
      fn();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(p, e.what());
    }
  };

  // --- ingest ---------------------------------------------------------
  DecisionTable raw_table;
  guard(Phase::Ingest, [&] {
    if (cfg.input.empty()) throw ParameterError("config has no input path");
    if (cfg.input_kind == "prices") {
      const PriceSeries series = read_price_csv(cfg.input);
      raw_table = derive_features(series, cfg.window, cfg.horizon, cfg.classes, &diag);
    } else {
      raw_table = read_decision_table_csv(cfg.input);
    }
  });

  // --- preprocess ------------------------------------------------------
  DecisionTable scaled_full, train, test;
  std::vector<size_t> train_indices, test_indices;
  guard(Phase::Preprocess, [&] {
    const DecisionTable completed =
        complete_table(raw_table, completion_policy_from_string(cfg.completion), &diag);
    SplitResult sp = split(completed, cfg.fraction, seed);
    const MinMaxScaler scaler = MinMaxScaler::fit(completed, sp.train_indices);
    scaled_full = scaler.apply(completed);
    train = table_from_indices(scaled_full, sp.train_indices);
    test = table_from_indices(scaled_full, sp.test_indices);
    train_indices = std::move(sp.train_indices);
    test_indices = std::move(sp.test_indices);
    write_decision_table_csv(scaled_full, (fs::path(out_dir) / "decision_table.csv").string());
  });

  // --- analysis --------------------------------------------------------
  std::vector<std::string> reduct_names;
  guard(Phase::Analysis, [&] {
    const CutSet candidates = candidate_cuts(train);
    const RsbrResult rsbr = rsbr_discretize(train, candidates, &diag);
    write_cuts_json(rsbr.selected, train.base.attribute_names,
                    (fs::path(out_dir) / "cuts.json").string());
    if (rsbr.table.attribute_count() <= 20) {
      for (AttrMask r : reducts(rsbr.table)) {
        std::string name = "{";
        bool first = true;
        for (int a : mask_to_attrs(r)) {
          if (!first) name += ",";
          name += train.base.attribute_names[static_cast<size_t>(a)];
          first = false;
        }
        reduct_names.push_back(name + "}");
      }
    }
  });

  // --- rule generation -------------------------------------------------
  FuzzyEncoding init_enc;
  FuzzyGenerators init_gen;
  ClassStatistics stats;
  std::vector<DependencyRule> dep_rules;
  guard(Phase::Rules, [&] {
    init_enc = init_encoding(train);
    stats = compute_class_statistics(train);
    init_gen = init_generators(train, stats);

    const auto fuzzified = fuzzify_rows(train, init_enc);
    std::vector<MembershipTable> per_class(static_cast<size_t>(train.class_count()));
    for (size_t i = 0; i < fuzzified.size(); ++i)
      per_class[static_cast<size_t>(train.decisions[i] - 1)].push_back(fuzzified[i]);

    ThPolicy policy;
    policy.global = cfg.th;
    dep_rules = dependency_rules_split(per_class, policy, DnfLimits{}, cfg.rules_per_class, &diag);
    for (auto& r : dep_rules) {
      if (r.formula.conjuncts.size() > static_cast<size_t>(cfg.encode_max_conjuncts)) {
        warn_into(&diag, "class " + std::to_string(r.class_label) + ": encoding the shortest " +
                             std::to_string(cfg.encode_max_conjuncts) + " of " +
                             std::to_string(r.formula.conjuncts.size()) + " conjuncts");
        r.formula.conjuncts.resize(static_cast<size_t>(cfg.encode_max_conjuncts));
      }
    }
    write_dependency_rules(dep_rules, (fs::path(out_dir) / "dependency_rules.txt").string());
  });

  // --- classification ---------------------------------------------------
  ModularNetwork net;
  FuzzyEncoding final_enc = init_enc;
  FuzzyGenerators final_gen = init_gen;
  EvolveLog evolve_log;
  bool fuzzified_inputs = true;  // model O consumes raw features
  guard(Phase::Classification, [&] {
    const int width = 3 * static_cast<int>(train.attribute_count());
    const int l = train.class_count();

    switch (model) {
      case Model::S: {
        EvolveResult r = evolve_modular(dep_rules, train, init_enc, init_gen, cfg.ga, seed,
                                        &evolve_log, &diag);
        net = std::move(r.net);
        final_enc = std::move(r.encoding);
        final_gen = std::move(r.generators);
        result.train_f1 = r.best_report.f1;
        break;
      }
      case Model::FM: {
        EvolveResult r = evolve_random_modular(train, init_enc, init_gen, cfg.fm_hidden_per_class,
                                               cfg.ga, seed, &evolve_log, &diag);
        net = std::move(r.net);
        final_enc = std::move(r.encoding);
        final_gen = std::move(r.generators);
        result.train_f1 = r.best_report.f1;
        break;
      }
      case Model::O:
      case Model::F:
      case Model::R: {
        // Backprop baselines share the trainer; they differ in inputs and
        // initial structure.
        std::vector<TrainPattern> patterns;
        if (model == Model::O) {
          fuzzified_inputs = false;
          net = ModularNetwork::fully_connected(
              {static_cast<int>(train.attribute_count()), cfg.hidden1, cfg.hidden2, l});
          for (size_t i = 0; i < train.object_count(); ++i) {
            TrainPattern p;
            p.input = train.base.rows[i];
            p.target.assign(static_cast<size_t>(l), 0.0);
            p.target[static_cast<size_t>(train.decisions[i] - 1)] = 1.0;
            patterns.push_back(std::move(p));
          }
        } else {
          const auto fuzzified = fuzzify_rows(train, init_enc);
          if (model == Model::F) {
            net = ModularNetwork::fully_connected({width, cfg.hidden1, cfg.hidden2, l});
          } else {
            auto subnets = encode_rules(dep_rules, static_cast<int>(train.attribute_count()), l);
            std::vector<int> subnet_class;
            for (const auto& r : dep_rules) subnet_class.push_back(r.class_label);
            Rng inter_rng = Rng(seed).child(0x700);
            net = concatenate_modules(subnets, subnet_class, l,
                                      std::vector<bool>(subnets.size(), true),
                                      cfg.ga.inter_weight_range, &inter_rng);
          }
          for (size_t i = 0; i < train.object_count(); ++i) {
            TrainPattern p;
            p.input = fuzzified[i];
            p.target = class_membership(train.base.rows[i], stats, init_gen);
            patterns.push_back(std::move(p));
          }
        }
        if (model != Model::R) {
          Rng init_rng = Rng(seed).child(0x600);
          for (auto& link : net.links()) link.weight = init_rng.next_range(-0.5, 0.5);
        }
        BackpropOptions opt{cfg.epochs, cfg.rate, cfg.decay};
        net = backprop_train(net, patterns, opt);

        size_t correct = 0;
        for (size_t i = 0; i < patterns.size(); ++i)
          if (net.forward(patterns[i].input).predicted_class == train.decisions[i]) ++correct;
        result.train_f1 = static_cast<double>(correct) / static_cast<double>(patterns.size());
        break;
      }
    }

    net.write_json((fs::path(out_dir) / "network.json").string());
    write_encoding_json(final_enc, final_gen, (fs::path(out_dir) / "fuzzy_encoding.json").string());
    evolve_log.write_csv((fs::path(out_dir) / "evolution_log.csv").string());
  });

  // --- rule extraction ---------------------------------------------------
  std::vector<ExtractedRule> rules;
  double extraction_seconds = 0.0;
  guard(Phase::Extraction, [&] {
    if (model != Model::O) {
      const auto started = std::chrono::steady_clock::now();
      const WeightThresholds th = compute_thresholds(net);
      ExtractionOptions opt;
      opt.max_antecedent = cfg.max_antecedent;
      opt.max_rules = cfg.max_rules;
      rules = extract_rules(net, th, opt, &diag);
      extraction_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    } else {
      warn_into(&diag, "model O runs on raw features; no linguistic rules extracted");
    }
    write_rules_text(rules, (fs::path(out_dir) / "rules.txt").string());
    write_rules_json(rules, (fs::path(out_dir) / "rules.json").string());
  });

  // --- evaluation ---------------------------------------------------------
  guard(Phase::Evaluation, [&] {
    const auto test_inputs =
        fuzzified_inputs ? fuzzify_rows(test, final_enc) : test.base.rows;

    size_t net_correct = 0;
    ConfusionMatrix rule_matrix(test.class_count());
    for (size_t i = 0; i < test.object_count(); ++i) {
      const NetworkOutput out = net.forward(test_inputs[i]);
      if (out.predicted_class == test.decisions[i]) ++net_correct;
      InferResult fired;
      if (!rules.empty() && fuzzified_inputs)
        fired = infer(rules, test_inputs[i], cfg.crispness);
      rule_matrix.add(test.decisions[i], fired.class_label);
    }

    MetricsReport& m = result.metrics;
    m.model = model_to_string(model);
    m.network_accuracy =
        100.0 * static_cast<double>(net_correct) / static_cast<double>(test.object_count());
    const PerClassReport acc = accuracy(rule_matrix);
    m.accuracy = acc.overall;
    m.accuracy_per_class = acc.per_class;
    m.users_accuracy = users_accuracy(rule_matrix);
    if (rule_matrix.total() > 0) {
      const PerClassReport kap = kappa(rule_matrix);
      m.kappa = kap.overall;
      m.kappa_per_class = kap.per_class;
      const ConfusionIndexReport conf = confusion_index(rule_matrix);
      m.conf = conf.value;
      m.conf_degenerate = conf.degenerate;
    } else {
      m.kappa_per_class.assign(static_cast<size_t>(rule_matrix.classes), std::nullopt);
      m.conf_degenerate = true;
    }
    if (fuzzified_inputs) {
      m.fidelity = fidelity(net, rules, test_inputs, cfg.crispness);
      m.uncovered = cover_uncovered(rules, test_inputs, cfg.crispness);
    } else {
      m.fidelity = 0.0;
      m.uncovered = 100.0;
    }
    m.rules = static_cast<int64_t>(rules.size());
    m.cpu_sec = round2(extraction_seconds);
    if (!rules.empty()) {
      double sum = 0.0, mn = rules[0].cf;
      for (const auto& r : rules) {
        sum += r.cf;
        mn = std::min(mn, r.cf);
      }
      m.certainty_mean = sum / static_cast<double>(rules.size());
      m.certainty_min = mn;
    }
    m.write_json((fs::path(out_dir) / "metrics.json").string());

    result.present_links = net.present_link_count();
    result.rule_count = rules.size();
  });

  // --- manifest (deterministic: no timings) -------------------------------
  {
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config_hash"] = config_hash(cfg);
    manifest["config"] = cfg.canonical();
    manifest["seed"] = seed;
    manifest["model"] = model_to_string(model);
    manifest["train_objects"] = train_indices.size();
    manifest["test_objects"] = test_indices.size();
    std::string idx;
    for (size_t i : train_indices) idx += std::to_string(i) + ",";
    manifest["train_index_hash"] = hex64(fnv1a64(idx));
    manifest["reducts"] = reduct_names;
    manifest["warnings"] = diag.warnings;
    manifest["artifacts"] = {"decision_table.csv", "cuts.json",     "dependency_rules.txt",
                             "fuzzy_encoding.json", "network.json", "evolution_log.csv",
                             "rules.txt",           "rules.json",   "metrics.json"};
    std::ofstream out(fs::path(out_dir) / "run_manifest.json", std::ios::binary);
    if (!out) throw PipelineError(Phase::Evaluation, "cannot write run_manifest.json");
    out << manifest.dump(2) << "\n";
  }

  fs::remove(scope.marker);
  return result;
}

bool manifest_matches(const std::string& manifest_path, const PipelineConfig& cfg, uint64_t seed) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + manifest_path + "'");
  nlohmann::json manifest = nlohmann::json::parse(in);
  return manifest.at("config_hash").get<std::string>() == config_hash(cfg) &&
         manifest.at("seed").get<uint64_t>() == seed;
}

}  // namespace rufmine

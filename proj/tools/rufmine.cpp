// Command line front end: the full pipeline plus one subcommand per phase so
// each stage can be exercised and inspected on its own.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "rufmine/decision_table.hpp"
#include "rufmine/evolution.hpp"
#include "rufmine/extraction.hpp"
#include "rufmine/features.hpp"
#include "rufmine/fuzzy.hpp"
#include "rufmine/metrics.hpp"
#include "rufmine/pipeline.hpp"
#include "rufmine/rough.hpp"

namespace fs = std::filesystem;
using namespace rufmine;

namespace {

int phase_exit_code(Phase p) { return 10 + static_cast<int>(p); }

void print_warnings(const Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
}

struct RuleContext {
  FuzzyEncoding enc;
  FuzzyGenerators gen;
  std::vector<DependencyRule> rules;
};

RuleContext build_rules(const DecisionTable& table, std::optional<double> th, Diagnostics& diag) {
  RuleContext ctx;
  ctx.enc = init_encoding(table);
  const ClassStatistics stats = compute_class_statistics(table);
  ctx.gen = init_generators(table, stats);
  std::vector<MembershipTable> per_class(static_cast<size_t>(table.class_count()));
  for (size_t i = 0; i < table.object_count(); ++i)
    per_class[static_cast<size_t>(table.decisions[i] - 1)].push_back(
        fuzzify(table.base.rows[i], ctx.enc));
  ThPolicy policy;
  policy.global = th;
  ctx.rules = dependency_rules(per_class, policy, DnfLimits{}, &diag);
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rufmine: stock-movement prediction rules via a rough-fuzzy neural pipeline"};
  app.require_subcommand(1);

  // pipeline ------------------------------------------------------------
  std::string cfg_path, out_dir, model_name = "S";
  uint64_t seed = 0;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run every phase end to end");
  pipeline_cmd->add_option("--config", cfg_path, "key = value configuration file")->required();
  pipeline_cmd->add_option("--seed", seed, "random seed")->required();
  pipeline_cmd->add_option("--out", out_dir, "output directory")->required();
  pipeline_cmd->add_option("--model", model_name, "S|O|F|R|FM (default S)");

  // synth ----------------------------------------------------------------
  int synth_classes = 6, synth_per_class = 100;
  double synth_sep = 2.0;
  uint64_t synth_seed = 0;
  std::string synth_out = "synthetic.csv";
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic decision table");
  synth_cmd->add_option("--classes", synth_classes, "number of classes");
  synth_cmd->add_option("--per-class", synth_per_class, "objects per class");
  synth_cmd->add_option("--sep", synth_sep, "class separation");
  synth_cmd->add_option("--seed", synth_seed, "random seed");
  synth_cmd->add_option("--out", synth_out, "output CSV path");

  // ingest ----------------------------------------------------------------
  std::string ingest_input, ingest_out = "table.csv";
  int ingest_window = 5, ingest_horizon = 3, ingest_classes = 6;
  auto* ingest_cmd = app.add_subcommand("ingest", "derive features and labels from a price CSV");
  ingest_cmd->add_option("--input", ingest_input, "price CSV (date,close,...)")->required();
  ingest_cmd->add_option("--window", ingest_window, "feature window in days");
  ingest_cmd->add_option("--horizon", ingest_horizon, "label horizon in days");
  ingest_cmd->add_option("--classes", ingest_classes, "number of label buckets");
  ingest_cmd->add_option("--out", ingest_out, "output decision table CSV");

  // discretize --------------------------------------------------------------
  std::string disc_table, disc_out_dir = ".";
  auto* disc_cmd = app.add_subcommand("discretize", "minimal-cut discretization of a table");
  disc_cmd->add_option("--table", disc_table, "decision table CSV")->required();
  disc_cmd->add_option("--out-dir", disc_out_dir, "directory for cuts.json and discretized.csv");

  // rules ---------------------------------------------------------------------
  std::string rules_table, rules_out_dir = ".";
  double rules_th = -1.0;
  auto* rules_cmd = app.add_subcommand("rules", "generate per-class dependency rules");
  rules_cmd->add_option("--table", rules_table, "decision table CSV")->required();
  rules_cmd->add_option("--th", rules_th, "global threshold override in (0,1)");
  rules_cmd->add_option("--out-dir", rules_out_dir, "directory for dependency_rules.txt");

  // train -----------------------------------------------------------------------
  std::string train_table, train_out_dir = ".";
  uint64_t train_seed = 0;
  int train_generations = 90;
  auto* train_cmd = app.add_subcommand("train", "encode rules and evolve the modular network");
  train_cmd->add_option("--table", train_table, "decision table CSV (training split)")->required();
  train_cmd->add_option("--seed", train_seed, "random seed");
  train_cmd->add_option("--generations", train_generations, "generation budget");
  train_cmd->add_option("--out-dir", train_out_dir, "directory for network.json and logs");

  // extract --------------------------------------------------------------------
  std::string extract_net, extract_out_dir = ".";
  int extract_max_antecedent = 5, extract_max_rules = 64;
  auto* extract_cmd = app.add_subcommand("extract", "extract weighted rules from a network");
  extract_cmd->add_option("--network", extract_net, "network.json")->required();
  extract_cmd->add_option("--max-antecedent", extract_max_antecedent, "antecedent cap");
  extract_cmd->add_option("--max-rules", extract_max_rules, "rule budget");
  extract_cmd->add_option("--out-dir", extract_out_dir, "directory for rules.txt / rules.json");

  // evaluate -------------------------------------------------------------------
  std::string eval_net, eval_rules, eval_table, eval_encoding, eval_out = "metrics.json";
  double eval_crispness = 0.5;
  auto* eval_cmd = app.add_subcommand("evaluate", "score a rule base against its network");
  eval_cmd->add_option("--network", eval_net, "network.json")->required();
  eval_cmd->add_option("--rules", eval_rules, "rules.json")->required();
  eval_cmd->add_option("--table", eval_table, "decision table CSV (test split)")->required();
  eval_cmd->add_option("--encoding", eval_encoding, "fuzzy_encoding.json")->required();
  eval_cmd->add_option("--crispness", eval_crispness, "literal threshold");
  eval_cmd->add_option("--out", eval_out, "metrics output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pipeline_cmd->parsed()) {
      const PipelineConfig cfg = load_config(cfg_path);
      const Model model = model_from_string(model_name);
      const PipelineResult result = run_pipeline(cfg, seed, out_dir, model);
      print_warnings(result.diag);
      std::cout << "pipeline done: model " << model_to_string(model) << ", "
                << result.rule_count << " rules, " << result.present_links
                << " present links, artifacts in " << out_dir << "\n";
      return 0;
    }

    if (synth_cmd->parsed()) {
      const DecisionTable t = make_synthetic(synth_per_class, synth_classes, synth_sep, synth_seed);
      write_decision_table_csv(t, synth_out);
      std::cout << "wrote " << t.object_count() << " objects to " << synth_out << "\n";
      return 0;
    }

    if (ingest_cmd->parsed()) {
      Diagnostics diag;
      const PriceSeries series = read_price_csv(ingest_input);
      const DecisionTable t =
          derive_features(series, ingest_window, ingest_horizon, ingest_classes, &diag);
      write_decision_table_csv(t, ingest_out);
      print_warnings(diag);
      std::cout << "wrote " << t.object_count() << " objects to " << ingest_out << "\n";
      return 0;
    }

    if (disc_cmd->parsed()) {
      Diagnostics diag;
      const DecisionTable t = read_decision_table_csv(disc_table);
      const RsbrResult r = rsbr_discretize(t, candidate_cuts(t), &diag);
      fs::create_directories(disc_out_dir);
      write_cuts_json(r.selected, t.base.attribute_names,
                      (fs::path(disc_out_dir) / "cuts.json").string());
      write_decision_table_csv(r.table, (fs::path(disc_out_dir) / "discretized.csv").string());
      print_warnings(diag);
      std::cout << "selected " << r.selected.total() << " cuts\n";
      return 0;
    }

    if (rules_cmd->parsed()) {
      Diagnostics diag;
      const DecisionTable t = read_decision_table_csv(rules_table);
      const std::optional<double> th =
          rules_th > 0.0 ? std::optional<double>(rules_th) : std::nullopt;
      RuleContext ctx = build_rules(t, th, diag);
      fs::create_directories(rules_out_dir);
      write_dependency_rules(ctx.rules, (fs::path(rules_out_dir) / "dependency_rules.txt").string());
      write_encoding_json(ctx.enc, ctx.gen, (fs::path(rules_out_dir) / "fuzzy_encoding.json").string());
      print_warnings(diag);
      for (const auto& r : ctx.rules) std::cout << format_dependency_rule(r) << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      Diagnostics diag;
      const DecisionTable t = read_decision_table_csv(train_table);
      RuleContext ctx = build_rules(t, std::nullopt, diag);
      GaConfig ga;
      ga.generations = train_generations;
      EvolveLog log;
      EvolveResult r = evolve_modular(ctx.rules, t, ctx.enc, ctx.gen, ga, train_seed, &log, &diag);
      fs::create_directories(train_out_dir);
      r.net.write_json((fs::path(train_out_dir) / "network.json").string());
      write_encoding_json(r.encoding, r.generators,
                          (fs::path(train_out_dir) / "fuzzy_encoding.json").string());
      log.write_csv((fs::path(train_out_dir) / "evolution_log.csv").string());
      print_warnings(diag);
      std::cout << "best fitness " << r.best_report.fitness << " (f1 " << r.best_report.f1
                << ", links " << r.best_report.links_present << ")\n";
      return 0;
    }

    if (extract_cmd->parsed()) {
      Diagnostics diag;
      const ModularNetwork net = ModularNetwork::read_json(extract_net);
      ExtractionOptions opt;
      opt.max_antecedent = extract_max_antecedent;
      opt.max_rules = extract_max_rules;
      const auto rules = extract_rules(net, compute_thresholds(net), opt, &diag);
      fs::create_directories(extract_out_dir);
      write_rules_text(rules, (fs::path(extract_out_dir) / "rules.txt").string());
      write_rules_json(rules, (fs::path(extract_out_dir) / "rules.json").string());
      print_warnings(diag);
      std::cout << rules_to_text(rules);
      return 0;
    }

    if (eval_cmd->parsed()) {
      const ModularNetwork net = ModularNetwork::read_json(eval_net);
      const auto rules = read_rules_json(eval_rules);
      const DecisionTable t = read_decision_table_csv(eval_table);
      FuzzyEncoding enc;
      FuzzyGenerators gen;
      read_encoding_json(eval_encoding, enc, gen);

      std::vector<std::vector<double>> inputs;
      for (const auto& row : t.base.rows) inputs.push_back(fuzzify(row, enc));

      MetricsReport m;
      size_t net_correct = 0;
      ConfusionMatrix matrix(t.class_count());
      for (size_t i = 0; i < t.object_count(); ++i) {
        const NetworkOutput out = net.forward(inputs[i]);
        if (out.predicted_class == t.decisions[i]) ++net_correct;
        InferResult fired;
        if (!rules.empty()) fired = infer(rules, inputs[i], eval_crispness);
        matrix.add(t.decisions[i], fired.class_label);
      }
      m.network_accuracy = 100.0 * static_cast<double>(net_correct) /
                           static_cast<double>(t.object_count());
      const PerClassReport acc = accuracy(matrix);
      m.accuracy = acc.overall;
      m.accuracy_per_class = acc.per_class;
      m.users_accuracy = users_accuracy(matrix);
      if (matrix.total() > 0) {
        const PerClassReport kap = kappa(matrix);
        m.kappa = kap.overall;
        m.kappa_per_class = kap.per_class;
        const ConfusionIndexReport conf = confusion_index(matrix);
        m.conf = conf.value;
        m.conf_degenerate = conf.degenerate;
      }
      m.fidelity = fidelity(net, rules, inputs, eval_crispness);
      m.uncovered = cover_uncovered(rules, inputs, eval_crispness);
      m.rules = static_cast<int64_t>(rules.size());
      if (!rules.empty()) {
        double sum = 0.0, mn = rules[0].cf;
        for (const auto& r : rules) {
          sum += r.cf;
          mn = std::min(mn, r.cf);
        }
        m.certainty_mean = sum / static_cast<double>(rules.size());
        m.certainty_min = mn;
      }
      m.write_json(eval_out);
      std::cout << m.to_json();
      return 0;
    }
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return phase_exit_code(e.phase());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rufmine/chromosome.hpp"
#include "rufmine/decision_table.hpp"
#include "rufmine/metrics.hpp"

namespace rufmine {

enum class Model { S, O, F, R, FM };

Model model_from_string(const std::string& s);
std::string model_to_string(Model m);

enum class Phase { Ingest, Preprocess, Analysis, Rules, Classification, Extraction, Evaluation };

const char* phase_name(Phase p);

// Carries the failing phase so the CLI can map it to an exit code.
class PipelineError : public Error {
 public:
  PipelineError(Phase phase, const std::string& msg)
      : Error(std::string("[phase:") + phase_name(phase) + "] " + msg), phase_(phase) {}
  Phase phase() const { return phase_; }

 private:
  Phase phase_;
};

// Flat key=value configuration; unknown keys are rejected.
struct PipelineConfig {
  std::string input;
  std::string input_kind = "prices";  // prices | table
  int window = 5;
  int horizon = 3;
  int classes = 6;
  double fraction = 0.1;
  std::string completion = "drop";
  std::optional<double> th;  // dependency-rule threshold override
  double crispness = 0.5;
  int max_antecedent = 5;
  int max_rules = 64;
  int encode_max_conjuncts = 8;
  int rules_per_class = 4;
  int hidden1 = 6;  // baseline backprop architectures
  int hidden2 = 6;
  int fm_hidden_per_class = 3;
  int epochs = 800;
  double rate = 0.5;
  double decay = 1e-4;
  GaConfig ga;

  // Every effective setting as sorted key=value lines; hashing this makes
  // the manifest's config hash insensitive to comment or ordering noise.
  std::string canonical() const;
  void validate() const;
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string config_hash(const PipelineConfig& cfg);

struct PipelineResult {
  MetricsReport metrics;
  std::string out_dir;
  size_t present_links = 0;
  size_t rule_count = 0;
  double train_f1 = 0.0;  // network accuracy ratio on the training split
  Diagnostics diag;
};

// Runs every phase in order and writes decision_table.csv, cuts.json,
// dependency_rules.txt, fuzzy_encoding.json, network.json,
// evolution_log.csv, rules.txt, rules.json, metrics.json and
// run_manifest.json under out_dir. Fully deterministic for a fixed
// (config, seed, model). A `run.partial` marker names the phase in flight
// and disappears on success.
PipelineResult run_pipeline(const PipelineConfig& cfg, uint64_t seed, const std::string& out_dir,
                            Model model = Model::S);

// Manifest helpers (used by tests and tooling to confirm a directory matches
// a configuration).
bool manifest_matches(const std::string& manifest_path, const PipelineConfig& cfg, uint64_t seed);

}  // namespace rufmine

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rufmine/chromosome.hpp"
#include "rufmine/decision_table.hpp"
#include "rufmine/rough.hpp"

namespace rufmine {

struct FitnessReport {
  double f1 = 0.0;       // classification ratio on the evaluation set
  double f2 = 0.0;       // 1 - links present / links possible
  double fitness = 0.0;  // alpha1 * f1 + alpha2 * f2
  size_t links_present = 0;
};

// Frozen evaluation set. When `refuzzify` is set the raw patterns are
// re-fuzzified with each chromosome's decoded parameters (the GA is tuning
// them); otherwise the fixed fuzzified inputs are used as-is.
struct EvalContext {
  std::vector<std::vector<double>> fixed_inputs;
  std::vector<std::vector<double>> raw_patterns;
  std::vector<int> labels;
  bool refuzzify = false;
  int binary_class = 0;  // 0: multiclass argmax; k: single output vs label==k
  double alpha1 = 0.9;
  double alpha2 = 0.1;

  static EvalContext fixed(std::vector<std::vector<double>> fuzzified, std::vector<int> labels);
  static EvalContext refuzzified(std::vector<std::vector<double>> raw, std::vector<int> labels);
  size_t size() const { return labels.size(); }
};

FitnessReport fitness(const Chromosome& c, const EvalContext& ctx);

enum class ExecutionMode { Serial, OpenMP };

// The per-generation hot loop: every chromosome's fitness is independent of
// the others, so the population evaluates in parallel. Results are written
// by population index and are bit-identical across modes and thread counts.
// The Serial path is the reference implementation the tests compare against.
std::vector<FitnessReport> evaluate_population(std::span<const Chromosome> population,
                                               const EvalContext& ctx, ExecutionMode mode);

bool openmp_enabled();

// Rank-based roulette selection: individuals ranked worst=1..best=P by
// (fitness, fewer links, lexicographic bits), selection probability
// proportional to rank. Returns `count` parent indices.
std::vector<size_t> select_parents(std::span<const FitnessReport> reports,
                                   std::span<const Chromosome> population, size_t count, Rng& rng);

// Ranking order used by selection; index of the best individual.
size_t best_index(std::span<const FitnessReport> reports, std::span<const Chromosome> population);

struct GenerationRow {
  int generation = 0;
  double best_f = 0.0;
  double best_f1 = 0.0;
  double mean_f = 0.0;
  size_t best_links = 0;
};

struct EvolveLog {
  std::vector<GenerationRow> rows;

  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

struct EvolveResult {
  ModularNetwork net;
  FuzzyEncoding encoding;
  FuzzyGenerators generators;
  Chromosome best;
  FitnessReport best_report;
};

// Every way of picking one pool member per class (mixed-radix order); a
// deterministic uniform stride subsample past the cap. Result[i][k] indexes
// into pools_per_class[k].
std::vector<std::vector<size_t>> cross_pool_combinations(
    const std::vector<std::vector<size_t>>& pools_per_class, int cap,
    Diagnostics* diag = nullptr);

// Two-stage modular evolution: per-rule sub-network pools are partially
// evolved on their two-class problems, every cross-pool combination is
// concatenated (inter-module links at small random weights), and the full
// population is evolved with the spatially restricted mutation operator.
EvolveResult evolve_modular(std::span<const DependencyRule> rules, const DecisionTable& train,
                            const FuzzyEncoding& init_enc, const FuzzyGenerators& init_gen,
                            const GaConfig& cfg, uint64_t seed, EvolveLog* log = nullptr,
                            Diagnostics* diag = nullptr);

// Same machinery without knowledge encoding: one randomly initialized
// sub-network per class (used by the modular-baseline model).
EvolveResult evolve_random_modular(const DecisionTable& train, const FuzzyEncoding& init_enc,
                                   const FuzzyGenerators& init_gen, int hidden_per_class,
                                   const GaConfig& cfg, uint64_t seed, EvolveLog* log = nullptr,
                                   Diagnostics* diag = nullptr);

}  // namespace rufmine

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rufmine/fuzzy.hpp"
#include "rufmine/network.hpp"
#include "rufmine/rng.hpp"

namespace rufmine {

struct GaConfig {
  int population = 64;
  double crossover_prob = 0.7;
  double pmut_max = 0.4;
  double pmut_min = 0.01;
  double intra_divisor = 10.0;  // intra-module and fuzzy bits mutate at pmut / divisor
  double alpha1 = 0.9;          // classification weight in the fitness
  double alpha2 = 0.1;          // sparsity weight
  int stage1_sweeps = 10;
  int generations = 90;
  int combo_cap = 256;
  double inter_weight_range = 0.1;
  double perturb_sigma = 0.05;
  bool parallel = true;

  void validate() const;
};

// Bit categories drive the spatially restricted mutation.
enum class BitKind : uint8_t { InterLink, IntraLink, FuzzyParam };

// Immutable description shared by every chromosome of a run: the network
// template (structure, biases, tags), per-feature decode scales and the
// fallback fuzzy parameters when the fuzzy block is not evolved.
struct ChromosomeLayout {
  ModularNetwork template_net;
  bool has_fuzzy_block = false;
  std::vector<double> feature_scale;  // decode range of input fuzzy words
  FuzzyEncoding base_encoding;
  FuzzyGenerators base_generators;
  std::vector<BitKind> bit_kind;  // one entry per bit

  size_t link_bits() const { return 17 * template_net.link_count(); }
  size_t total_bits() const { return bit_kind.size(); }
};

using LayoutPtr = std::shared_ptr<const ChromosomeLayout>;

// feature_max: per-feature maximum over the training set; input fuzzy words
// decode linearly into [0, 1.2 * feature_max].
LayoutPtr make_layout(const ModularNetwork& template_net, std::span<const double> feature_max,
                      bool with_fuzzy_block, const FuzzyEncoding& base_encoding,
                      const FuzzyGenerators& base_generators);

// Bit string: per link a 16-bit weight word plus one presence bit, then one
// 16-bit word per evolved fuzzy parameter.
struct Chromosome {
  std::vector<uint8_t> bits;  // each 0 or 1
  LayoutPtr layout;

  size_t size() const { return bits.size(); }
  bool lexicographically_less(const Chromosome& other) const { return bits < other.bits; }
};

// Weight words span [-128, 128]; all-zero decodes to -128, all-one to +128.
uint16_t encode_weight_word(double w, bool* clamped = nullptr);
double decode_weight_word(uint16_t word);
constexpr double kWeightQuantum = 256.0 / 65535.0;

Chromosome encode_chromosome(const ModularNetwork& net, const FuzzyEncoding& enc,
                             const FuzzyGenerators& gen, const LayoutPtr& layout,
                             Diagnostics* diag = nullptr);

struct DecodedChromosome {
  ModularNetwork net;
  FuzzyEncoding encoding;
  FuzzyGenerators generators;
};

DecodedChromosome decode_chromosome(const Chromosome& c);

size_t present_links(const Chromosome& c);

// Multi-point crossover: applied with `prob`, points walk left to right with
// gaps uniform in [8, 24] bits; children are complementary splices.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng,
                                            double prob = 0.7);

enum class MutationMode { Spatial, Uniform };

// Linear anneal pmut(t) = pmut_max - (pmut_max - pmut_min) * t / total.
double mutation_rate(double pmut_max, double pmut_min, int t, int total);

// Spatial mode flips inter-link bits at pmut(t) and intra-link/fuzzy bits at
// pmut(t)/divisor; Uniform applies pmut(t) everywhere.
Chromosome mutate(const Chromosome& c, int t, int total, Rng& rng, const GaConfig& cfg,
                  MutationMode mode = MutationMode::Spatial);

// Gaussian noise on the decoded weights of present links; structure,
// presence and fuzzy words are untouched.
Chromosome perturb_weights(const Chromosome& c, double sigma, Rng& rng);

}  // namespace rufmine

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rufmine/dnf.hpp"
#include "rufmine/rng.hpp"
#include "rufmine/rough.hpp"

namespace rufmine {

// Module ownership of a link: 0 = inter-module, k >= 1 = intra module of
// class k. Inter links connect nodes owned by different class modules.
using ModuleTag = int;
constexpr ModuleTag kInterModule = 0;

struct Link {
  int layer = 1;  // index of the destination layer (1-based)
  int from = 0;   // node index within layer-1
  int to = 0;     // node index within layer
  double weight = 0.0;
  bool present = true;
  ModuleTag module = kInterModule;
};

struct NetworkOutput {
  std::vector<double> activations;  // strictly inside (0,1)
  int predicted_class = 0;          // 1-based argmax, ties to the lower class
  bool tie = false;                 // exact tie on the maximum
  bool classified = false;          // max activation > 0.5 and no tie
};

// Layered feed-forward sigmoid network with presence flags and module tags
// on links, and a per-node bias (net input = sum w*y - bias). Links are held
// in a canonical (layer, to, from) order so forward passes do not depend on
// insertion order.
class ModularNetwork {
 public:
  ModularNetwork() = default;
  ModularNetwork(std::vector<int> layer_sizes, std::vector<Link> links);

  // All adjacent-layer links present with weight 0, biases 0.
  static ModularNetwork fully_connected(std::vector<int> layer_sizes,
                                        ModuleTag module = kInterModule);

  const std::vector<int>& layers() const { return layers_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  int input_size() const { return layers_.front(); }
  int output_size() const { return layers_.back(); }

  const std::vector<Link>& links() const { return links_; }
  std::vector<Link>& links() { return links_; }
  size_t link_count() const { return links_.size(); }
  size_t present_link_count() const;

  double bias(int layer, int node) const { return biases_[static_cast<size_t>(layer)][static_cast<size_t>(node)]; }
  void set_bias(int layer, int node, double v) { biases_[static_cast<size_t>(layer)][static_cast<size_t>(node)] = v; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

  void canonicalize();  // restore the (layer, to, from) link order
  void validate() const;

  NetworkOutput forward(std::span<const double> input) const;
  // Per-layer activations, needed by the trainer and the gradient check.
  std::vector<std::vector<double>> forward_trace(std::span<const double> input) const;

  std::string to_json() const;
  static ModularNetwork from_json(const std::string& content);
  void write_json(const std::string& path) const;
  static ModularNetwork read_json(const std::string& path);

 private:
  std::vector<int> layers_;
  std::vector<Link> links_;
  std::vector<std::vector<double>> biases_;  // biases_[layer][node]; layer 0 unused
};

// A dependency rule as the encoder consumes it; dependency rules are
// negation-free but extraction round-trips may plant negated literals.
struct EncodableRule {
  int class_label = 0;
  SignedDnf formula;
};

EncodableRule to_encodable(const DependencyRule& r);

// Hidden-unit weights for rule conjuncts. The margin is large enough that
// a unit's "off" activation stays near zero, which keeps the disjunction
// bias of 1 valid for any realistic conjunct count.
constexpr double kRuleGain = 4.0;             // net-input margin of a conjunct unit
constexpr double kRuleLiteralWeight = 2.0 * kRuleGain;
constexpr double kDisjunctWeight = 2.0;       // hidden -> output
constexpr double kDisjunctBias = 1.0;

// One sub-network per rule: inputs are the 3n linguistic attributes, one
// hidden node per conjunct, a single output node joining them. Weights are
// chosen so the network computes a soft version of the rule: on crisp
// inputs the output exceeds 0.5 exactly when the rule is satisfied. All
// possible in-module links exist; non-rule links are absent.
std::vector<ModularNetwork> encode_rules(std::span<const EncodableRule> rules, int feature_count,
                                         int class_count);
std::vector<ModularNetwork> encode_rules(std::span<const DependencyRule> rules, int feature_count,
                                         int class_count);

// Joins per-rule sub-networks into one [3n, H, l] network. `chosen` selects
// which sub-networks contribute their links (others stay absent); inter
// module links (hidden -> foreign output) are initialized uniformly in
// [-inter_weight_range, +inter_weight_range] when rng is given, absent when
// rng is null.
ModularNetwork concatenate_modules(std::span<const ModularNetwork> subnets,
                                   std::span<const int> subnet_class, int class_count,
                                   const std::vector<bool>& chosen, double inter_weight_range,
                                   Rng* rng);

struct TrainPattern {
  std::vector<double> input;
  std::vector<double> target;
};

struct BackpropOptions {
  int epochs = 100;
  double rate = 0.3;
  double decay = 1e-4;
};

// Sum over patterns of 0.5 * squared output error.
double network_loss(const ModularNetwork& net, std::span<const TrainPattern> data);

struct Gradients {
  std::vector<double> weight;               // per link, canonical order; absent links get 0
  std::vector<std::vector<double>> bias;    // [layer][node]; layer 0 empty
};

// Gradient of network_loss (no decay term).
Gradients network_gradients(const ModularNetwork& net, std::span<const TrainPattern> data);

// Plain batch gradient descent with weight decay on present links. Throws
// NumericError naming the epoch if the loss stops being finite.
ModularNetwork backprop_train(const ModularNetwork& net, std::span<const TrainPattern> data,
                              const BackpropOptions& opt,
                              std::vector<double>* epoch_loss = nullptr);

}  // namespace rufmine

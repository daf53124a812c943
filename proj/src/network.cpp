#include "rufmine/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rufmine {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool link_order(const Link& a, const Link& b) {
  if (a.layer != b.layer) return a.layer < b.layer;
  if (a.to != b.to) return a.to < b.to;
  return a.from < b.from;
}

}  // namespace

ModularNetwork::ModularNetwork(std::vector<int> layer_sizes, std::vector<Link> links)
    : layers_(std::move(layer_sizes)), links_(std::move(links)) {
  biases_.resize(layers_.size());
  for (size_t h = 1; h < layers_.size(); ++h)
    biases_[h].assign(static_cast<size_t>(layers_[h]), 0.0);
  canonicalize();
  validate();
}

ModularNetwork ModularNetwork::fully_connected(std::vector<int> layer_sizes, ModuleTag module) {
  std::vector<Link> links;
  for (size_t h = 1; h < layer_sizes.size(); ++h)
    for (int to = 0; to < layer_sizes[h]; ++to)
      for (int from = 0; from < layer_sizes[h - 1]; ++from)
        links.push_back({static_cast<int>(h), from, to, 0.0, true, module});
  return ModularNetwork(std::move(layer_sizes), std::move(links));
}

size_t ModularNetwork::present_link_count() const {
  size_t n = 0;
  for (const auto& l : links_)
    if (l.present) ++n;
  return n;
}

void ModularNetwork::canonicalize() { std::sort(links_.begin(), links_.end(), link_order); }

void ModularNetwork::validate() const {
  if (layers_.size() < 2) throw ValidationError("network needs at least input and output layers");
  for (int s : layers_)
    if (s <= 0) throw ValidationError("layer sizes must be positive");
  for (size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (l.layer < 1 || l.layer >= static_cast<int>(layers_.size()))
      throw ValidationError("link layer out of range");
    if (l.from < 0 || l.from >= layers_[static_cast<size_t>(l.layer - 1)] || l.to < 0 ||
        l.to >= layers_[static_cast<size_t>(l.layer)])
      throw ValidationError("link endpoint out of range");
    if (i > 0 && !link_order(links_[i - 1], links_[i]) && !link_order(links_[i], links_[i - 1]))
      throw ValidationError("duplicate link");
  }
}

std::vector<std::vector<double>> ModularNetwork::forward_trace(std::span<const double> input) const {
  if (input.size() != static_cast<size_t>(layers_.front()))
    throw ParameterError("forward: input has " + std::to_string(input.size()) +
                         " components, network expects " + std::to_string(layers_.front()));
  std::vector<std::vector<double>> act(layers_.size());
  act[0].assign(input.begin(), input.end());
  // Links are canonically ordered, so per-layer accumulation below is
  // independent of insertion order.
  size_t cursor = 0;
  for (size_t h = 1; h < layers_.size(); ++h) {
    std::vector<double> net(static_cast<size_t>(layers_[h]));
    for (int j = 0; j < layers_[h]; ++j) net[static_cast<size_t>(j)] = -biases_[h][static_cast<size_t>(j)];
    while (cursor < links_.size() && links_[cursor].layer == static_cast<int>(h)) {
      const auto& l = links_[cursor];
      if (l.present)
        net[static_cast<size_t>(l.to)] += l.weight * act[h - 1][static_cast<size_t>(l.from)];
      ++cursor;
    }
    act[h].resize(net.size());
    for (size_t j = 0; j < net.size(); ++j) act[h][j] = sigmoid(net[j]);
  }
  return act;
}

NetworkOutput ModularNetwork::forward(std::span<const double> input) const {
  auto act = forward_trace(input);
  NetworkOutput out;
  out.activations = std::move(act.back());
  size_t best = 0;
  for (size_t k = 1; k < out.activations.size(); ++k)
    if (out.activations[k] > out.activations[best]) best = k;
  out.predicted_class = static_cast<int>(best) + 1;
  for (size_t k = 0; k < out.activations.size(); ++k)
    if (k != best && out.activations[k] == out.activations[best]) out.tie = true;
  out.classified = !out.tie && out.activations[best] > 0.5;
  return out;
}

EncodableRule to_encodable(const DependencyRule& r) {
  EncodableRule out;
  out.class_label = r.class_label;
  for (AttrMask c : r.formula.conjuncts) out.formula.conjuncts.push_back({c, 0});
  return out;
}

std::vector<ModularNetwork> encode_rules(std::span<const EncodableRule> rules, int feature_count,
                                         int class_count) {
  if (rules.empty()) throw ValidationError("encode_rules: no rules given");
  if (feature_count < 1) throw ParameterError("encode_rules: feature count must be >= 1");
  const int width = 3 * feature_count;
  if (width > static_cast<int>(kMaxAttributes))
    throw ParameterError("encode_rules: at most 21 features supported");

  std::vector<ModularNetwork> out;
  for (const auto& rule : rules) {
    if (rule.class_label < 1 || rule.class_label > class_count)
      throw ValidationError("encode_rules: rule class " + std::to_string(rule.class_label) +
                            " outside 1.." + std::to_string(class_count));
    const AttrMask used = rule.formula.attribute_union();
    if (width < 64 && (used >> width) != 0)
      throw ValidationError("encode_rules: rule for class " + std::to_string(rule.class_label) +
                            " references an attribute index beyond 3n");
    if (rule.formula.conjuncts.empty())
      throw ValidationError("encode_rules: rule for class " + std::to_string(rule.class_label) +
                            " has no conjuncts");

    const int hidden = static_cast<int>(rule.formula.conjuncts.size());
    const ModuleTag tag = rule.class_label;
    std::vector<Link> links;
    for (int hnode = 0; hnode < hidden; ++hnode) {
      const auto& conj = rule.formula.conjuncts[static_cast<size_t>(hnode)];
      for (int a = 0; a < width; ++a) {
        const AttrMask bit = AttrMask{1} << a;
        Link l{1, a, hnode, 0.0, false, tag};
        if (conj.positive & bit) {
          l.weight = kRuleLiteralWeight;
          l.present = true;
        } else if (conj.negated & bit) {
          l.weight = -kRuleLiteralWeight;
          l.present = true;
        }
        links.push_back(l);
      }
      links.push_back({2, hnode, 0, kDisjunctWeight, true, tag});
    }
    ModularNetwork net({width, hidden, 1}, std::move(links));
    for (int hnode = 0; hnode < hidden; ++hnode) {
      const int positives = popcount_mask(rule.formula.conjuncts[static_cast<size_t>(hnode)].positive);
      net.set_bias(1, hnode, kRuleGain * (2.0 * positives - 1.0));
    }
    net.set_bias(2, 0, kDisjunctBias);
    out.push_back(std::move(net));
  }
  return out;
}

std::vector<ModularNetwork> encode_rules(std::span<const DependencyRule> rules, int feature_count,
                                         int class_count) {
  std::vector<EncodableRule> enc;
  enc.reserve(rules.size());
  for (const auto& r : rules) enc.push_back(to_encodable(r));
  return encode_rules(std::span<const EncodableRule>(enc), feature_count, class_count);
}

ModularNetwork concatenate_modules(std::span<const ModularNetwork> subnets,
                                   std::span<const int> subnet_class, int class_count,
                                   const std::vector<bool>& chosen, double inter_weight_range,
                                   Rng* rng) {
  if (subnets.empty()) throw ValidationError("concatenate_modules: no sub-networks");
  if (subnet_class.size() != subnets.size() || chosen.size() != subnets.size())
    throw ParameterError("concatenate_modules: span sizes disagree");
  const int width = subnets[0].input_size();
  for (const auto& s : subnets) {
    if (s.input_size() != width) throw ValidationError("sub-networks disagree on input width");
    if (s.layer_count() != 3 || s.output_size() != 1)
      throw ValidationError("sub-networks must be [3n, h, 1] shaped");
  }

  int total_hidden = 0;
  std::vector<int> offset(subnets.size(), 0);
  for (size_t s = 0; s < subnets.size(); ++s) {
    offset[s] = total_hidden;
    total_hidden += subnets[s].layers()[1];
  }

  std::vector<Link> links;
  for (size_t s = 0; s < subnets.size(); ++s) {
    const ModuleTag tag = subnet_class[s];
    for (const auto& l : subnets[s].links()) {
      Link copy = l;
      copy.module = tag;
      if (l.layer == 1) {
        copy.to += offset[s];
      } else {
        copy.from += offset[s];
        copy.to = subnet_class[s] - 1;
      }
      if (!chosen[s]) {
        copy.present = false;
        copy.weight = 0.0;
      }
      links.push_back(copy);
    }
  }
  // Inter-module links: hidden node of one class module feeding another
  // class's output.
  for (size_t s = 0; s < subnets.size(); ++s) {
    for (int h = 0; h < subnets[s].layers()[1]; ++h) {
      for (int k = 0; k < class_count; ++k) {
        if (k == subnet_class[s] - 1) continue;
        Link l{2, offset[s] + h, k, 0.0, false, kInterModule};
        if (rng) {
          l.weight = rng->next_range(-inter_weight_range, inter_weight_range);
          l.present = true;
        }
        links.push_back(l);
      }
    }
  }

  ModularNetwork net({width, total_hidden, class_count}, std::move(links));
  for (size_t s = 0; s < subnets.size(); ++s)
    for (int h = 0; h < subnets[s].layers()[1]; ++h)
      net.set_bias(1, offset[s] + h, subnets[s].bias(1, h));
  for (int k = 0; k < class_count; ++k) net.set_bias(2, k, kDisjunctBias);
  return net;
}

double network_loss(const ModularNetwork& net, std::span<const TrainPattern> data) {
  double loss = 0.0;
  for (const auto& p : data) {
    auto act = net.forward_trace(p.input);
    const auto& y = act.back();
    if (y.size() != p.target.size()) throw ParameterError("target dimension mismatch");
    for (size_t k = 0; k < y.size(); ++k) {
      const double d = y[k] - p.target[k];
      loss += 0.5 * d * d;
    }
  }
  return loss;
}

Gradients network_gradients(const ModularNetwork& net, std::span<const TrainPattern> data) {
  Gradients g;
  g.weight.assign(net.link_count(), 0.0);
  g.bias.resize(static_cast<size_t>(net.layer_count()));
  for (int h = 1; h < net.layer_count(); ++h)
    g.bias[static_cast<size_t>(h)].assign(static_cast<size_t>(net.layers()[static_cast<size_t>(h)]), 0.0);

  // Canonical order gives contiguous per-layer link ranges.
  std::vector<size_t> layer_begin(static_cast<size_t>(net.layer_count()) + 1, net.link_count());
  {
    size_t cursor = 0;
    for (int h = 1; h < net.layer_count(); ++h) {
      layer_begin[static_cast<size_t>(h)] = cursor;
      while (cursor < net.link_count() && net.links()[cursor].layer == h) ++cursor;
    }
    layer_begin[static_cast<size_t>(net.layer_count())] = cursor;
  }

  for (const auto& p : data) {
    auto act = net.forward_trace(p.input);
    const int last = net.layer_count() - 1;
    std::vector<std::vector<double>> delta(static_cast<size_t>(net.layer_count()));
    delta[static_cast<size_t>(last)].resize(act.back().size());
    for (size_t k = 0; k < act.back().size(); ++k) {
      const double y = act.back()[k];
      delta[static_cast<size_t>(last)][k] = (y - p.target[k]) * y * (1.0 - y);
    }
    for (int h = last - 1; h >= 1; --h) {
      delta[static_cast<size_t>(h)].assign(act[static_cast<size_t>(h)].size(), 0.0);
      for (size_t i = layer_begin[static_cast<size_t>(h + 1)]; i < layer_begin[static_cast<size_t>(h + 2)]; ++i) {
        const auto& l = net.links()[i];
        if (!l.present) continue;
        delta[static_cast<size_t>(h)][static_cast<size_t>(l.from)] +=
            l.weight * delta[static_cast<size_t>(h + 1)][static_cast<size_t>(l.to)];
      }
      for (size_t j = 0; j < delta[static_cast<size_t>(h)].size(); ++j) {
        const double y = act[static_cast<size_t>(h)][j];
        delta[static_cast<size_t>(h)][j] *= y * (1.0 - y);
      }
    }
    for (int h = 1; h <= last; ++h) {
      for (size_t i = layer_begin[static_cast<size_t>(h)]; i < layer_begin[static_cast<size_t>(h + 1)]; ++i) {
        const auto& l = net.links()[i];
        if (!l.present) continue;
        g.weight[i] += delta[static_cast<size_t>(h)][static_cast<size_t>(l.to)] *
                       act[static_cast<size_t>(h - 1)][static_cast<size_t>(l.from)];
      }
      for (size_t j = 0; j < delta[static_cast<size_t>(h)].size(); ++j)
        g.bias[static_cast<size_t>(h)][j] -= delta[static_cast<size_t>(h)][j];
    }
  }
  return g;
}

ModularNetwork backprop_train(const ModularNetwork& net, std::span<const TrainPattern> data,
                              const BackpropOptions& opt, std::vector<double>* epoch_loss) {
  if (opt.epochs < 1) throw ParameterError("backprop: epochs must be >= 1");
  ModularNetwork m = net;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const double loss = network_loss(m, data);
    if (!std::isfinite(loss))
      throw NumericError("backprop diverged at epoch " + std::to_string(epoch));
    if (epoch_loss) epoch_loss->push_back(loss);
    Gradients g = network_gradients(m, data);
    auto& links = m.links();
    for (size_t i = 0; i < links.size(); ++i) {
      if (!links[i].present) continue;
      links[i].weight -= opt.rate * (g.weight[i] + opt.decay * links[i].weight);
    }
    for (int h = 1; h < m.layer_count(); ++h)
      for (int j = 0; j < m.layers()[static_cast<size_t>(h)]; ++j)
        m.set_bias(h, j, m.bias(h, j) - opt.rate * g.bias[static_cast<size_t>(h)][static_cast<size_t>(j)]);
  }
  if (epoch_loss) epoch_loss->push_back(network_loss(m, data));
  return m;
}

namespace {

std::vector<int> layer_offsets(const std::vector<int>& layers) {
  std::vector<int> off(layers.size() + 1, 0);
  for (size_t h = 0; h < layers.size(); ++h) off[h + 1] = off[h] + layers[h];
  return off;
}

std::string tag_to_string(ModuleTag t) {
  return t == kInterModule ? "inter" : ("intra:" + std::to_string(t));
}

ModuleTag tag_from_string(const std::string& s) {
  if (s == "inter") return kInterModule;
  if (s.rfind("intra:", 0) == 0) return std::stoi(s.substr(6));
  throw IoError("bad module tag '" + s + "'");
}

}  // namespace

std::string ModularNetwork::to_json() const {
  nlohmann::json root;
  root["layers"] = layers_;
  const auto off = layer_offsets(layers_);
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : links_) {
    nlohmann::json e;
    e["from"] = off[static_cast<size_t>(l.layer - 1)] + l.from;
    e["to"] = off[static_cast<size_t>(l.layer)] + l.to;
    e["w"] = l.weight;
    e["present"] = l.present;
    e["tag"] = tag_to_string(l.module);
    links.push_back(e);
  }
  root["links"] = links;
  nlohmann::json biases = nlohmann::json::array();
  for (size_t h = 1; h < layers_.size(); ++h) biases.push_back(biases_[h]);
  root["biases"] = biases;
  return root.dump(2) + "\n";
}

ModularNetwork ModularNetwork::from_json(const std::string& content) {
  nlohmann::json root = nlohmann::json::parse(content);
  std::vector<int> layers = root.at("layers").get<std::vector<int>>();
  const auto off = layer_offsets(layers);

  auto locate = [&](int global) {
    for (size_t h = 0; h < layers.size(); ++h)
      if (global >= off[h] && global < off[h + 1]) return std::pair<int, int>(static_cast<int>(h), global - off[h]);
    throw IoError("node id " + std::to_string(global) + " out of range");
  };

  std::vector<Link> links;
  for (const auto& e : root.at("links")) {
    auto [from_layer, from] = locate(e.at("from").get<int>());
    auto [to_layer, to] = locate(e.at("to").get<int>());
    if (to_layer != from_layer + 1) throw IoError("link does not connect adjacent layers");
    links.push_back({to_layer, from, to, e.at("w").get<double>(), e.at("present").get<bool>(),
                     tag_from_string(e.at("tag").get<std::string>())});
  }
  ModularNetwork net(layers, std::move(links));
  const auto& biases = root.at("biases");
  for (size_t h = 1; h < layers.size(); ++h) {
    const auto& layer_biases = biases.at(h - 1);
    for (int j = 0; j < layers[h]; ++j)
      net.set_bias(static_cast<int>(h), j, layer_biases.at(static_cast<size_t>(j)).get<double>());
  }
  return net;
}

void ModularNetwork::write_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_json();
}

ModularNetwork ModularNetwork::read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace rufmine

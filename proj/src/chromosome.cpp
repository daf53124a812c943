#include "rufmine/chromosome.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rufmine {

void GaConfig::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (population < 1) throw ParameterError("population must be >= 1");
  if (!prob_ok(crossover_prob) || !prob_ok(pmut_max) || !prob_ok(pmut_min))
    throw ParameterError("probabilities must lie in [0,1]");
  if (pmut_min > pmut_max) throw ParameterError("pmut_min must not exceed pmut_max");
  if (intra_divisor < 1.0) throw ParameterError("intra divisor must be >= 1");
  if (std::abs(alpha1 + alpha2 - 1.0) > 1e-12)
    throw ParameterError("fitness weights must sum to 1");
  if (stage1_sweeps < 0 || generations < 0) throw ParameterError("negative budget");
  if (combo_cap < 1) throw ParameterError("combination cap must be >= 1");
}

namespace {

constexpr uint32_t kWordMax = 65535;

uint16_t quantize(double v, double lo, double hi) {
  const double unit = (v - lo) / (hi - lo);
  long word = std::lround(unit * kWordMax);
  word = std::clamp(word, 0L, static_cast<long>(kWordMax));
  return static_cast<uint16_t>(word);
}

void write_word(std::vector<uint8_t>& bits, size_t offset, uint16_t word) {
  for (int b = 0; b < 16; ++b) bits[offset + static_cast<size_t>(b)] = (word >> (15 - b)) & 1;
}

uint16_t read_word(const std::vector<uint8_t>& bits, size_t offset) {
  uint16_t word = 0;
  for (int b = 0; b < 16; ++b) word = static_cast<uint16_t>((word << 1) | bits[offset + static_cast<size_t>(b)]);
  return word;
}

}  // namespace

uint16_t encode_weight_word(double w, bool* clamped) {
  if (clamped) *clamped = w < -128.0 || w > 128.0;
  return quantize(std::clamp(w, -128.0, 128.0), -128.0, 128.0);
}

double decode_weight_word(uint16_t word) {
  return static_cast<double>(word) / kWordMax * 256.0 - 128.0;
}

LayoutPtr make_layout(const ModularNetwork& template_net, std::span<const double> feature_max,
                      bool with_fuzzy_block, const FuzzyEncoding& base_encoding,
                      const FuzzyGenerators& base_generators) {
  auto layout = std::make_shared<ChromosomeLayout>();
  layout->template_net = template_net;
  layout->has_fuzzy_block = with_fuzzy_block;
  layout->base_encoding = base_encoding;
  layout->base_generators = base_generators;

  layout->feature_scale.reserve(feature_max.size());
  for (double m : feature_max) layout->feature_scale.push_back(1.2 * std::max(m, 1e-9));

  if (with_fuzzy_block && base_encoding.feature_count() != feature_max.size())
    throw ParameterError("layout: encoding and feature_max disagree on feature count");

  layout->bit_kind.reserve(17 * template_net.link_count() +
                           (with_fuzzy_block ? 16 * (6 * feature_max.size() + 2) : 0));
  for (const auto& link : template_net.links()) {
    const BitKind kind = link.module == kInterModule ? BitKind::InterLink : BitKind::IntraLink;
    for (int b = 0; b < 17; ++b) layout->bit_kind.push_back(kind);
  }
  if (with_fuzzy_block) {
    const size_t words = 6 * feature_max.size() + 2;
    for (size_t w = 0; w < words * 16; ++w) layout->bit_kind.push_back(BitKind::FuzzyParam);
  }
  return layout;
}

Chromosome encode_chromosome(const ModularNetwork& net, const FuzzyEncoding& enc,
                             const FuzzyGenerators& gen, const LayoutPtr& layout,
                             Diagnostics* diag) {
  if (!layout) throw ParameterError("encode: null layout");
  const auto& tmpl = layout->template_net;
  if (net.link_count() != tmpl.link_count() || net.layers() != tmpl.layers())
    throw ParameterError("encode: network does not match the layout template");

  Chromosome c;
  c.layout = layout;
  c.bits.assign(layout->total_bits(), 0);

  size_t clamped = 0;
  for (size_t i = 0; i < net.link_count(); ++i) {
    const auto& l = net.links()[i];
    const auto& t = tmpl.links()[i];
    if (l.layer != t.layer || l.from != t.from || l.to != t.to)
      throw ParameterError("encode: link structure differs from the layout template");
    bool was_clamped = false;
    write_word(c.bits, 17 * i, encode_weight_word(l.weight, &was_clamped));
    if (was_clamped) ++clamped;
    c.bits[17 * i + 16] = l.present ? 1 : 0;
  }
  if (clamped > 0)
    warn_into(diag, "encode: clamped " + std::to_string(clamped) + " weight(s) to [-128, 128]");

  if (layout->has_fuzzy_block) {
    if (enc.feature_count() != layout->feature_scale.size())
      throw ParameterError("encode: encoding feature count mismatch");
    size_t offset = layout->link_bits();
    for (size_t j = 0; j < enc.feature_count(); ++j) {
      const double scale = layout->feature_scale[j];
      const PiParams* terms[3] = {&enc.features[j].low, &enc.features[j].medium,
                                  &enc.features[j].high};
      for (const auto* p : terms) {
        write_word(c.bits, offset, quantize(std::clamp(p->center, 0.0, scale), 0.0, scale));
        offset += 16;
        write_word(c.bits, offset, quantize(std::clamp(p->radius, 0.0, scale), 0.0, scale));
        offset += 16;
      }
    }
    // f_d and f_e decode into (0, 2]: word w -> (w + 1) / 65536 * 2.
    auto gen_word = [](double v) {
      long w = std::lround(std::clamp(v, 0.0, 2.0) / 2.0 * 65536.0) - 1;
      return static_cast<uint16_t>(std::clamp(w, 0L, static_cast<long>(kWordMax)));
    };
    write_word(c.bits, offset, gen_word(gen.f_d));
    offset += 16;
    write_word(c.bits, offset, gen_word(gen.f_e));
  }
  return c;
}

DecodedChromosome decode_chromosome(const Chromosome& c) {
  if (!c.layout) throw ParameterError("decode: null layout");
  const auto& layout = *c.layout;
  if (c.bits.size() != layout.total_bits()) throw ParameterError("decode: bit count mismatch");

  DecodedChromosome out{layout.template_net, layout.base_encoding, layout.base_generators};
  auto& links = out.net.links();
  for (size_t i = 0; i < links.size(); ++i) {
    links[i].weight = decode_weight_word(read_word(c.bits, 17 * i));
    links[i].present = c.bits[17 * i + 16] != 0;
  }

  if (layout.has_fuzzy_block) {
    size_t offset = layout.link_bits();
    out.encoding.features.clear();
    for (size_t j = 0; j < layout.feature_scale.size(); ++j) {
      const double scale = layout.feature_scale[j];
      std::array<PiParams, 3> terms;
      for (auto& p : terms) {
        p.center = static_cast<double>(read_word(c.bits, offset)) / kWordMax * scale;
        offset += 16;
        p.radius = static_cast<double>(read_word(c.bits, offset)) / kWordMax * scale;
        offset += 16;
        p.radius = std::max(p.radius, 1e-6 * scale);  // keep the pi-function valid
      }
      // Mutation can scramble term order; restore c_L <= c_M <= c_H.
      std::sort(terms.begin(), terms.end(), [](const PiParams& a, const PiParams& b) {
        if (a.center != b.center) return a.center < b.center;
        return a.radius < b.radius;
      });
      out.encoding.features.push_back({terms[0], terms[1], terms[2]});
    }
    out.generators.f_d = (static_cast<double>(read_word(c.bits, offset)) + 1.0) / 65536.0 * 2.0;
    offset += 16;
    out.generators.f_e = (static_cast<double>(read_word(c.bits, offset)) + 1.0) / 65536.0 * 2.0;
  }
  return out;
}

size_t present_links(const Chromosome& c) {
  size_t n = 0;
  const size_t link_count = c.layout->template_net.link_count();
  for (size_t i = 0; i < link_count; ++i)
    if (c.bits[17 * i + 16]) ++n;
  return n;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng,
                                            double prob) {
  if (a.layout != b.layout || a.bits.size() != b.bits.size())
    throw ParameterError("crossover: chromosome layouts differ");

  Chromosome c1 = a, c2 = b;
  if (rng.next_double() >= prob) return {c1, c2};

  // Crossover points advance by uniform gaps of 8..24 bits; parity of the
  // points passed so far decides which parent supplies a bit.
  size_t pos = static_cast<size_t>(rng.next_between(8, 24));
  bool swapped = false;
  size_t cursor = 0;
  while (cursor < a.bits.size()) {
    const size_t stop = std::min(pos, a.bits.size());
    if (swapped) {
      for (size_t i = cursor; i < stop; ++i) {
        c1.bits[i] = b.bits[i];
        c2.bits[i] = a.bits[i];
      }
    }
    cursor = stop;
    if (cursor >= a.bits.size()) break;
    pos += static_cast<size_t>(rng.next_between(8, 24));
    swapped = !swapped;
  }
  return {c1, c2};
}

double mutation_rate(double pmut_max, double pmut_min, int t, int total) {
  if (total <= 0) return pmut_min;
  const double frac = std::clamp(static_cast<double>(t) / static_cast<double>(total), 0.0, 1.0);
  return pmut_max - (pmut_max - pmut_min) * frac;
}

Chromosome mutate(const Chromosome& c, int t, int total, Rng& rng, const GaConfig& cfg,
                  MutationMode mode) {
  if (t > total) throw ParameterError("mutate: generation beyond total");
  const double pmut = mutation_rate(cfg.pmut_max, cfg.pmut_min, t, total);
  const double restricted = pmut / cfg.intra_divisor;

  Chromosome out = c;
  const auto& kinds = c.layout->bit_kind;
  for (size_t i = 0; i < out.bits.size(); ++i) {
    double rate = pmut;
    if (mode == MutationMode::Spatial && kinds[i] != BitKind::InterLink) rate = restricted;
    if (rng.bernoulli(rate)) out.bits[i] ^= 1;
  }
  return out;
}

Chromosome perturb_weights(const Chromosome& c, double sigma, Rng& rng) {
  Chromosome out = c;
  const size_t link_count = c.layout->template_net.link_count();
  for (size_t i = 0; i < link_count; ++i) {
    if (!out.bits[17 * i + 16]) continue;
    const double w = decode_weight_word(read_word(out.bits, 17 * i));
    write_word(out.bits, 17 * i, encode_weight_word(w + sigma * rng.gaussian()));
  }
  return out;
}

}  // namespace rufmine

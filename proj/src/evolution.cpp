#include "rufmine/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#ifdef RUFMINE_HAS_OPENMP
#include <omp.h>
#endif

#include "rufmine/util.hpp"

namespace rufmine {

EvalContext EvalContext::fixed(std::vector<std::vector<double>> fuzzified, std::vector<int> labels) {
  if (fuzzified.size() != labels.size()) throw ParameterError("evaluation set sizes disagree");
  EvalContext ctx;
  ctx.fixed_inputs = std::move(fuzzified);
  ctx.labels = std::move(labels);
  return ctx;
}

EvalContext EvalContext::refuzzified(std::vector<std::vector<double>> raw, std::vector<int> labels) {
  if (raw.size() != labels.size()) throw ParameterError("evaluation set sizes disagree");
  EvalContext ctx;
  ctx.raw_patterns = std::move(raw);
  ctx.labels = std::move(labels);
  ctx.refuzzify = true;
  return ctx;
}

FitnessReport fitness(const Chromosome& c, const EvalContext& ctx) {
  if (ctx.labels.empty()) throw ParameterError("fitness: empty evaluation set");
  const DecodedChromosome d = decode_chromosome(c);

  size_t correct = 0;
  for (size_t i = 0; i < ctx.labels.size(); ++i) {
    std::vector<double> input;
    if (ctx.refuzzify)
      input = fuzzify(ctx.raw_patterns[i], d.encoding);
    else
      input = ctx.fixed_inputs[i];
    const NetworkOutput out = d.net.forward(input);
    if (ctx.binary_class > 0) {
      const bool fired = out.activations[0] > 0.5;
      if (fired == (ctx.labels[i] == ctx.binary_class)) ++correct;
    } else {
      if (out.predicted_class == ctx.labels[i]) ++correct;
    }
  }

  FitnessReport r;
  r.links_present = present_links(c);
  r.f1 = static_cast<double>(correct) / static_cast<double>(ctx.labels.size());
  const size_t possible = c.layout->template_net.link_count();
  r.f2 = possible == 0 ? 0.0
                       : 1.0 - static_cast<double>(r.links_present) / static_cast<double>(possible);
  r.fitness = ctx.alpha1 * r.f1 + ctx.alpha2 * r.f2;
  return r;
}

bool openmp_enabled() {
#ifdef RUFMINE_HAS_OPENMP
  return true;
#else
  return false;
#endif
}

std::vector<FitnessReport> evaluate_population(std::span<const Chromosome> population,
                                               const EvalContext& ctx, ExecutionMode mode) {
  std::vector<FitnessReport> out(population.size());
#ifdef RUFMINE_HAS_OPENMP
  if (mode == ExecutionMode::OpenMP) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(population.size()); ++i)
      out[static_cast<size_t>(i)] = fitness(population[static_cast<size_t>(i)], ctx);
    return out;
  }
#else
  (void)mode;
#endif
  for (size_t i = 0; i < population.size(); ++i) out[i] = fitness(population[i], ctx);
  return out;
}

namespace {

// Strict "worse-than" order for ranking: lower fitness, then more links,
// then lexicographically larger bits.
bool worse_than(const FitnessReport& ra, const Chromosome& ca, const FitnessReport& rb,
                const Chromosome& cb) {
  if (ra.fitness != rb.fitness) return ra.fitness < rb.fitness;
  if (ra.links_present != rb.links_present) return ra.links_present > rb.links_present;
  return cb.lexicographically_less(ca);
}

std::vector<size_t> rank_order(std::span<const FitnessReport> reports,
                               std::span<const Chromosome> population) {
  std::vector<size_t> order(reports.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return worse_than(reports[a], population[a], reports[b], population[b]);
  });
  return order;  // order[0] = worst ... order[P-1] = best
}

}  // namespace

size_t best_index(std::span<const FitnessReport> reports, std::span<const Chromosome> population) {
  return rank_order(reports, population).back();
}

std::vector<size_t> select_parents(std::span<const FitnessReport> reports,
                                   std::span<const Chromosome> population, size_t count, Rng& rng) {
  if (reports.empty()) throw ParameterError("select: empty population");
  const auto order = rank_order(reports, population);
  const size_t p = order.size();
  const uint64_t total = p * (p + 1) / 2;

  std::vector<size_t> parents;
  parents.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    uint64_t ticket = rng.next_below(total);
    size_t rank = 0;
    uint64_t cumulative = 0;
    for (size_t r = 1; r <= p; ++r) {
      cumulative += r;
      if (ticket < cumulative) { rank = r; break; }
    }
    parents.push_back(order[rank - 1]);
  }
  return parents;
}

std::string EvolveLog::to_csv() const {
  std::string out = "generation,best_f,best_f1,mean_f,best_links\n";
  for (const auto& r : rows) {
    out += std::to_string(r.generation) + "," + format_double(r.best_f) + "," +
           format_double(r.best_f1) + "," + format_double(r.mean_f) + "," +
           std::to_string(r.best_links) + "\n";
  }
  return out;
}

void EvolveLog::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_csv();
}

namespace {

struct GaState {
  std::vector<Chromosome> population;
  std::vector<FitnessReport> reports;
  size_t best = 0;
};

void log_generation(EvolveLog* log, int generation, const GaState& s) {
  if (!log) return;
  GenerationRow row;
  row.generation = generation;
  row.best_f = s.reports[s.best].fitness;
  row.best_f1 = s.reports[s.best].f1;
  row.best_links = s.reports[s.best].links_present;
  double sum = 0.0;
  for (const auto& r : s.reports) sum += r.fitness;
  row.mean_f = sum / static_cast<double>(s.reports.size());
  log->rows.push_back(row);
}

// One full GA run over a prepared population. Elitism: whenever a new
// generation's best falls below the previous one's, the previous best
// replaces a uniformly random individual.
GaState run_ga(std::vector<Chromosome> initial, const EvalContext& ctx, const GaConfig& cfg,
               int generations, MutationMode mode, ExecutionMode exec, Rng& rng,
               EvolveLog* log) {
  GaState s;
  s.population = std::move(initial);
  s.reports = evaluate_population(s.population, ctx, exec);
  s.best = best_index(s.reports, s.population);
  log_generation(log, 0, s);

  const int anneal_total = std::max(generations - 1, 1);
  for (int gen = 1; gen <= generations; ++gen) {
    const size_t p = s.population.size();
    const auto parents = select_parents(s.reports, s.population, p, rng);

    std::vector<Chromosome> next;
    next.reserve(p);
    const int t = gen - 1;
    for (size_t i = 0; i + 1 < parents.size(); i += 2) {
      auto [c1, c2] = crossover(s.population[parents[i]], s.population[parents[i + 1]], rng,
                                cfg.crossover_prob);
      next.push_back(mutate(c1, t, anneal_total, rng, cfg, mode));
      if (next.size() < p) next.push_back(mutate(c2, t, anneal_total, rng, cfg, mode));
    }
    if (next.size() < p)
      next.push_back(mutate(s.population[parents.back()], t, anneal_total, rng, cfg, mode));

    auto next_reports = evaluate_population(next, ctx, exec);
    size_t next_best = best_index(next_reports, next);

    if (next_reports[next_best].fitness < s.reports[s.best].fitness) {
      const size_t victim = static_cast<size_t>(rng.next_below(p));
      next[victim] = s.population[s.best];
      next_reports[victim] = s.reports[s.best];
      if (worse_than(next_reports[next_best], next[next_best], next_reports[victim], next[victim]))
        next_best = victim;
    }

    s.population = std::move(next);
    s.reports = std::move(next_reports);
    s.best = next_best;
    log_generation(log, gen, s);
  }
  return s;
}

std::vector<double> feature_maxima(const DecisionTable& train) {
  std::vector<double> fmax(train.attribute_count(), 0.0);
  for (const auto& row : train.base.rows)
    for (size_t j = 0; j < row.size(); ++j) fmax[j] = std::max(fmax[j], row[j]);
  return fmax;
}

std::vector<std::vector<double>> fuzzify_all(const DecisionTable& t, const FuzzyEncoding& enc) {
  std::vector<std::vector<double>> out;
  out.reserve(t.object_count());
  for (const auto& row : t.base.rows) out.push_back(fuzzify(row, enc));
  return out;
}

std::vector<Chromosome> fill_population(std::vector<Chromosome> seeds, size_t target, double sigma,
                                        Rng& rng) {
  if (seeds.empty()) throw ParameterError("cannot fill an empty population");
  std::vector<Chromosome> pop = seeds;
  size_t next_seed = 0;
  while (pop.size() < target) {
    pop.push_back(perturb_weights(seeds[next_seed], sigma, rng));
    next_seed = (next_seed + 1) % seeds.size();
  }
  return pop;
}

EvolveResult evolve_common(std::vector<ModularNetwork> subnets, std::vector<int> subnet_class,
                           const DecisionTable& train, const FuzzyEncoding& init_enc,
                           const FuzzyGenerators& init_gen, const GaConfig& cfg, uint64_t seed,
                           EvolveLog* log, Diagnostics* diag) {
  cfg.validate();
  const int l = train.class_count();
  const ExecutionMode exec = cfg.parallel ? ExecutionMode::OpenMP : ExecutionMode::Serial;
  Rng root(seed);

  const auto fmax = feature_maxima(train);
  const auto fuzzified = fuzzify_all(train, init_enc);

  // Stage 1: evolve each sub-network pool on its own two-class problem.
  // Fuzzy parameters stay fixed here; they join the genome in stage 2.
  std::vector<ModularNetwork> evolved(subnets.size());
  for (size_t s = 0; s < subnets.size(); ++s) {
    Rng pool_rng = root.child(0x100 + s);
    auto layout = make_layout(subnets[s], fmax, false, init_enc, init_gen);
    Chromosome base = encode_chromosome(subnets[s], init_enc, init_gen, layout, diag);

    auto ctx = EvalContext::fixed(fuzzified, train.decisions);
    ctx.binary_class = subnet_class[s];
    ctx.alpha1 = cfg.alpha1;
    ctx.alpha2 = cfg.alpha2;

    auto pop = fill_population({base}, static_cast<size_t>(cfg.population), cfg.perturb_sigma,
                               pool_rng);
    GaState state = run_ga(std::move(pop), ctx, cfg, cfg.stage1_sweeps, MutationMode::Uniform,
                           exec, pool_rng, nullptr);
    evolved[s] = decode_chromosome(state.population[state.best]).net;
  }

  // Stage 2: union template over every sub-network; each cross-pool
  // combination becomes one presence pattern.
  std::vector<std::vector<size_t>> per_class(static_cast<size_t>(l));
  for (size_t s = 0; s < subnet_class.size(); ++s)
    per_class[static_cast<size_t>(subnet_class[s] - 1)].push_back(s);

  const auto combos = cross_pool_combinations(per_class, cfg.combo_cap, diag);

  Rng combo_rng = root.child(0x200);
  const std::vector<bool> all_chosen(subnets.size(), true);
  Rng template_rng = root.child(0x201);
  ModularNetwork template_net = concatenate_modules(evolved, subnet_class, l, all_chosen,
                                                    cfg.inter_weight_range, &template_rng);
  auto layout2 = make_layout(template_net, fmax, true, init_enc, init_gen);

  std::vector<Chromosome> seeds;
  for (const auto& combo_pick : combos) {
    std::vector<bool> chosen(subnets.size(), false);
    for (int k = 0; k < l; ++k)
      chosen[per_class[static_cast<size_t>(k)][combo_pick[static_cast<size_t>(k)]]] = true;
    ModularNetwork combo = concatenate_modules(evolved, subnet_class, l, chosen,
                                               cfg.inter_weight_range, &combo_rng);
    seeds.push_back(encode_chromosome(combo, init_enc, init_gen, layout2, diag));
  }

  const size_t target = std::max(static_cast<size_t>(cfg.population), seeds.size());
  Rng fill_rng = root.child(0x300);
  auto population = fill_population(std::move(seeds), target, cfg.perturb_sigma, fill_rng);

  std::vector<std::vector<double>> raw;
  raw.reserve(train.object_count());
  for (const auto& row : train.base.rows) raw.push_back(row);
  auto ctx = EvalContext::refuzzified(std::move(raw), train.decisions);
  ctx.alpha1 = cfg.alpha1;
  ctx.alpha2 = cfg.alpha2;

  Rng ga_rng = root.child(0x400);
  GaState state = run_ga(std::move(population), ctx, cfg, cfg.generations, MutationMode::Spatial,
                         exec, ga_rng, log);

  EvolveResult out;
  out.best = state.population[state.best];
  out.best_report = state.reports[state.best];
  DecodedChromosome d = decode_chromosome(out.best);
  out.net = std::move(d.net);
  out.encoding = std::move(d.encoding);
  out.generators = std::move(d.generators);
  return out;
}

}  // namespace

std::vector<std::vector<size_t>> cross_pool_combinations(
    const std::vector<std::vector<size_t>>& pools_per_class, int cap, Diagnostics* diag) {
  if (cap < 1) throw ParameterError("combination cap must be >= 1");
  for (const auto& pool : pools_per_class)
    if (pool.empty()) throw ValidationError("a class has no pool members");

  uint64_t count = 1;
  bool saturated = false;
  for (const auto& pool : pools_per_class) {
    count *= pool.size();
    if (count > static_cast<uint64_t>(cap) * 16) { saturated = true; break; }
  }

  std::vector<uint64_t> ids;
  if (!saturated && count <= static_cast<uint64_t>(cap)) {
    for (uint64_t i = 0; i < count; ++i) ids.push_back(i);
  } else {
    warn_into(diag, "combination count " + std::to_string(count) + (saturated ? "+" : "") +
                        " exceeds cap " + std::to_string(cap) + "; uniform subsample taken");
    for (int i = 0; i < cap; ++i)
      ids.push_back(static_cast<uint64_t>(i) * count / static_cast<uint64_t>(cap));
  }

  std::vector<std::vector<size_t>> out;
  out.reserve(ids.size());
  for (uint64_t id : ids) {
    std::vector<size_t> pick(pools_per_class.size(), 0);
    uint64_t rest = id;
    for (size_t k = 0; k < pools_per_class.size(); ++k) {
      pick[k] = static_cast<size_t>(rest % pools_per_class[k].size());
      rest /= pools_per_class[k].size();
    }
    out.push_back(std::move(pick));
  }
  return out;
}

EvolveResult evolve_modular(std::span<const DependencyRule> rules, const DecisionTable& train,
                            const FuzzyEncoding& init_enc, const FuzzyGenerators& init_gen,
                            const GaConfig& cfg, uint64_t seed, EvolveLog* log,
                            Diagnostics* diag) {
  train.validate();
  const int l = train.class_count();
  std::vector<bool> covered(static_cast<size_t>(l), false);
  for (const auto& r : rules) {
    if (r.class_label < 1 || r.class_label > l)
      throw ValidationError("rule class " + std::to_string(r.class_label) + " outside 1.." +
                            std::to_string(l));
    covered[static_cast<size_t>(r.class_label - 1)] = true;
  }
  for (int k = 0; k < l; ++k)
    if (!covered[static_cast<size_t>(k)])
      throw ValidationError("no dependency rule for class " + std::to_string(k + 1));

  auto subnets = encode_rules(rules, static_cast<int>(train.attribute_count()), l);
  std::vector<int> subnet_class;
  subnet_class.reserve(rules.size());
  for (const auto& r : rules) subnet_class.push_back(r.class_label);

  return evolve_common(std::move(subnets), std::move(subnet_class), train, init_enc, init_gen,
                       cfg, seed, log, diag);
}

EvolveResult evolve_random_modular(const DecisionTable& train, const FuzzyEncoding& init_enc,
                                   const FuzzyGenerators& init_gen, int hidden_per_class,
                                   const GaConfig& cfg, uint64_t seed, EvolveLog* log,
                                   Diagnostics* diag) {
  train.validate();
  if (hidden_per_class < 1) throw ParameterError("hidden_per_class must be >= 1");
  const int l = train.class_count();
  const int width = 3 * static_cast<int>(train.attribute_count());

  Rng init_rng = Rng(seed).child(0x500);
  std::vector<ModularNetwork> subnets;
  std::vector<int> subnet_class;
  for (int k = 1; k <= l; ++k) {
    std::vector<Link> links;
    for (int h = 0; h < hidden_per_class; ++h) {
      for (int a = 0; a < width; ++a)
        links.push_back({1, a, h, init_rng.next_range(-1.0, 1.0), true, k});
      links.push_back({2, h, 0, init_rng.next_range(-1.0, 1.0), true, k});
    }
    ModularNetwork net({width, hidden_per_class, 1}, std::move(links));
    for (int h = 0; h < hidden_per_class; ++h) net.set_bias(1, h, init_rng.next_range(-1.0, 1.0));
    net.set_bias(2, 0, init_rng.next_range(-1.0, 1.0));
    subnets.push_back(std::move(net));
    subnet_class.push_back(k);
  }
  return evolve_common(std::move(subnets), std::move(subnet_class), train, init_enc, init_gen,
                       cfg, seed, log, diag);
}

}  // namespace rufmine

// Benchmark for the population-evaluation kernel: serial reference vs the
// OpenMP path, on a synthetic workload sized like a real run.

#include <chrono>
#include <cstdio>
#include <vector>

#include "rufmine/evolution.hpp"
#include "rufmine/features.hpp"
#include "rufmine/fuzzy.hpp"

using namespace rufmine;

namespace {

double time_eval(std::span<const Chromosome> pop, const EvalContext& ctx, ExecutionMode mode,
                 int reps, double* checksum) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto reports = evaluate_population(pop, ctx, mode);
    for (const auto& rep : reports) sum += rep.fitness;
  }
  *checksum = sum;
  return std::chrono::duration<double>(clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  int population = 64;
  int per_class = 200;
  int reps = 5;
  if (argc > 1) population = std::atoi(argv[1]);
  if (argc > 2) per_class = std::atoi(argv[2]);
  if (argc > 3) reps = std::atoi(argv[3]);

  const DecisionTable table = make_synthetic(per_class, 6, 2.0, 7);
  const FuzzyEncoding enc = init_encoding(table);
  const ClassStatistics stats = compute_class_statistics(table);
  const FuzzyGenerators gen = init_generators(table, stats);

  std::vector<MembershipTable> per_class_tables(static_cast<size_t>(table.class_count()));
  for (size_t i = 0; i < table.object_count(); ++i)
    per_class_tables[static_cast<size_t>(table.decisions[i] - 1)].push_back(
        fuzzify(table.base.rows[i], enc));
  const auto rules = dependency_rules(per_class_tables);

  auto subnets = encode_rules(rules, 3, table.class_count());
  std::vector<int> subnet_class;
  for (const auto& r : rules) subnet_class.push_back(r.class_label);
  Rng rng(11);
  const ModularNetwork net = concatenate_modules(subnets, subnet_class, table.class_count(),
                                                 std::vector<bool>(subnets.size(), true), 0.1, &rng);

  std::vector<double> fmax(3, 1.0);
  auto layout = make_layout(net, fmax, true, enc, gen);
  Chromosome base = encode_chromosome(net, enc, gen, layout);

  GaConfig cfg;
  std::vector<Chromosome> pop = {base};
  Rng prng(13);
  while (static_cast<int>(pop.size()) < population)
    pop.push_back(perturb_weights(base, 0.5, prng));

  std::vector<std::vector<double>> raw;
  for (const auto& row : table.base.rows) raw.push_back(row);
  EvalContext ctx = EvalContext::refuzzified(std::move(raw), table.decisions);

  std::printf("population=%d patterns=%zu links=%zu reps=%d openmp=%s\n", population,
              ctx.labels.size(), net.link_count(), reps, openmp_enabled() ? "yes" : "no");

  double sum_serial = 0.0, sum_parallel = 0.0;
  const double t_serial = time_eval(pop, ctx, ExecutionMode::Serial, reps, &sum_serial);
  std::printf("serial : %8.3f s  (checksum %.6f)\n", t_serial, sum_serial);
  const double t_parallel = time_eval(pop, ctx, ExecutionMode::OpenMP, reps, &sum_parallel);
  std::printf("openmp : %8.3f s  (checksum %.6f)\n", t_parallel, sum_parallel);
  std::printf("speedup: %5.2fx  results %s\n", t_serial / t_parallel,
              sum_serial == sum_parallel ? "identical" : "DIFFER");
  return sum_serial == sum_parallel ? 0 : 1;
}

#include <benchmark/benchmark.h>

#include "sasalign/bundle.hpp"
#include "sasalign/lyapunov.hpp"
#include "sasalign/occupancy.hpp"
#include "sasalign/sas_align.hpp"

namespace {

struct Fixture {
  sas::TabularMdp mdp = sas::make_layout("two-paths", 0.1);
  sas::OfflineDataset dataset;
  sas::ModelBundle bundle;

  Fixture() {
    sas::RunConfig cfg;
    cfg.n_traj = 200;
    cfg.data_horizon = 40;
    cfg.occupancy_rollouts = 1000;
    dataset = sas::generate_dataset(mdp, cfg.mix, cfg.n_traj, cfg.data_horizon, 1);
    bundle = sas::fit_bundle(mdp, dataset, cfg);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_ExactOccupancy(benchmark::State& state) {
  auto& f = fixture();
  const sas::DenseKernel kernel = sas::true_kernel(f.mdp);
  const sas::DensePolicy policy = sas::shortest_safe_path_policy(f.mdp, 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(sas::exact_occupancy(kernel, policy, 0.99, 50));
}
BENCHMARK(BM_ExactOccupancy);

void BM_LdmFixedPoint(benchmark::State& state) {
  auto& f = fixture();
  const sas::DenseKernel kernel = f.bundle.kernel.to_dense(f.mdp.start());
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sas::ldm_fixed_point(f.bundle.energy_centered, kernel, f.mdp.gamma(), 1e-9));
}
BENCHMARK(BM_LdmFixedPoint);

void BM_RunSas(benchmark::State& state) {
  auto& f = fixture();
  sas::SasConfig cfg;
  cfg.n = 5;
  cfg.m = 5;
  cfg.k = 5;
  cfg.horizon = 10;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(sas::run_sas(f.bundle.kernel, f.bundle.policy, f.bundle.energy,
                                          f.bundle.g_ldm, f.mdp.start(), cfg));
  }
}
BENCHMARK(BM_RunSas);

void BM_Imagine(benchmark::State& state) {
  auto& f = fixture();
  sas::RngStream rng(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sas::imagine(f.bundle.kernel, f.bundle.policy, f.mdp.start(), 40, nullptr, rng));
}
BENCHMARK(BM_Imagine);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "genesis/model.hpp"
#include "genesis/network.hpp"
#include "genesis/phase_type.hpp"
#include "genesis/rng.hpp"
#include "genesis/simulate.hpp"
#include "genesis/stability.hpp"

using namespace genesis;

namespace {

Matrix random_metzler(int n, uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = i == j ? 0.0 : rng.uniform();
  for (int i = 0; i < n; ++i) m(i, i) = -(m.row(i).sum() + rng.uniform());
  return m;
}

GenesisModel sweep_scale_model() {
  return make_model(network_random_geometric(50, 0.25, 4242),
                    ph_erlang(3, 3.0), ph_erlang(2, 1.0), {0});
}

void BM_kron(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_metzler(n, 1), b = random_metzler(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kron(a, b));
}

void BM_kron_sum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_metzler(n, 3), b = random_metzler(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kron_sum(a, b));
}

void BM_spectral_abscissa(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix m = random_metzler(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_abscissa(m));
}

void BM_spectral_abscissa_power(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix m = random_metzler(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_abscissa_power(m));
}

void BM_expm_action(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix m = random_metzler(n, 7);
  const Vector v = Vector::Ones(n);
  for (auto _ : state) benchmark::DoNotOptimize(expm_action(m, v, 1.0));
}

void BM_build_bound_matrix(benchmark::State& state) {
  const GenesisModel model = sweep_scale_model();  // dim 50 * 3 * 2 = 300
  for (auto _ : state) benchmark::DoNotOptimize(build_bound_matrix(model));
}

void BM_decay_rate_bound(benchmark::State& state) {
  const GenesisModel model = sweep_scale_model();
  for (auto _ : state) benchmark::DoNotOptimize(decay_rate_bound(model));
}

void BM_build_exact_generator(benchmark::State& state) {
  const GenesisModel model = make_model(network_path(3), ph_erlang(2, 2.0),
                                        ph_erlang(2, 1.0), {0});  // 225 states
  for (auto _ : state) benchmark::DoNotOptimize(build_exact_generator(model));
}

void BM_simulate_events(benchmark::State& state) {
  const GenesisModel model =
      make_model(network_erdos_renyi(30, 0.15, 11), ph_erlang(2, 4.0),
                 ph_erlang(2, 0.5), {0, 1, 2});
  uint64_t seed = 1;
  long long events = 0;
  for (auto _ : state) {
    const EventLog log = simulate_event_driven(model, 5.0, seed++);
    events += static_cast<long long>(log.events.size());
    benchmark::DoNotOptimize(log.end_time);
  }
  state.SetItemsProcessed(events);  // events per second
}

void BM_ph_sample(benchmark::State& state) {
  const PhaseType d = ph_hyper_erlang({0.3, 0.7}, {2, 3}, {1.0, 4.0});
  Rng rng(13);
  for (auto _ : state) benchmark::DoNotOptimize(d.sample(rng));
}

}  // namespace

BENCHMARK(BM_kron)->Arg(10)->Arg(20);
BENCHMARK(BM_kron_sum)->Arg(10)->Arg(20);
BENCHMARK(BM_spectral_abscissa)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spectral_abscissa_power)->Arg(100)->Arg(300);
BENCHMARK(BM_expm_action)->Arg(100)->Arg(300);
BENCHMARK(BM_build_bound_matrix)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decay_rate_bound)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_exact_generator);
BENCHMARK(BM_simulate_events)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ph_sample);

BENCHMARK_MAIN();

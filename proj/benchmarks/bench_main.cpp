// Microbenchmarks for the hot paths: operator assembly, a closed-loop
// midpoint step (factorization amortized), the certificate evaluation and
// the norm-equivalence pencil solve.

#include <benchmark/benchmark.h>

#include "beamstab/beam_model.hpp"
#include "beamstab/control.hpp"
#include "beamstab/fem.hpp"
#include "beamstab/lyapunov.hpp"
#include "beamstab/rng.hpp"
#include "beamstab/run_config.hpp"
#include "beamstab/simulator.hpp"

namespace {

using namespace beamstab;

ChannelSpec default_channel() { return make_r_channel(RunConfig::default_params()); }

void bm_assemble(benchmark::State& state) {
  const auto ch = default_channel();
  const auto mesh = Mesh::uniform(static_cast<int>(state.range(0)), ch.physical.l);
  for (auto _ : state) {
    auto ops = assemble(mesh, ch, LoadMode::Consistent);
    benchmark::DoNotOptimize(ops.M_aug.data());
  }
}
BENCHMARK(bm_assemble)->Arg(16)->Arg(64)->Arg(256);

void bm_certificate(benchmark::State& state) {
  const auto ch = default_channel();
  const Gains g = suggest_gains(ch, 2.0, 1.0);
  for (auto _ : state) {
    auto cert = certificate(ch, g);
    benchmark::DoNotOptimize(cert.M1);
  }
}
BENCHMARK(bm_certificate);

void bm_step(benchmark::State& state) {
  const auto ch = default_channel();
  const auto mesh = Mesh::uniform(static_cast<int>(state.range(0)), ch.physical.l);
  const auto ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g = suggest_gains(ch, 2.0, 1.0);
  const ClosedLoopSystem sys(ops, ch, g, FeedbackMode::DiscreteConsistent);
  Rng rng(7);
  Eigen::VectorXd x = random_unit_state(rng, ops.gram.sim());
  const double dt = 0.01;
  x = sys.step_midpoint(x, dt);  // warm the cached factorization
  for (auto _ : state) {
    x = sys.step_midpoint(x, dt);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(bm_step)->Arg(16)->Arg(64)->Arg(256);

void bm_pencil(benchmark::State& state) {
  const auto ch = default_channel();
  const auto mesh = Mesh::uniform(static_cast<int>(state.range(0)), ch.physical.l);
  const auto ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g = suggest_gains(ch, 2.0, 1.0);
  const auto cert = certificate(ch, g);
  const auto form = build_V(ops, ch, g);
  for (auto _ : state) {
    auto ne = norm_equivalence(form, ops.gram, cert);
    benchmark::DoNotOptimize(ne.lambda_min);
  }
}
BENCHMARK(bm_pencil)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();

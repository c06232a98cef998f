// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP kernels at Table I frame size.
#include <benchmark/benchmark.h>

#include "ddst/channel.hpp"
#include "ddst/phy.hpp"
#include "ddst/receivers.hpp"

using namespace ddst;

namespace {

constexpr int kK = 72, kT = 28, kNr = 16, kNt = 4, kTaps = 24;

struct Fixture {
  ComplexMatrix phase{kK, kTaps};
  std::vector<cplx> gains;
  ChannelTensor h{kK, kT, kNr, kNt};
  ResourceGrid tx{kK, kT, kNt};
  std::vector<cplx> noise;
  FramePlan plan;

  Fixture() {
    RngStream rng(1, 0);
    for (Eigen::Index i = 0; i < phase.size(); ++i) phase.data()[i] = std::polar(1.0, rng.uniform() * 6.28);
    gains = complex_gaussian(static_cast<std::size_t>(kT) * kTaps * kNr * kNt, 1.0 / kTaps, rng);
    kernels::synthesize_serial(phase, gains, h);
    const auto s = complex_gaussian(tx.data().size(), 1.0, rng);
    std::copy(s.begin(), s.end(), tx.data().begin());
    noise = complex_gaussian(static_cast<std::size_t>(kK) * kT * kNr, 0.1, rng);
    plan = make_frame_plan({Scheme::Mix, kK, kT, kNt, 14, 0.25, 0.3, 4});
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <auto Kernel>
void synthesize(benchmark::State& state) {
  const auto& f = fixture();
  ChannelTensor h(kK, kT, kNr, kNt);
  for (auto _ : state) {
    Kernel(f.phase, f.gains, h);
    benchmark::DoNotOptimize(h.data().data());
  }
}

template <auto Kernel>
void apply_channel(benchmark::State& state) {
  const auto& f = fixture();
  ResourceGrid rx(kK, kT, kNr);
  for (auto _ : state) {
    Kernel(f.tx, f.h, f.noise, rx);
    benchmark::DoNotOptimize(rx.data().data());
  }
}

template <auto Kernel>
void detect_grid(benchmark::State& state) {
  const auto& f = fixture();
  ResourceGrid rx(kK, kT, kNr);
  kernels::apply_channel_serial(f.tx, f.h, f.noise, rx);
  DetectionOutput out;
  for (auto _ : state) {
    Kernel(rx, f.h, f.plan, 0.8, 0.1, out);
    benchmark::DoNotOptimize(out.u.data().data());
  }
}

}  // namespace

BENCHMARK(synthesize<kernels::synthesize_serial>)->Name("synthesize/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(synthesize<kernels::synthesize_omp>)->Name("synthesize/omp")->Unit(benchmark::kMicrosecond);
BENCHMARK(apply_channel<kernels::apply_channel_serial>)->Name("apply_channel/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(apply_channel<kernels::apply_channel_omp>)->Name("apply_channel/omp")->Unit(benchmark::kMicrosecond);
BENCHMARK(detect_grid<kernels::detect_grid_serial>)->Name("detect_grid/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(detect_grid<kernels::detect_grid_omp>)->Name("detect_grid/omp")->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

#include "smallbody/acoustic.hpp"
#include "smallbody/potential.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace smallbody;

void inverse_distance_integral(benchmark::State& state) {
  auto mesh = generate_sphere(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(inverse_distance_double_integral(mesh));
  state.SetLabel(std::to_string(mesh.triangle_count()) + " panels");
}

void double_layer_assembly(benchmark::State& state) {
  auto mesh = generate_sphere(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(double_layer_operator(mesh));
  state.SetLabel(std::to_string(mesh.triangle_count()) + " panels");
}

void sphere_polarizability(benchmark::State& state) {
  auto mesh = generate_sphere(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(magnetic_polarizability(mesh));
}

void dirichlet_solve(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  Scene scene;
  scene.k = 0.1;
  for (int m = 0; m < M; ++m) {
    Scatterer s;
    s.position = Vec3(10.0 * m, 0, 0);
    s.capacitance = 4 * M_PI;
    s.area = 4 * M_PI;
    s.diameter = 2.0;
    scene.scatterers.push_back(s);
  }
  PlaneWave wave(Vec3::UnitZ(), scene.k);
  for (auto _ : state) {
    auto sys = assemble_dirichlet(scene, wave);
    benchmark::DoNotOptimize(solve_charges(sys, SolveMethod::direct()));
  }
}

}  // namespace

BENCHMARK(inverse_distance_integral)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(double_layer_assembly)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(sphere_polarizability)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(dirichlet_solve)->RangeMultiplier(4)->Range(4, 256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

// Compares the serial and OpenMP Monte Carlo batch runners on an identical
// workload and checks that they produce the same per-run results.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "quadfx/harness.hpp"

using namespace quadfx;

namespace {

double wall_time(bool parallel, const ExperimentConfig& cfg, int runs,
                 MonteCarloSummary* out) {
  const auto start = std::chrono::steady_clock::now();
  *out = monte_carlo(cfg, runs, 97, parallel);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  int runs = 12;
  double duration = 20.0;
  if (argc > 1) {
    runs = std::atoi(argv[1]);
  }
  if (argc > 2) {
    duration = std::atof(argv[2]);
  }

  ExperimentConfig cfg;
  cfg.scenario = "eight";
  cfg.controller = "fxtdo-mpc";
  cfg.duration = duration;
  cfg.finalize();

#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("monte carlo batch: %d runs x %.0f s, %d thread(s)\n", runs, duration, threads);

  MonteCarloSummary serial, parallel;
  const double t_serial = wall_time(false, cfg, runs, &serial);
  std::printf("serial reference: %7.2f s wall (median rmse %.4f m)\n", t_serial, serial.median);
  const double t_parallel = wall_time(true, cfg, runs, &parallel);
  std::printf("openmp batch:     %7.2f s wall (median rmse %.4f m)\n", t_parallel,
              parallel.median);
  std::printf("speedup: %.2fx\n", t_serial / t_parallel);

  for (size_t i = 0; i < serial.runs.size(); ++i) {
    if (serial.runs[i].rmse != parallel.runs[i].rmse ||
        serial.runs[i].scale != parallel.runs[i].scale) {
      std::printf("MISMATCH at run %zu\n", i);
      return 1;
    }
  }
  std::printf("serial and parallel results identical\n");
  return 0;
}

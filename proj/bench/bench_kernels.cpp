// Serial reference vs OpenMP kernels, plus whole rounds with the client loop
// serial or parallel. Also checks the two paths agree bit for bit.
//
//   bench_kernels [reps]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "fedar/config_io.hpp"
#include "fedar/feddata.hpp"
#include "fedar/numcore.hpp"
#include "fedar/rng.hpp"
#include "fedar/server.hpp"

using namespace fedar;
using numcore::Exec;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
             .count() / reps;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n", name,
              serial, parallel, serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
  std::printf("threads: %d, reps: %d\n", omp_get_max_threads(), reps);

  const auto samples = data::synth_digits(500, 10, 1);
  const auto batch = data::to_batch(samples);
  numcore::ModelParams params(numcore::kImageFeatures, 10);
  Rng rng(2);
  std::normal_distribution<double> w(0.0, 0.05);
  for (double& v : params.flat()) v = w(rng);

  {
    numcore::Matrix a, b;
    const double s = time_ms(reps, [&] { a = numcore::forward(params, batch, Exec::kSerial); });
    const double p = time_ms(reps, [&] { b = numcore::forward(params, batch, Exec::kParallel); });
    report("forward (500 rows)", s, p, a.values == b.values);
  }
  {
    numcore::Gradient a, b;
    const double s = time_ms(reps, [&] { a = numcore::gradient(params, batch, Exec::kSerial); });
    const double p = time_ms(reps, [&] { b = numcore::gradient(params, batch, Exec::kParallel); });
    report("gradient (500 rows)", s, p, a == b);
  }
  {
    std::vector<numcore::ModelParams> models(12, params);
    for (std::size_t u = 0; u < models.size(); ++u) {
      for (double& v : models[u].flat()) v += w(rng);
    }
    std::vector<const numcore::ModelParams*> ptrs;
    std::vector<std::size_t> counts;
    for (std::size_t u = 0; u < models.size(); ++u) {
      ptrs.push_back(&models[u]);
      counts.push_back(300 + 50 * u);
    }
    const auto weights = server::sync_weights(counts);
    numcore::ModelParams a, b;
    const double s = time_ms(reps * 10, [&] { a = server::weighted_sum(ptrs, weights, Exec::kSerial); });
    const double p = time_ms(reps * 10, [&] { b = server::weighted_sum(ptrs, weights, Exec::kParallel); });
    report("weighted_sum (12)", s, p, a == b);
  }
  {
    auto cfg = table2_config();
    cfg.task.max_rounds = 3;
    cfg.task.target_accuracy.reset();
    auto serial_cfg = cfg;
    serial_cfg.server.parallel = false;
    cfg.server.parallel = true;
    std::vector<server::RoundRecord> a, b;
    const double s = time_ms(1, [&] { a = server::run_experiment(serial_cfg); });
    const double p = time_ms(1, [&] { b = server::run_experiment(cfg); });
    const bool same = a.size() == b.size() && a.back().test_accuracy == b.back().test_accuracy &&
                      a.back().trust == b.back().trust;
    report("3 rounds, 12 clients", s, p, same);
  }
  return 0;
}

// Serial reference loops against the OpenMP kernels. Each row reports both
// wall times and whether the outputs agree bit for bit.
//
//   bench_kernels [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "qml/coupling.hpp"
#include "qml/inducing.hpp"
#include "qml/statistics.hpp"

using namespace qml;

namespace {

template <class Fn>
auto timed(Fn&& fn, double& secs) {
  const auto t0 = std::chrono::steady_clock::now();
  auto out = fn();
  secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-34s %10.3f %10.3f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) set_worker_count(std::atoi(argv[1]));
  std::printf("workers: %d\n", worker_count());
  std::printf("%-34s %10s %10s %9s  %s\n", "kernel", "serial s", "parallel s", "speedup", "outputs");

  const Environment circle(1, ParameterLaw::uniform(0.5, 0.7));
  double s = 0, p = 0;

  {
    const auto a = timed([&] { return build_partition(circle, 5000, Exec::serial); }, s);
    const auto b = timed([&] { return build_partition(circle, 5000, Exec::parallel); }, p);
    row("build_partition (depth 5000)", s, p, a.x_minus == b.x_minus);
  }
  {
    CorrelationRequest req{Environment(1, ParameterLaw::uniform(0.45, 0.55)), Family::solenoid,
                           Observable::smooth_cos(), Observable::smooth_cos()};
    req.n_max = 100;
    req.samples = 200000;
    req.exec = Exec::serial;
    const auto a = timed([&] { return quenched_correlation(req); }, s);
    req.exec = Exec::parallel;
    const auto b = timed([&] { return quenched_correlation(req); }, p);
    row("quenched_correlation (N=2e5)", s, p, a.values == b.values && a.std_error == b.std_error);
  }
  {
    CorrelationRequest req{Environment(1, ParameterLaw::uniform(-0.05, 0.05)), Family::perturbed_cat,
                           Observable::torus_lacunary(0.4), Observable::torus_lacunary(0.4)};
    req.n_max = 40;
    req.samples = 100000;
    req.exec = Exec::serial;
    const auto a = timed([&] { return quenched_correlation(req); }, s);
    req.exec = Exec::parallel;
    const auto b = timed([&] { return quenched_correlation(req); }, p);
    row("quenched_correlation cat (N=1e5)", s, p, a.values == b.values && a.std_error == b.std_error);
  }
  {
    const auto law = TailLaw::polynomial(2.0, 20000);
    CouplingOptions opts;
    opts.levels = 4;
    opts.exec = Exec::serial;
    const auto a = timed([&] { return run_coupling(circle, law, 500000, 2000, 5, opts); }, s);
    opts.exec = Exec::parallel;
    const auto b = timed([&] { return run_coupling(circle, law, 500000, 2000, 5, opts); }, p);
    row("run_coupling (5e5 pairs)", s, p, a.Ti_tail == b.Ti_tail && a.T_samples == b.T_samples);
  }
  {
    const auto grid = uniform_start_grid(Family::intermittent_circle, 4000);
    const Environment env(1, ParameterLaw::uniform(0.4, 0.6));
    const auto a = timed([&] { return expansion_tail(env, Family::intermittent_circle, grid, 2000, 0.1, Exec::serial); }, s);
    const auto b = timed([&] { return expansion_tail(env, Family::intermittent_circle, grid, 2000, 0.1, Exec::parallel); }, p);
    row("expansion_tail (4000 starts)", s, p, a == b);
  }
  return 0;
}

// Serial vs OpenMP timings for the parallel kernels, plus one SPLASH path.
// Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <omp.h>

#include "splash/autocov.hpp"
#include "splash/linalg.hpp"
#include "splash/rng.hpp"
#include "splash/simulate.hpp"
#include "splash/solver.hpp"
#include "splash/yule_walker.hpp"

namespace {

template <class F>
double seconds(int repeats, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / repeats;
}

splash::Mat random_mat(std::size_t r, std::size_t c, splash::Rng& rng) {
  splash::Mat m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

void report(const char* name, double serial, double parallel) {
  std::cout << name << ": serial " << serial * 1e3 << " ms, openmp " << parallel * 1e3
            << " ms, speedup " << serial / parallel << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  std::cout << "threads: " << omp_get_max_threads() << "\n";
  splash::Rng rng({42, 0});

  const splash::Mat a = random_mat(300, 300, rng);
  const splash::Mat b = random_mat(300, 300, rng);
  report("matmul 300x300", seconds(repeats, [&] { (void)splash::serial::matmul(a, b); }),
         seconds(repeats, [&] { (void)splash::matmul(a, b); }));

  const splash::StModel model = splash::gen_design_b(7);
  const splash::Panel panel = splash::simulate_var(model, 5000, 500, {42, 1});
  report("sample_autocov N=49 T=5000",
         seconds(repeats, [&] { (void)splash::serial::sample_autocov(panel, 1); }),
         seconds(repeats, [&] { (void)splash::sample_autocov(panel, 1); }));

  const splash::YwSystem sys = splash::assemble_system(
      splash::unbanded_autocov(panel), splash::build_layout(49, splash::default_cap(49)));
  const splash::SglSolver solver(sys);
  const auto lambdas = splash::lambda_path(solver.lambda_max(0.0), 20, 1e-4);
  const double path_s = seconds(1, [&] { (void)solver.path(lambdas, 0.0); });
  std::cout << "SPLASH(0) path, 20 lambdas, N=49: " << path_s * 1e3 << " ms\n";
  return 0;
}

// Timing comparison between the serial reference kernels and their OpenMP
// counterparts, plus the direct-vs-reduced tangent estimation routes.

#include <chrono>
#include <cstdio>
#include <functional>

#include "tanlab/estimator.hpp"
#include "tanlab/manifold.hpp"
#include "tanlab/matrix.hpp"
#include "tanlab/rng.hpp"
#include "tanlab/sampling.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-38s %10.2f ms %10.2f ms %7.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both columns run serially\n");
#endif
  std::printf("%-38s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

  using namespace tanlab;
  Rng rng(7);
  const std::size_t n = 400, K = 8000;
  Matrix x(n, K);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < K; ++j) x(i, j) = rng.next_symmetric(1.0);

  Matrix g1, g2;
  row("gram n x n (n=400, K=8000)",
      time_ms([&] { g1 = gram_outer_serial(x, double(K)); }, 3),
      time_ms([&] { g2 = gram_outer(x, double(K)); }, 3));

  Matrix tall(K, 64);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < 64; ++j) tall(i, j) = rng.next_symmetric(1.0);
  row("gram K x K side (8000 x 64)",
      time_ms([&] { g1 = gram_inner_serial(tall, double(K)); }, 3),
      time_ms([&] { g2 = gram_inner(tall, double(K)); }, 3));

  const EmbeddingSpec smooth =
      make_embedding_spec(Family::smooth1_exp, 5, 500, 10.0, 11);
  const SampleCloud cloud = sample_cloud(5, 1e-3, 4000, 11, 0);
  DataMatrix e1, e2;
  row("embed_cloud (n=500, K=4000)",
      time_ms([&] { e1 = embed_cloud_serial(smooth, cloud); }, 3),
      time_ms([&] { e2 = embed_cloud(smooth, cloud); }, 3));

  const EmbeddingSpec quad = make_embedding_spec(Family::quadratic, 5, 500, 10.0, 11);
  const SampleCloud qcloud = sample_cloud(5, 2e-3, 2000, 12, 0);
  const double direct_ms =
      time_ms([&] { local_pca(embed_cloud(quad, qcloud), 5); }, 1);
  const double reduced_ms =
      time_ms([&] { detail::estimate_tangent_reduced(quad, qcloud); }, 5);
  std::printf("%-38s %10.2f ms %10.2f ms %7.0fx\n",
              "tangent estimate direct vs reduced", direct_ms, reduced_ms,
              direct_ms / reduced_ms);
  return 0;
}

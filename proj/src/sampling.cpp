#include "tanlab/sampling.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "tanlab/rng.hpp"

namespace tanlab {

SampleCloud sample_cloud(std::size_t m, double nu, std::size_t K,
                         std::uint64_t master_seed, std::size_t trial_index) {
  if (K < 1) throw std::invalid_argument("sample_cloud: K must be >= 1");
  if (nu < 0.0) throw std::invalid_argument("sample_cloud: nu must be >= 0");
  SampleCloud cloud;
  cloud.m = m;
  cloud.K = K;
  cloud.nu = nu;
  cloud.master_seed = master_seed;
  cloud.trial_index = trial_index;
  cloud.coords = Matrix(K, m);
  Rng rng(derive_seed(master_seed, {static_cast<std::uint64_t>(trial_index)}));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < m; ++j) cloud.coords(i, j) = rng.next_symmetric(nu);
  return cloud;
}

namespace {

void check_embed(const EmbeddingSpec& spec, const SampleCloud& cloud) {
  if (spec.m() != cloud.m)
    throw std::invalid_argument("embed_cloud: spec.m = " + std::to_string(spec.m()) +
                                " but cloud.m = " + std::to_string(cloud.m));
}

void embed_column(const EmbeddingSpec& spec, const SampleCloud& cloud,
                  std::size_t i, Matrix& out, std::vector<double>& scratch) {
  const std::size_t m = cloud.m;
  for (std::size_t j = 0; j < m; ++j) scratch[j] = cloud.coords(i, j);
  double* point = scratch.data() + m;
  detail::evaluate_embedding_into(spec, scratch.data(), point);
  for (std::size_t row = 0; row < spec.n(); ++row) out(row, i) = point[row];
}

}  // namespace

DataMatrix embed_cloud_serial(const EmbeddingSpec& spec, const SampleCloud& cloud) {
  check_embed(spec, cloud);
  Matrix x(spec.n(), cloud.K);
  std::vector<double> scratch(cloud.m + spec.n());
  for (std::size_t i = 0; i < cloud.K; ++i)
    embed_column(spec, cloud, i, x, scratch);
  return x;
}

DataMatrix embed_cloud(const EmbeddingSpec& spec, const SampleCloud& cloud) {
  check_embed(spec, cloud);
  Matrix x(spec.n(), cloud.K);
  // Column tiles keep each worker's strided writes inside a cache-sized
  // window of the n x K output.
  const std::size_t tile = 128;
  const std::size_t tiles = (cloud.K + tile - 1) / tile;
#pragma omp parallel
  {
    std::vector<double> scratch(cloud.m + spec.n());
#pragma omp for schedule(dynamic, 1)
    for (std::size_t t = 0; t < tiles; ++t) {
      const std::size_t hi = std::min(cloud.K, (t + 1) * tile);
      for (std::size_t i = t * tile; i < hi; ++i)
        embed_column(spec, cloud, i, x, scratch);
    }
  }
  return x;
}

void write_cloud_csv(std::ostream& os, const SampleCloud& cloud) {
  os << "trial,i";
  for (std::size_t j = 1; j <= cloud.m; ++j) os << ",x_" << j;
  os << "\n";
  char buf[32];
  for (std::size_t i = 0; i < cloud.K; ++i) {
    os << cloud.trial_index << ',' << i;
    for (std::size_t j = 0; j < cloud.m; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", cloud.coords(i, j));
      os << ',' << buf;
    }
    os << "\n";
  }
}

}  // namespace tanlab

#pragma once

#include <cstdint>
#include <iosfwd>

#include "tanlab/manifold.hpp"
#include "tanlab/matrix.hpp"

namespace tanlab {

// K tangent-coordinate rows, every entry uniform on [-nu, nu]. Regenerating
// with identical parameters reproduces the coordinates bit for bit; the
// per-trial stream is derive_seed(master_seed, {trial_index}).
struct SampleCloud {
  std::size_t m = 0;
  std::size_t K = 0;
  double nu = 0.0;
  Matrix coords;  // K x m
  std::uint64_t master_seed = 0;
  std::size_t trial_index = 0;
};

// n x K matrix whose column i embeds row i of the cloud; the top m x K block
// equals coords^T exactly. No mean subtraction anywhere.
using DataMatrix = Matrix;

SampleCloud sample_cloud(std::size_t m, double nu, std::size_t K,
                         std::uint64_t master_seed, std::size_t trial_index);

DataMatrix embed_cloud(const EmbeddingSpec& spec, const SampleCloud& cloud);
DataMatrix embed_cloud_serial(const EmbeddingSpec& spec, const SampleCloud& cloud);

// Header: trial,i,x_1..x_m
void write_cloud_csv(std::ostream& os, const SampleCloud& cloud);

}  // namespace tanlab

#pragma once

// Portable sampling helpers. Only the raw mt19937_64 output is used so that
// seeded streams are reproducible across standard library implementations
// (the std:: distributions are implementation-defined).

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace topicstream {

using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 bits of precision.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection, n > 0.
std::uint64_t UniformIndex(Rng& rng, std::uint64_t n);

double StandardNormal(Rng& rng);

// Marsaglia-Tsang; shape > 0, unit scale.
double Gamma(Rng& rng, double shape);

std::vector<double> Dirichlet(Rng& rng, std::span<const double> concentration);
std::vector<double> SymmetricDirichlet(Rng& rng, std::size_t dim, double alpha);

// Draws an index proportional to unnormalized nonnegative weights.
std::size_t Categorical(Rng& rng, std::span<const double> weights);

// Derives an independent stream seed for a sub-task (slice, run, ...).
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace topicstream

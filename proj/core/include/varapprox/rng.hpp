#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "varapprox/tensor.hpp"

namespace varapprox {

/// Seeded generator for one named substream of a run.
///
/// Streams derived from the same root seed but different names are
/// independent, so checks can be reordered or run concurrently without
/// changing their draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t root_seed, std::string_view stream);

  /// Child stream keyed by name; the parent's state is not advanced.
  Rng substream(std::string_view name) const;

  std::uint64_t seed() const noexcept { return seed_; }

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Uniform integer in [lo, hi].
  std::size_t uniform_int(std::size_t lo, std::size_t hi);

  Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);
  Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0);
  TokenMap gaussian_map(std::size_t h, std::size_t w, std::size_t d, double stddev = 1.0);
  std::vector<double> gaussian_vector(std::size_t n, double stddev = 1.0);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Stable 64-bit hash used to key substreams (FNV-1a).
std::uint64_t stream_hash(std::string_view name) noexcept;

}  // namespace varapprox

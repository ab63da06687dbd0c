#include "varapprox/rng.hpp"

namespace varapprox {

namespace {

// splitmix64 finalizer; mixes the root seed with the stream hash.
std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_hash(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

Rng::Rng(std::uint64_t root_seed, std::string_view stream)
    : Rng(mix(root_seed) ^ stream_hash(stream)) {}

Rng Rng::substream(std::string_view name) const { return Rng(seed_, name); }

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(engine_);
}

std::size_t Rng::uniform_int(std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
}

Matrix Rng::gaussian_matrix(std::size_t rows, std::size_t cols, double stddev) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = normal(0.0, stddev);
  return m;
}

Matrix Rng::uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = uniform(lo, hi);
  return m;
}

TokenMap Rng::gaussian_map(std::size_t h, std::size_t w, std::size_t d, double stddev) {
  TokenMap t(h, w, d);
  for (double& x : t.data()) x = normal(0.0, stddev);
  return t;
}

std::vector<double> Rng::gaussian_vector(std::size_t n, double stddev) {
  std::vector<double> v(n);
  for (double& x : v) x = normal(0.0, stddev);
  return v;
}

}  // namespace varapprox

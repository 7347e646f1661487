#pragma once

#include <cstdint>
#include <random>

#include "jspec/types.hpp"

namespace jspec {

// splitmix64; used to derive independent per-trial streams from (seed, index)
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based split: trial i of a campaign seeded with s gets an
// independent deterministic stream, so parallel order cannot change results.
class TrialRng {
 public:
  explicit TrialRng(std::uint64_t seed, std::uint64_t trial = 0)
      : engine_(splitmix64(splitmix64(seed) ^ (trial + 0x632be59bd9b4e019ULL))) {}

  std::mt19937_64& engine() { return engine_; }

  double gauss() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  Complex cgauss() { return Complex(gauss(), gauss()); }

  ComplexVector vector(int n) {
    ComplexVector v(n);
    for (int i = 0; i < n; ++i) v(i) = cgauss();
    return v;
  }

  ComplexVector real_vector(int n) {
    ComplexVector v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(gauss(), 0);
    return v;
  }

  ComplexMatrix matrix(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = cgauss();
    return m;
  }

  // rank <= k as a product of two Gaussian factors
  ComplexMatrix low_rank_matrix(int n, int k) {
    ComplexMatrix g1(n, k), g2(n, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) {
        g1(i, j) = cgauss();
        g2(i, j) = cgauss();
      }
    return g1 * g2.transpose();
  }

  ComplexMatrix hermitian_matrix(int n) {
    ComplexMatrix m = matrix(n);
    return ComplexMatrix((m + m.adjoint()) / 2.0);
  }

  int uniform_int(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace jspec

#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "jspec/idempotent.hpp"

namespace jspec {

// Query access to sigma(P^r A P^s + P^s A P^r) for a hidden A, over
// rank-one idempotent probes P.  Queries must be deterministic.
struct SpectralOracle {
  std::function<Spectrum(const RankOneFunctional&)> query;
  int r = 0;
  int s = 1;
  int n = 0;
};

// Oracle evaluating the products against a concrete matrix.
SpectralOracle matrix_oracle(const ComplexMatrix& a, int r, int s,
                             const ToleranceConfig& tol = {});

// Recovers the unique matrix consistent with the oracle.  For r >= 1 the
// standard probe family gives one linear equation per probe; for r = 0
// probes are resampled until both nonzero eigenvalues are visible, with a
// square-zero fallback when no probe ever separates.
ComplexMatrix recover_matrix(const SpectralOracle& oracle,
                             std::uint64_t seed = 0, int budget = 4000,
                             const ToleranceConfig& tol = {});

struct ProportionalityResult {
  bool proportional = false;
  Complex lambda;   // A' = lambda * A when proportional
  double residual = 0.0;
};

// Least-squares proportionality A' = lambda A, cross-checked by the
// zero-pattern of <Ax,f> against <A'x,f> on random idempotents.
ProportionalityResult proportionality_check(const ComplexMatrix& a,
                                            const ComplexMatrix& a_prime,
                                            int trials = 100,
                                            std::uint64_t seed = 0,
                                            const ToleranceConfig& tol = {});

}  // namespace jspec

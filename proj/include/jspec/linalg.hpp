#pragma once

#include <vector>

#include "jspec/types.hpp"

namespace jspec {

// Multiplicity-free set of eigenvalue cluster representatives.
struct Spectrum {
  std::vector<Complex> values;  // cluster representatives, no duplicates
  double scale = 1.0;           // max(1, largest eigenvalue modulus)

  // representatives with modulus above zero-threshold
  int distinct_nonzero_count(const ToleranceConfig& tol) const;
};

// Eigenvalues with cluster multiplicities, before set collapse.  Kept for
// trace cross-checks; spectrum() discards the counts.
struct ClusteredEigenvalues {
  std::vector<Complex> representatives;
  std::vector<int> multiplicities;
  double scale = 1.0;
};

ClusteredEigenvalues clustered_eigenvalues(const ComplexMatrix& m,
                                           const ToleranceConfig& tol = {});

Spectrum spectrum(const ComplexMatrix& m, const ToleranceConfig& tol = {});

int rank(const ComplexMatrix& m, const ToleranceConfig& tol = {});

bool spectra_equal(const Spectrum& a, const Spectrum& b,
                   const ToleranceConfig& tol = {});

ComplexMatrix outer(const ComplexVector& x, const ComplexVector& f);

}  // namespace jspec

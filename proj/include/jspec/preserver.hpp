#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "jspec/linalg.hpp"

namespace jspec {

struct NotRankOnePreserving : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FrameInconsistent : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AmbiguousForm : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NullSpaceDimension : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularFrame : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotSelfAdjointImage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic query access to an unknown map on n x n matrices.
struct BlackBoxMap {
  std::function<ComplexMatrix(const ComplexMatrix&)> apply;
  int n = 0;
};

// Canonical form of a spectral preserver: X -> lambda T X T^{-1} or
// lambda T X^t T^{-1}, with lambda^m = 1; in the self-adjoint variant
// lambda is xi in {-1,1} and T is unitary.
struct PreserverModel {
  Complex lambda;
  ComplexMatrix t;
  bool transposed = false;
  bool unitary = false;
  int m = 0;             // product order r + s + 1
  double residual = 0.0; // max relative mismatch over validation probes
};

// A linear map given by its images of the standard basis E_ab, stored at
// index a*n + b.
struct LinearMapTable {
  int n = 0;
  std::vector<ComplexMatrix> images;

  ComplexMatrix apply(const ComplexMatrix& x) const;
  BlackBoxMap as_black_box() const;
};

struct HypothesisReport {
  int trials = 0;
  int passes = 0;
  double max_mismatch = 0.0;  // spectra set distance over failing trials
  std::optional<ComplexMatrix> counterexample_a, counterexample_b;
};

// maps realizing the canonical forms, for round trips and generators
BlackBoxMap make_similarity_map(const Complex& lambda, const ComplexMatrix& t,
                                bool transposed);
BlackBoxMap make_unitary_map(double xi, const ComplexMatrix& u,
                             bool transposed);

// min over unit scalars c of the distance between the normalized matrices
double projective_distance(const ComplexMatrix& t1, const ComplexMatrix& t2);

// Checks sigma(B^r A B^s + B^s A B^r) invariance under the map on random
// pairs where one factor has rank <= 1 (rank 0 included).
HypothesisReport verify_hypothesis(const BlackBoxMap& phi, int r, int s,
                                   int trials, std::uint64_t seed,
                                   const ToleranceConfig& tol = {});

// Classification of a linear map known to be lambda times an inner
// automorphism or anti-automorphism of M_n.
PreserverModel recover_similarity(const LinearMapTable& psi, int m,
                                  const ToleranceConfig& tol = {});

// Dimension-2 identification: reconstructs the map as a linear table from
// trace data over a projection frame, then classifies it.
struct Recovery2x2 {
  LinearMapTable table;
  PreserverModel model;
};
Recovery2x2 recover_2x2(const BlackBoxMap& phi, int r, int s,
                        std::uint64_t seed = 0,
                        const ToleranceConfig& tol = {});

PreserverModel recover_full(const BlackBoxMap& phi, int r, int s,
                            std::uint64_t seed = 0,
                            const ToleranceConfig& tol = {});

// Self-adjoint variant: probes are rank-one orthogonal projections and the
// recovered transform is unitary, with xi in {-1,1}.
PreserverModel recover_selfadjoint(const BlackBoxMap& phi, int r, int s,
                                   std::uint64_t seed = 0,
                                   const ToleranceConfig& tol = {});

}  // namespace jspec

#pragma once

#include <optional>
#include <string>

#include "jspec/linalg.hpp"

namespace jspec {

// A certificate that rank(A) >= 2: a rank <= 3 operator B whose two-slot
// product with A shows three distinct nonzero eigenvalues.
struct WitnessReport {
  ComplexMatrix witness;           // B, rank <= 3
  ComplexMatrix product;           // B^r A B^s + B^s A B^r
  Spectrum spectrum;
  int distinct_nonzero_count = 0;
  std::string construction;        // which case produced it, or "search"
};

enum class RankVerdict {
  RankOne,
  NotRankOne,
  SquareZeroRank2,  // r = 0 exception: rank-2 A with A^2 = 0
  Inconclusive,
};

struct ClassifyResult {
  RankVerdict verdict;
  std::optional<WitnessReport> witness;
  int fuzz_trials_run = 0;  // negative-fuzz trials run for witness-free verdicts
};

struct FuzzReport {
  int trials = 0;
  int max_distinct_nonzero = 0;
  bool pass = true;  // every trial stayed at <= 2 distinct nonzero values
  std::optional<ComplexMatrix> offending_b;
  std::optional<Spectrum> offending_spectrum;
};

// Deterministic witness construction from the canonical-form case analysis.
// Requires rank(A) >= 2, and A^2 != 0 when r = 0 (the r = 0 square-zero
// classes are handled by classify_rank_one directly).
WitnessReport construct_witness(const ComplexMatrix& a, int r, int s,
                                const ToleranceConfig& tol = {});

// Self-adjoint variant: both the witness and the product stay self-adjoint.
WitnessReport construct_witness_selfadjoint(const ComplexMatrix& a, int r,
                                            int s,
                                            const ToleranceConfig& tol = {});

// Randomized witness search over rank <= 3 operators; nullopt if the budget
// exhausts without finding three distinct nonzero eigenvalues.
std::optional<WitnessReport> search_witness(const ComplexMatrix& a, int r,
                                            int s, int budget,
                                            std::uint64_t seed,
                                            const ToleranceConfig& tol = {},
                                            bool self_adjoint = false);

ClassifyResult classify_rank_one(const ComplexMatrix& a, int r, int s,
                                 int budget, std::uint64_t seed,
                                 const ToleranceConfig& tol = {});

// Negative direction: for witness-free A, no random B may produce more than
// two distinct nonzero eigenvalues.  Failures are reported, not thrown.
FuzzReport rank_one_fuzz_negative(const ComplexMatrix& a, int r, int s,
                                  int trials, std::uint64_t seed,
                                  const ToleranceConfig& tol = {});

}  // namespace jspec

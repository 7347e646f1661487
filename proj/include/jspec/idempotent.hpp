#pragma once

#include <cstdint>
#include <vector>

#include "jspec/linalg.hpp"

namespace jspec {

// Rank-one operator x (x) f acting as v -> <v,f> x, with the bilinear
// pairing <x,f> = f^T x.  Idempotent exactly when the pairing is 1.
class RankOneFunctional {
 public:
  RankOneFunctional(ComplexVector x, ComplexVector f);

  const ComplexVector& x() const { return x_; }
  const ComplexVector& f() const { return f_; }
  Complex pairing() const { return pairing_; }
  bool is_idempotent() const { return std::abs(pairing_ - 1.0) <= 1e-10; }

  ComplexMatrix matrix() const { return x_ * f_.transpose(); }

  // rescales f so the pairing becomes exactly 1
  RankOneFunctional normalized() const;

  double distance(const RankOneFunctional& other) const {
    return (matrix() - other.matrix()).norm();
  }

 private:
  ComplexVector x_, f_;
  Complex pairing_;
};

enum class JordanEigClass { RepeatedNonzero, TwoDistinctNonzero, Other };

// Predicted nonzero eigenvalue behavior of A P + P A for an idempotent
// P = x (x) f, read off the pairings lambda = <Ax,f> and q = <A^2x,f>.
// The nonzero roots are lambda +- sqrt(q).
struct EigClassReport {
  JordanEigClass cls = JordanEigClass::Other;
  Complex lambda;         // <Ax,f>
  Complex quad;           // <A^2x,f>
  Complex root_plus, root_minus;
};

EigClassReport jordan_eig_class(const ComplexMatrix& a,
                                const RankOneFunctional& p,
                                const ToleranceConfig& tol = {});

// True when the genericity predicates <A^2u,h> != 0 and
// <A^2u,h> != <Au,h>^2 hold with a strict relative margin.
bool is_generic_for(const ComplexMatrix& a, const RankOneFunctional& p,
                    const ToleranceConfig& tol = {});

// Nearby idempotent generic for every operator in `as` (each with square
// norm above the zero threshold); deterministic epsilon-scan, output within
// delta of p.  Accepts 1 to 3 operators.
RankOneFunctional perturb_to_generic(const std::vector<ComplexMatrix>& as,
                                     const RankOneFunctional& p, double delta,
                                     const ToleranceConfig& tol = {});

enum class OrthogonalityMode { Direct, Witness };

// Decides PQ = 0 = QP for idempotents P, Q under the hypothesis
// sigma(PQ+QP) = {0}.  Witness mode looks for a rank-one idempotent R with
// (PR+RP)/2 and (QR+RQ)/2 both idempotent, trying the two closed-form
// candidates before random search.
bool orthogonality_test(const RankOneFunctional& p, const RankOneFunctional& q,
                        OrthogonalityMode mode, int budget = 1000,
                        std::uint64_t seed = 0,
                        const ToleranceConfig& tol = {});

}  // namespace jspec

#include <doctest.h>

#include "jspec/idempotent.hpp"
#include "jspec/rng.hpp"

using namespace jspec;

namespace {

RankOneFunctional unit_pair(int n, int xi, int fi) {
  return RankOneFunctional(ComplexVector::Unit(n, xi),
                           ComplexVector::Unit(n, fi));
}

RankOneFunctional random_idempotent(TrialRng& rng, int n) {
  while (true) {
    ComplexVector x = rng.vector(n), f = rng.vector(n);
    Complex pr = (f.transpose() * x)(0);
    if (std::abs(pr) < 0.1) continue;
    return RankOneFunctional(x, f / pr);
  }
}

}  // namespace

TEST_CASE("rank-one functional invariants") {
  ComplexVector x(3), f(3);
  x << 1, 2, 0;
  f << 1, 0, 0;
  RankOneFunctional p(x, f);
  CHECK(p.pairing() == Complex(1, 0));
  CHECK(p.is_idempotent());
  ComplexMatrix m = p.matrix();
  CHECK((m * m - m).norm() < 1e-12);

  RankOneFunctional q(x, 2.0 * f);
  CHECK(!q.is_idempotent());
  CHECK(q.normalized().is_idempotent());

  CHECK_THROWS_AS(RankOneFunctional(ComplexVector::Zero(3), f),
                  DegenerateInput);
  CHECK_THROWS_AS(RankOneFunctional(x, ComplexVector::Zero(3)),
                  DegenerateInput);
  CHECK_THROWS_AS(RankOneFunctional(x, ComplexVector::Unit(2, 0)),
                  DimensionMismatch);
}

TEST_CASE("eigenvalue class of the identity probe is degenerate") {
  TrialRng rng(21);
  RankOneFunctional p = random_idempotent(rng, 4);
  EigClassReport rep = jordan_eig_class(ComplexMatrix::Identity(4, 4), p);
  CHECK(rep.cls == JordanEigClass::Other);
  CHECK(std::abs(rep.lambda - 1.0) < 1e-10);
  CHECK(std::abs(rep.quad - 1.0) < 1e-10);
}

TEST_CASE("eigenvalue classes from engineered probes") {
  // <Ax,f> = 2 and <A^2x,f> = 5: two distinct roots 2 +- sqrt(5)
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  RankOneFunctional p = unit_pair(3, 0, 0);
  EigClassReport rep = jordan_eig_class(a, p);
  CHECK(rep.cls == JordanEigClass::TwoDistinctNonzero);
  CHECK(std::abs(rep.lambda - 2.0) < 1e-12);
  CHECK(std::abs(rep.root_plus - (2.0 + std::sqrt(5.0))) < 1e-12);
  CHECK(std::abs(rep.root_minus - (2.0 - std::sqrt(5.0))) < 1e-12);

  // <Ax,f> = 2 but <A^2x,f> = 4 = <Ax,f>^2: one root vanishes
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 2;
  EigClassReport rep2 = jordan_eig_class(d, p);
  CHECK(rep2.cls == JordanEigClass::Other);
}

TEST_CASE("predicted roots match the direct eigensolver") {
  TrialRng rng(22);
  ToleranceConfig tol;
  int repeated = 0, two = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    int n = 2 + trial % 7;
    ComplexMatrix a = rng.matrix(n);
    RankOneFunctional p = random_idempotent(rng, n);
    EigClassReport rep = jordan_eig_class(a, p);
    Spectrum sp = spectrum(a * p.matrix() + p.matrix() * a);
    if (rep.cls == JordanEigClass::TwoDistinctNonzero) {
      ++two;
      bool plus_found = false, minus_found = false;
      for (const auto& v : sp.values) {
        if (std::abs(v - rep.root_plus) < 1e-8 * sp.scale) plus_found = true;
        if (std::abs(v - rep.root_minus) < 1e-8 * sp.scale) minus_found = true;
      }
      CHECK(plus_found);
      CHECK(minus_found);
    } else if (rep.cls == JordanEigClass::RepeatedNonzero) {
      ++repeated;
      int nz = 0;
      for (const auto& v : sp.values)
        if (std::abs(v) > tol.zero * sp.scale) {
          ++nz;
          CHECK(std::abs(v - rep.lambda) < 1e-8 * sp.scale);
        }
      CHECK(nz == 1);
    }
    // the trace identity holds in every class
    Complex tr = (a * p.matrix() + p.matrix() * a).trace();
    CHECK(std::abs(tr - 2.0 * rep.lambda) <
          1e-12 * std::max(1.0, std::abs(tr)));
  }
  CHECK(two > 1500);  // random probes are generically separating
}

TEST_CASE("generic probes pass through the perturbation unchanged") {
  TrialRng rng(23);
  ComplexMatrix a = rng.matrix(5);
  RankOneFunctional p = random_idempotent(rng, 5);
  REQUIRE(is_generic_for(a, p));
  RankOneFunctional q = perturb_to_generic({a}, p, 1e-3);
  CHECK(q.distance(p) == 0.0);
}

TEST_CASE("degenerate probes move within delta and become generic") {
  // shift chain: A^2 pairs to zero against e1 (x) e1
  ComplexMatrix a = ComplexMatrix::Zero(4, 4);
  a(0, 1) = 1;
  a(1, 2) = 1;
  RankOneFunctional p = unit_pair(4, 0, 0);
  REQUIRE(!is_generic_for(a, p));
  double last = 1e9;
  for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    RankOneFunctional q = perturb_to_generic({a}, p, delta);
    CHECK(q.distance(p) < delta);
    CHECK(is_generic_for(a, q));
    CHECK(q.distance(p) <= last + 1e-12);
    last = q.distance(p);
  }
}

TEST_CASE("perturbation handles up to three operators") {
  TrialRng rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 3 + trial % 5;
    std::vector<ComplexMatrix> as;
    for (int i = 0; i < 1 + trial % 3; ++i) as.push_back(rng.matrix(n));
    RankOneFunctional p = random_idempotent(rng, n);
    RankOneFunctional q = perturb_to_generic(as, p, 1e-3);
    CHECK(q.distance(p) < 1e-3);
    for (const auto& a : as) CHECK(is_generic_for(a, q));
  }
  std::vector<ComplexMatrix> too_many(4, ComplexMatrix::Identity(3, 3));
  RankOneFunctional p = unit_pair(3, 0, 0);
  CHECK_THROWS(perturb_to_generic(too_many, p, 1e-3));
  ComplexMatrix sq = ComplexMatrix::Zero(3, 3);
  sq(0, 2) = 1;
  CHECK_THROWS_AS(perturb_to_generic({sq}, p, 1e-3), PreconditionViolated);
}

TEST_CASE("orthogonality of disjoint diagonal projections") {
  RankOneFunctional p = unit_pair(4, 0, 0);
  RankOneFunctional q = unit_pair(4, 1, 1);
  CHECK(orthogonality_test(p, q, OrthogonalityMode::Direct));
  CHECK(orthogonality_test(p, q, OrthogonalityMode::Witness));
}

TEST_CASE("non-orthogonal pair is decided by the closed-form witness") {
  int n = 4;
  RankOneFunctional p = unit_pair(n, 0, 0);
  ComplexVector x = ComplexVector::Unit(n, 0) + ComplexVector::Unit(n, 1);
  RankOneFunctional q(x, ComplexVector::Unit(n, 1));
  CHECK(!orthogonality_test(p, q, OrthogonalityMode::Direct));
  // budget zero still decides: the explicit construction needs no search
  CHECK(!orthogonality_test(p, q, OrthogonalityMode::Witness, 0));
  // and the cited witness matrix itself works
  ComplexMatrix rm = x * ComplexVector::Unit(n, 0).transpose();
  ComplexMatrix w1 = (p.matrix() * rm + rm * p.matrix()) / 2.0;
  ComplexMatrix w2 = (q.matrix() * rm + rm * q.matrix()) / 2.0;
  CHECK((w1 * w1 - w1).norm() < 1e-12);
  CHECK((w2 * w2 - w2).norm() < 1e-12);
}

TEST_CASE("orthogonality modes agree on random hypothesis-satisfying pairs") {
  TrialRng rng(25);
  int decided = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int n = 3 + trial % 4;
    RankOneFunctional p = random_idempotent(rng, n);
    bool orthogonal = trial % 2 == 0;
    ComplexVector h = rng.vector(n);
    h -= (h.transpose() * p.x())(0) / p.x().squaredNorm() * p.x().conjugate();
    ComplexVector u = rng.vector(n);
    if (orthogonal)
      u -= (p.f().transpose() * u)(0) / p.f().squaredNorm() * p.f().conjugate();
    else if (std::abs((p.f().transpose() * u)(0)) < 0.05)
      continue;  // too close to orthogonal to decide either way
    Complex pr = (h.transpose() * u)(0);
    if (std::abs(pr) < 0.05) continue;
    RankOneFunctional q(u, h / pr);
    bool direct = orthogonality_test(p, q, OrthogonalityMode::Direct, 150,
                                     900u + trial);
    bool witness = orthogonality_test(p, q, OrthogonalityMode::Witness, 150,
                                      900u + trial);
    CHECK(direct == witness);
    CHECK(direct == orthogonal);
    ++decided;
  }
  CHECK(decided > 250);
}

TEST_CASE("orthogonality hypothesis violations are reported") {
  RankOneFunctional p = unit_pair(3, 0, 0);
  // Q = P gives PQ+QP = 2P with spectrum {2, 0}
  CHECK_THROWS_AS(orthogonality_test(p, p, OrthogonalityMode::Direct),
                  HypothesisViolated);
  RankOneFunctional bad(2.0 * ComplexVector::Unit(3, 0),
                        ComplexVector::Unit(3, 0));
  CHECK_THROWS_AS(orthogonality_test(p, bad, OrthogonalityMode::Direct),
                  NotIdempotent);
}

#include <doctest.h>

#include <Eigen/QR>

#include "jspec/preserver.hpp"
#include "jspec/rng.hpp"

using namespace jspec;

namespace {

ComplexMatrix bounded_transform(TrialRng& rng, int n) {
  ComplexMatrix q1 = Eigen::HouseholderQR<ComplexMatrix>(rng.matrix(n))
                         .householderQ();
  ComplexMatrix q2 = Eigen::HouseholderQR<ComplexMatrix>(rng.matrix(n))
                         .householderQ();
  Eigen::VectorXd sv(n);
  for (int i = 0; i < n; ++i) sv(i) = 0.5 + 1.5 * rng.uniform();
  return q1 * sv.cast<Complex>().asDiagonal() * q2.adjoint();
}

ComplexMatrix random_unitary(TrialRng& rng, int n) {
  return Eigen::HouseholderQR<ComplexMatrix>(rng.matrix(n)).householderQ();
}

Complex root_of_unity(int k, int m) {
  return std::exp(Complex(0, 2.0 * 3.14159265358979323846 * k / m));
}

}  // namespace

TEST_CASE("hypothesis verification accepts canonical maps") {
  TrialRng rng(51);
  BlackBoxMap identity{[](const ComplexMatrix& x) { return x; }, 4};
  HypothesisReport rep = verify_hypothesis(identity, 1, 2, 60, 3);
  CHECK(rep.passes == rep.trials);

  ComplexMatrix t = bounded_transform(rng, 4);
  for (bool transposed : {false, true}) {
    BlackBoxMap phi = make_similarity_map(root_of_unity(1, 4), t, transposed);
    HypothesisReport r2 = verify_hypothesis(phi, 1, 2, 60, 3);
    CHECK(r2.passes == r2.trials);
  }
}

TEST_CASE("hypothesis verification rejects scaled and shifted maps") {
  BlackBoxMap doubled{[](const ComplexMatrix& x) { return 2.0 * x; }, 3};
  HypothesisReport rep = verify_hypothesis(doubled, 1, 2, 60, 3);
  CHECK(rep.passes < rep.trials);
  CHECK(rep.counterexample_a.has_value());

  BlackBoxMap shifted{[](const ComplexMatrix& x) {
                        ComplexMatrix y = x;
                        y(0, 0) += 1.0;
                        return y;
                      },
                      3};
  CHECK(verify_hypothesis(shifted, 0, 2, 60, 3).passes < 60);
}

TEST_CASE("similarity classification of linear tables") {
  TrialRng rng(52);
  const int n = 3, m = 4;
  ComplexMatrix t = bounded_transform(rng, n);
  for (bool transposed : {false, true}) {
    BlackBoxMap phi = make_similarity_map(root_of_unity(3, m), t, transposed);
    LinearMapTable table;
    table.n = n;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        ComplexMatrix e = ComplexMatrix::Zero(n, n);
        e(a, b) = 1;
        table.images.push_back(phi.apply(e));
      }
    PreserverModel model = recover_similarity(table, m);
    CHECK(std::abs(model.lambda - root_of_unity(3, m)) < 1e-9);
    CHECK(model.transposed == transposed);
    CHECK(projective_distance(model.t, t) < 1e-6);
    CHECK(model.residual < 1e-6);
  }
}

TEST_CASE("tables outside the canonical family are rejected") {
  const int n = 2, m = 3;
  LinearMapTable table;
  table.n = n;
  // X -> c X with c not an mth root of unity
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      ComplexMatrix e = ComplexMatrix::Zero(n, n);
      e(a, b) = Complex(0.8, 0.1);
      table.images.push_back(e);
    }
  CHECK_THROWS_AS(recover_similarity(table, m), AmbiguousForm);

  // entrywise-conjugation-like scrambles are neither multiplicative form
  TrialRng rng(53);
  LinearMapTable scramble;
  scramble.n = n;
  for (int i = 0; i < n * n; ++i) scramble.images.push_back(rng.matrix(n));
  CHECK_THROWS(recover_similarity(scramble, m));
}

TEST_CASE("dimension-2 recovery from the projection frame") {
  TrialRng rng(54);
  for (auto [r, s] : {std::pair{1, 2}, {0, 2}}) {
    const int m = r + s + 1;
    for (int trial = 0; trial < 10; ++trial) {
      ComplexMatrix t = bounded_transform(rng, 2);
      Complex lambda = root_of_unity(trial % m, m);
      bool transposed = trial % 2 == 1;
      BlackBoxMap phi = make_similarity_map(lambda, t, transposed);
      Recovery2x2 rec = recover_2x2(phi, r, s, 100u + trial);
      CHECK(std::abs(rec.model.lambda - lambda) < 1e-9);
      CHECK(projective_distance(rec.model.t, t) < 1e-6);
      // the linear table reproduces the map
      ComplexMatrix x = rng.matrix(2);
      CHECK((rec.table.apply(x) - phi.apply(x)).norm() < 1e-8);
    }
  }
  BlackBoxMap identity{[](const ComplexMatrix& x) { return x; }, 2};
  Recovery2x2 rec = recover_2x2(identity, 1, 2, 1);
  CHECK(std::abs(rec.model.lambda - 1.0) < 1e-9);
  CHECK(projective_distance(rec.model.t, ComplexMatrix::Identity(2, 2)) < 1e-6);
}

TEST_CASE("full recovery round trip on both branches") {
  TrialRng rng(55);
  for (auto [r, s] : {std::pair{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}) {
    const int m = r + s + 1;
    for (int trial = 0; trial < 8; ++trial) {
      int n = 2 + trial % 6;
      ComplexMatrix t = bounded_transform(rng, n);
      Complex lambda = root_of_unity(trial % m, m);
      bool transposed = trial % 2 == 1;
      BlackBoxMap phi = make_similarity_map(lambda, t, transposed);
      PreserverModel model = recover_full(phi, r, s, 200u + trial);
      CHECK(std::abs(model.lambda - lambda) < 1e-9);
      CHECK(projective_distance(model.t, t) < 1e-6);
      CHECK(model.residual < 1e-6);
      if (n >= 3) CHECK(model.transposed == transposed);
    }
  }
}

TEST_CASE("exactly one branch validates for generic transforms") {
  TrialRng rng(56);
  for (int trial = 0; trial < 6; ++trial) {
    int n = 3 + trial % 4;
    ComplexMatrix t = bounded_transform(rng, n);
    bool transposed = trial % 2 == 1;
    BlackBoxMap phi = make_similarity_map(Complex(1, 0), t, transposed);
    PreserverModel model = recover_full(phi, 1, 2, 300u + trial);
    CHECK(model.transposed == transposed);
  }
}

TEST_CASE("scalar dimension is a single-probe recovery") {
  BlackBoxMap phi{[](const ComplexMatrix& x) {
                    return ComplexMatrix(root_of_unity(1, 4) * x);
                  },
                  1};
  PreserverModel model = recover_full(phi, 1, 2, 0);
  CHECK(std::abs(model.lambda - root_of_unity(1, 4)) < 1e-9);
}

TEST_CASE("maps violating the hypothesis raise structured errors") {
  BlackBoxMap doubled{[](const ComplexMatrix& x) { return 2.0 * x; }, 3};
  CHECK_THROWS_AS(recover_full(doubled, 1, 2, 0), ValidationFailed);

  BlackBoxMap shifted{[](const ComplexMatrix& x) {
                        ComplexMatrix y = x;
                        y(0, 0) += 1.0;
                        return y;
                      },
                      3};
  CHECK_THROWS(recover_full(shifted, 1, 2, 0));

  TrialRng rng(57);
  LinearMapTable scramble;
  scramble.n = 3;
  for (int i = 0; i < 9; ++i) scramble.images.push_back(rng.matrix(3));
  CHECK_THROWS(recover_full(scramble.as_black_box(), 1, 2, 0));
}

TEST_CASE("self-adjoint recovery round trip") {
  TrialRng rng(58);
  for (auto [r, s] : {std::pair{0, 1}, {1, 2}, {1, 3}}) {
    const int m = r + s + 1;
    for (int trial = 0; trial < 8; ++trial) {
      int n = 2 + trial % 6;
      ComplexMatrix u = random_unitary(rng, n);
      double xi = (m % 2 == 0 && trial % 4 >= 2) ? -1.0 : 1.0;
      bool transposed = trial % 2 == 1;
      BlackBoxMap phi = make_unitary_map(xi, u, transposed);
      PreserverModel model = recover_selfadjoint(phi, r, s, 400u + trial);
      CHECK(std::abs(model.lambda - xi) < 1e-9);
      CHECK(projective_distance(model.t, u) < 1e-6);
      CHECK((model.t.adjoint() * model.t -
             ComplexMatrix::Identity(n, n)).norm() < 1e-8);
      CHECK(model.residual < 1e-6);
    }
  }
}

TEST_CASE("negative sign needs an even product order") {
  TrialRng rng(59);
  ComplexMatrix u = random_unitary(rng, 3);
  BlackBoxMap phi = make_unitary_map(-1.0, u, false);
  // m = 4: allowed
  PreserverModel model = recover_selfadjoint(phi, 1, 2, 0);
  CHECK(std::abs(model.lambda + 1.0) < 1e-9);
  // m = 3: impossible
  CHECK_THROWS_AS(recover_selfadjoint(phi, 0, 2, 0), NotRankOnePreserving);
}

TEST_CASE("projective distance is a scalar-invariant metric") {
  TrialRng rng(60);
  ComplexMatrix t = rng.matrix(3);
  CHECK(projective_distance(t, ComplexMatrix(Complex(0, 1) * t)) < 1e-7);
  CHECK(projective_distance(t, ComplexMatrix(-3.0 * t)) < 1e-7);
  CHECK(projective_distance(t, rng.matrix(3)) > 1e-3);
}

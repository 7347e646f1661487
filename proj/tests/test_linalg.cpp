#include <doctest.h>

#include "exact_rank.hpp"
#include "jspec/linalg.hpp"
#include "jspec/rng.hpp"

using namespace jspec;

namespace {

ComplexMatrix random_integer_matrix(TrialRng& rng, int n, int bound) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = Complex(rng.uniform_int(-bound, bound),
                        rng.uniform_int(-bound, bound));
  return m;
}

std::vector<std::vector<jspec_test::GaussInt>> to_exact(const ComplexMatrix& m) {
  std::vector<std::vector<jspec_test::GaussInt>> out(m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      out[i].emplace_back((long long)std::lround(m(i, j).real()),
                          (long long)std::lround(m(i, j).imag()));
  return out;
}

}  // namespace

TEST_CASE("spectrum of diagonal and nilpotent matrices") {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 2;
  d(2, 2) = 3;
  Spectrum sp = spectrum(d);
  CHECK(sp.values.size() == 3);
  CHECK(sp.distinct_nonzero_count({}) == 3);

  ComplexMatrix j = ComplexMatrix::Zero(3, 3);
  j(0, 1) = 1;
  j(1, 2) = 1;
  Spectrum spj = spectrum(j);
  CHECK(spj.values.size() == 1);
  CHECK(std::abs(spj.values[0]) == 0.0);

  Spectrum spi = spectrum(ComplexMatrix::Identity(4, 4));
  CHECK(spi.values.size() == 1);
  CHECK(std::abs(spi.values[0] - 1.0) < 1e-12);
}

TEST_CASE("clustered eigenvalues keep multiplicities and the trace") {
  TrialRng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + trial % 7;
    ComplexMatrix a = rng.matrix(n);
    ClusteredEigenvalues c = clustered_eigenvalues(a);
    int total = 0;
    Complex trace_sum(0, 0);
    for (size_t k = 0; k < c.representatives.size(); ++k) total += c.multiplicities[k];
    CHECK(total == n);
    // representatives weighted by multiplicity reproduce the trace for
    // well-separated random spectra
    Eigen::ComplexEigenSolver<ComplexMatrix> es(a);
    Complex exact = a.trace();
    Complex approx(0, 0);
    for (size_t k = 0; k < c.representatives.size(); ++k)
      approx += c.representatives[k] * double(c.multiplicities[k]);
    CHECK(std::abs(approx - exact) < 1e-6 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("close eigenvalues merge into one representative") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 1.0 + 1e-9;
  Spectrum sp = spectrum(d);
  CHECK(sp.values.size() == 1);
}

TEST_CASE("rank matches the exact elimination oracle") {
  TrialRng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + trial % 5;  // up to 6
    ComplexMatrix m;
    if (trial % 3 == 0) {
      m = random_integer_matrix(rng, n, 3);
    } else {
      // engineered low rank: integer product of thin factors
      int k = 1 + trial % n;
      ComplexMatrix g1(n, k), g2(k, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
          g1(i, j) = Complex(rng.uniform_int(-2, 2), rng.uniform_int(-2, 2));
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j)
          g2(i, j) = Complex(rng.uniform_int(-2, 2), rng.uniform_int(-2, 2));
      m = g1 * g2;
    }
    CHECK(rank(m) == jspec_test::exact_rank(to_exact(m)));
  }
}

TEST_CASE("spectra are invariant under similarity") {
  TrialRng rng(19);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 2 + trial % 7;
    ComplexMatrix a = rng.matrix(n);
    ComplexMatrix p = rng.matrix(n);
    if (std::abs(p.determinant()) < 1e-3) continue;
    Spectrum s1 = spectrum(a);
    Spectrum s2 = spectrum(p * a * p.inverse());
    CHECK(spectra_equal(s1, s2));
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("spectra_equal distinguishes separated sets") {
  Spectrum a{{Complex(0, 0), Complex(1, 0)}, 1.0};
  Spectrum b{{Complex(1, 0), Complex(0, 0)}, 1.0};
  Spectrum c{{Complex(0, 0), Complex(1.001, 0)}, 1.0};
  Spectrum d{{Complex(0, 0)}, 1.0};
  CHECK(spectra_equal(a, b));
  CHECK(!spectra_equal(a, c));
  CHECK(!spectra_equal(a, d));
}

TEST_CASE("outer product and input validation") {
  ComplexVector x(2), f(2);
  x << 1, 2;
  f << 3, 4;
  ComplexMatrix m = outer(x, f);
  CHECK(m(1, 0) == Complex(6, 0));
  CHECK_THROWS_AS(outer(x, ComplexVector::Zero(2)), DegenerateInput);
  ComplexMatrix bad(2, 3);
  CHECK_THROWS_AS(spectrum(bad), DimensionMismatch);
  ComplexMatrix nan2 = ComplexMatrix::Zero(2, 2);
  nan2(0, 0) = Complex(std::nan(""), 0);
  CHECK_THROWS_AS(rank(nan2), DegenerateInput);
  ToleranceConfig bad_tol;
  bad_tol.zero = -1;
  CHECK_THROWS(spectrum(ComplexMatrix::Identity(2, 2), bad_tol));
}

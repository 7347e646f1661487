#include "jspec/rank_witness.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "jspec/jordan.hpp"
#include "jspec/rng.hpp"

namespace jspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
// fixed stream for the deterministic parts of the construction that need
// generic auxiliary data; never derived from caller seeds
constexpr std::uint64_t kConstructionSeed = 0x9d1f29a3c5e70b61ULL;

WitnessReport make_report(const ComplexMatrix& a, const ComplexMatrix& b,
                          int r, int s, std::string tag,
                          const ToleranceConfig& tol) {
  WitnessReport rep;
  rep.witness = b;
  rep.product = two_slot_product(a, b, r, s);
  rep.spectrum = spectrum(rep.product, tol);
  rep.distinct_nonzero_count = rep.spectrum.distinct_nonzero_count(tol);
  rep.construction = std::move(tag);
  return rep;
}

bool report_is_valid(const WitnessReport& rep, const ToleranceConfig& tol) {
  return rep.distinct_nonzero_count >= 3 && rank(rep.witness, tol) <= 3;
}

bool three_distinct_nonzero(const Complex& v1, const Complex& v2,
                            const Complex& v3, const ToleranceConfig& tol) {
  double scale = std::max({1.0, std::abs(v1), std::abs(v2), std::abs(v3)});
  if (std::abs(v1) <= tol.zero * scale || std::abs(v2) <= tol.zero * scale ||
      std::abs(v3) <= tol.zero * scale)
    return false;
  double radius = tol.distinct * scale;
  return std::abs(v1 - v2) > radius && std::abs(v1 - v3) > radius &&
         std::abs(v2 - v3) > radius;
}

// s-th root of a diagonalizable matrix, principal branch per eigenvalue;
// eigenvalues at zero get root zero
ComplexMatrix principal_root(const ComplexMatrix& c, int s,
                             const ToleranceConfig& tol) {
  if (s == 1) return c;
  Eigen::ComplexEigenSolver<ComplexMatrix> es(c);
  if (es.info() != Eigen::Success)
    throw CanonicalFormNotReached("principal_root: eigensolver failed");
  ComplexVector d = es.eigenvalues();
  double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (int i = 0; i < d.size(); ++i)
    d(i) = std::abs(d(i)) <= tol.zero * scale
               ? Complex(0, 0)
               : std::pow(d(i), 1.0 / double(s));
  const ComplexMatrix& v = es.eigenvectors();
  Eigen::FullPivLU<ComplexMatrix> lu(v);
  if (!lu.isInvertible())
    throw CanonicalFormNotReached("principal_root: defective matrix");
  return v * d.asDiagonal() * lu.inverse();
}

// orthonormal basis of the complement of the column span of v
ComplexMatrix orth_complement(const ComplexMatrix& v, int span_dim) {
  Eigen::HouseholderQR<ComplexMatrix> qr(v);
  ComplexMatrix q = qr.householderQ();
  return q.rightCols(q.cols() - span_dim);
}

// number of eigenvalues (with multiplicity) of modulus above the zero
// threshold
int nonzero_eigenvalue_count(const ComplexMatrix& m,
                             const ToleranceConfig& tol) {
  ClusteredEigenvalues c = clustered_eigenvalues(m, tol);
  int count = 0;
  for (size_t i = 0; i < c.representatives.size(); ++i)
    if (std::abs(c.representatives[i]) > tol.zero * c.scale)
      count += c.multiplicities[i];
  return count;
}

// unitary q with q^* m q upper triangular and the diagonal in the given
// eigenvalue order (deflation with Householder reflectors)
ComplexMatrix ordered_triangularize(const ComplexMatrix& m,
                                    const std::vector<Complex>& eigs) {
  const int k = int(m.rows());
  ComplexMatrix q = ComplexMatrix::Identity(k, k);
  ComplexMatrix work = m;
  for (int j = 0; j < k - 1; ++j) {
    const int kk = k - j;
    ComplexMatrix shifted =
        work - eigs[j] * ComplexMatrix::Identity(kk, kk);
    Eigen::JacobiSVD<ComplexMatrix> svd(shifted, Eigen::ComputeFullV);
    ComplexVector v = svd.matrixV().col(kk - 1);  // near-null direction
    // Householder mapping e1 -> v
    ComplexVector w = v;
    Complex phase = std::abs(w(0)) > 0 ? w(0) / std::abs(w(0)) : Complex(1, 0);
    w(0) += phase;
    ComplexMatrix h = ComplexMatrix::Identity(kk, kk) -
                      2.0 * (w * w.adjoint()) / w.squaredNorm();
    h = -phase * h;  // h * e1 == v up to exact phase
    ComplexMatrix hw = h.adjoint() * work * h;
    q.block(0, j, k, kk) = q.block(0, j, k, kk) * h;
    work = hw.bottomRightCorner(kk - 1, kk - 1);
  }
  return q;
}

// Spectral split of a matrix whose nilpotent Jordan blocks have order <= 4:
// returns invertible p with p^{-1} m p = (nonzero-eigenvalue block of the
// given dimension) direct-sum (nilpotent block).
ComplexMatrix spectral_split(const ComplexMatrix& m, int mu,
                             const ToleranceConfig& tol) {
  const int n = int(m.rows());
  double nrm = m.norm();
  if (nrm == 0) throw CanonicalFormNotReached("spectral_split: zero matrix");
  ComplexMatrix k = matrix_power(m / nrm, std::min(n, 4));
  Eigen::JacobiSVD<ComplexMatrix> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ComplexMatrix p(n, n);
  p.leftCols(mu) = svd.matrixU().leftCols(mu);       // range: nonzero part
  p.rightCols(n - mu) = svd.matrixV().rightCols(n - mu);  // kernel part
  Eigen::FullPivLU<ComplexMatrix> lu(p);
  if (!lu.isInvertible())
    throw CanonicalFormNotReached("spectral_split: split basis singular");
  // verify block-diagonality
  ComplexMatrix t = lu.solve(m * p);
  double off = t.bottomLeftCorner(n - mu, mu).norm() +
               t.topRightCorner(mu, n - mu).norm();
  if (off > 1e-7 * std::max(1.0, nrm))
    throw CanonicalFormNotReached("spectral_split: subspaces not invariant");
  return p;
}

struct CanonicalRank2 {
  int form = 0;      // 1..4 matching the four canonical shapes
  ComplexMatrix s;   // similarity: s^{-1} a s = canonical
  ComplexMatrix canonical;
};

// Reduce a rank-2 matrix to one of the four canonical shapes
//   (1) [[a,0,b],[0,0,0],[0,0,c]] (+) 0     two nonzero eigenvalues
//   (2) [[a,0,0],[0,0,1],[0,0,0]] (+) 0     one nonzero eigenvalue
//   (3) [[0,1,0],[0,0,1],[0,0,0]] (+) 0     nilpotent, a^2 != 0
//   (4) [[0,I2],[0,0]] (+) 0                nilpotent, a^2 == 0
CanonicalRank2 reduce_rank2(const ComplexMatrix& a, const ToleranceConfig& tol) {
  const int n = int(a.rows());
  const double nrm = a.norm();
  const int mu = nonzero_eigenvalue_count(a, tol);
  const bool square_zero = (a * a).norm() <= tol.zero * nrm * nrm;

  CanonicalRank2 out;
  ComplexMatrix s(n, n);

  if (mu == 2) {
    out.form = 1;
    ComplexMatrix p = spectral_split(a, 2, tol);
    ComplexMatrix c2 =
        (p.inverse() * a * p).topLeftCorner(2, 2);  // eigenvalues a, c
    Eigen::ComplexSchur<ComplexMatrix> schur(c2);
    if (schur.info() != Eigen::Success)
      throw CanonicalFormNotReached("reduce_rank2: schur failed");
    ComplexMatrix z = schur.matrixU();
    // columns of p*z are the triangular coordinates; interleave a zero
    // coordinate so the shape lands at positions (1,3) of the 3x3 block
    ComplexMatrix pz = p;
    pz.leftCols(2) = p.leftCols(2) * z;
    s.col(0) = pz.col(0);
    s.col(1) = pz.col(2);
    s.col(2) = pz.col(1);
    for (int j = 3; j < n; ++j) s.col(j) = pz.col(j);
  } else if (mu == 1) {
    out.form = 2;
    ComplexMatrix p = spectral_split(a, 1, tol);
    // nilpotent restriction has rank one; shape it into a 2-chain
    ComplexMatrix nil =
        (p.inverse() * a * p).bottomRightCorner(n - 1, n - 1);
    Eigen::JacobiSVD<ComplexMatrix> svd(nil, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ComplexVector u = svd.matrixU().col(0);
    ComplexVector g = (u.adjoint() * nil).transpose() / svd.singularValues()(0);
    // nil ~= sigma * u g^T with g^T u ~ 0
    Complex gg = (g.transpose() * g.conjugate())(0);
    ComplexVector chain = g.conjugate() / gg;  // nil * chain = sigma * u
    ComplexMatrix p2(n - 1, n - 1);
    p2.col(0) = u * svd.singularValues()(0);
    p2.col(1) = chain;
    if (n - 1 > 2) {
      ComplexMatrix span(n - 1, 2);
      span.col(0) = g.conjugate();
      span.col(1) = u;
      p2.rightCols(n - 3) = orth_complement(span, 2);
    }
    s.col(0) = p.col(0);
    s.rightCols(n - 1) = p.rightCols(n - 1) * p2;
  } else if (!square_zero) {
    out.form = 3;
    ComplexMatrix a2 = a * a;
    Eigen::JacobiSVD<ComplexMatrix> svd2(a2, Eigen::ComputeFullV);
    ComplexVector x = svd2.matrixV().col(0);
    ComplexVector b2 = a * x;
    ComplexVector b1 = a * b2;
    Eigen::JacobiSVD<ComplexMatrix> svda(a, Eigen::ComputeFullV);
    ComplexMatrix ker = svda.matrixV().rightCols(n - 2);
    s.col(0) = b1;
    s.col(1) = b2;
    s.col(2) = x;
    if (n > 3) {
      // kernel directions orthogonal to the chain head; the head itself
      // sits inside the kernel, so pivoting must pick out the remainder
      ComplexMatrix proj =
          ker - b1.normalized() * (b1.normalized().adjoint() * ker);
      Eigen::ColPivHouseholderQR<ComplexMatrix> qr(proj);
      ComplexMatrix q = qr.householderQ();
      s.rightCols(n - 3) = q.leftCols(n - 3);
    }
  } else {
    out.form = 4;
    if (n < 4)
      throw CanonicalFormNotReached(
          "reduce_rank2: square-zero rank 2 needs dimension >= 4");
    Eigen::JacobiSVD<ComplexMatrix> svda(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ComplexVector x1 = svda.matrixV().col(0);
    ComplexVector x2 = svda.matrixV().col(1);
    s.col(0) = a * x1;
    s.col(1) = a * x2;
    s.col(2) = x1;
    s.col(3) = x2;
    if (n > 4) {
      ComplexMatrix ker = svda.matrixV().rightCols(n - 2);
      ComplexMatrix range(n, 2);
      range.col(0) = s.col(0).normalized();
      range.col(1) = s.col(1).normalized();
      ComplexMatrix proj = ker - range * (range.adjoint() * ker);
      Eigen::ColPivHouseholderQR<ComplexMatrix> qr(proj);
      ComplexMatrix q = qr.householderQ();
      s.rightCols(n - 4) = q.leftCols(n - 4);
    }
  }

  Eigen::FullPivLU<ComplexMatrix> lu(s);
  if (!lu.isInvertible())
    throw CanonicalFormNotReached("reduce_rank2: basis singular");
  out.s = s;
  out.canonical = lu.solve(a * s);
  // sanity: the canonical shape must vanish outside the expected support
  ComplexMatrix expected = ComplexMatrix::Zero(n, n);
  const int blk = (out.form == 4) ? 4 : 3;
  expected.topLeftCorner(blk, blk) = out.canonical.topLeftCorner(blk, blk);
  if ((out.canonical - expected).norm() > 1e-6 * std::max(1.0, nrm))
    throw CanonicalFormNotReached("reduce_rank2: residual outside block");
  return out;
}

ComplexMatrix embed3(const ComplexMatrix& b3, int n) {
  ComplexMatrix b = ComplexMatrix::Zero(n, n);
  b.topLeftCorner(b3.rows(), b3.cols()) = b3;
  return b;
}

// --- rank 2 witnesses, s > r > 0 -------------------------------------------

ComplexMatrix rank2_form1_witness(const ComplexMatrix& canon, int r, int s,
                                  const ToleranceConfig& tol) {
  const Complex a = canon(0, 0), c = canon(2, 2);
  const double theta = kPi / double(s);
  const Complex cr = std::cos(double(r) * theta);
  const Complex root = std::sqrt(Complex(std::cos(2.0 * r * theta), 0));
  if (std::abs(cr - root) < 1e-9 || std::abs(cr + root) < 1e-9 ||
      std::abs(cr - 1.0) < 1e-9 || std::abs(cr + 1.0) < 1e-9)
    throw CanonicalFormNotReached("form (i): rotation angle degenerate");
  const Complex v1 = -a * (cr + root), v2 = -a * (cr - root);
  for (int d = 1; d <= 64; ++d) {
    Complex v3 = 2.0 * c * std::pow(double(d), r + s);
    if (three_distinct_nonzero(v1, v2, v3, tol)) {
      ComplexMatrix b3(3, 3);
      b3 << std::cos(theta), -std::sin(theta), 0, std::sin(theta),
          std::cos(theta), 0, 0, 0, double(d);
      return b3;
    }
  }
  throw CanonicalFormNotReached("form (i): no separating d found");
}

ComplexMatrix rank2_form2_witness(const ComplexMatrix& canon, int r, int s,
                                  const ToleranceConfig& tol) {
  const Complex a = canon(0, 0);
  const Complex v2 = double(r + s) + 2.0 * std::sqrt(double(r) * double(s));
  const Complex v3 = double(r + s) - 2.0 * std::sqrt(double(r) * double(s));
  for (int d = 1; d <= 64; ++d) {
    Complex v1 = 2.0 * a * std::pow(double(d), r + s);
    if (three_distinct_nonzero(v1, v2, v3, tol)) {
      ComplexMatrix b3(3, 3);
      b3 << double(d), 0, 0, 0, 1, 0, 0, 1, 1;
      return b3;
    }
  }
  throw CanonicalFormNotReached("form (ii): no separating d found");
}

ComplexMatrix rank2_form3_witness(int r, int s, const ToleranceConfig& tol) {
  if (s == 2 * r) {
    ComplexMatrix cyc(3, 3);
    cyc << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    return principal_root(cyc, r, tol);
  }
  // s != 2r: B similar to diag(1, e^{i t1}, e^{i t2}) with t = 2pi/s, 4pi/s
  const double t1 = 2.0 * kPi / double(s);
  const double t2 = 4.0 * kPi / double(s);
  const Complex w1 = std::exp(Complex(0, double(r) * t1));
  const Complex w2 = std::exp(Complex(0, double(r) * t2));
  ComplexMatrix l(3, 3);
  l << 1, 0, 0, 1, w1, 0, 0, 2, w2;
  Eigen::ComplexEigenSolver<ComplexMatrix> es(l);
  if (es.info() != Eigen::Success)
    throw CanonicalFormNotReached("form (iii): eigensolver failed");
  // order eigenvectors to match (1, w1, w2)
  const Complex targets[3] = {Complex(1, 0), w1, w2};
  ComplexMatrix v(3, 3);
  for (int j = 0; j < 3; ++j) {
    int best = 0;
    double best_d = 1e300;
    for (int i = 0; i < 3; ++i) {
      double d = std::abs(es.eigenvalues()(i) - targets[j]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    v.col(j) = es.eigenvectors().col(best);
  }
  ComplexVector d(3);
  d << Complex(1, 0), std::exp(Complex(0, t1)), std::exp(Complex(0, t2));
  return v * d.asDiagonal() * v.inverse();
}

ComplexMatrix rank2_form4_witness(const ComplexMatrix& /*canon*/, int r, int s,
                                  const ToleranceConfig& tol, int n,
                                  ComplexMatrix* basis_change) {
  // pass to the chain basis where the shape splits as
  // [[0,1],[0,0]] (+) [[1,1],[-1,-1]] (+) 0
  ComplexMatrix s2 = ComplexMatrix::Identity(n, n);
  ComplexMatrix cols = ComplexMatrix::Zero(n, 4);
  cols(0, 0) = 1;                  // c1
  cols(2, 1) = 1;                  // c3
  cols(3, 2) = 1, cols(1, 2) = 1;  // c4 + c2
  cols(3, 3) = 1;                  // c4
  s2.leftCols(4) = cols;
  *basis_change = s2;

  const double theta = kPi / (2.0 * double(r + s));
  const double gap =
      std::sqrt(std::sin(2.0 * r * theta) * std::sin(2.0 * s * theta));
  const Complex v1 = 1.0 + gap, v2 = 1.0 - gap;
  for (int d = 1; d <= 64; ++d) {
    Complex v3 = std::pow(double(d), r + s);
    if (three_distinct_nonzero(v1, v2, v3, tol)) {
      ComplexMatrix b3(3, 3);
      b3 << std::cos(theta), -std::sin(theta), 0, std::sin(theta),
          std::cos(theta), 0, 0, 0, double(d);
      return b3;
    }
  }
  throw CanonicalFormNotReached("form (iv): no separating d found");
}

// --- rank 2 witnesses, r = 0 (A^2 != 0) ------------------------------------

ComplexMatrix rank2_form1_witness_r0(const ComplexMatrix& canon, int s,
                                     const ToleranceConfig& tol) {
  const Complex a = canon(0, 0), c = canon(2, 2);
  const double theta = kPi / double(2 * s + 1);
  const Complex cs = std::cos(double(s) * theta);
  const Complex root = std::sqrt(Complex(std::cos(2.0 * s * theta), 0));
  const Complex v1 = a * (cs + root), v2 = a * (cs - root);
  for (int d = 1; d <= 64; ++d) {
    Complex v3 = 2.0 * c * std::pow(double(d), s);
    if (three_distinct_nonzero(v1, v2, v3, tol)) {
      ComplexMatrix b3(3, 3);
      b3 << std::cos(theta), -std::sin(theta), 0, std::sin(theta),
          std::cos(theta), 0, 0, 0, double(d);
      return b3;
    }
  }
  throw CanonicalFormNotReached("form (i) r=0: no separating d found");
}

ComplexMatrix rank2_form2_witness_r0(const ComplexMatrix& canon, int s,
                                     const ToleranceConfig& tol) {
  const Complex a = canon(0, 0);
  for (int d = 1; d <= 64; ++d) {
    Complex v1 = 2.0 * double(d);
    Complex root = std::sqrt(a * a + double(d) * double(d));
    Complex v2 = double(d) + root, v3 = double(d) - root;
    if (three_distinct_nonzero(v1, v2, v3, tol)) {
      ComplexMatrix c3(3, 3);
      c3 << 0, 1, 0, 1, 0, 0, 0, 2.0 * d, 2;
      return principal_root(c3, s, tol);
    }
  }
  throw CanonicalFormNotReached("form (ii) r=0: no separating d found");
}

ComplexMatrix rank2_form3_witness_r0(int s, const ToleranceConfig& tol) {
  ComplexMatrix c3(3, 3);
  c3 << 0, 0, 0, 1, 1, 0, 0, 2, 2;
  return principal_root(c3, s, tol);
}

// --- rank >= 3 helpers ------------------------------------------------------

// b2, b3 scan for a triangular 3x3 block with nonzero diagonal a1,a2,a3;
// the product diagonal is 2*a_i*b_i^(r+s) with b1 = 1
ComplexMatrix diag_scan_witness(const Complex& a1, const Complex& a2,
                                const Complex& a3, int r, int s,
                                const ToleranceConfig& tol) {
  for (int b2 = 1; b2 <= 24; ++b2)
    for (int b3 = 1; b3 <= 24; ++b3) {
      Complex v1 = a1;
      Complex v2 = a2 * std::pow(double(b2), r + s);
      Complex v3 = a3 * std::pow(double(b3), r + s);
      if (three_distinct_nonzero(v1, v2, v3, tol)) {
        ComplexVector d(3);
        d << 1, double(b2), double(b3);
        return ComplexMatrix(d.asDiagonal());
      }
    }
  throw CanonicalFormNotReached("diag scan: no separating pair found");
}

// General rank >= 3 construction for s > r > 0: compress to the span of
// {x_i, A x_i}, move an invertible triangular 3x3 to the leading corner,
// and sandwich with a diagonal rank-3 operator.
ComplexMatrix rank3_sandwich_witness(const ComplexMatrix& a, int r, int s,
                                     const ToleranceConfig& tol) {
  const int n = int(a.rows());
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullV);
  ComplexMatrix w(n, 6);
  for (int i = 0; i < 3; ++i) {
    w.col(i) = svd.matrixV().col(i);
    w.col(3 + i) = a * svd.matrixV().col(i);
  }
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(w);
  qr.setThreshold(1e-10);
  const int np = std::min<int>(int(qr.rank()), 6);
  ComplexMatrix q = ComplexMatrix(qr.householderQ()).leftCols(np);
  ComplexMatrix a11 = q.adjoint() * a * q;

  // find an invertible change making the leading 3x3 invertible
  TrialRng rng(kConstructionSeed);
  ComplexMatrix g;
  bool found = false;
  for (int attempt = 0; attempt < 64 && !found; ++attempt) {
    ComplexMatrix cand = attempt == 0 ? ComplexMatrix::Identity(np, np)
                                      : rng.matrix(np);
    Eigen::FullPivLU<ComplexMatrix> lu(cand);
    if (!lu.isInvertible()) continue;
    ComplexMatrix t = lu.solve(a11 * cand);
    Eigen::JacobiSVD<ComplexMatrix> s3(t.topLeftCorner(3, 3));
    if (s3.singularValues()(2) > 1e-8 * std::max(1.0, a.norm())) {
      g = cand;
      found = true;
    }
  }
  if (!found)
    throw CanonicalFormNotReached("rank3: no invertible leading block");

  // triangularize the leading 3x3 inside the change of basis
  ComplexMatrix t = g.inverse() * a11 * g;
  ComplexMatrix m3 = t.topLeftCorner(3, 3);
  Eigen::ComplexSchur<ComplexMatrix> schur(m3);
  if (schur.info() != Eigen::Success)
    throw CanonicalFormNotReached("rank3: schur failed");
  ComplexMatrix gz = g;
  gz.leftCols(3) = g.leftCols(3) * schur.matrixU();
  ComplexMatrix tri = schur.matrixT();

  ComplexMatrix d3 =
      diag_scan_witness(tri(0, 0), tri(1, 1), tri(2, 2), r, s, tol);
  ComplexMatrix b11 = ComplexMatrix::Zero(np, np);
  b11.topLeftCorner(3, 3) = d3;
  b11 = gz * b11 * gz.inverse();
  return q * b11 * q.adjoint();
}

// r = 0, rank >= 3, A^2 != 0, non-scalar.  Reduces to a 3-dimensional
// invariant subspace with an upper triangular restriction, then picks a
// 3x3 witness for the restriction.
ComplexMatrix invariant3_witness(const ComplexMatrix& a, int s,
                                 const ToleranceConfig& tol);

// 3x3 witness for an upper triangular a0 with rank >= 2 and at least one
// nonzero eigenvalue, r = 0
ComplexMatrix triangular3_witness_r0(const ComplexMatrix& a0, int s,
                                     const ToleranceConfig& tol) {
  const int mu = nonzero_eigenvalue_count(a0, tol);
  if (mu == 3) {
    // invertible triangular block: diagonal sandwich
    return diag_scan_witness(a0(0, 0), a0(1, 1), a0(2, 2), 0, s, tol);
  }
  // singular rank-2 block with a nonzero eigenvalue: one of forms (i), (ii)
  CanonicalRank2 red = reduce_rank2(a0, tol);
  ComplexMatrix b3;
  if (red.form == 1)
    b3 = rank2_form1_witness_r0(red.canonical, s, tol);
  else if (red.form == 2)
    b3 = rank2_form2_witness_r0(red.canonical, s, tol);
  else
    throw CanonicalFormNotReached("triangular3: unexpected nilpotent block");
  return red.s * b3 * red.s.inverse();
}

ComplexMatrix invariant3_witness(const ComplexMatrix& a, int s,
                                 const ToleranceConfig& tol) {
  const int n = int(a.rows());
  const double nrm = std::max(1.0, a.norm());
  const double indep_tol = 1e-8 * nrm;

  auto krylov_rank = [&](const ComplexVector& x) {
    ComplexMatrix k(n, 3);
    k.col(0) = x;
    k.col(1) = a * x;
    k.col(2) = a * (a * x);
    Eigen::JacobiSVD<ComplexMatrix> svd(k);
    int rk = 0;
    for (int i = 0; i < 3; ++i)
      if (svd.singularValues()(i) > 1e-8 * svd.singularValues()(0)) ++rk;
    return rk;
  };

  // candidate starting vectors, deterministic order
  std::vector<ComplexVector> candidates;
  for (int i = 0; i < n; ++i)
    candidates.push_back(ComplexVector::Unit(n, i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      candidates.push_back(ComplexVector::Unit(n, i) +
                           ComplexVector::Unit(n, j));
  TrialRng rng(kConstructionSeed ^ 0x51);
  for (int i = 0; i < 16; ++i) candidates.push_back(rng.vector(n));

  // Case 1: some Krylov chain x, Ax, A^2x has full rank
  for (const auto& x : candidates) {
    if ((a * (a * x)).norm() <= indep_tol * x.norm()) continue;
    if (krylov_rank(x) < 3) continue;
    ComplexMatrix p(n, n);
    p.col(0) = x;
    p.col(1) = a * x;
    p.col(2) = a * (a * x);
    if (n > 3) p.rightCols(n - 3) = orth_complement(p.leftCols(3), 3);
    Eigen::FullPivLU<ComplexMatrix> lu(p);
    if (!lu.isInvertible()) continue;
    // C has zero third row, which keeps the product block-triangular
    for (double t = 1.0; t > 1e-7; t /= 2.0) {
      ComplexMatrix c(3, 3);
      c << 2 * t, 1, 0, 0, t, 2, 0, 0, 0;
      ComplexMatrix b1 = principal_root(c, s, tol);
      ComplexMatrix b = p * embed3(b1, n) * p.inverse();
      ComplexMatrix prod = a * matrix_power(b, s) + matrix_power(b, s) * a;
      Spectrum sp = spectrum(prod, tol);
      if (sp.distinct_nonzero_count(tol) >= 3) return b;
    }
  }

  // Case 2: every chain collapses; build a 3- or 4-dimensional invariant
  // subspace from x with A^2 x != 0 plus a y with Ay outside [x, Ax]
  for (const auto& x : candidates) {
    if ((a * (a * x)).norm() <= indep_tol * x.norm()) continue;
    ComplexMatrix xa(n, 2);
    xa.col(0) = x;
    xa.col(1) = a * x;
    Eigen::JacobiSVD<ComplexMatrix> sxa(xa, Eigen::ComputeFullU);
    if (sxa.singularValues()(1) <= 1e-8 * sxa.singularValues()(0)) continue;

    for (const auto& y : candidates) {
      ComplexVector ay = a * y;
      // Ay must leave [x, Ax]
      ComplexVector res = ay - sxa.matrixU().leftCols(2) *
                                   (sxa.matrixU().leftCols(2).adjoint() * ay);
      if (res.norm() <= indep_tol * std::max(1.0, ay.norm())) continue;

      // try V = [x, Ax, y]; fall back to [x, Ax, y, Ay]
      for (int dim : {3, 4}) {
        ComplexMatrix v(n, dim);
        v.col(0) = x;
        v.col(1) = a * x;
        v.col(2) = y;
        if (dim == 4) v.col(3) = ay;
        Eigen::ColPivHouseholderQR<ComplexMatrix> qrv(v);
        if (int(qrv.rank()) < dim) continue;
        ComplexMatrix qv = ComplexMatrix(qrv.householderQ()).leftCols(dim);
        // invariance check
        ComplexMatrix av = a * qv;
        ComplexMatrix resid = av - qv * (qv.adjoint() * av);
        if (resid.norm() > 1e-7 * nrm) continue;

        ComplexMatrix restr = qv.adjoint() * a * qv;
        // order eigenvalues; try permutations until the leading 3x3 is
        // usable (rank >= 2, nonzero eigenvalue present)
        Eigen::ComplexEigenSolver<ComplexMatrix> es(restr);
        if (es.info() != Eigen::Success) continue;
        std::vector<Complex> eigs(es.eigenvalues().data(),
                                  es.eigenvalues().data() + dim);
        std::sort(eigs.begin(), eigs.end(),
                  [](const Complex& l, const Complex& rr) {
                    return std::abs(l) > std::abs(rr);
                  });
        std::vector<int> perm(dim);
        for (int i = 0; i < dim; ++i) perm[i] = i;
        do {
          std::vector<Complex> ordered(dim);
          for (int i = 0; i < dim; ++i) ordered[i] = eigs[perm[i]];
          ComplexMatrix qt = ordered_triangularize(restr, ordered);
          ComplexMatrix t = qt.adjoint() * restr * qt;
          if (t.bottomLeftCorner(dim - 1, 1).norm() > 1e-6 * nrm) continue;
          ComplexMatrix a0 = t.topLeftCorner(3, 3);
          a0.triangularView<Eigen::StrictlyLower>().setZero();
          if (rank(a0, tol) < 2) continue;
          if (nonzero_eigenvalue_count(a0, tol) < 1) continue;
          ComplexMatrix b1;
          try {
            b1 = triangular3_witness_r0(a0, s, tol);
          } catch (const CanonicalFormNotReached&) {
            continue;
          }
          ComplexMatrix basis = qv * qt;  // n x dim, leading 3 invariant
          ComplexMatrix p(n, n);
          p.leftCols(3) = basis.leftCols(3);
          if (n > 3) p.rightCols(n - 3) = orth_complement(basis.leftCols(3), 3);
          ComplexMatrix b = p * embed3(b1, n) * p.inverse();
          ComplexMatrix prod = a * matrix_power(b, s) + matrix_power(b, s) * a;
          Spectrum sp = spectrum(prod, tol);
          if (sp.distinct_nonzero_count(tol) >= 3) return b;
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    }
  }
  throw CanonicalFormNotReached("invariant3: no usable subspace found");
}

bool is_scalar_matrix(const ComplexMatrix& a, const ToleranceConfig& tol) {
  Complex mean = a.trace() / double(a.rows());
  return (a - mean * ComplexMatrix::Identity(a.rows(), a.cols())).norm() <=
         tol.zero * std::max(1.0, a.norm());
}

}  // namespace

WitnessReport construct_witness(const ComplexMatrix& a, int r, int s,
                                const ToleranceConfig& tol) {
  check_square_matrix(a, "construct_witness");
  tol.validate();
  if (!(s > r && r >= 0)) throw BadExponents("construct_witness: need s > r >= 0");
  if (a.rows() < 3)
    throw PreconditionViolated("construct_witness: dimension >= 3 required");
  const int rk = rank(a, tol);
  if (rk <= 1)
    throw PreconditionViolated("construct_witness: rank(A) >= 2 required");
  const double nrm = a.norm();
  if (r == 0 && (a * a).norm() <= tol.zero * nrm * nrm)
    throw PreconditionViolated("construct_witness: r = 0 requires A^2 != 0");
  const int n = int(a.rows());

  WitnessReport rep;
  if (rk == 2) {
    CanonicalRank2 red = reduce_rank2(a, tol);
    ComplexMatrix b;
    std::string tag;
    if (r > 0) {
      switch (red.form) {
        case 1:
          b = red.s * embed3(rank2_form1_witness(red.canonical, r, s, tol), n) *
              red.s.inverse();
          tag = "rank2-i";
          break;
        case 2:
          b = red.s * embed3(rank2_form2_witness(red.canonical, r, s, tol), n) *
              red.s.inverse();
          tag = "rank2-ii";
          break;
        case 3:
          b = red.s * embed3(rank2_form3_witness(r, s, tol), n) *
              red.s.inverse();
          tag = s == 2 * r ? "rank2-iii-cyclic" : "rank2-iii-spectral";
          break;
        case 4: {
          ComplexMatrix s2;
          ComplexMatrix b3 = rank2_form4_witness(red.canonical, r, s, tol, n, &s2);
          ComplexMatrix total = red.s * s2;
          b = total * embed3(b3, n) * total.inverse();
          tag = "rank2-iv";
          break;
        }
      }
    } else {
      switch (red.form) {
        case 1:
          b = red.s * embed3(rank2_form1_witness_r0(red.canonical, s, tol), n) *
              red.s.inverse();
          tag = "rank2-i-r0";
          break;
        case 2:
          b = red.s * embed3(rank2_form2_witness_r0(red.canonical, s, tol), n) *
              red.s.inverse();
          tag = "rank2-ii-r0";
          break;
        case 3:
          b = red.s * embed3(rank2_form3_witness_r0(s, tol), n) *
              red.s.inverse();
          tag = "rank2-iii-r0";
          break;
        default:
          throw PreconditionViolated(
              "construct_witness: r = 0 with square-zero rank-2 input");
      }
    }
    rep = make_report(a, b, r, s, tag, tol);
  } else if (r > 0) {
    rep = make_report(a, rank3_sandwich_witness(a, r, s, tol), r, s,
                      "rank3-diag", tol);
  } else if (is_scalar_matrix(a, tol)) {
    ComplexMatrix b = ComplexMatrix::Zero(n, n);
    b(0, 0) = 1, b(1, 1) = 2, b(2, 2) = 3;
    rep = make_report(a, b, r, s, "scalar-diag123", tol);
  } else {
    rep = make_report(a, invariant3_witness(a, s, tol), r, s, "invariant3",
                      tol);
  }

  if (!report_is_valid(rep, tol))
    throw CanonicalFormNotReached("construct_witness: verification failed (" +
                                  rep.construction + ")");
  return rep;
}

WitnessReport construct_witness_selfadjoint(const ComplexMatrix& a, int r,
                                            int s, const ToleranceConfig& tol) {
  check_square_matrix(a, "construct_witness_selfadjoint");
  tol.validate();
  if (!(s > r && r >= 0))
    throw BadExponents("construct_witness_selfadjoint: need s > r >= 0");
  if (a.rows() < 3)
    throw PreconditionViolated("construct_witness_selfadjoint: dimension >= 3");
  const double nrm = std::max(1.0, a.norm());
  if ((a - a.adjoint()).norm() > 1e-10 * nrm)
    throw PreconditionViolated("construct_witness_selfadjoint: not self-adjoint");
  const int n = int(a.rows());

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
  if (es.info() != Eigen::Success)
    throw CanonicalFormNotReached("selfadjoint: eigensolver failed");
  // order by descending modulus so the nonzero eigenvalues lead
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(j));
  });
  ComplexMatrix q(n, n);
  Eigen::VectorXd lam(n);
  for (int i = 0; i < n; ++i) {
    q.col(i) = es.eigenvectors().col(order[i]);
    lam(i) = es.eigenvalues()(order[i]);
  }
  const double zero_thr = tol.zero * std::max(1.0, std::abs(lam(0)));
  int rk = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(lam(i)) > zero_thr) ++rk;
  if (rk <= 1)
    throw PreconditionViolated(
        "construct_witness_selfadjoint: rank(A) >= 2 required");

  WitnessReport rep;
  if (rk >= 3) {
    // diagonal sandwich in the eigenbasis; works for every s > r >= 0
    ComplexMatrix d3 = diag_scan_witness(Complex(lam(0), 0), Complex(lam(1), 0),
                                         Complex(lam(2), 0), r, s, tol);
    ComplexMatrix b = q * embed3(d3.real().cast<Complex>(), n) * q.adjoint();
    rep = make_report(a, ComplexMatrix((b + b.adjoint()) / 2.0), r, s,
                      "sa-diag", tol);
  } else if (r > 0) {
    // [d] (+) B1 on the eigenbasis; B1 pairs the second nonzero eigenvalue
    // with a kernel direction and yields one positive, one negative value
    ComplexMatrix b1(2, 2);
    b1 << 3, 1, 1, 3;
    // eigenvalues of the fixed 2x2 product block
    ComplexMatrix p2 = two_slot_product(
        (ComplexMatrix(2, 2) << 1, 0, 0, 0).finished(), b1, r, s);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> e2(p2);
    const double mu = e2.eigenvalues()(1), nu = e2.eigenvalues()(0);
    const double av = lam(0), bv = lam(1);
    for (int d = 1; d <= 64; ++d) {
      Complex v1 = 2.0 * av * std::pow(double(d), r + s);
      if (three_distinct_nonzero(v1, bv * mu, bv * nu, tol)) {
        ComplexMatrix bm = ComplexMatrix::Zero(n, n);
        bm(0, 0) = double(d);
        bm.block(1, 1, 2, 2) = b1;
        ComplexMatrix b = q * bm * q.adjoint();
        rep = make_report(a, ComplexMatrix((b + b.adjoint()) / 2.0), r, s,
                          "sa-rank2", tol);
        break;
      }
    }
    if (rep.witness.size() == 0)
      throw CanonicalFormNotReached("sa-rank2: no separating d found");
  } else {
    // r = 0 rank 2: half-projection coupling with the kernel
    const double a1 = lam(0), a2 = lam(1);
    const double lo = a2 * (0.5 - 1.0 / std::sqrt(2.0));
    const double hi = a2 * (0.5 + 1.0 / std::sqrt(2.0));
    for (int b0 = 1; b0 <= 64; ++b0) {
      Complex v1 = 2.0 * a1 * std::pow(double(b0), s);
      if (three_distinct_nonzero(v1, Complex(lo, 0), Complex(hi, 0), tol)) {
        ComplexMatrix bm = ComplexMatrix::Zero(n, n);
        bm(0, 0) = double(b0);
        bm(1, 1) = bm(1, 2) = bm(2, 1) = bm(2, 2) = 0.5;
        ComplexMatrix b = q * bm * q.adjoint();
        rep = make_report(a, ComplexMatrix((b + b.adjoint()) / 2.0), r, s,
                          "sa-rank2-r0", tol);
        break;
      }
    }
    if (rep.witness.size() == 0)
      throw CanonicalFormNotReached("sa-rank2-r0: no separating b found");
  }

  if (!report_is_valid(rep, tol))
    throw CanonicalFormNotReached(
        "construct_witness_selfadjoint: verification failed (" +
        rep.construction + ")");
  return rep;
}

std::optional<WitnessReport> search_witness(const ComplexMatrix& a, int r,
                                            int s, int budget,
                                            std::uint64_t seed,
                                            const ToleranceConfig& tol,
                                            bool self_adjoint) {
  check_square_matrix(a, "search_witness");
  for (int trial = 0; trial < budget; ++trial) {
    TrialRng rng(seed, std::uint64_t(trial));
    const int n = int(a.rows());
    ComplexMatrix b;
    int kind = trial % 3;
    if (kind == 0)
      b = rng.low_rank_matrix(n, 3);
    else if (kind == 1)
      b = rng.low_rank_matrix(n, std::min(3, 1 + trial % 3));
    else {
      b = rng.matrix(n);  // full rank, then crush to rank 3
      Eigen::JacobiSVD<ComplexMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::VectorXd sv = svd.singularValues();
      for (int i = 3; i < n; ++i) sv(i) = 0;
      b = svd.matrixU() * sv.cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
    }
    if (self_adjoint) b = (b + b.adjoint()) / 2.0;
    WitnessReport rep = make_report(a, b, r, s, "search", tol);
    if (report_is_valid(rep, tol)) return rep;
  }
  return std::nullopt;
}

ClassifyResult classify_rank_one(const ComplexMatrix& a, int r, int s,
                                 int budget, std::uint64_t seed,
                                 const ToleranceConfig& tol) {
  check_square_matrix(a, "classify_rank_one");
  tol.validate();
  if (!(s > r && r >= 0) || (r == 0 && s == 0))
    throw BadExponents("classify_rank_one: need s > r >= 0");
  if (a.rows() < 3)
    throw DimensionMismatch("classify_rank_one: dimension >= 3 required");
  const double nrm = a.norm();
  if (nrm == 0) throw DegenerateInput("classify_rank_one: zero matrix");

  const int rk = rank(a, tol);
  const bool square_zero = (a * a).norm() <= tol.zero * nrm * nrm;

  if (rk == 1) {
    // witness-free by the characterization; assert with a fuzz pass
    FuzzReport fz = rank_one_fuzz_negative(a, r, s, budget, seed, tol);
    if (!fz.pass)
      return {RankVerdict::Inconclusive,
              WitnessReport{*fz.offending_b, ComplexMatrix{},
                            *fz.offending_spectrum, fz.max_distinct_nonzero,
                            "fuzz-counterexample"},
              fz.trials};
    return {RankVerdict::RankOne, std::nullopt, fz.trials};
  }

  if (r == 0 && rk == 2 && square_zero) {
    FuzzReport fz = rank_one_fuzz_negative(a, r, s, budget, seed, tol);
    if (!fz.pass)
      return {RankVerdict::Inconclusive,
              WitnessReport{*fz.offending_b, ComplexMatrix{},
                            *fz.offending_spectrum, fz.max_distinct_nonzero,
                            "fuzz-counterexample"},
              fz.trials};
    return {RankVerdict::SquareZeroRank2, std::nullopt, fz.trials};
  }

  if (r == 0 && square_zero) {
    // square-zero with rank >= 3: the explicit block witness applies
    const int n = int(a.rows());
    Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullV);
    ComplexMatrix p(n, n);
    for (int i = 0; i < 3; ++i) {
      p.col(i) = svd.matrixV().col(i);
      p.col(3 + i) = a * svd.matrixV().col(i);
    }
    if (n > 6) p.rightCols(n - 6) = orth_complement(p.leftCols(6), 6);
    Eigen::FullPivLU<ComplexMatrix> lu(p);
    if (lu.isInvertible()) {
      ComplexMatrix m6 = ComplexMatrix::Zero(6, 6);
      m6(0, 0) = 1, m6(1, 1) = 2, m6(2, 2) = 3;
      m6(0, 3) = 1, m6(1, 4) = 2, m6(2, 5) = 3;
      try {
        ComplexMatrix b6 = principal_root(m6, s, tol);
        ComplexMatrix b = ComplexMatrix::Zero(n, n);
        b.topLeftCorner(6, 6) = b6;
        b = p * b * p.inverse();
        WitnessReport rep = make_report(a, b, r, s, "squarezero3", tol);
        if (report_is_valid(rep, tol))
          return {RankVerdict::NotRankOne, rep, 0};
      } catch (const CanonicalFormNotReached&) {
      }
    }
    auto found = search_witness(a, r, s, budget, seed, tol);
    if (found) return {RankVerdict::NotRankOne, *found, 0};
    return {RankVerdict::Inconclusive, std::nullopt, 0};
  }

  try {
    WitnessReport rep = construct_witness(a, r, s, tol);
    return {RankVerdict::NotRankOne, rep, 0};
  } catch (const CanonicalFormNotReached&) {
  } catch (const PreconditionViolated&) {
  }
  auto found = search_witness(a, r, s, budget, seed, tol);
  if (found) return {RankVerdict::NotRankOne, *found, 0};
  return {RankVerdict::Inconclusive, std::nullopt, 0};
}

FuzzReport rank_one_fuzz_negative(const ComplexMatrix& a, int r, int s,
                                  int trials, std::uint64_t seed,
                                  const ToleranceConfig& tol) {
  check_square_matrix(a, "rank_one_fuzz_negative");
  FuzzReport out;
  out.trials = trials;
  const int n = int(a.rows());
  for (int trial = 0; trial < trials; ++trial) {
    TrialRng rng(seed, std::uint64_t(trial));
    ComplexMatrix b;
    switch (trial % 4) {
      case 0: b = rng.matrix(n); break;                       // full rank
      case 1: b = rng.low_rank_matrix(n, 3); break;           // rank <= 3
      case 2: b = rng.low_rank_matrix(n, 1 + trial % 3); break;
      default: {                                              // proof-shaped
        ComplexVector d = ComplexVector::Zero(n);
        d(0) = 1;
        if (n > 1) d(1) = 1.0 + rng.uniform() * 3.0;
        if (n > 2) d(2) = 1.0 + rng.uniform() * 5.0;
        b = ComplexMatrix(d.asDiagonal());
        break;
      }
    }
    ComplexMatrix prod = two_slot_product(a, b, r, s);
    Spectrum sp = spectrum(prod, tol);
    int count = sp.distinct_nonzero_count(tol);
    if (count > 2) {
      // defective eigenvalues of the product can split under roundoff by
      // far more than the working radius; a genuine counterexample keeps
      // three well-separated nonzero values under coarse clustering too
      ToleranceConfig coarse = tol;
      coarse.zero = std::max(tol.zero, 1e-5);
      coarse.distinct = std::max(tol.distinct, 1e-4);
      Spectrum confirm = spectrum(prod, coarse);
      count = confirm.distinct_nonzero_count(coarse);
      if (count > 2) sp = confirm;
    }
    if (count > out.max_distinct_nonzero) out.max_distinct_nonzero = count;
    if (count > 2 && out.pass) {
      out.pass = false;
      out.offending_b = b;
      out.offending_spectrum = sp;
    }
  }
  return out;
}

}  // namespace jspec

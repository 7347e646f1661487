#include "jspec/preserver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "jspec/idempotent.hpp"
#include "jspec/jordan.hpp"
#include "jspec/rng.hpp"

namespace jspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kModelResidualLimit = 1e-6;
constexpr double kMaxCondition = 1e6;

Complex nearest_root_of_unity(const Complex& z, int m, double* distance) {
  Complex best(1, 0);
  double best_d = std::abs(z - best);
  for (int k = 1; k < m; ++k) {
    Complex root = std::exp(Complex(0, 2.0 * kPi * k / m));
    double d = std::abs(z - root);
    if (d < best_d) {
      best_d = d;
      best = root;
    }
  }
  if (distance) *distance = best_d;
  return best;
}

double condition_number(const ComplexMatrix& t) {
  Eigen::JacobiSVD<ComplexMatrix> svd(t);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

// unit Frobenius norm, first entry of modulus > 1e-8 rotated positive real
ComplexMatrix normalize_transform(const ComplexMatrix& t) {
  ComplexMatrix out = t / t.norm();
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      if (std::abs(out(i, j)) > 1e-8) {
        out *= std::conj(out(i, j)) / std::abs(out(i, j));
        return out;
      }
  return out;
}

// dominant column direction of a (near) rank-one matrix, unit norm
ComplexVector rank1_column(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU);
  return svd.matrixU().col(0);
}

double spectra_distance(const Spectrum& a, const Spectrum& b) {
  double worst = 0;
  for (const auto& va : a.values) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& vb : b.values) best = std::min(best, std::abs(va - vb));
    worst = std::max(worst, best);
  }
  for (const auto& vb : b.values) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& va : a.values) best = std::min(best, std::abs(va - vb));
    worst = std::max(worst, best);
  }
  return worst;
}

// column-major vectorization used in the Sylvester null-space step
ComplexVector vec_cm(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

// row-major vectorization (x11, x12, x21, x22) used by the 2x2 frame
ComplexVector vec_rm(const ComplexMatrix& m) {
  const int n = int(m.rows());
  ComplexVector v(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) v(a * n + b) = m(a, b);
  return v;
}

ComplexMatrix unvec_rm(const ComplexVector& v, int n) {
  ComplexMatrix m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = v(a * n + b);
  return m;
}

ComplexMatrix model_image(const PreserverModel& model, const ComplexMatrix& x,
                          const ComplexMatrix& t_inv) {
  const ComplexMatrix& arg = model.transposed ? x.transpose() : x;
  if (model.unitary) return model.lambda * model.t * arg * model.t.adjoint();
  return model.lambda * model.t * arg * t_inv;
}

}  // namespace

ComplexMatrix LinearMapTable::apply(const ComplexMatrix& x) const {
  check_square_matrix(x, "LinearMapTable::apply");
  if (int(x.rows()) != n)
    throw DimensionMismatch("LinearMapTable::apply: dimension mismatch");
  if (int(images.size()) != n * n)
    throw DimensionMismatch("LinearMapTable: incomplete image table");
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out += x(a, b) * images[a * n + b];
  return out;
}

BlackBoxMap LinearMapTable::as_black_box() const {
  LinearMapTable copy = *this;
  return BlackBoxMap{[copy](const ComplexMatrix& x) { return copy.apply(x); },
                     n};
}

BlackBoxMap make_similarity_map(const Complex& lambda, const ComplexMatrix& t,
                                bool transposed) {
  check_square_matrix(t, "make_similarity_map");
  Eigen::FullPivLU<ComplexMatrix> lu(t);
  if (!lu.isInvertible())
    throw DegenerateInput("make_similarity_map: T must be invertible");
  ComplexMatrix t_inv = lu.inverse();
  ComplexMatrix tc = t;
  return BlackBoxMap{[lambda, tc, t_inv, transposed](const ComplexMatrix& x) {
                       return ComplexMatrix(
                           lambda * tc *
                           (transposed ? x.transpose() : x).eval() * t_inv);
                     },
                     int(t.rows())};
}

BlackBoxMap make_unitary_map(double xi, const ComplexMatrix& u,
                             bool transposed) {
  check_square_matrix(u, "make_unitary_map");
  if ((u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm() >
      1e-8)
    throw DegenerateInput("make_unitary_map: U must be unitary");
  ComplexMatrix uc = u;
  return BlackBoxMap{[xi, uc, transposed](const ComplexMatrix& x) {
                       return ComplexMatrix(
                           xi * uc * (transposed ? x.transpose() : x).eval() *
                           uc.adjoint());
                     },
                     int(u.rows())};
}

double projective_distance(const ComplexMatrix& t1, const ComplexMatrix& t2) {
  ComplexMatrix a = t1 / t1.norm(), b = t2 / t2.norm();
  double overlap = std::abs((a.conjugate().cwiseProduct(b)).sum());
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap));
}

HypothesisReport verify_hypothesis(const BlackBoxMap& phi, int r, int s,
                                   int trials, std::uint64_t seed,
                                   const ToleranceConfig& tol) {
  tol.validate();
  if (!(s > r && r >= 0))
    throw BadExponents("verify_hypothesis: need s > r >= 0");
  const int n = phi.n;
  HypothesisReport report;
  report.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    TrialRng rng(seed, std::uint64_t(trial));
    ComplexMatrix a, b;
    switch (trial % 5) {
      case 0:
        a = rng.low_rank_matrix(n, 1);
        b = rng.matrix(n);
        break;
      case 1:
        a = rng.matrix(n);
        b = rng.low_rank_matrix(n, 1);
        break;
      case 2:
        a = ComplexMatrix::Zero(n, n);
        b = rng.matrix(n);
        break;
      case 3:
        a = rng.matrix(n);
        b = ComplexMatrix::Zero(n, n);
        break;
      default:
        a = rng.low_rank_matrix(n, 1);
        b = rng.low_rank_matrix(n, 1);
        break;
    }
    Spectrum source = spectrum(two_slot_product(a, b, r, s), tol);
    Spectrum image =
        spectrum(two_slot_product(phi.apply(a), phi.apply(b), r, s), tol);
    if (spectra_equal(source, image, tol)) {
      ++report.passes;
    } else {
      report.max_mismatch =
          std::max(report.max_mismatch, spectra_distance(source, image));
      if (!report.counterexample_a) {
        report.counterexample_a = a;
        report.counterexample_b = b;
      }
    }
  }
  return report;
}

PreserverModel recover_similarity(const LinearMapTable& psi, int m,
                                  const ToleranceConfig& tol) {
  tol.validate();
  const int n = psi.n;
  if (n < 1 || n > kMaxDimension)
    throw DimensionMismatch("recover_similarity: dimension out of range");
  if (int(psi.images.size()) != n * n)
    throw DimensionMismatch("recover_similarity: incomplete table");
  if (m < 2) throw BadExponents("recover_similarity: need m >= 2");

  auto e = [n](int a, int b) {
    ComplexMatrix x = ComplexMatrix::Zero(n, n);
    x(a, b) = 1;
    return x;
  };

  double snap_dist = 0;
  Complex lambda_raw = psi.images[0].trace();
  Complex lambda = nearest_root_of_unity(lambda_raw, m, &snap_dist);
  if (snap_dist > 1e-6)
    throw AmbiguousForm("recover_similarity: trace probe off the unit roots");
  for (int i = 0; i < n; ++i)
    if (std::abs(psi.images[i * n + i].trace() - lambda) > 1e-6)
      throw FrameInconsistent(
          "recover_similarity: scalar varies across idempotent probes");

  auto apply_prime = [&](const ComplexMatrix& x) {
    return ComplexMatrix(psi.apply(x) / lambda);
  };

  // automorphism or anti-automorphism?
  TrialRng rng(0x5ce4d00f19b72a3dULL);
  double res_auto = 0, res_anti = 0;
  for (int i = 0; i < 3; ++i) {
    ComplexMatrix x = rng.matrix(n), y = rng.matrix(n);
    ComplexMatrix pxy = apply_prime(x * y);
    ComplexMatrix px = apply_prime(x), py = apply_prime(y);
    double scale = std::max(1.0, px.norm() * py.norm());
    res_auto = std::max(res_auto, (pxy - px * py).norm() / scale);
    res_anti = std::max(res_anti, (pxy - py * px).norm() / scale);
  }
  bool transposed;
  if (res_auto <= 1e-6)
    transposed = false;
  else if (res_anti <= 1e-6)
    transposed = true;
  else
    throw AmbiguousForm(
        "recover_similarity: neither multiplicativity test passed");

  auto apply_inner = [&](const ComplexMatrix& x) {
    return transposed ? apply_prime(x.transpose()) : apply_prime(x);
  };

  // T X = Psi''(X) T stacked over the standard basis; vec is column-major
  ComplexMatrix stack(n * n * n * n, n * n);
  ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  int row = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      ComplexMatrix x = e(a, b);
      ComplexMatrix w = apply_inner(x);
      stack.block(row, 0, n * n, n * n) =
          Eigen::kroneckerProduct(x.transpose(), eye) -
          Eigen::kroneckerProduct(eye, w);
      row += n * n;
    }
  Eigen::BDCSVD<ComplexMatrix> svd(stack, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double top = std::max(1.0, sv(0));
  if (sv(n * n - 1) > 1e-8 * top)
    throw NullSpaceDimension("recover_similarity: no null direction found");
  if (n * n >= 2 && sv(n * n - 2) <= 1e-6 * top)
    throw NullSpaceDimension(
        "recover_similarity: null space is not one-dimensional");
  ComplexMatrix t =
      Eigen::Map<const ComplexMatrix>(svd.matrixV().col(n * n - 1).data(), n, n);
  if (condition_number(t) >= kMaxCondition)
    throw ValidationFailed("recover_similarity: transform badly conditioned");
  t = normalize_transform(t);

  ComplexMatrix t_inv = t.inverse();
  double residual = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      ComplexMatrix x = e(a, b);
      ComplexMatrix predicted =
          lambda * t * (transposed ? x.transpose() : x).eval() * t_inv;
      residual = std::max(residual, (psi.apply(x) - predicted).norm());
    }
  if (residual > kModelResidualLimit)
    throw ValidationFailed("recover_similarity: validation residual " +
                           std::to_string(residual));

  PreserverModel model;
  model.lambda = lambda;
  model.t = t;
  model.transposed = transposed;
  model.m = m;
  model.residual = residual;
  return model;
}

Recovery2x2 recover_2x2(const BlackBoxMap& phi, int r, int s,
                        std::uint64_t seed, const ToleranceConfig& tol) {
  tol.validate();
  if (phi.n != 2) throw DimensionMismatch("recover_2x2: dimension must be 2");
  if (!(s > r && r >= 0)) throw BadExponents("recover_2x2: need s > r >= 0");
  const int m = r + s + 1;

  // four independent rank-one orthogonal projections
  std::vector<ComplexMatrix> frame;
  {
    ComplexVector e1 = ComplexVector::Unit(2, 0), e2 = ComplexVector::Unit(2, 1);
    ComplexVector w = (e1 + e2) / std::sqrt(2.0);
    ComplexVector v = (e1 + Complex(0, 1) * e2) / std::sqrt(2.0);
    for (const auto& u : {e1, e2, w, v})
      frame.push_back(u * u.adjoint());
  }

  ComplexMatrix big_r(4, 4), big_r_hat(4, 4);
  for (int j = 0; j < 4; ++j) {
    // the projections are idempotent, so A^{m-1} = A
    big_r.row(j) = vec_rm(ComplexMatrix(2.0 * frame[j].transpose())).transpose();
    ComplexMatrix image_pow = matrix_power(phi.apply(frame[j]), m - 1);
    big_r_hat.row(j) =
        vec_rm(ComplexMatrix(2.0 * image_pow.transpose())).transpose();
  }
  Eigen::FullPivLU<ComplexMatrix> lu(big_r_hat);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw SingularFrame("recover_2x2: image frame is singular");
  ComplexMatrix l = lu.solve(big_r);

  // four generic, linearly independent probe matrices from S
  std::vector<ComplexMatrix> probes;
  ComplexMatrix probe_stack(4, 4);
  for (int trial = 0; trial < 4000 && int(probes.size()) < 4; ++trial) {
    TrialRng rng(seed, std::uint64_t(trial));
    ComplexMatrix b = rng.matrix(2);
    bool generic = true;
    for (const auto& a : frame) {
      ComplexMatrix prod = two_slot_product(b, a, r, s);
      Complex disc = prod.trace() * prod.trace() - 4.0 * prod.determinant();
      double scale = std::max(1.0, prod.norm() * prod.norm());
      if (std::abs(disc) <= 1e-6 * scale) {
        generic = false;
        break;
      }
    }
    if (!generic) continue;
    probe_stack.row(int(probes.size())) = vec_rm(b).transpose();
    if (probes.size() == 3) {
      Eigen::FullPivLU<ComplexMatrix> ind(probe_stack);
      ind.setThreshold(1e-8);
      if (!ind.isInvertible()) continue;
    }
    probes.push_back(b);
  }
  if (probes.size() < 4)
    throw SingularFrame("recover_2x2: could not assemble a generic probe set");

  // the trace identity must reproduce the map on the generic probes
  for (const auto& b : probes) {
    ComplexMatrix predicted = unvec_rm(l * vec_rm(b), 2);
    ComplexMatrix actual = phi.apply(b);
    if ((predicted - actual).norm() > 1e-6 * std::max(1.0, actual.norm()))
      throw ValidationFailed("recover_2x2: trace identity mismatch on probe");
  }

  Recovery2x2 out;
  out.table.n = 2;
  for (int idx = 0; idx < 4; ++idx)
    out.table.images.push_back(unvec_rm(l.col(idx), 2));
  out.model = recover_similarity(out.table, m, tol);

  // the linear table must agree with the black box on fresh probes
  for (int trial = 0; trial < 20; ++trial) {
    TrialRng rng(seed ^ 0x77aa1f5ce2ULL, std::uint64_t(trial));
    ComplexMatrix x = rng.matrix(2);
    ComplexMatrix diff = out.table.apply(x) - phi.apply(x);
    if (diff.norm() > 1e-7 * std::max(1.0, x.norm()))
      throw ValidationFailed("recover_2x2: table disagrees with the map");
  }
  return out;
}

namespace {

struct BranchOutcome {
  bool ok = false;
  bool frame_failed = false;
  PreserverModel model;
};

BranchOutcome try_similarity_branch(const BlackBoxMap& phi, const Complex& lambda,
                                    int m, bool transposed, std::uint64_t seed,
                                    const ToleranceConfig& tol) {
  const int n = phi.n;
  BranchOutcome out;

  auto probe_image = [&](const ComplexMatrix& x) {
    ComplexMatrix arg = transposed ? x.transpose() : x;
    return ComplexMatrix(phi.apply(arg) / lambda);
  };
  auto e = [n](int i) { return ComplexVector::Unit(n, i); };
  auto basis_probe = [&](int i, int j) {
    // (e_i + e_j) (x) e_i, equal to E_ii + E_ji
    return ComplexMatrix((e(i) + e(j)) * e(i).transpose());
  };

  std::vector<ComplexVector> ys(n);
  for (int i = 0; i < n; ++i)
    ys[i] = rank1_column(probe_image(ComplexMatrix(e(i) * e(i).transpose())));

  std::vector<Complex> c(n);
  c[0] = 1;
  for (int j = 1; j < n; ++j) {
    ComplexVector z = rank1_column(probe_image(basis_probe(0, j)));
    ComplexMatrix span(n, 2);
    span.col(0) = ys[0];
    span.col(1) = ys[j];
    ComplexVector ab = span.colPivHouseholderQr().solve(z);
    if ((span * ab - z).norm() > 1e-6 || std::abs(ab(0)) < 1e-8) {
      out.frame_failed = true;
      return out;
    }
    c[j] = ab(1) / ab(0);
  }
  // cross-pair consistency of the relative scalars
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      if (i == j) continue;
      ComplexVector z = rank1_column(probe_image(basis_probe(i, j)));
      ComplexMatrix span(n, 2);
      span.col(0) = ys[i];
      span.col(1) = ys[j];
      ComplexVector ab = span.colPivHouseholderQr().solve(z);
      if ((span * ab - z).norm() > 1e-6 || std::abs(ab(0)) < 1e-8) {
        out.frame_failed = true;
        return out;
      }
      Complex ratio = ab(1) / ab(0);
      if (std::abs(ratio - c[j] / c[i]) >
          1e-6 * std::max(1.0, std::abs(ratio))) {
        out.frame_failed = true;
        return out;
      }
    }

  ComplexMatrix t(n, n);
  for (int i = 0; i < n; ++i) t.col(i) = c[i] * ys[i];
  if (condition_number(t) >= kMaxCondition) {
    out.frame_failed = true;
    return out;
  }
  t = normalize_transform(t);
  ComplexMatrix t_inv = t.inverse();

  PreserverModel model;
  model.lambda = lambda;
  model.t = t;
  model.transposed = transposed;
  model.m = m;

  double residual = 0;
  auto check = [&](const ComplexMatrix& x) {
    ComplexMatrix predicted = model_image(model, x, t_inv);
    residual = std::max(
        residual, (phi.apply(x) - predicted).norm() / std::max(1.0, x.norm()));
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) check(basis_probe(i, j));
  for (int trial = 0; trial < 20; ++trial) {
    TrialRng rng(seed ^ 0x3e1f00d5a9ULL, std::uint64_t(trial));
    check(rng.matrix(n));
  }
  model.residual = residual;
  out.model = model;
  out.ok = residual <= kModelResidualLimit;
  return out;
}

}  // namespace

PreserverModel recover_full(const BlackBoxMap& phi, int r, int s,
                            std::uint64_t seed, const ToleranceConfig& tol) {
  tol.validate();
  if (!(s > r && r >= 0)) throw BadExponents("recover_full: need s > r >= 0");
  const int n = phi.n;
  if (n < 1 || n > kMaxDimension)
    throw DimensionMismatch("recover_full: dimension out of range");
  const int m = r + s + 1;

  if (n == 1) {
    Complex q = phi.apply(ComplexMatrix::Ones(1, 1))(0, 0);
    double snap_dist = 0;
    Complex lambda = nearest_root_of_unity(q, m, &snap_dist);
    if (snap_dist > 1e-6)
      throw NotRankOnePreserving("recover_full: scalar image off unit roots");
    PreserverModel model;
    model.lambda = lambda;
    model.t = ComplexMatrix::Ones(1, 1);
    model.m = m;
    model.residual = snap_dist;
    return model;
  }

  HypothesisReport hyp = verify_hypothesis(phi, r, s, 40, seed ^ 0x9f1cULL, tol);
  if (hyp.passes != hyp.trials)
    throw ValidationFailed("recover_full: spectral hypothesis fails on probes");

  // Every rank-one idempotent must map to mu * (rank-one idempotent) with
  // mu an mth root of unity, and mu must be globally constant.
  auto e = [n](int i) { return ComplexVector::Unit(n, i); };
  std::vector<ComplexMatrix> probes;
  for (int i = 0; i < n; ++i)
    probes.push_back(e(i) * e(i).transpose());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) probes.push_back((e(i) + e(j)) * e(i).transpose());

  Complex lambda;
  bool have_lambda = false;
  for (const auto& p : probes) {
    ComplexMatrix img = phi.apply(p);
    Complex mu = img.trace();
    double snap_dist = 0;
    nearest_root_of_unity(mu, m, &snap_dist);
    if (snap_dist > 1e-6)
      throw NotRankOnePreserving(
          "recover_full: idempotent image trace is not an mth root of unity");
    if (rank(img, tol) != 1 ||
        (img * img - mu * img).norm() > 1e-6 * std::max(1.0, img.norm()))
      throw NotRankOnePreserving(
          "recover_full: idempotent image is not mu times an idempotent");
    if (!have_lambda) {
      lambda = nearest_root_of_unity(mu, m, nullptr);
      have_lambda = true;
    } else if (std::abs(mu - lambda) > 1e-6) {
      throw FrameInconsistent(
          "recover_full: scalar varies across idempotent probes");
    }
  }

  BranchOutcome plain = try_similarity_branch(phi, lambda, m, false, seed, tol);
  BranchOutcome trans = try_similarity_branch(phi, lambda, m, true, seed, tol);
  if (plain.ok && trans.ok)
    return plain.model.residual <= trans.model.residual ? plain.model
                                                        : trans.model;
  if (plain.ok) return plain.model;
  if (trans.ok) return trans.model;
  if (plain.frame_failed && trans.frame_failed)
    throw FrameInconsistent(
        "recover_full: projective frame inconsistent in both branches");
  double best = std::numeric_limits<double>::infinity();
  if (!plain.frame_failed) best = std::min(best, plain.model.residual);
  if (!trans.frame_failed) best = std::min(best, trans.model.residual);
  throw ValidationFailed("recover_full: best branch residual " +
                         std::to_string(best));
}

PreserverModel recover_selfadjoint(const BlackBoxMap& phi, int r, int s,
                                   std::uint64_t seed,
                                   const ToleranceConfig& tol) {
  tol.validate();
  if (!(s > r && r >= 0))
    throw BadExponents("recover_selfadjoint: need s > r >= 0");
  const int n = phi.n;
  if (n < 1 || n > kMaxDimension)
    throw DimensionMismatch("recover_selfadjoint: dimension out of range");
  const int m = r + s + 1;

  // probe directions: e_i, (e_1+e_j)/sqrt2, (e_1+i e_j)/sqrt2
  auto e = [n](int i) { return ComplexVector::Unit(n, i); };
  std::vector<ComplexVector> dirs;
  for (int i = 0; i < n; ++i) dirs.push_back(e(i));
  for (int j = 1; j < n; ++j)
    dirs.push_back(((e(0) + e(j)) / std::sqrt(2.0)).eval());
  for (int j = 1; j < n; ++j)
    dirs.push_back(((e(0) + Complex(0, 1) * e(j)) / std::sqrt(2.0)).eval());

  double xi = 0;
  std::vector<ComplexVector> images;
  for (const auto& x : dirs) {
    ComplexMatrix img = phi.apply(ComplexMatrix(x * x.adjoint()));
    if ((img - img.adjoint()).norm() > 1e-8 * std::max(1.0, img.norm()))
      throw NotSelfAdjointImage(
          "recover_selfadjoint: image of a projection is not self-adjoint");
    double mu = img.trace().real();
    double snapped = mu >= 0 ? 1.0 : -1.0;
    if (std::abs(mu - snapped) > 1e-6 || std::abs(img.trace().imag()) > 1e-6)
      throw NotRankOnePreserving(
          "recover_selfadjoint: projection image trace is not +-1");
    if (snapped < 0 && m % 2 == 1)
      throw NotRankOnePreserving(
          "recover_selfadjoint: xi = -1 impossible for odd product order");
    if (rank(img, tol) != 1 ||
        (img * img - snapped * img).norm() > 1e-6 * std::max(1.0, img.norm()))
      throw NotRankOnePreserving(
          "recover_selfadjoint: projection image is not xi times a projection");
    if (xi == 0)
      xi = snapped;
    else if (xi != snapped)
      throw FrameInconsistent(
          "recover_selfadjoint: xi varies across projection probes");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(snapped * img);
    images.push_back(es.eigenvectors().col(n - 1));
  }

  ComplexMatrix u(n, n);
  u.col(0) = images[0];
  for (int j = 1; j < n; ++j) {
    // y for (e_1+e_j)/sqrt2 fixes the relative phase of column j
    const ComplexVector& yw = images[n + (j - 1)];
    ComplexMatrix span(n, 2);
    span.col(0) = images[0];
    span.col(1) = images[j];
    ComplexVector ab = span.colPivHouseholderQr().solve(yw);
    if ((span * ab - yw).norm() > 1e-6 || std::abs(ab(0)) < 0.1 ||
        std::abs(ab(1)) < 0.1)
      throw FrameInconsistent(
          "recover_selfadjoint: superposition probe outside the frame span");
    u.col(j) = (ab(1) / ab(0)) * images[j];
  }
  if ((u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm() > 1e-6)
    throw FrameInconsistent("recover_selfadjoint: frame is not orthonormal");
  // polar correction to machine-precision unitarity
  Eigen::JacobiSVD<ComplexMatrix> pol(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  u = pol.matrixU() * pol.matrixV().adjoint();
  u = normalize_transform(u) * std::sqrt(double(n));  // unit columns again

  PreserverModel best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (bool transposed : {false, true}) {
    PreserverModel model;
    model.lambda = xi;
    model.t = u;
    model.transposed = transposed;
    model.unitary = true;
    model.m = m;
    double residual = 0;
    auto check = [&](const ComplexMatrix& x) {
      ComplexMatrix predicted = model_image(model, x, ComplexMatrix());
      residual = std::max(residual, (phi.apply(x) - predicted).norm() /
                                        std::max(1.0, x.norm()));
    };
    for (const auto& x : dirs) check(ComplexMatrix(x * x.adjoint()));
    for (int trial = 0; trial < 20; ++trial) {
      TrialRng rng(seed ^ 0x44c0ffeeULL, std::uint64_t(trial));
      check(rng.hermitian_matrix(n));
    }
    model.residual = residual;
    if (residual < best_residual) {
      best_residual = residual;
      best = model;
    }
  }
  if (best_residual > kModelResidualLimit)
    throw ValidationFailed("recover_selfadjoint: best branch residual " +
                           std::to_string(best_residual));
  return best;
}

}  // namespace jspec

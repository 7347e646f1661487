#include "jspec/idempotent.hpp"

#include <cmath>

#include "jspec/rng.hpp"

namespace jspec {

namespace {

Complex pair(const ComplexVector& x, const ComplexVector& f) {
  return (f.transpose() * x)(0);
}

// strict relative margin for the genericity predicates; small enough to be
// reachable by a delta-sized perturbation, large enough to survive roundoff
constexpr double kGenericMargin = 1e-6;

bool generic_margin_ok(const ComplexMatrix& a, const ComplexVector& u,
                       const ComplexVector& h) {
  const ComplexMatrix a2 = a * a;
  const Complex q = pair(a2 * u, h);
  const Complex l = pair(a * u, h);
  const double base = a2.norm() * u.norm() * h.norm();
  if (std::abs(q) <= kGenericMargin * base) return false;
  const double diff_scale =
      std::max({1e-300, std::abs(q), std::abs(l) * std::abs(l)});
  return std::abs(q - l * l) > kGenericMargin * diff_scale;
}

bool is_idempotent_matrix(const ComplexMatrix& m, const ToleranceConfig& tol) {
  const double nrm = m.norm();
  if (nrm <= tol.zero) return false;
  return (m * m - m).norm() <= 1e-8 * std::max(1.0, nrm * nrm) &&
         rank(m, tol) == 1;
}

}  // namespace

RankOneFunctional::RankOneFunctional(ComplexVector x, ComplexVector f)
    : x_(std::move(x)), f_(std::move(f)) {
  if (x_.size() != f_.size())
    throw DimensionMismatch("RankOneFunctional: x and f dimensions differ");
  if (x_.size() < 1 || x_.size() > kMaxDimension)
    throw DimensionMismatch("RankOneFunctional: dimension out of range [1,64]");
  if (!x_.allFinite() || !f_.allFinite())
    throw DegenerateInput("RankOneFunctional: non-finite entries");
  if (x_.norm() == 0 || f_.norm() == 0)
    throw DegenerateInput("RankOneFunctional: zero vector");
  pairing_ = pair(x_, f_);
}

RankOneFunctional RankOneFunctional::normalized() const {
  if (std::abs(pairing_) < 1e-12)
    throw DegenerateInput("RankOneFunctional: pairing too small to normalize");
  return RankOneFunctional(x_, f_ / pairing_);
}

EigClassReport jordan_eig_class(const ComplexMatrix& a,
                                const RankOneFunctional& p,
                                const ToleranceConfig& tol) {
  check_square_matrix(a, "jordan_eig_class");
  tol.validate();
  if (a.rows() != p.x().size())
    throw DimensionMismatch("jordan_eig_class: dimension mismatch");
  if (!p.is_idempotent())
    throw NotIdempotent("jordan_eig_class: P must be idempotent");

  EigClassReport out;
  out.lambda = pair(a * p.x(), p.f());
  const ComplexMatrix a2 = a * a;
  out.quad = pair(a2 * p.x(), p.f());
  const Complex root = std::sqrt(out.quad);
  out.root_plus = out.lambda + root;
  out.root_minus = out.lambda - root;

  const double norms = p.x().norm() * p.f().norm();
  const double l_scale = std::max(1e-300, a.norm() * norms);
  const double q_scale = std::max(1e-300, a2.norm() * norms);
  const bool l_zero = std::abs(out.lambda) <= tol.zero * l_scale;
  const bool q_zero = std::abs(out.quad) <= tol.zero * q_scale;
  const double diff_scale = std::max(
      {1.0, std::abs(out.quad), std::abs(out.lambda) * std::abs(out.lambda)});
  const bool square_match =
      std::abs(out.quad - out.lambda * out.lambda) <= tol.distinct * diff_scale;

  if (!l_zero && q_zero)
    out.cls = JordanEigClass::RepeatedNonzero;
  else if (!q_zero && !square_match)
    out.cls = JordanEigClass::TwoDistinctNonzero;
  else
    out.cls = JordanEigClass::Other;
  return out;
}

bool is_generic_for(const ComplexMatrix& a, const RankOneFunctional& p,
                    const ToleranceConfig& tol) {
  check_square_matrix(a, "is_generic_for");
  tol.validate();
  if (a.rows() != p.x().size())
    throw DimensionMismatch("is_generic_for: dimension mismatch");
  return generic_margin_ok(a, p.x(), p.f());
}

RankOneFunctional perturb_to_generic(const std::vector<ComplexMatrix>& as,
                                     const RankOneFunctional& p, double delta,
                                     const ToleranceConfig& tol) {
  tol.validate();
  if (delta <= 0)
    throw std::invalid_argument("perturb_to_generic: delta must be positive");
  if (as.empty() || as.size() > 3)
    throw std::invalid_argument("perturb_to_generic: expects 1 to 3 operators");
  const int n = int(p.x().size());
  for (const auto& a : as) {
    check_square_matrix(a, "perturb_to_generic");
    if (a.rows() != n)
      throw DimensionMismatch("perturb_to_generic: dimension mismatch");
    if ((a * a).norm() <= tol.zero * std::max(1.0, a.norm() * a.norm()))
      throw PreconditionViolated("perturb_to_generic: operator with A^2 = 0");
  }
  if (!p.is_idempotent())
    throw NotIdempotent("perturb_to_generic: P must be idempotent");

  auto generic_for_all = [&](const RankOneFunctional& q) {
    for (const auto& a : as)
      if (!generic_margin_ok(a, q.x(), q.f())) return false;
    return true;
  };
  if (generic_for_all(p)) return p;

  // candidate perturbation directions: operator-driven vectors first, then a
  // fixed seeded batch; paired with a decreasing epsilon scan
  std::vector<std::pair<ComplexVector, ComplexVector>> dirs;
  for (const auto& a : as) {
    const ComplexMatrix a2 = a * a;
    dirs.emplace_back((a2 * p.x()).eval(), (a2.transpose() * p.f()).eval());
    dirs.emplace_back((a * p.x()).eval(), (a.transpose() * p.f()).eval());
  }
  TrialRng rng(0x7a90c1d44b23f06bULL);
  for (int i = 0; i < 48; ++i) dirs.emplace_back(rng.vector(n), rng.vector(n));

  const double xs = std::max(1e-12, p.x().norm());
  const double fs = std::max(1e-12, p.f().norm());
  for (double eps = delta / 2; eps > delta * 1e-9; eps /= 2) {
    for (const auto& [du, dh] : dirs) {
      if (du.norm() == 0 || dh.norm() == 0) continue;
      // scale directions so the matrix-level move stays ~eps
      ComplexVector u = p.x() + (eps / (4 * fs)) * du.normalized();
      ComplexVector h = p.f() + (eps / (4 * xs)) * dh.normalized();
      Complex pr = pair(u, h);
      if (std::abs(pr) < 1e-6) continue;
      RankOneFunctional q(u, h / pr);
      if (q.distance(p) >= delta) continue;
      if (generic_for_all(q)) return q;
    }
  }
  throw InsufficientGenericity(
      "perturb_to_generic: no generic idempotent within delta");
}

bool orthogonality_test(const RankOneFunctional& p, const RankOneFunctional& q,
                        OrthogonalityMode mode, int budget, std::uint64_t seed,
                        const ToleranceConfig& tol) {
  tol.validate();
  if (p.x().size() != q.x().size())
    throw DimensionMismatch("orthogonality_test: dimension mismatch");
  if (!p.is_idempotent() || !q.is_idempotent())
    throw NotIdempotent("orthogonality_test: P and Q must be idempotent");

  const ComplexMatrix pm = p.matrix(), qm = q.matrix();
  const ComplexMatrix nm = pm * qm + qm * pm;
  // PQ + QP is defective whenever it is nilpotent but nonzero, and computed
  // eigenvalues of a defective zero stray by about sqrt(eps * |N|); use a
  // square-root threshold so roundoff cannot masquerade as a violation
  Spectrum hyp = spectrum(nm, tol);
  const double hyp_limit = std::sqrt(tol.zero) * std::max(1.0, nm.norm());
  for (const auto& v : hyp.values)
    if (std::abs(v) > hyp_limit)
      throw HypothesisViolated(
          "orthogonality_test: sigma(PQ+QP) must equal {0}");

  const double cross = std::max(1.0, pm.norm() * qm.norm());
  const bool pq_zero = (pm * qm).norm() <= tol.zero * cross;
  const bool qp_zero = (qm * pm).norm() <= tol.zero * cross;
  if (mode == OrthogonalityMode::Direct) return pq_zero && qp_zero;

  auto is_witness = [&](const ComplexMatrix& rm) {
    return is_idempotent_matrix((pm * rm + rm * pm) / 2.0, tol) &&
           is_idempotent_matrix((qm * rm + rm * qm) / 2.0, tol);
  };

  // closed-form candidates from the non-orthogonal cases: PQ != 0 means
  // <u,f> != 0 (Q = u (x) h), so u (x) f/<u,f> is idempotent; dually for QP
  if (!pq_zero) {
    Complex c = (p.f().transpose() * q.x())(0);
    if (std::abs(c) > 1e-12 && is_witness(q.x() * (p.f() / c).transpose()))
      return false;
  }
  if (!qp_zero) {
    Complex c = (q.f().transpose() * p.x())(0);
    if (std::abs(c) > 1e-12 && is_witness(p.x() * (q.f() / c).transpose()))
      return false;
  }

  const int n = int(p.x().size());
  for (int trial = 0; trial < budget; ++trial) {
    TrialRng rng(seed, std::uint64_t(trial));
    ComplexVector v = rng.vector(n), g = rng.vector(n);
    Complex c = pair(v, g);
    if (std::abs(c) < 0.1) continue;
    if (is_witness(v * (g / c).transpose())) return false;
  }
  return true;
}

}  // namespace jspec

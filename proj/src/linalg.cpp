#include "jspec/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>

namespace jspec {

int Spectrum::distinct_nonzero_count(const ToleranceConfig& tol) const {
  int count = 0;
  for (const auto& v : values)
    if (std::abs(v) > tol.zero * scale) ++count;
  return count;
}

ClusteredEigenvalues clustered_eigenvalues(const ComplexMatrix& m,
                                           const ToleranceConfig& tol) {
  check_square_matrix(m, "clustered_eigenvalues");
  tol.validate();

  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NonConvergence("eigensolver failed to converge");

  std::vector<Complex> eigs(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + m.rows());
  double max_mod = 0;
  for (const auto& e : eigs) max_mod = std::max(max_mod, std::abs(e));
  const double scale = std::max(1.0, max_mod);

  // zero is always a candidate cluster center
  for (auto& e : eigs)
    if (std::abs(e) <= tol.zero * scale) e = Complex(0, 0);

  // greedy agglomeration: sort by modulus then angle so clustering is
  // deterministic, merge anything within the distinctness radius
  std::sort(eigs.begin(), eigs.end(), [](const Complex& a, const Complex& b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
  });

  ClusteredEigenvalues out;
  out.scale = scale;
  const double radius = tol.distinct * scale;
  for (const auto& e : eigs) {
    bool merged = false;
    for (size_t k = 0; k < out.representatives.size(); ++k) {
      if (std::abs(e - out.representatives[k]) <= radius) {
        // running mean keeps the representative centered; an exact zero
        // representative stays pinned at zero
        int& n = out.multiplicities[k];
        Complex& rep = out.representatives[k];
        if (rep != Complex(0, 0))
          rep = (rep * double(n) + e) / double(n + 1);
        ++n;
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.representatives.push_back(e);
      out.multiplicities.push_back(1);
    }
  }
  return out;
}

Spectrum spectrum(const ComplexMatrix& m, const ToleranceConfig& tol) {
  ClusteredEigenvalues c = clustered_eigenvalues(m, tol);
  return Spectrum{std::move(c.representatives), c.scale};
}

int rank(const ComplexMatrix& m, const ToleranceConfig& tol) {
  check_square_matrix(m, "rank");
  tol.validate();
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0) return 0;
  const double threshold = tol.rank * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++r;
  return r;
}

namespace {

// augmenting-path bipartite matching on the "within radius" graph
bool try_augment(int u, const std::vector<std::vector<int>>& adj,
                 std::vector<int>& match_of, std::vector<char>& visited) {
  for (int v : adj[u]) {
    if (visited[v]) continue;
    visited[v] = 1;
    if (match_of[v] < 0 || try_augment(match_of[v], adj, match_of, visited)) {
      match_of[v] = u;
      return true;
    }
  }
  return false;
}

}  // namespace

bool spectra_equal(const Spectrum& a, const Spectrum& b,
                   const ToleranceConfig& tol) {
  tol.validate();
  if (a.values.size() != b.values.size()) return false;
  const size_t n = a.values.size();
  if (n == 0) return true;
  const double radius = tol.match * std::max(a.scale, b.scale);

  std::vector<std::vector<int>> adj(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (std::abs(a.values[i] - b.values[j]) <= radius)
        adj[i].push_back(int(j));

  std::vector<int> match_of(n, -1);
  for (size_t i = 0; i < n; ++i) {
    std::vector<char> visited(n, 0);
    if (!try_augment(int(i), adj, match_of, visited)) return false;
  }
  return true;
}

ComplexMatrix outer(const ComplexVector& x, const ComplexVector& f) {
  if (x.size() != f.size())
    throw DimensionMismatch("outer: x and f must have the same dimension");
  if (x.norm() == 0 || f.norm() == 0)
    throw DegenerateInput("outer: zero vector");
  return x * f.transpose();
}

}  // namespace jspec

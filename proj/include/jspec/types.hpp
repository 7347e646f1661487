#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace jspec {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

constexpr int kMaxDimension = 64;

// Relative tolerance policy shared by every module.  All thresholds are
// relative to the scale of the quantity they gate.
struct ToleranceConfig {
  double zero = 1e-8;      // modulus below zero*scale collapses to 0
  double distinct = 1e-6;  // eigenvalues closer than distinct*scale merge
  double rank = 1e-9;      // singular values below rank*sigma_max are noise
  double match = 1e-7;     // spectra-equality matching radius

  void validate() const {
    if (zero <= 0 || distinct <= 0 || rank <= 0 || match <= 0)
      throw std::invalid_argument("ToleranceConfig: thresholds must be positive");
    if (distinct < match)
      throw std::invalid_argument("ToleranceConfig: distinct must be >= match");
  }
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DegenerateInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadExponents : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct PreconditionViolated : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct CanonicalFormNotReached : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotIdempotent : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct HypothesisViolated : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InsufficientGenericity : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_square_matrix(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw DimensionMismatch(std::string(what) + ": matrix must be square");
  if (m.rows() < 1 || m.rows() > kMaxDimension)
    throw DimensionMismatch(std::string(what) + ": dimension out of range [1,64]");
  if (!m.allFinite())
    throw DegenerateInput(std::string(what) + ": non-finite entries");
}

}  // namespace jspec

#include "jspec/jordan.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace jspec {

ProductSignature::ProductSignature(std::vector<int> seq) : seq_(std::move(seq)) {
  const int m = int(seq_.size());
  if (m < 2 || m > kMaxProductOrder)
    throw std::invalid_argument("signature: order must be in [2,32]");

  std::map<int, int> counts;
  for (int i : seq_) counts[i]++;
  k_ = int(counts.size());
  // every slot used means indices are exactly {1..k}
  for (int i = 1; i <= k_; ++i)
    if (!counts.count(i))
      throw std::invalid_argument("signature: slot indices must cover {1..k}");

  int unique_slot = 0;
  for (const auto& [idx, c] : counts)
    if (c == 1) {
      unique_slot = idx;
      break;
    }
  if (unique_slot == 0)
    throw std::invalid_argument(
        "signature: some slot index must appear exactly once");

  for (int q = 0; q < m; ++q)
    if (seq_[q] == unique_slot) {
      p_ = q + 1;
      break;
    }
  r_ = std::min(p_ - 1, m - p_);
  s_ = std::max(p_ - 1, m - p_);
}

ProductSignature ProductSignature::parse(const std::string& text) {
  std::vector<int> seq;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    int v;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("signature: bad index '" + tok + "'");
    }
    while (pos < tok.size() && std::isspace((unsigned char)tok[pos])) ++pos;
    if (pos != tok.size())
      throw std::invalid_argument("signature: bad index '" + tok + "'");
    seq.push_back(v);
  }
  return ProductSignature(std::move(seq));
}

std::string ProductSignature::to_string() const {
  std::string out;
  for (size_t i = 0; i < seq_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seq_[i]);
  }
  return out;
}

ComplexMatrix matrix_power(const ComplexMatrix& b, int p) {
  check_square_matrix(b, "matrix_power");
  if (p < 0 || p > kMaxProductOrder)
    throw std::invalid_argument("matrix_power: exponent out of range [0,32]");
  ComplexMatrix result = ComplexMatrix::Identity(b.rows(), b.cols());
  ComplexMatrix base = b;
  while (p > 0) {
    if (p & 1) result = result * base;
    p >>= 1;
    if (p) base = base * base;
  }
  return result;
}

ComplexMatrix general_product(const ProductSignature& sig,
                              const std::vector<ComplexMatrix>& ops) {
  if (int(ops.size()) != sig.slots())
    throw DimensionMismatch("general_product: expected one matrix per slot");
  const Eigen::Index n = ops[0].rows();
  for (const auto& op : ops) {
    check_square_matrix(op, "general_product");
    if (op.rows() != n)
      throw DimensionMismatch("general_product: operand dimensions differ");
  }
  ComplexMatrix fwd = ComplexMatrix::Identity(n, n);
  ComplexMatrix rev = ComplexMatrix::Identity(n, n);
  const auto& seq = sig.sequence();
  const int m = sig.order();
  for (int q = 0; q < m; ++q) {
    fwd = fwd * ops[seq[q] - 1];
    rev = rev * ops[seq[m - 1 - q] - 1];
  }
  return fwd + rev;
}

ComplexMatrix two_slot_product(const ComplexMatrix& a, const ComplexMatrix& b,
                               int r, int s) {
  check_square_matrix(a, "two_slot_product");
  check_square_matrix(b, "two_slot_product");
  if (a.rows() != b.rows())
    throw DimensionMismatch("two_slot_product: dimensions differ");
  if (r < 0 || s < r || (r == 0 && s == 0))
    throw BadExponents("two_slot_product: need 0 <= r <= s, (r,s) != (0,0)");
  const ComplexMatrix br = matrix_power(b, r);
  const ComplexMatrix bs = matrix_power(b, s);
  return br * a * bs + bs * a * br;
}

ComplexMatrix specialize(const ProductSignature& sig, const ComplexMatrix& a,
                         const ComplexMatrix& b) {
  return two_slot_product(a, b, sig.r(), sig.s());
}

}  // namespace jspec

#pragma once

#include <string>
#include <vector>

#include "jspec/types.hpp"

namespace jspec {

constexpr int kMaxProductOrder = 32;

// Signature (i_1,...,i_m) of a k-slot product T_{i_1}...T_{i_m} +
// T_{i_m}...T_{i_1}, where every slot index in {1..k} is used and one slot
// index appears exactly once.  Validation happens at construction.
class ProductSignature {
 public:
  explicit ProductSignature(std::vector<int> seq);

  // parse "2,1,2"
  static ProductSignature parse(const std::string& text);

  int slots() const { return k_; }
  int order() const { return int(seq_.size()); }              // m
  int unique_position() const { return p_; }                  // 1-based
  int unique_slot() const { return seq_[p_ - 1]; }
  int r() const { return r_; }
  int s() const { return s_; }
  const std::vector<int>& sequence() const { return seq_; }
  std::string to_string() const;

 private:
  std::vector<int> seq_;
  int k_ = 0;
  int p_ = 0;  // position of the slot index that appears exactly once
  int r_ = 0, s_ = 0;
};

// B^p by repeated squaring; B^0 = I
ComplexMatrix matrix_power(const ComplexMatrix& b, int p);

// T_{i_1}...T_{i_m} + T_{i_m}...T_{i_1} over k operand matrices
ComplexMatrix general_product(const ProductSignature& sig,
                              const std::vector<ComplexMatrix>& ops);

// B^r A B^s + B^s A B^r
ComplexMatrix two_slot_product(const ComplexMatrix& a, const ComplexMatrix& b,
                               int r, int s);

// A in the unique slot, B everywhere else; equals
// two_slot_product(a, b, sig.r(), sig.s())
ComplexMatrix specialize(const ProductSignature& sig, const ComplexMatrix& a,
                         const ComplexMatrix& b);

}  // namespace jspec

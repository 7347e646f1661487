#include <doctest.h>

#include "jspec/jordan.hpp"
#include "jspec/rng.hpp"

using namespace jspec;

TEST_CASE("signature parsing and exponent extraction") {
  ProductSignature s1 = ProductSignature::parse("2,1,2");
  CHECK(s1.slots() == 2);
  CHECK(s1.order() == 3);
  CHECK(s1.unique_slot() == 1);
  CHECK(s1.r() == 1);
  CHECK(s1.s() == 1);

  ProductSignature s2 = ProductSignature::parse("1,2,2");
  CHECK(s2.unique_slot() == 1);
  CHECK(s2.r() == 0);
  CHECK(s2.s() == 2);

  ProductSignature s3 = ProductSignature::parse("2,2,1,2,2,2");
  CHECK(s3.r() == 2);
  CHECK(s3.s() == 3);
  CHECK(s3.to_string() == "2,2,1,2,2,2");

  ProductSignature s4 = ProductSignature::parse("1,2,3,2,1");
  CHECK(s4.slots() == 3);
  CHECK(s4.unique_slot() == 3);

  CHECK_THROWS(ProductSignature::parse("1"));            // order < 2
  CHECK_THROWS(ProductSignature::parse("1,1,2,2"));      // no unique index
  CHECK_THROWS(ProductSignature::parse("1,3,3"));        // gap in indices
  CHECK_THROWS(ProductSignature::parse("1,x,2"));        // bad token
  CHECK_THROWS(ProductSignature::parse(""));             // empty
  std::vector<int> too_long(33, 2);
  too_long[0] = 1;
  CHECK_THROWS(ProductSignature(too_long));
}

TEST_CASE("matrix powers by repeated squaring") {
  TrialRng rng(5);
  ComplexMatrix b = rng.matrix(4);
  ComplexMatrix direct = ComplexMatrix::Identity(4, 4);
  for (int p = 0; p <= 7; ++p) {
    CHECK((matrix_power(b, p) - direct).norm() < 1e-9 * direct.norm());
    direct = direct * b;
  }
  CHECK_THROWS(matrix_power(b, -1));
  CHECK_THROWS(matrix_power(b, 33));
}

TEST_CASE("general product agrees with the two-slot form") {
  TrialRng rng(11);
  for (const char* text : {"2,1,2", "1,2,2", "2,2,1,2", "2,2,2,1,2"}) {
    ProductSignature sig = ProductSignature::parse(text);
    ComplexMatrix a = rng.matrix(5), b = rng.matrix(5);
    ComplexMatrix lhs = general_product(sig, {a, b});
    ComplexMatrix rhs = specialize(sig, a, b);
    CHECK((lhs - rhs).norm() < 1e-10 * std::max(1.0, rhs.norm()));
  }
  // three-slot product evaluated directly
  ProductSignature sig = ProductSignature::parse("1,2,3,2,1");
  ComplexMatrix a = rng.matrix(3), b = rng.matrix(3), c = rng.matrix(3);
  ComplexMatrix expect = a * b * c * b * a + a * b * c * b * a;
  CHECK((general_product(sig, {a, b, c}) - expect).norm() <
        1e-10 * std::max(1.0, expect.norm()));
}

TEST_CASE("two-slot product validation") {
  ComplexMatrix a = ComplexMatrix::Identity(3, 3);
  ComplexMatrix b = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(two_slot_product(a, b, 1, 2), DimensionMismatch);
  CHECK_THROWS_AS(two_slot_product(a, a, 0, 0), BadExponents);
  CHECK_THROWS_AS(two_slot_product(a, a, 2, 1), BadExponents);
  CHECK_THROWS_AS(general_product(ProductSignature::parse("2,1,2"), {a}),
                  DimensionMismatch);
  // r = s is a valid two-slot combination even though classification
  // restricts to s > r
  ComplexMatrix p = two_slot_product(a, 2.0 * a, 1, 1);
  CHECK((p - 8.0 * a).norm() < 1e-12);
}

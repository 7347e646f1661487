#include <doctest.h>

#include "jspec/io.hpp"

using namespace jspec;
using nlohmann::json;

TEST_CASE("matrix documents parse exactly") {
  ComplexMatrix i2 =
      parse_matrix_text(R"({"n":2,"data":[[[1,0],[0,0]],[[0,0],[1,0]]]})");
  CHECK((i2 - ComplexMatrix::Identity(2, 2)).norm() == 0.0);

  ComplexMatrix d =
      parse_matrix_text(R"({"n":2,"data":[[[0,1],[0,0]],[[0,0],[0,-1]]]})");
  CHECK(d(0, 0) == Complex(0, 1));
  CHECK(d(1, 1) == Complex(0, -1));
  CHECK(d(0, 1) == Complex(0, 0));
}

TEST_CASE("schema violations are rejected with diagnostics") {
  CHECK_THROWS_AS(parse_matrix_text("not json"), SchemaError);
  CHECK_THROWS_AS(parse_matrix_text(R"({"data":[[[1,0]]]})"), SchemaError);
  CHECK_THROWS_AS(parse_matrix_text(R"({"n":0,"data":[]})"), SchemaError);
  CHECK_THROWS_AS(parse_matrix_text(R"({"n":2,"data":[[[1,0],[0,0]]]})"),
                  SchemaError);  // 2x1 data for n=2
  CHECK_THROWS_AS(
      parse_matrix_text(
          R"({"n":3,"data":[[[1,0],[0,0]],[[0,0],[1,0]]]})"),
      SchemaError);  // 2x2 data for n=3
  CHECK_THROWS_AS(
      parse_matrix_text(R"({"n":1,"data":[[[1,0,0]]]})"),
      SchemaError);  // entry is not a pair
  CHECK_THROWS_AS(parse_matrix_text(R"({"n":1,"data":[[["a",0]]]})"),
                  SchemaError);
  try {
    parse_matrix_text(R"({"n":2,"data":[[[1,0],[0,0]],[[0,0],"x"]]})");
    CHECK(false);
  } catch (const SchemaError& err) {
    CHECK(std::string(err.what()).find("data[1][1]") != std::string::npos);
  }
}

TEST_CASE("documents round trip") {
  ComplexMatrix m(2, 2);
  m << Complex(1.5, -2), Complex(0, 3), Complex(-0.25, 0), Complex(7, 7);
  json doc = matrix_document(m, "probe");
  CHECK(doc["tag"] == "probe");
  ComplexMatrix back = parse_matrix_document(doc);
  CHECK((m - back).norm() == 0.0);
}

TEST_CASE("map documents: generator and table forms") {
  json gen{{"type", "generator"},
           {"lambda", {0.0, 1.0}},
           {"transposed", true},
           {"t", matrix_document(2.0 * ComplexMatrix::Identity(2, 2))}};
  MapSpec spec = parse_map_document(gen);
  CHECK(spec.has_reference);
  CHECK(spec.reference.transposed);
  ComplexMatrix x(2, 2);
  x << 1, 2, 3, 4;
  ComplexMatrix img = spec.map.apply(x);
  CHECK((img - Complex(0, 1) * x.transpose()).norm() < 1e-12);

  json table{{"type", "table"}, {"n", 1}, {"images", json::array()}};
  table["images"].push_back(matrix_document(3.0 * ComplexMatrix::Ones(1, 1)));
  MapSpec tspec = parse_map_document(table);
  CHECK(!tspec.has_reference);
  CHECK(tspec.map.apply(ComplexMatrix::Ones(1, 1))(0, 0) == Complex(3, 0));

  CHECK_THROWS_AS(parse_map_text(R"({"type":"wat"})"), SchemaError);
  CHECK_THROWS_AS(parse_map_text(R"({"type":"table","n":2,"images":[]})"),
                  SchemaError);
}

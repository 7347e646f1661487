#include "jspec/io.hpp"

#include <cmath>

namespace jspec {

namespace {

using nlohmann::json;

double number_at(const json& j, const std::string& where) {
  if (!j.is_number())
    throw SchemaError(where + ": expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(where + ": non-finite number");
  return v;
}

Complex entry_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    throw SchemaError(where + ": expected an [re, im] pair");
  return Complex(number_at(j[0], where + "[0]"), number_at(j[1], where + "[1]"));
}

}  // namespace

ComplexMatrix parse_matrix_document(const json& doc) {
  if (!doc.is_object()) throw SchemaError("document: expected an object");
  if (!doc.contains("n")) throw SchemaError("document: missing field 'n'");
  if (!doc["n"].is_number_integer())
    throw SchemaError("field 'n': expected an integer");
  const int n = doc["n"].get<int>();
  if (n < 1 || n > kMaxDimension)
    throw SchemaError("field 'n': dimension out of range [1,64]");
  if (!doc.contains("data")) throw SchemaError("document: missing field 'data'");
  const json& data = doc["data"];
  if (!data.is_array() || int(data.size()) != n)
    throw SchemaError("field 'data': expected " + std::to_string(n) + " rows");
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = data[i];
    const std::string where = "data[" + std::to_string(i) + "]";
    if (!row.is_array() || int(row.size()) != n)
      throw SchemaError(where + ": expected " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j)
      m(i, j) = entry_at(row[j], where + "[" + std::to_string(j) + "]");
  }
  return m;
}

ComplexMatrix parse_matrix_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw SchemaError(std::string("invalid JSON: ") + err.what());
  }
  return parse_matrix_document(doc);
}

json matrix_document(const ComplexMatrix& m, const std::string& tag) {
  check_square_matrix(m, "matrix_document");
  json data = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    data.push_back(row);
  }
  json doc{{"n", int(m.rows())}, {"data", data}};
  if (!tag.empty()) doc["tag"] = tag;
  return doc;
}

MapSpec parse_map_document(const json& doc) {
  if (!doc.is_object()) throw SchemaError("map document: expected an object");
  const std::string type = doc.value("type", "");
  MapSpec spec;
  if (type == "generator") {
    if (!doc.contains("t"))
      throw SchemaError("generator map: missing field 't'");
    ComplexMatrix t = parse_matrix_document(doc["t"]);
    bool transposed = doc.value("transposed", false);
    bool unitary = doc.value("unitary", false);
    Complex lambda(1, 0);
    if (doc.contains("lambda"))
      lambda = entry_at(doc["lambda"], "field 'lambda'");
    spec.map = unitary ? make_unitary_map(lambda.real(), t, transposed)
                       : make_similarity_map(lambda, t, transposed);
    spec.has_reference = true;
    spec.reference.lambda = lambda;
    spec.reference.t = t;
    spec.reference.transposed = transposed;
    spec.reference.unitary = unitary;
  } else if (type == "table") {
    if (!doc.contains("n") || !doc["n"].is_number_integer())
      throw SchemaError("table map: missing integer field 'n'");
    const int n = doc["n"].get<int>();
    if (n < 1 || n > kMaxDimension)
      throw SchemaError("table map: dimension out of range [1,64]");
    if (!doc.contains("images") || !doc["images"].is_array() ||
        int(doc["images"].size()) != n * n)
      throw SchemaError("table map: expected " + std::to_string(n * n) +
                        " images");
    LinearMapTable table;
    table.n = n;
    for (const auto& img : doc["images"]) {
      ComplexMatrix m = parse_matrix_document(img);
      if (int(m.rows()) != n)
        throw SchemaError("table map: image dimension mismatch");
      table.images.push_back(m);
    }
    spec.map = table.as_black_box();
  } else {
    throw SchemaError("map document: field 'type' must be "
                      "'generator' or 'table'");
  }
  return spec;
}

MapSpec parse_map_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw SchemaError(std::string("invalid JSON: ") + err.what());
  }
  return parse_map_document(doc);
}

}  // namespace jspec

#pragma once

#include <string>

#include "jspec/preserver.hpp"

#include "json.hpp"

namespace jspec {

// MatrixDocument: {"n": k, "data": [[[re,im], ...], ...], "tag": optional}
ComplexMatrix parse_matrix_document(const nlohmann::json& doc);
ComplexMatrix parse_matrix_text(const std::string& text);
nlohmann::json matrix_document(const ComplexMatrix& m,
                               const std::string& tag = "");

// Map documents for the recover/verify commands.  Either a generator spec
//   {"type":"generator", "lambda":[re,im], "t":MatrixDocument,
//    "transposed":bool, "unitary":bool}
// or a full linear table
//   {"type":"table", "n":k, "images":[MatrixDocument x k^2]}.
struct MapSpec {
  BlackBoxMap map;
  bool has_reference = false;  // generator mode carries the ground truth
  PreserverModel reference;
};

MapSpec parse_map_document(const nlohmann::json& doc);
MapSpec parse_map_text(const std::string& text);

}  // namespace jspec

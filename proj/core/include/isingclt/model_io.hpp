#pragma once

#include <string>

#include "isingclt/model.hpp"

namespace isingclt {

// Model documents are JSON objects:
//
//   { "n": 3,
//     "A": [[0, 0.2, 0], [0.2, 0, 0.2], [0, 0.2, 0]],   // dense, row-major
//     "h": [0.1, 0, -0.1],
//     "label": "optional" }
//
// "A" may instead be a sparse triplet list [{"i": 0, "j": 1, "value": 0.2}, ...].
// A triplet sets both (i, j) and (j, i) unless the mirrored entry is listed
// too, in which case the two must agree within the symmetry tolerance.
// Unlisted entries are zero. "h" may be omitted (zero field). Every document
// goes through validate_model.

IsingModel parse_model(const std::string& text);
IsingModel read_model_file(const std::string& path);

/// Dense JSON document; numbers printed with round-trip precision.
std::string model_to_json(const IsingModel& model);
void write_model_file(const IsingModel& model, const std::string& path);

}  // namespace isingclt

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "owl/types.hpp"

namespace owl {

// Hexadecimal float formatting: round-trips double and float values exactly
// through text.
std::string hex_double(double v);
double parse_hex_double(const std::string& s);

std::string state_to_json(const SymbolicState& s);
SymbolicState state_from_json(const std::string& line);

// Little-endian raw float blobs for the binary checkpoint container.
void write_f32_blob(std::ostream& os, const std::vector<float>& v);
std::vector<float> read_f32_blob(std::istream& is, size_t count);

}  // namespace owl

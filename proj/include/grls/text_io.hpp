#pragma once

#include <string>

namespace grls {

// Shortest exact decimal representation of a double (round-trips).
std::string format_double(double value);

// Writes content to a temporary file in the target directory and renames it
// over path, so the destination is never left partially written.
void write_file_atomic(const std::string& path, const std::string& content);

// Reads a whole file into a string; throws DataError if it cannot be read.
std::string read_file(const std::string& path);

}  // namespace grls

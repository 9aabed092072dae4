#pragma once

#include "linsync/netgen.hpp"

#include <filesystem>
#include <iosfwd>

namespace linsync {

// Dense text format:
//   linsync-matrix 1
//   <n>
//   n lines of n whitespace-separated values; row j holds C_j1 ... C_jn
// Values are written with 17 significant digits so a round trip is exact.

/// Throws ParseError (with line number) on a malformed header, a row count
/// or row length mismatch, a non-numeric token, or a non-finite value.
ConnectivityMatrix read_matrix(std::istream& in);
ConnectivityMatrix read_matrix(const std::filesystem::path& path);

void write_matrix(const ConnectivityMatrix& c, std::ostream& out);
void write_matrix(const ConnectivityMatrix& c, const std::filesystem::path& path);

} // namespace linsync

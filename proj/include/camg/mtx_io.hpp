#pragma once

#include <iosfwd>
#include <string>

#include "camg/sparse.hpp"

namespace camg {

/// Matrix Market coordinate format, real general or real symmetric (lower
/// triangle stored). Values are written in shortest round-trip decimal so
/// that read(write(A)) reproduces the stored values bit-exactly.
void write_matrix_market(const SparseMatrix& A, std::ostream& out);
void write_matrix_market(const SparseMatrix& A, const std::string& path);

SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

}  // namespace camg

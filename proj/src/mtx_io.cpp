#include "camg/mtx_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace camg {

namespace {

// Shortest decimal that round-trips the double.
std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

}  // namespace

void write_matrix_market(const SparseMatrix& A, std::ostream& out) {
  const bool sym = A.symmetric;
  out << "%%MatrixMarket matrix coordinate real "
      << (sym ? "symmetric" : "general") << "\n";
  index_t count = 0;
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      if (!sym || A.col_indices[k] <= i) ++count;
  out << A.nrows << " " << A.ncols << " " << count << "\n";
  for (index_t i = 0; i < A.nrows; ++i) {
    for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      index_t j = A.col_indices[k];
      if (sym && j > i) continue;
      out << (i + 1) << " " << (j + 1) << " " << format_value(A.values[k]) << "\n";
    }
  }
}

void write_matrix_market(const SparseMatrix& A, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_matrix_market: cannot open " + path);
  write_matrix_market(A, f);
}

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_matrix_market: empty stream");
  std::istringstream header(line);
  std::string banner, object, fmt, field, symmetry;
  header >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || fmt != "coordinate" ||
      field != "real")
    throw std::runtime_error("read_matrix_market: unsupported header: " + line);
  bool sym;
  if (symmetry == "symmetric")
    sym = true;
  else if (symmetry == "general")
    sym = false;
  else
    throw std::runtime_error("read_matrix_market: unsupported symmetry: " + symmetry);

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream sizes(line);
  index_t nrows, ncols, nnz;
  if (!(sizes >> nrows >> ncols >> nnz))
    throw std::runtime_error("read_matrix_market: bad size line");
  CooBuilder coo(nrows, ncols);
  for (index_t k = 0; k < nnz; ++k) {
    if (!std::getline(in, line))
      throw std::runtime_error("read_matrix_market: truncated file");
    std::istringstream entry(line);
    index_t i, j;
    std::string sval;
    if (!(entry >> i >> j >> sval))
      throw std::runtime_error("read_matrix_market: bad entry line");
    double v;
    auto res = std::from_chars(sval.data(), sval.data() + sval.size(), v);
    if (res.ec != std::errc{})
      throw std::runtime_error("read_matrix_market: bad value: " + sval);
    coo.add(i - 1, j - 1, v);
    if (sym && i != j) coo.add(j - 1, i - 1, v);
  }
  return coo.finalize(sym);
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_matrix_market: cannot open " + path);
  return read_matrix_market(f);
}

}  // namespace camg

#include "lowsync/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "lowsync/errors.hpp"

namespace lowsync {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

} // namespace

CsrMatrix read_matrix_market(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("MatrixMarket: empty input");

  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw FormatError("MatrixMarket: missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw FormatError("MatrixMarket: object '" + object + "' is not a matrix");
  if (format != "coordinate")
    throw FormatError("MatrixMarket: only coordinate format is supported, got '" + format + "'");
  if (field == "complex" || field == "pattern")
    throw FormatError("MatrixMarket: " + field + " matrices are not supported (real only)");
  if (field != "real" && field != "integer" && field != "double")
    throw FormatError("MatrixMarket: unknown field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw FormatError("MatrixMarket: unsupported symmetry '" + symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  do {
    if (!std::getline(in, line)) throw FormatError("MatrixMarket: missing size line");
  } while (line.empty() || line[0] == '%');

  std::size_t rows = 0, cols = 0, entries = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> entries))
      throw FormatError("MatrixMarket: malformed size line '" + line + "'");
  }
  if (symmetric && rows != cols) throw FormatError("MatrixMarket: symmetric matrix must be square");

  std::vector<CsrMatrix::Triplet> triplets;
  triplets.reserve(symmetric ? 2 * entries : entries);
  std::size_t read = 0;
  while (read < entries && std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    std::size_t i = 0, j = 0;
    double value = 0.0;
    if (!(entry >> i >> j >> value))
      throw FormatError("MatrixMarket: malformed entry line '" + line + "'");
    if (i < 1 || j < 1 || i > rows || j > cols)
      throw FormatError("MatrixMarket: entry index out of range on line '" + line + "'");
    triplets.push_back({i - 1, j - 1, value});
    if (symmetric && i != j) triplets.push_back({j - 1, i - 1, value});
    ++read;
  }
  if (read != entries)
    throw FormatError("MatrixMarket: expected " + std::to_string(entries) + " entries, found " +
                      std::to_string(read));
  return CsrMatrix::from_triplets(rows, cols, std::move(triplets));
}

CsrMatrix load_matrix_market(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw FormatError("MatrixMarket: cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream &out, const CsrMatrix &a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows() << ' ' << a.n_cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto values = a.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      out << i + 1 << ' ' << col_idx[k] + 1 << ' ' << values[k] << '\n';
}

} // namespace lowsync

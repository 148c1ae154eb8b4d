#pragma once

#include <filesystem>
#include <iosfwd>

#include "lowsync/csr_matrix.hpp"

namespace lowsync {

/// Reads a MatrixMarket `coordinate` file with `real` or `integer` values and
/// `general` or `symmetric` symmetry. Symmetric input is expanded to full
/// storage, duplicates are summed and rows sorted. Complex, pattern and array
/// files are rejected with a FormatError.
CsrMatrix read_matrix_market(std::istream &in);
CsrMatrix load_matrix_market(const std::filesystem::path &path);

/// Writes `general` coordinate format with 1-based indices.
void write_matrix_market(std::ostream &out, const CsrMatrix &a);

} // namespace lowsync

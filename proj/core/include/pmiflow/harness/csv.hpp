#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmiflow/harness/record.hpp"

namespace pmiflow::harness {

/// Column names, in order.
const std::vector<std::string>& csv_columns();

std::string csv_header_line();
std::string csv_row_line(const RunRow& row);

/// Shortest locale-independent form with 9 significant digits.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);

/// Header plus one line per row. Throws std::runtime_error naming the path
/// when it cannot be written.
void emit_csv(const RunRecord& record, const std::string& path);
void write_csv(const RunRecord& record, std::ostream& out);

/// Splits a CSV text into header and rows. No quoting is produced by the
/// writer, so none is accepted here.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace pmiflow::harness

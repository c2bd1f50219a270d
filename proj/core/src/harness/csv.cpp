#include "pmiflow/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pmiflow::harness {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "run_id", "seed",  "task",  "solver",      "N",
      "nfe",    "lambda", "epsilon", "w",        "noise_scale",
      "rmse",   "mse",   "psnr_db", "instability_coeff", "exceed_fraction",
      "structure_metric", "fidelity_metric", "error"};
  return cols;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string();
}

std::string csv_header_line() {
  std::string line;
  for (const auto& c : csv_columns()) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
  }
  return s;
}

}  // namespace

std::string csv_row_line(const RunRow& row) {
  std::vector<std::string> cells{sanitize(row.run_id),
                                 std::to_string(row.seed),
                                 row.task,
                                 std::string(to_string(row.solver)),
                                 std::to_string(row.steps),
                                 std::to_string(row.nfe),
                                 format_double(row.lambda),
                                 format_double(row.epsilon),
                                 format_double(row.w),
                                 format_double(row.noise_scale),
                                 format_optional(row.rmse),
                                 format_optional(row.mse),
                                 format_optional(row.psnr_db),
                                 format_optional(row.instability_coeff),
                                 format_optional(row.exceed_fraction),
                                 format_optional(row.structure_metric),
                                 format_optional(row.fidelity_metric),
                                 sanitize(row.error)};
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) line += ',';
    line += cells[i];
  }
  return line;
}

void write_csv(const RunRecord& record, std::ostream& out) {
  out << csv_header_line() << '\n';
  for (const auto& row : record.rows) out << csv_row_line(row) << '\n';
}

void emit_csv(const RunRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  write_csv(record, out);
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    out.push_back(std::move(cells));
  }
  return out;
}

}  // namespace pmiflow::harness

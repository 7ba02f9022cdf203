#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

// CSV plumbing: comma separated, '.' decimal point, one header row, LF line
// endings. Doubles are written with std::to_chars (shortest round-trip
// form), so identical values always produce identical bytes.
namespace pervasive::csv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string format_double(double value);

// Write a matrix with the given column names (must match the column count).
void write_matrix(const std::string& path, const MatrixXd& M,
                  const std::vector<std::string>& column_names);

// Convenience: column names prefix1..prefixN.
void write_matrix(const std::string& path, const MatrixXd& M,
                  const std::string& column_prefix);

// Read a numeric matrix. A single leading non-numeric row is treated as the
// header. Parse failures report the 1-based row and column.
MatrixXd read_matrix(const std::string& path);

// One row per line, single "value" column header.
void write_vector(const std::string& path, const VectorXd& v,
                  const std::string& column_name = "value");
VectorXd read_vector(const std::string& path);

// Generic tidy table writer: fixed header, rows of preformatted cells.
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

}  // namespace pervasive::csv

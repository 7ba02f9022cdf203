#include "pervasive/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace pervasive::csv {

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

bool parse_double(const std::string& cell, double& value) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, value);
    return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

void write_matrix(const std::string& path, const MatrixXd& M,
                  const std::vector<std::string>& column_names) {
    if (static_cast<Eigen::Index>(column_names.size()) != M.cols())
        throw std::invalid_argument("write_matrix: header size mismatch");
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < column_names.size(); ++c)
        out << (c ? "," : "") << column_names[c];
    out << '\n';
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index jcol = 0; jcol < M.cols(); ++jcol)
            out << (jcol ? "," : "") << format_double(M(i, jcol));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_matrix: write to '" + path + "' failed");
}

void write_matrix(const std::string& path, const MatrixXd& M,
                  const std::string& column_prefix) {
    std::vector<std::string> names;
    names.reserve(M.cols());
    for (Eigen::Index jcol = 0; jcol < M.cols(); ++jcol)
        names.push_back(column_prefix + std::to_string(jcol + 1));
    write_matrix(path, M, names);
}

MatrixXd read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], row[c])) {
                numeric = false;
                bad_col = c + 1;
                break;
            }
        }
        if (!numeric) {
            if (header_allowed) {  // treat the first non-numeric line as header
                header_allowed = false;
                continue;
            }
            throw std::runtime_error("'" + path + "': cannot parse number at row " +
                                     std::to_string(lineno) + ", column " +
                                     std::to_string(bad_col));
        }
        header_allowed = false;
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw std::runtime_error("'" + path + "': row " + std::to_string(lineno) +
                                     " has " + std::to_string(row.size()) +
                                     " columns, expected " + std::to_string(width));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error("'" + path + "': no numeric data");
    MatrixXd M(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t jcol = 0; jcol < width; ++jcol) M(i, jcol) = rows[i][jcol];
    return M;
}

void write_vector(const std::string& path, const VectorXd& v,
                  const std::string& column_name) {
    std::ofstream out = open_out(path);
    out << column_name << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
    if (!out) throw std::runtime_error("write_vector: write to '" + path + "' failed");
}

VectorXd read_vector(const std::string& path) {
    const MatrixXd M = read_matrix(path);
    if (M.cols() == 1) return M.col(0);
    if (M.rows() == 1) return M.row(0).transpose();
    throw std::runtime_error("'" + path + "': expected a single column of values");
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_table: row width mismatch");
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_table: write to '" + path + "' failed");
}

}  // namespace pervasive::csv

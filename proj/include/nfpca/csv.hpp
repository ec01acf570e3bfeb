#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfpca/errors.hpp"

namespace nfpca {

// Full round-trip decimal serialization of a double.
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// One curve per row; the header row carries the grid values.
inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                             const std::vector<double>& grid)
{
    if (static_cast<int>(grid.size()) != m.cols())
        throw invalid_input("write_matrix_csv: grid size != column count");
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    for (std::size_t j = 0; j < grid.size(); ++j)
        out << (j ? "," : "") << format_double(grid[j]);
    out << '\n';
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j)
            out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
    if (!out)
        throw io_error("write failed for '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',' || c == '\t') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double(const std::string& s, const std::string& path, int line)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw io_error(path + ":" + std::to_string(line) +
                       ": non-numeric field '" + s + "'");
    }
    if (pos != s.size())
        throw io_error(path + ":" + std::to_string(line) +
                       ": non-numeric field '" + s + "'");
    return v;
}

} // namespace detail

struct CsvMatrix {
    std::vector<double> grid;
    Eigen::MatrixXd values;
};

inline CsvMatrix read_matrix_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw io_error("'" + path + "' is empty");

    CsvMatrix out;
    for (const auto& f : detail::split_fields(line))
        out.grid.push_back(detail::parse_double(f, path, 1));

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != out.grid.size())
            throw io_error(path + ":" + std::to_string(lineno) +
                           ": expected " + std::to_string(out.grid.size()) +
                           " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        for (const auto& f : fields)
            row.push_back(detail::parse_double(f, path, lineno));
        rows.push_back(std::move(row));
    }
    out.values.resize(static_cast<int>(rows.size()), static_cast<int>(out.grid.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return out;
}

struct UcrData {
    std::vector<double> labels;
    Eigen::MatrixXd values;        // n x T readings
    std::vector<double> grid;      // equally spaced on [0, 1]
};

// UCR archive convention: tab- or comma-delimited, first field per row is a
// class label, remaining fields are readings. Ragged rows are rejected.
inline UcrData read_ucr(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");

    UcrData out;
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() < 2)
            throw io_error(path + ":" + std::to_string(lineno) +
                           ": need a label plus at least one reading");
        if (width == 0)
            width = fields.size();
        else if (fields.size() != width)
            throw io_error(path + ":" + std::to_string(lineno) +
                           ": ragged row, expected " + std::to_string(width) +
                           " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        for (const auto& f : fields)
            row.push_back(detail::parse_double(f, path, lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw io_error("'" + path + "' contains no data rows");

    const int n = static_cast<int>(rows.size());
    const int t = static_cast<int>(width) - 1;
    out.values.resize(n, t);
    for (int i = 0; i < n; ++i) {
        out.labels.push_back(rows[i][0]);
        for (int j = 0; j < t; ++j)
            out.values(i, j) = rows[i][j + 1];
    }
    out.grid.resize(t);
    for (int j = 0; j < t; ++j)
        out.grid[j] = static_cast<double>(j) / (t - 1);
    return out;
}

} // namespace nfpca

#include "odediscover/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "odediscover/errors.hpp"

namespace odediscover::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

void write_header(std::ofstream& os, const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
}

}  // namespace

void write_matrix(const std::string& path, const std::vector<std::string>& header, const Mat& table) {
    if (Eigen::Index(header.size()) != table.cols()) throw InvalidDimension("csv: header width mismatch");
    std::ofstream os = open_out(path);
    write_header(os, header);
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.cols(); ++j) os << (j ? "," : "") << format_double(table(i, j));
        os << '\n';
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

void write_rows(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os = open_out(path);
    write_header(os, header);
    for (const auto& r : rows) {
        if (r.size() != header.size()) throw InvalidDimension("csv: row width mismatch");
        for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
        os << '\n';
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

std::pair<std::vector<std::string>, Mat> read_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(is, line)) throw IoError(path + ": empty file");
    auto header = split(line, ',');
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                          " fields");
        std::vector<double> r;
        for (const auto& c : cells) {
            try {
                r.push_back(std::stod(c));
            } catch (...) {
                throw IoError(path + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
            }
        }
        rows.push_back(std::move(r));
    }
    Mat table(Eigen::Index(rows.size()), Eigen::Index(header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < header.size(); ++j) table(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    return {header, table};
}

}  // namespace odediscover::csv

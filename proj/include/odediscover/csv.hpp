#pragma once

#include <string>
#include <utility>
#include <vector>

#include "odediscover/types.hpp"

namespace odediscover::csv {

/// Round-trip formatting (17 significant digits).
std::string format_double(double v);

void write_matrix(const std::string& path, const std::vector<std::string>& header, const Mat& table);
std::pair<std::vector<std::string>, Mat> read_matrix(const std::string& path);

/// Writes already-formatted rows; each row must match the header width.
void write_rows(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> split(const std::string& line, char sep);

}  // namespace odediscover::csv

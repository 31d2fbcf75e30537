#pragma once

#include <string>
#include <vector>

// Bare-bones line charts. CSV stays the authoritative output; these are for
// a quick look.
namespace odediscover::svg {

struct Series {
    std::string name;
    std::vector<double> x, y;
};

struct Chart {
    std::string title, x_label, y_label;
    bool log_x = false, log_y = false;
    std::vector<Series> series;
    int width = 640, height = 420;
};

/// Points with non-finite coordinates (or nonpositive ones on a log axis) are skipped.
std::string render(const Chart& chart);
void write_chart(const std::string& path, const Chart& chart);

}  // namespace odediscover::svg

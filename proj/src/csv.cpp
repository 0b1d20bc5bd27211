#include "seqscreen/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace seqscreen::csv {

std::string number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    std::string s(buf);
    // snprintf honours LC_NUMERIC; pin the decimal separator.
    for (char& c : s)
        if (c == ',') c = '.';
    return s;
}

Writer::Writer(std::ostream& out, std::initializer_list<std::string_view> header)
    : out_(out), columns_(header.size()) {
    bool first = true;
    for (auto h : header) {
        if (!first) out_ << ',';
        out_ << h;
        first = false;
    }
    out_ << '\n';
}

void Writer::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

} // namespace seqscreen::csv

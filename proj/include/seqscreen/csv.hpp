#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace seqscreen::csv {

/// Nine significant digits, '.' decimal point, independent of the global locale.
std::string number(double x);

class Writer {
public:
    Writer(std::ostream& out, std::initializer_list<std::string_view> header);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
    std::size_t columns_;
};

} // namespace seqscreen::csv

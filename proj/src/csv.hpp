#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace dynega::csv {

// RFC 4180 style reader. Quoted fields may contain commas, doubled quotes
// and newlines. `line` tracks the 1-based physical line the record started on.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string>& fields);
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t physical_line_ = 0;
    std::size_t record_line_ = 0;
};

std::string quote(std::string_view field);

// Shortest round-trip decimal form.
std::string format_double(double v);
bool parse_double(std::string_view text, double& out);

} // namespace dynega::csv

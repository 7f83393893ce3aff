#include "csv.hpp"

#include <charconv>
#include <stdexcept>

#include "dynega/error.hpp"

namespace dynega::csv {

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string raw;
    if (!std::getline(in_, raw)) return false;
    ++physical_line_;
    record_line_ = physical_line_;

    std::string field;
    bool in_quotes = false;
    for (;;) {
        if (!raw.empty() && raw.back() == '\r' && !in_quotes) raw.pop_back();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < raw.size() && raw[i + 1] == '"') {
                        field.push_back('"');
                        ++i;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"') {
                in_quotes = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else {
                field.push_back(c);
            }
        }
        if (!in_quotes) break;
        // quoted field spans lines
        if (!std::getline(in_, raw)) {
            throw Error(ErrorCode::Parse,
                        "line " + std::to_string(record_line_) + ": unterminated quoted field");
        }
        ++physical_line_;
        field.push_back('\n');
    }
    fields.push_back(std::move(field));
    return true;
}

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return false;
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

} // namespace dynega::csv

#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace natforest {

// RFC 4180 with UTF-8 payloads: fields quoted when they contain a comma,
// quote, or newline; embedded quotes doubled. Lines end in "\n" on write;
// "\r\n" accepted on read. Quoted fields may span lines.

std::string csv_escape(std::string_view field);

void csv_write_row(std::ostream& out, const std::vector<std::string>& fields);

class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    // 1-based line number where the last record started.
    size_t line() const { return record_line_; }

private:
    std::istream& in_;
    size_t line_ = 1;
    size_t record_line_ = 0;
};

// Splits a semicolon-joined list; empty input gives an empty vector.
std::vector<std::string> split_semicolons(std::string_view s);
std::string join_semicolons(const std::vector<std::string>& parts);

} // namespace natforest

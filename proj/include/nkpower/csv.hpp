#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nkpower {

// Minimal RFC 4180 reader: comma separated, double-quoted fields with ""
// escapes and embedded newlines, CRLF or LF line endings.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Next record, or nullopt at end of input. Throws FormatError on an
    // unterminated quoted field.
    std::optional<std::vector<std::string>> next();

    // 1-based line on which the most recently returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

// Quotes a field if it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

}  // namespace nkpower

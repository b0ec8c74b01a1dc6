#include "nkpower/csv.hpp"

#include "nkpower/error.hpp"

namespace nkpower {

std::optional<std::vector<std::string>> CsvReader::next() {
    int c = in_.get();
    if (c == EOF) return std::nullopt;

    record_line_ = line_;
    std::vector<std::string> fields(1);
    bool quoted = false;
    bool at_field_start = true;
    for (; c != EOF; c = in_.get()) {
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    fields.back() += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                fields.back() += ch;
            }
            continue;
        }
        if (ch == '"' && at_field_start) {
            quoted = true;
            at_field_start = false;
        } else if (ch == ',') {
            fields.emplace_back();
            at_field_start = true;
        } else if (ch == '\r' && in_.peek() == '\n') {
            // handled with the following LF
        } else if (ch == '\n') {
            ++line_;
            return fields;
        } else {
            fields.back() += ch;
            at_field_start = false;
        }
    }
    if (quoted) throw FormatError("unterminated quoted field", record_line_);
    return fields;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace nkpower

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "glsge/error.hpp"

namespace glsge {

/// One `key = value` line from a plain-text record.
struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Malformed lines throw Error(kind, "malformed_line").
[[nodiscard]] std::vector<KeyValue> parse_key_values(std::string_view text, ErrorKind kind = ErrorKind::Config);

[[nodiscard]] double parse_double(const std::string &text, const std::string &what, ErrorKind kind = ErrorKind::Config);
[[nodiscard]] long parse_long(const std::string &text, const std::string &what, ErrorKind kind = ErrorKind::Config);
/// Comma-separated reals, whitespace tolerated.
[[nodiscard]] std::vector<double> parse_double_list(const std::string &text, const std::string &what,
                                                    ErrorKind kind = ErrorKind::Config);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);

}  // namespace glsge

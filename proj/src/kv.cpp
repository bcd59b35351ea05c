#include "glsge/kv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace glsge {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text, ErrorKind kind) {
    std::vector<KeyValue> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(kind, "malformed_line", "line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) fail(kind, "malformed_line", "line " + std::to_string(line_no) + ": empty key");
        out.push_back({std::string(key), std::string(value), line_no});
    }
    return out;
}

double parse_double(const std::string &text, const std::string &what, ErrorKind kind) {
    const std::string_view s = trim(text);
    double v = 0.0;
    const char *first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        fail(kind, "type_mismatch", what + ": expected a real number, got '" + text + "'");
    }
    return v;
}

long parse_long(const std::string &text, const std::string &what, ErrorKind kind) {
    const std::string_view s = trim(text);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        fail(kind, "type_mismatch", what + ": expected an integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_double_list(const std::string &text, const std::string &what, ErrorKind kind) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        out.push_back(parse_double(item, what, kind));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Data, "file_not_found", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Data, "write_failed", "cannot write '" + path + "'");
    out << text;
    if (!out) fail(ErrorKind::Data, "write_failed", "write to '" + path + "' failed");
}

}  // namespace glsge

#include "glsge/dataio.hpp"

#include <sstream>
#include <vector>

#include "glsge/error.hpp"
#include "glsge/kv.hpp"

namespace glsge::data {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

[[noreturn]] void bad_row(const std::string &origin, int line, const std::string &what) {
    fail(ErrorKind::Data, "malformed_csv", origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

const Matrix &DomainSet::require_labels() const {
    if (!labels) fail(ErrorKind::Data, "missing_labels", "domain set has no labels");
    return *labels;
}

void validate(const DomainSet &set) {
    if (!set.features.allFinite()) fail(ErrorKind::Data, "non_finite", "features contain non-finite values");
    if (set.labels) {
        if (set.labels->rows() != set.features.rows() || set.labels->cols() != 2) {
            fail(ErrorKind::Data, "dim_mismatch", "labels must be n x 2 matching the feature rows");
        }
        if (!set.labels->allFinite()) fail(ErrorKind::Data, "non_finite", "labels contain non-finite values");
    }
}

DomainSet subset(const DomainSet &set, const std::vector<Eigen::Index> &rows) {
    DomainSet out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), set.dim());
    if (set.labels) out.labels = Matrix(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        out.features.row(static_cast<Eigen::Index>(i)) = set.features.row(r);
        if (set.labels) out.labels->row(static_cast<Eigen::Index>(i)) = set.labels->row(r);
    }
    return out;
}

DomainSet parse_domain_csv(const std::string &text, bool has_labels, const std::string &origin) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        ++lineno;
        if (!trim(line).empty()) {
            header = split_fields(line);
            break;
        }
    }
    if (header.empty()) fail(ErrorKind::Data, "no_rows", origin + ": no rows");

    const std::size_t n_label_cols = has_labels ? 2 : 0;
    if (header.size() < n_label_cols) bad_row(origin, lineno, "header is missing yaw,pitch columns");
    const std::size_t d = header.size() - n_label_cols;
    for (std::size_t j = 0; j < d; ++j) {
        if (trim(header[j]) != "f" + std::to_string(j)) {
            bad_row(origin, lineno, "expected header column 'f" + std::to_string(j) + "', found '" + trim(header[j]) + "'");
        }
    }
    if (has_labels && (trim(header[d]) != "yaw" || trim(header[d + 1]) != "pitch")) {
        bad_row(origin, lineno, "expected trailing header columns yaw,pitch");
    }

    std::vector<double> values;
    Eigen::Index n = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            bad_row(origin, lineno,
                    "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        for (const auto &f : fields) {
            try {
                values.push_back(parse_double(trim(f), "csv field", ErrorKind::Data));
            } catch (const Error &) {
                bad_row(origin, lineno, "not a number: '" + trim(f) + "'");
            }
        }
        ++n;
    }
    if (n == 0) fail(ErrorKind::Data, "no_rows", origin + ": no rows");

    const auto cols = static_cast<Eigen::Index>(header.size());
    DomainSet set;
    set.features.resize(n, static_cast<Eigen::Index>(d));
    if (has_labels) set.labels = Matrix(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) set.features(i, j) = values[i * cols + j];
        if (has_labels) {
            (*set.labels)(i, 0) = values[i * cols + static_cast<Eigen::Index>(d)];
            (*set.labels)(i, 1) = values[i * cols + static_cast<Eigen::Index>(d) + 1];
        }
    }
    validate(set);
    return set;
}

DomainSet load_domain_csv(const std::string &path, bool has_labels) {
    return parse_domain_csv(read_text_file(path), has_labels, path);
}

std::string format_domain_csv(const DomainSet &set) {
    validate(set);
    std::ostringstream os;
    const auto d = set.dim();
    for (Eigen::Index j = 0; j < d; ++j) os << (j ? "," : "") << 'f' << j;
    if (set.labels) os << (d ? "," : "") << "yaw,pitch";
    os << '\n';
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) os << (j ? "," : "") << format_double(set.features(i, j));
        if (set.labels) {
            os << (d ? "," : "") << format_double((*set.labels)(i, 0)) << ',' << format_double((*set.labels)(i, 1));
        }
        os << '\n';
    }
    return os.str();
}

void save_domain_csv(const DomainSet &set, const std::string &path) { write_text_file(path, format_domain_csv(set)); }

Matrix load_label_csv(const std::string &path) { return *load_domain_csv(path, true).labels; }

}  // namespace glsge::data

#pragma once

#include <optional>
#include <string>

#include "glsge/linalg.hpp"

namespace glsge::data {

/// n x d features with optional n x 2 (yaw, pitch) labels in radians.
struct DomainSet {
    Matrix features;
    std::optional<Matrix> labels;

    [[nodiscard]] Eigen::Index size() const { return features.rows(); }
    [[nodiscard]] Eigen::Index dim() const { return features.cols(); }
    [[nodiscard]] bool has_labels() const { return labels.has_value(); }
    /// Labels or Data/"missing_labels".
    [[nodiscard]] const Matrix &require_labels() const;
};

/// Throws Data errors for non-finite values or label rows that do not match features.
void validate(const DomainSet &set);

/// Rows i of both features and labels.
[[nodiscard]] DomainSet subset(const DomainSet &set, const std::vector<Eigen::Index> &rows);

/// CSV schema: header `f0,...,f{d-1}[,yaw,pitch]`, one sample per row, no index
/// column.  d may be 0 for label-only files.  Values are written in shortest
/// round-trip form, so save followed by load is exact.
[[nodiscard]] DomainSet parse_domain_csv(const std::string &text, bool has_labels, const std::string &origin = "<input>");
[[nodiscard]] DomainSet load_domain_csv(const std::string &path, bool has_labels);
[[nodiscard]] std::string format_domain_csv(const DomainSet &set);
void save_domain_csv(const DomainSet &set, const std::string &path);

/// Labels from a `yaw,pitch` CSV (a DomainSet with zero feature columns).
[[nodiscard]] Matrix load_label_csv(const std::string &path);

}  // namespace glsge::data

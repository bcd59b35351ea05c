#include "glsge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "glsge/error.hpp"

namespace glsge::kernels {

void validate(const KernelSpec &spec) {
    if (spec.family == Family::GaussianRbf && !(spec.bandwidth > 0.0 && std::isfinite(spec.bandwidth))) {
        fail(ErrorKind::Config, "bad_kernel", "rbf bandwidth must be positive");
    }
    if (spec.family == Family::Polynomial && spec.degree < 1) {
        fail(ErrorKind::Config, "bad_kernel", "polynomial degree must be >= 1");
    }
}

std::string family_name(Family f) {
    switch (f) {
    case Family::GaussianRbf: return "rbf";
    case Family::Linear: return "linear";
    case Family::Polynomial: return "poly";
    }
    return "?";
}

Family family_from_name(const std::string &name) {
    if (name == "rbf") return Family::GaussianRbf;
    if (name == "linear") return Family::Linear;
    if (name == "poly" || name == "polynomial") return Family::Polynomial;
    fail(ErrorKind::Config, "bad_kernel", "unknown kernel family '" + name + "'");
}

double evaluate(const KernelSpec &spec, const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &y) {
    switch (spec.family) {
    case Family::GaussianRbf:
        return std::exp(-(x - y).squaredNorm() / (2.0 * spec.bandwidth * spec.bandwidth));
    case Family::Linear:
        return x.dot(y);
    case Family::Polynomial:
        return std::pow(x.dot(y) + spec.offset, spec.degree);
    }
    return 0.0;
}

Matrix gram(const Matrix &a, const Matrix &b, const KernelSpec &spec) {
    validate(spec);
    if (a.cols() != b.cols()) {
        std::ostringstream msg;
        msg << "gram: feature dimensions differ (" << a.cols() << " vs " << b.cols() << ")";
        fail(ErrorKind::Data, "dim_mismatch", msg.str());
    }
    if (!a.allFinite() || !b.allFinite()) fail(ErrorKind::Numerical, "non_finite", "gram: non-finite input");
    Matrix k(a.rows(), b.rows());
    switch (spec.family) {
    case Family::GaussianRbf: {
        const double inv = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            for (Eigen::Index i = 0; i < k.rows(); ++i) k(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
        }
        break;
    }
    case Family::Linear:
        k.noalias() = a * b.transpose();
        break;
    case Family::Polynomial:
        k.noalias() = a * b.transpose();
        k = (k.array() + spec.offset).pow(spec.degree).matrix();
        break;
    }
    if (&a == &b) k = linalg::symmetrize(k);
    return k;
}

double median_heuristic(const Matrix &rows) {
    const Eigen::Index n = rows.rows();
    if (n < 2) fail(ErrorKind::Data, "too_few_rows", "median_heuristic: need at least 2 rows");
    const Eigen::Index m = std::min<Eigen::Index>(n, 1000);
    std::vector<Eigen::Index> idx(m);
    for (Eigen::Index i = 0; i < m; ++i) idx[i] = (i * n) / m;
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) d.push_back((rows.row(idx[i]) - rows.row(idx[j])).norm());
    }
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    double med = d[mid];
    if (d.size() % 2 == 0) {
        const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    if (!(med > 0.0)) fail(ErrorKind::Data, "degenerate_bandwidth", "median_heuristic: rows are (mostly) identical");
    return med;
}

Matrix centering_matrix(Eigen::Index n) {
    if (n < 1) fail(ErrorKind::Data, "bad_size", "centering_matrix: n must be >= 1");
    return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

Matrix b_factor(const label::WeightVector &q) {
    const Vector root = q.values().cwiseSqrt();
    Matrix b = -q.values() * root.transpose();
    b.diagonal() += root;
    return b;
}

Matrix centered_gram(const Matrix &k) {
    if (k.rows() != k.cols()) fail(ErrorKind::Data, "bad_shape", "centered_gram: square matrix required");
    // H K H without forming H: subtract row and column means, add back the grand mean.
    const Vector col_mean = k.colwise().mean().transpose();
    const Vector row_mean = k.rowwise().mean();
    const double grand = k.mean();
    Matrix g = k;
    g.colwise() -= row_mean;
    g.rowwise() -= col_mean.transpose();
    g.array() += grand;
    return linalg::symmetrize(g);
}

Matrix reweighted_gram(const Matrix &k, const label::WeightVector &q) {
    if (k.rows() != k.cols() || k.rows() != q.size()) {
        std::ostringstream msg;
        msg << "reweighted_gram: kernel is " << k.rows() << "x" << k.cols() << " but q has " << q.size() << " entries";
        fail(ErrorKind::Data, "dim_mismatch", msg.str());
    }
    const Matrix b = b_factor(q);
    return linalg::symmetrize(b.transpose() * k * b);
}

void validate(const GramBundle &g) {
    const Eigen::Index ns = g.kz_ss.rows();
    const Eigen::Index nt = g.kz_tt.rows();
    const bool ok = g.kz_ss.cols() == ns && g.ky_ss.rows() == ns && g.ky_ss.cols() == ns && g.kz_tt.cols() == nt &&
                    g.ky_tt.rows() == nt && g.ky_tt.cols() == nt && g.kz_ts.rows() == nt && g.kz_ts.cols() == ns &&
                    g.ky_ts.rows() == nt && g.ky_ts.cols() == ns;
    if (!ok) fail(ErrorKind::Data, "dim_mismatch", "gram bundle blocks have inconsistent shapes");
}

GramBundle make_bundle(const Matrix &z_source, const Matrix &z_target, const Matrix &y_source, const Matrix &y_target,
                       const KernelSpec &kz, const KernelSpec &ky) {
    if (z_source.rows() != y_source.rows() || z_target.rows() != y_target.rows()) {
        fail(ErrorKind::Data, "dim_mismatch", "make_bundle: features and labels disagree on sample count");
    }
    GramBundle g;
    g.kz_ss = gram(z_source, z_source, kz);
    g.kz_tt = gram(z_target, z_target, kz);
    g.kz_ts = gram(z_target, z_source, kz);
    g.ky_ss = gram(y_source, y_source, ky);
    g.ky_tt = gram(y_target, y_target, ky);
    g.ky_ts = gram(y_target, y_source, ky);
    return g;
}

GramGrad gram_backward(const Matrix &a, const Matrix &b, const KernelSpec &spec, const Matrix &k, const Matrix &dk) {
    GramGrad out;
    switch (spec.family) {
    case Family::GaussianRbf: {
        // dk_ij/da_i = -k_ij (a_i - b_j) / s^2
        const double inv = 1.0 / (spec.bandwidth * spec.bandwidth);
        const Matrix w = dk.cwiseProduct(k);
        out.da = -inv * (w.rowwise().sum().asDiagonal() * a - w * b);
        out.db = inv * (w.transpose() * a - w.colwise().sum().transpose().asDiagonal() * b);
        break;
    }
    case Family::Linear:
        out.da = dk * b;
        out.db = dk.transpose() * a;
        break;
    case Family::Polynomial: {
        const Matrix inner = a * b.transpose();
        const Matrix w =
            dk.cwiseProduct((static_cast<double>(spec.degree) * (inner.array() + spec.offset).pow(spec.degree - 1)).matrix());
        out.da = w * b;
        out.db = w.transpose() * a;
        break;
    }
    }
    return out;
}

}  // namespace glsge::kernels

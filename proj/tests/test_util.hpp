#pragma once

#include <random>

#include "glsge/kernels.hpp"
#include "glsge/label_model.hpp"
#include "glsge/linalg.hpp"

namespace glsge::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
}

/// A A^T with A n x rank, so PSD and possibly singular.
inline Matrix random_psd(Eigen::Index n, std::mt19937_64 &rng, Eigen::Index rank = -1) {
    const Matrix a = random_matrix(n, rank < 0 ? n : rank, rng);
    return linalg::symmetrize(a * a.transpose());
}

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64 &rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
    return qr.householderQ() * Matrix::Identity(n, n);
}

/// Strictly positive weights summing to one.
inline label::WeightVector random_weights(Eigen::Index n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> dist(0.1, 1.0);
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = dist(rng);
    return label::normalize_weights(w);
}

inline double max_abs(const Matrix &m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace glsge::testing

#pragma once

#include <string>

#include "glsge/label_model.hpp"
#include "glsge/linalg.hpp"

namespace glsge::kernels {

enum class Family { GaussianRbf, Linear, Polynomial };

struct KernelSpec {
    Family family = Family::GaussianRbf;
    double bandwidth = 1.0;  // rbf only
    int degree = 2;          // polynomial only
    double offset = 1.0;     // polynomial only

    [[nodiscard]] static KernelSpec rbf(double bandwidth) { return {Family::GaussianRbf, bandwidth, 2, 1.0}; }
    [[nodiscard]] static KernelSpec linear() { return {Family::Linear, 1.0, 1, 0.0}; }
    [[nodiscard]] static KernelSpec polynomial(int degree, double offset) { return {Family::Polynomial, 1.0, degree, offset}; }
};

void validate(const KernelSpec &spec);
[[nodiscard]] std::string family_name(Family f);
[[nodiscard]] Family family_from_name(const std::string &name);

[[nodiscard]] double evaluate(const KernelSpec &spec, const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &y);

/// K_ij = k(a_i, b_j) over the rows of `a` and `b`.
[[nodiscard]] Matrix gram(const Matrix &a, const Matrix &b, const KernelSpec &spec);

/// Median pairwise Euclidean distance; at most 1000 evenly strided rows are used.
[[nodiscard]] double median_heuristic(const Matrix &rows);

/// H_n = I - (1/n) 1 1^T.
[[nodiscard]] Matrix centering_matrix(Eigen::Index n);

/// B = sqrt(Q) - q sqrt(q)^T, so that B B^T = diag(q) - q q^T.
[[nodiscard]] Matrix b_factor(const label::WeightVector &q);

/// H_n K H_n.
[[nodiscard]] Matrix centered_gram(const Matrix &k);

/// B^T K B for the weight vector q.
[[nodiscard]] Matrix reweighted_gram(const Matrix &k, const label::WeightVector &q);

/// Feature (Z) and label (Y) Gram matrices for a source/target pair.  Cross blocks
/// are target-by-source: K^{ts}_{ij} = k(t_i, s_j).
struct GramBundle {
    Matrix kz_ss, kz_tt, kz_ts;
    Matrix ky_ss, ky_tt, ky_ts;

    [[nodiscard]] Eigen::Index n_source() const { return kz_ss.rows(); }
    [[nodiscard]] Eigen::Index n_target() const { return kz_tt.rows(); }
};

void validate(const GramBundle &bundle);

[[nodiscard]] GramBundle make_bundle(const Matrix &z_source, const Matrix &z_target, const Matrix &y_source,
                                     const Matrix &y_target, const KernelSpec &kz, const KernelSpec &ky);

/// Backpropagates dL/dK for K = gram(a, b) to the rows of a and b.  `k` is the
/// forward Gram.  When a and b are the same rows, add both outputs.
struct GramGrad {
    Matrix da;
    Matrix db;
};
[[nodiscard]] GramGrad gram_backward(const Matrix &a, const Matrix &b, const KernelSpec &spec, const Matrix &k,
                                     const Matrix &dk);

}  // namespace glsge::kernels

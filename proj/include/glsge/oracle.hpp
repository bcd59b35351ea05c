#pragma once

#include <functional>

#include "glsge/kernels.hpp"
#include "glsge/label_model.hpp"

// Brute-force reference computations in explicit finite-dimensional feature space.
// Nothing here goes through Gram matrices; the point is to check the kernel-trick
// estimators against operators formed directly.
namespace glsge::oracle {

/// Explicit feature map for kernels that have one: linear (identity) and
/// polynomial of degree 2, phi(x) = [x_i^2, sqrt2 x_i x_j (i<j), sqrt(2c) x_i, c].
class ExplicitEmbedding {
public:
    ExplicitEmbedding(const kernels::KernelSpec &spec, Eigen::Index input_dim);

    [[nodiscard]] Eigen::Index dim() const { return dim_; }
    /// Rows of `x` mapped to rows of the result.
    [[nodiscard]] Matrix embed(const Matrix &x) const;

private:
    kernels::KernelSpec spec_;
    Eigen::Index input_dim_;
    Eigen::Index dim_;
};

inline constexpr Eigen::Index kMaxExplicitDim = 64;

/// U = Phi^T Q Psi (Psi^T Q Psi + eps I)^{-1}, with sample rows in Phi and Psi.
[[nodiscard]] Matrix explicit_cond_mean(const Matrix &phi, const Matrix &psi, const label::WeightVector &q, double eps);

/// C = Phi^T H_q Phi - Phi^T H_q Psi (Psi^T H_q Psi + eps I)^{-1} Psi^T H_q Phi.
[[nodiscard]] Matrix explicit_cond_cov(const Matrix &phi, const label::WeightVector &q, double eps, const Matrix &psi);

/// ||U^s - U^t||_F^2 + tr C^s + tr C^t - 2 tr (sqrt(C^s) C^t sqrt(C^s))^{1/2},
/// the target side always at uniform weights.
[[nodiscard]] double oracle_pcod(const Matrix &phi_s, const Matrix &psi_s, const Matrix &phi_t, const Matrix &psi_t,
                                 const label::WeightVector &q, double eps);

/// Central differences with step h_i = rel_step * (1 + |theta_i|).
[[nodiscard]] Vector fd_gradient(const std::function<double(const Vector &)> &f, const Vector &theta,
                                 double rel_step = 1e-5);

}  // namespace glsge::oracle

#pragma once

#include <functional>

#include <Eigen/Dense>

namespace glsge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kClampFloor = 1e-10;

/// max |S_ij - S_ji|; zero for non-square input is not meaningful, callers check shape.
[[nodiscard]] double symmetry_defect(const Matrix &s);

/// (S + S^T) / 2.  Used on products that are symmetric in exact arithmetic.
[[nodiscard]] Matrix symmetrize(const Matrix &s);

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
struct SpectralDecomp {
    Vector eigenvalues;
    Matrix eigenvectors;  // orthonormal columns, column i pairs with eigenvalues(i)
};

/// Rejects non-square input and symmetry defects above `sym_tol * max(1, |S|_max)`.
[[nodiscard]] SpectralDecomp sym_eig(const Matrix &s, double sym_tol = kSymmetryTol);

/// M = U diag(sqrt(max(lambda, 0))) so that M M^T = S.  Throws "not_psd" when an
/// eigenvalue falls below -clamp_floor.
[[nodiscard]] Matrix psd_sqrt(const Matrix &s, double clamp_floor = kClampFloor);

[[nodiscard]] double nuclear_norm(const Matrix &a);

/// Nuclear norm together with the polar factor U_r V_r^T restricted to singular
/// values above `rank_tol * sigma_max`; the polar factor is the gradient of the norm
/// wherever the rank is locally constant.
struct NuclearNorm {
    double value = 0.0;
    Matrix polar;
};
[[nodiscard]] NuclearNorm nuclear_norm_with_polar(const Matrix &a, double rank_tol = 1e-10);

/// (S + eps I)^{-1} for symmetric S with eps > 0, residual-checked.
[[nodiscard]] Matrix reg_inverse(const Matrix &s, double eps);

/// Axis-aligned integration domain [x0, x1] x [y0, y1].
struct Rect {
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration on an interval.  Absolute
/// error target `tol`; throws "quad_budget" with the best estimate when
/// `max_intervals` subdivisions are not enough.
[[nodiscard]] QuadResult integrate_1d(const std::function<double(double)> &f, double a, double b,
                                      double tol, int max_intervals = 2000);

/// Globally adaptive tensor Gauss-Kronrod cubature on a rectangle.  The cell with
/// the largest |K15xK15 - G7xG7| estimate is split into quadrants until the summed
/// estimate drops below `tol`.
[[nodiscard]] QuadResult rect_quad_2d(const std::function<double(double, double)> &f, const Rect &rect,
                                      double tol, int max_cells = 4000);

}  // namespace linalg
}  // namespace glsge

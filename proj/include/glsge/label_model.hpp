#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "glsge/linalg.hpp"

// Truncated bivariate Gaussian model of (yaw, pitch) gaze labels, in radians.
namespace glsge::label {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double v) const { return v >= lo && v <= hi; }
    [[nodiscard]] double width() const { return hi - lo; }
};

/// Parent Gaussian (mu, sigma) restricted to the rectangle a x b, where `a` bounds
/// yaw and `b` bounds pitch.
struct TruncGaussParams {
    Vec2 mu = Vec2::Zero();
    Mat2 sigma = Mat2::Identity();
    Interval a{-1.0, 1.0};
    Interval b{-1.0, 1.0};

    /// Rectangle vertices v11=(a1,b1), v12=(a1,b2), v21=(a2,b1), v22=(a2,b2).
    [[nodiscard]] Vec2 vertex(int i, int j) const {
        return {i == 1 ? a.lo : a.hi, j == 1 ? b.lo : b.hi};
    }
    [[nodiscard]] bool inside(const Vec2 &y) const { return a.contains(y(0)) && b.contains(y(1)); }
    [[nodiscard]] linalg::Rect rect() const { return {a.lo, a.hi, b.lo, b.hi}; }
};

/// Throws Config/"invalid_label_params" unless the rectangle is proper and sigma SPD.
void validate(const TruncGaussParams &p);

[[nodiscard]] double bvn_pdf(const Vec2 &y, const Vec2 &mu, const Mat2 &sigma);

/// P(Y1 <= x1, Y2 <= x2): one-dimensional adaptive integral of phi(t) times the
/// conditional normal CDF of the second coordinate.
[[nodiscard]] double bvn_cdf(const Vec2 &x, const Vec2 &mu, const Mat2 &sigma, double tol = 1e-10);

/// Gaussian mass of the truncation rectangle by inclusion-exclusion over its vertices.
/// Throws Numerical/"degenerate_truncation" when the mass is <= 1e-12.
[[nodiscard]] double rect_mass(const TruncGaussParams &p);

/// Truncated density with the rectangle mass computed once.
class TruncGauss {
public:
    explicit TruncGauss(TruncGaussParams p);

    [[nodiscard]] double pdf(const Vec2 &y) const;
    [[nodiscard]] double mass() const { return mass_; }
    [[nodiscard]] const TruncGaussParams &params() const { return params_; }

private:
    TruncGaussParams params_;
    double mass_;
    Mat2 precision_;
    double scale_;  // 1 / (2 pi sqrt(det sigma) mass)
};

[[nodiscard]] double tgau_pdf(const Vec2 &y, const TruncGaussParams &p);

struct GaussianMoments {
    Vec2 mu;
    Mat2 sigma;
};

/// Sample mean and population (1/n) covariance of n x 2 labels, plus jitter * I.
[[nodiscard]] GaussianMoments fit_gaussian_moments(const Matrix &labels, double jitter = 1e-6);

enum class RectStrategy {
    AxisQuantile,  // per-axis two-sided quantile of the marginal
    EllipseBox,    // bounding box of the HPD ellipse
};

/// Truncation rectangle from a confidence level c in (0, 1).
[[nodiscard]] std::pair<Interval, Interval> confidence_rect(const Vec2 &mu, const Mat2 &sigma, double c,
                                                            RectStrategy strategy = RectStrategy::AxisQuantile);

/// Fits moments to labels and wraps them with the confidence rectangle.
[[nodiscard]] TruncGaussParams fit_trunc_gauss(const Matrix &labels, double confidence,
                                               RectStrategy strategy = RectStrategy::AxisQuantile,
                                               double jitter = 1e-6);

using Density = std::function<double(const Vec2 &)>;

/// omega(y) = f_TGau(y) / p_source(y).  Zero outside the target rectangle.
[[nodiscard]] double importance_weight(const Vec2 &y, const Density &source_density, const TruncGauss &target);

/// Normalized discretization of the reweighted source label distribution.
class WeightVector {
public:
    /// Validates q_i >= 0, sum(q) = 1 within 1e-12, and at least one positive entry.
    explicit WeightVector(Vector q);
    [[nodiscard]] static WeightVector uniform(Eigen::Index n);

    [[nodiscard]] const Vector &values() const { return q_; }
    [[nodiscard]] Eigen::Index size() const { return q_.size(); }
    [[nodiscard]] double operator[](Eigen::Index i) const { return q_(i); }
    [[nodiscard]] double entropy() const;

private:
    Vector q_;
};

/// Positive weights normalized to sum one; zero sum throws Data/"disjoint_supports".
[[nodiscard]] WeightVector normalize_weights(const Vector &w);

/// q_i proportional to the target truncated density at each source label.
[[nodiscard]] WeightVector reweight_vector(const Matrix &source_labels, const TruncGauss &target);

/// n i.i.d. draws (n x 2) by rejection from the parent Gaussian; deterministic in seed.
[[nodiscard]] Matrix tgau_sample(const TruncGaussParams &p, std::uint64_t seed, Eigen::Index n);

/// Plain-text record:
///   mu_yaw, mu_pitch                  parent mean (radians)
///   sigma_yaw_yaw, sigma_yaw_pitch,
///   sigma_pitch_pitch                 parent covariance (radians^2)
///   a_lo, a_hi                        yaw truncation interval
///   b_lo, b_hi                        pitch truncation interval
/// one `key = value` per line, values in shortest round-trip decimal form.
[[nodiscard]] std::string to_record(const TruncGaussParams &p);
[[nodiscard]] TruncGaussParams params_from_record(const std::string &text);

}  // namespace glsge::label

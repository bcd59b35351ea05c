#include "glsge/label_model.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "glsge/error.hpp"
#include "glsge/kv.hpp"

namespace glsge::label {

namespace {

// Standardized coordinates beyond this are treated as +-infinity; Phi(-10) ~ 7.6e-24.
constexpr double kTailCut = 10.0;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

void check_spd(const Mat2 &sigma, const char *where) {
    const double det = sigma.determinant();
    if (!sigma.allFinite() || !(sigma(0, 0) > 0.0) || !(det > 0.0) || std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12) {
        std::ostringstream msg;
        msg << where << ": covariance is not symmetric positive definite (det " << det << ")";
        fail(ErrorKind::Numerical, "singular_covariance", msg.str());
    }
}

}  // namespace

void validate(const TruncGaussParams &p) {
    if (!p.mu.allFinite()) fail(ErrorKind::Config, "invalid_label_params", "label model mean is not finite");
    if (!(p.a.lo < p.a.hi) || !(p.b.lo < p.b.hi)) {
        fail(ErrorKind::Config, "invalid_label_params", "truncation intervals must satisfy lo < hi");
    }
    check_spd(p.sigma, "label model");
}

double bvn_pdf(const Vec2 &y, const Vec2 &mu, const Mat2 &sigma) {
    check_spd(sigma, "bvn_pdf");
    const Vec2 d = y - mu;
    const double q = d.dot(sigma.inverse() * d);
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(sigma.determinant()));
}

double bvn_cdf(const Vec2 &x, const Vec2 &mu, const Mat2 &sigma, double tol) {
    check_spd(sigma, "bvn_cdf");
    const double s1 = std::sqrt(sigma(0, 0));
    const double s2 = std::sqrt(sigma(1, 1));
    const double rho = sigma(0, 1) / (s1 * s2);
    const double u1 = std::min((x(0) - mu(0)) / s1, kTailCut);
    const double u2 = std::clamp((x(1) - mu(1)) / s2, -2.0 * kTailCut, 2.0 * kTailCut);
    if (std::isnan(u1) || std::isnan(u2)) fail(ErrorKind::Numerical, "non_finite", "bvn_cdf: NaN argument");
    if (u1 <= -kTailCut) return 0.0;
    const double r = std::sqrt(1.0 - rho * rho);
    const auto integrand = [&](double t) { return std_normal_pdf(t) * std_normal_cdf((u2 - rho * t) / r); };
    const double v = linalg::integrate_1d(integrand, -kTailCut, u1, tol).value;
    return std::clamp(v, 0.0, 1.0);
}

double rect_mass(const TruncGaussParams &p) {
    validate(p);
    const auto F = [&](int i, int j) { return bvn_cdf(p.vertex(i, j), p.mu, p.sigma); };
    const double mass = F(2, 2) - F(1, 2) - F(2, 1) + F(1, 1);
    if (!(mass > 1e-12)) {
        std::ostringstream msg;
        msg << "truncation rectangle carries Gaussian mass " << mass;
        fail(ErrorKind::Numerical, "degenerate_truncation", msg.str());
    }
    return std::min(mass, 1.0);
}

TruncGauss::TruncGauss(TruncGaussParams p)
    : params_(std::move(p)), mass_(rect_mass(params_)), precision_(params_.sigma.inverse()),
      scale_(1.0 / (2.0 * std::numbers::pi * std::sqrt(params_.sigma.determinant()) * mass_)) {}

double TruncGauss::pdf(const Vec2 &y) const {
    if (!params_.inside(y)) return 0.0;
    const Vec2 d = y - params_.mu;
    return scale_ * std::exp(-0.5 * d.dot(precision_ * d));
}

double tgau_pdf(const Vec2 &y, const TruncGaussParams &p) { return TruncGauss(p).pdf(y); }

GaussianMoments fit_gaussian_moments(const Matrix &labels, double jitter) {
    if (labels.cols() != 2) fail(ErrorKind::Data, "bad_shape", "fit_gaussian_moments: labels must have two columns");
    if (labels.rows() < 2) fail(ErrorKind::Data, "too_few_labels", "fit_gaussian_moments: at least 2 labels required");
    if (!labels.allFinite()) fail(ErrorKind::Data, "non_finite", "fit_gaussian_moments: non-finite label");
    const double n = static_cast<double>(labels.rows());
    GaussianMoments m;
    m.mu = labels.colwise().mean().transpose();
    const Matrix centered = labels.rowwise() - m.mu.transpose();
    m.sigma = (centered.transpose() * centered) / n;
    m.sigma(0, 1) = m.sigma(1, 0) = 0.5 * (m.sigma(0, 1) + m.sigma(1, 0));
    m.sigma += jitter * Mat2::Identity();
    return m;
}

std::pair<Interval, Interval> confidence_rect(const Vec2 &mu, const Mat2 &sigma, double c, RectStrategy strategy) {
    if (!(c > 0.0 && c < 1.0)) fail(ErrorKind::Config, "bad_confidence", "confidence must lie in (0, 1)");
    check_spd(sigma, "confidence_rect");
    double z = 0.0;
    switch (strategy) {
    case RectStrategy::AxisQuantile:
        z = std_normal_quantile(0.5 * (1.0 + c));
        break;
    case RectStrategy::EllipseBox:
        z = std::sqrt(-2.0 * std::log1p(-c));  // chi-square(2) quantile, square-rooted
        break;
    }
    const double ha = z * std::sqrt(sigma(0, 0));
    const double hb = z * std::sqrt(sigma(1, 1));
    return {Interval{mu(0) - ha, mu(0) + ha}, Interval{mu(1) - hb, mu(1) + hb}};
}

TruncGaussParams fit_trunc_gauss(const Matrix &labels, double confidence, RectStrategy strategy, double jitter) {
    const GaussianMoments m = fit_gaussian_moments(labels, jitter);
    const auto [a, b] = confidence_rect(m.mu, m.sigma, confidence, strategy);
    TruncGaussParams p;
    p.mu = m.mu;
    p.sigma = m.sigma;
    p.a = a;
    p.b = b;
    return p;
}

double importance_weight(const Vec2 &y, const Density &source_density, const TruncGauss &target) {
    const double num = target.pdf(y);
    if (num == 0.0) return 0.0;
    const double den = source_density(y);
    if (!(den > 0.0)) {
        std::ostringstream msg;
        msg << "target density " << num << " at (" << y(0) << ", " << y(1) << ") where source density is zero";
        fail(ErrorKind::Data, "unsupported_target_label", msg.str());
    }
    return num / den;
}

WeightVector::WeightVector(Vector q) : q_(std::move(q)) {
    if (q_.size() == 0) fail(ErrorKind::Data, "empty_weights", "weight vector is empty");
    if (!q_.allFinite() || q_.minCoeff() < 0.0) fail(ErrorKind::Data, "bad_weights", "weights must be finite and nonnegative");
    if (!(q_.maxCoeff() > 0.0)) fail(ErrorKind::Data, "disjoint_supports", "all weights are zero");
    const double s = q_.sum();
    if (std::abs(s - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "weights sum to " << s << ", expected 1";
        fail(ErrorKind::Data, "bad_weights", msg.str());
    }
}

WeightVector WeightVector::uniform(Eigen::Index n) {
    if (n <= 0) fail(ErrorKind::Data, "empty_weights", "uniform weight vector needs n >= 1");
    return WeightVector(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

double WeightVector::entropy() const {
    double h = 0.0;
    for (Eigen::Index i = 0; i < q_.size(); ++i) {
        if (q_(i) > 0.0) h -= q_(i) * std::log(q_(i));
    }
    return h;
}

WeightVector normalize_weights(const Vector &w) {
    if (w.size() == 0) fail(ErrorKind::Data, "empty_weights", "no weights to normalize");
    const double s = w.sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
        fail(ErrorKind::Data, "disjoint_supports", "no source label has positive reweighted density");
    }
    Vector q = w / s;
    // Push the rounding residue into the largest entry so the sum is 1 to the last ulp or so.
    Eigen::Index imax = 0;
    q.maxCoeff(&imax);
    q(imax) += 1.0 - q.sum();
    return WeightVector(std::move(q));
}

WeightVector reweight_vector(const Matrix &source_labels, const TruncGauss &target) {
    if (source_labels.cols() != 2) fail(ErrorKind::Data, "bad_shape", "reweight_vector: labels must have two columns");
    Vector w(source_labels.rows());
    for (Eigen::Index i = 0; i < source_labels.rows(); ++i) w(i) = target.pdf(source_labels.row(i).transpose());
    return normalize_weights(w);
}

Matrix tgau_sample(const TruncGaussParams &p, std::uint64_t seed, Eigen::Index n) {
    const double mass = rect_mass(p);
    if (mass < 1e-6) {
        std::ostringstream msg;
        msg << "rejection acceptance rate " << mass << " is below 1e-6";
        fail(ErrorKind::Numerical, "low_acceptance", msg.str());
    }
    const Mat2 chol = p.sigma.llt().matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(n, 2);
    const double budget = 50.0 * static_cast<double>(n) / mass + 1000.0;
    double attempts = 0.0;
    Eigen::Index filled = 0;
    while (filled < n) {
        if (++attempts > budget) fail(ErrorKind::Numerical, "low_acceptance", "tgau_sample: attempt budget exhausted");
        const Vec2 z(normal(rng), normal(rng));
        const Vec2 y = p.mu + chol * z;
        if (p.inside(y)) out.row(filled++) = y.transpose();
    }
    return out;
}

std::string to_record(const TruncGaussParams &p) {
    std::ostringstream os;
    os << "mu_yaw = " << format_double(p.mu(0)) << "\n"
       << "mu_pitch = " << format_double(p.mu(1)) << "\n"
       << "sigma_yaw_yaw = " << format_double(p.sigma(0, 0)) << "\n"
       << "sigma_yaw_pitch = " << format_double(p.sigma(0, 1)) << "\n"
       << "sigma_pitch_pitch = " << format_double(p.sigma(1, 1)) << "\n"
       << "a_lo = " << format_double(p.a.lo) << "\n"
       << "a_hi = " << format_double(p.a.hi) << "\n"
       << "b_lo = " << format_double(p.b.lo) << "\n"
       << "b_hi = " << format_double(p.b.hi) << "\n";
    return os.str();
}

TruncGaussParams params_from_record(const std::string &text) {
    std::map<std::string, double *> slots;
    TruncGaussParams p;
    double off = 0.0;
    slots["mu_yaw"] = &p.mu(0);
    slots["mu_pitch"] = &p.mu(1);
    slots["sigma_yaw_yaw"] = &p.sigma(0, 0);
    slots["sigma_yaw_pitch"] = &off;
    slots["sigma_pitch_pitch"] = &p.sigma(1, 1);
    slots["a_lo"] = &p.a.lo;
    slots["a_hi"] = &p.a.hi;
    slots["b_lo"] = &p.b.lo;
    slots["b_hi"] = &p.b.hi;
    std::map<std::string, bool> seen;
    for (const KeyValue &kv : parse_key_values(text, ErrorKind::Data)) {
        auto it = slots.find(kv.key);
        if (it == slots.end()) {
            fail(ErrorKind::Data, "unknown_key", "label record line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
        }
        *it->second = parse_double(kv.value, kv.key, ErrorKind::Data);
        seen[kv.key] = true;
    }
    for (const auto &[key, slot] : slots) {
        if (!seen.count(key)) fail(ErrorKind::Data, "missing_key", "label record is missing '" + key + "'");
    }
    p.sigma(0, 1) = p.sigma(1, 0) = off;
    validate(p);
    return p;
}

}  // namespace glsge::label

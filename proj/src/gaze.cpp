#include "glsge/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "glsge/error.hpp"

namespace glsge::gaze {

Eigen::Vector3d gaze_to_vec(double yaw, double pitch) {
    if (!std::isfinite(yaw) || !std::isfinite(pitch)) fail(ErrorKind::Data, "non_finite", "gaze angles must be finite");
    if (std::abs(pitch) > std::numbers::pi / 2.0) {
        fail(ErrorKind::Data, "pitch_out_of_range", "pitch " + std::to_string(pitch) + " outside [-pi/2, pi/2]");
    }
    const double cp = std::cos(pitch);
    return {cp * std::sin(yaw), std::sin(pitch), cp * std::cos(yaw)};
}

double angular_error(const Eigen::Vector2d &pred, const Eigen::Vector2d &truth) {
    const double c = gaze_to_vec(pred(0), pred(1)).dot(gaze_to_vec(truth(0), truth(1)));
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

Vector angular_errors(const Matrix &pred, const Matrix &truth) {
    if (pred.rows() != truth.rows() || pred.cols() != 2 || truth.cols() != 2) {
        fail(ErrorKind::Data, "dim_mismatch", "angular_errors: expected matching n x 2 matrices");
    }
    Vector out(pred.rows());
    for (Eigen::Index i = 0; i < pred.rows(); ++i) out(i) = angular_error(pred.row(i).transpose(), truth.row(i).transpose());
    return out;
}

}  // namespace glsge::gaze

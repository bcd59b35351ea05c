#pragma once

#include <Eigen/Dense>

#include "glsge/linalg.hpp"

namespace glsge::gaze {

/// Unit direction for (yaw, pitch) in radians:
///   v = (cos p sin y, sin p, cos p cos y).
/// Rejects |pitch| > pi/2 and non-finite angles.
[[nodiscard]] Eigen::Vector3d gaze_to_vec(double yaw, double pitch);

/// Great-circle angle between the two gaze directions, in degrees, in [0, 180].
[[nodiscard]] double angular_error(const Eigen::Vector2d &pred, const Eigen::Vector2d &truth);

/// Row-wise angular errors for n x 2 (yaw, pitch) matrices.
[[nodiscard]] Vector angular_errors(const Matrix &pred, const Matrix &truth);

}  // namespace glsge::gaze

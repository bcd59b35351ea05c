#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glsge/linalg.hpp"

namespace glsge::model {

enum class FeatureMap {
    Linear,  // z = W1 x + b1
    Mlp,     // z = W2 tanh(W1 x + b1) + b2
};

[[nodiscard]] std::string feature_map_name(FeatureMap f);
[[nodiscard]] FeatureMap feature_map_from_name(const std::string &name);

/// Feature map g followed by a linear gaze head h: z -> (yaw, pitch).
/// A value type; training produces new snapshots.
struct ShallowModel {
    FeatureMap kind = FeatureMap::Mlp;
    Eigen::Index input_dim = 0;
    Eigen::Index hidden = 0;  // Mlp only
    Eigen::Index embed_dim = 0;
    std::uint64_t seed = 0;

    Matrix w1;  // hidden x input (Mlp) or embed x input (Linear)
    Vector b1;
    Matrix w2;  // embed x hidden, Mlp only
    Vector b2;
    Matrix wh;  // 2 x embed
    Vector bh;  // 2

    /// Glorot-uniform weights, zero biases.
    [[nodiscard]] static ShallowModel init(FeatureMap kind, Eigen::Index input_dim, Eigen::Index hidden,
                                           Eigen::Index embed_dim, std::uint64_t seed);

    [[nodiscard]] Eigen::Index num_params() const;
    /// Layout: w1 (row-major), b1, [w2 (row-major), b2], wh (row-major), bh.
    [[nodiscard]] Vector params() const;
    void set_params(const Vector &theta);
    /// Half-open ranges of each parameter block inside params().
    [[nodiscard]] std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> blocks() const;
};

void validate(const ShallowModel &m);

struct ForwardPass {
    Matrix hidden_act;  // tanh activations (Mlp only)
    Matrix z;
    Matrix pred;
};

/// Row-wise forward pass over n x input_dim features.
[[nodiscard]] ForwardPass forward(const ShallowModel &m, const Matrix &x);

/// h(g(x)) only.
[[nodiscard]] Matrix predict(const ShallowModel &m, const Matrix &x);

/// Parameter gradient from upstream gradients on Z (n x embed) and predictions (n x 2).
[[nodiscard]] Vector backward(const ShallowModel &m, const Matrix &x, const ForwardPass &fp, const Matrix &dz,
                              const Matrix &dpred);

/// Checkpoint text format, version 1:
///   glsge-model 1
///   feature_map <linear|mlp>
///   input_dim <d>
///   hidden <w>
///   embed_dim <m>
///   seed <s>
///   then per block "<name> <rows> <cols>" followed by one row of values per line.
[[nodiscard]] std::string to_checkpoint(const ShallowModel &m);
[[nodiscard]] ShallowModel from_checkpoint(const std::string &text);

}  // namespace glsge::model

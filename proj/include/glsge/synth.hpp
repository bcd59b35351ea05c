#pragma once

#include <cstdint>

#include "glsge/dataio.hpp"
#include "glsge/label_model.hpp"

// Synthetic gaze-like benchmark with separately controllable label shift and
// conditional shift.
//
// Features are x = A_dom lift(y) + b_dom + noise with
// lift(y) = (y1, y2, sin y1, sin y2, y1 y2, 1).  The first `feature_dim -
// shortcut_dims` rows of A are shared by both domains.  The remaining "shortcut"
// rows are cleaner in the source; in the target they blend toward a copy with the
// yaw and pitch columns swapped (fully swapped at cond_shift = 1), so a
// source-fitted model that leans on them degrades under conditional shift while an
// invariant predictor still exists.  The default source is close to uniform on its
// rectangle and the default target is a narrow Gaussian inside it.
namespace glsge::synth {

struct SynthConfig {
    Eigen::Index feature_dim = 12;
    Eigen::Index shortcut_dims = 4;
    Eigen::Index n_source = 500;
    Eigen::Index n_target = 500;
    std::uint64_t seed = 1;
    double noise = 0.1;           // core-dimension noise std
    double shortcut_noise = 0.02; // shortcut-dimension noise std
    double cond_shift = 1.5;
    label::TruncGaussParams source = default_source();
    label::TruncGaussParams target = default_target();

    [[nodiscard]] static label::TruncGaussParams default_source();
    [[nodiscard]] static label::TruncGaussParams default_target();
};

void validate(const SynthConfig &cfg);

/// splitmix64 of (seed, stream); streams keep labels, maps and noise independent.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// lift(y) for each row of n x 2 labels.
[[nodiscard]] Matrix lift(const Matrix &labels);

struct DomainMaps {
    Matrix a_source;  // d x 6
    Vector b_source;
    Matrix a_target;
    Vector b_target;
};

[[nodiscard]] DomainMaps make_maps(const SynthConfig &cfg);

struct SynthData {
    data::DomainSet source;
    data::DomainSet target;  // labels kept for evaluation only
};

[[nodiscard]] SynthData gen_synthetic(const SynthConfig &cfg);

}  // namespace glsge::synth

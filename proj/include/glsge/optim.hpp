#pragma once

#include <string>

#include "glsge/linalg.hpp"

namespace glsge::optim {

enum class OptimizerKind { Adam, Sgd };

[[nodiscard]] std::string optimizer_name(OptimizerKind k);
[[nodiscard]] OptimizerKind optimizer_from_name(const std::string &name);

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First-order optimizer over a flat parameter vector.  Plain gradient descent keeps
/// no state; Adam keeps bias-corrected moment estimates.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, Eigen::Index n_params, AdamSettings adam = {});

    /// theta <- theta - step(grad) at learning rate `lr`.
    void step(Vector &theta, const Vector &grad, double lr);

    [[nodiscard]] long steps_taken() const { return t_; }

private:
    OptimizerKind kind_;
    AdamSettings adam_;
    Vector m_;
    Vector v_;
    long t_ = 0;
};

/// base * (1 + cos(pi * step / total)) / 2 for step in [0, total].
[[nodiscard]] double cosine_lr(double base, long step, long total);

}  // namespace glsge::optim

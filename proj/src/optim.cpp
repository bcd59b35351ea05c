#include "glsge/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "glsge/error.hpp"

namespace glsge::optim {

std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_name(const std::string &name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "sgd") return OptimizerKind::Sgd;
    fail(ErrorKind::Config, "bad_optimizer", "unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(OptimizerKind kind, Eigen::Index n_params, AdamSettings adam)
    : kind_(kind), adam_(adam), m_(Vector::Zero(n_params)), v_(Vector::Zero(n_params)) {}

void Optimizer::step(Vector &theta, const Vector &grad, double lr) {
    if (theta.size() != m_.size() || grad.size() != m_.size()) {
        fail(ErrorKind::Data, "dim_mismatch", "optimizer step: parameter count changed");
    }
    ++t_;
    if (kind_ == OptimizerKind::Sgd) {
        theta -= lr * grad;
        return;
    }
    m_ = adam_.beta1 * m_ + (1.0 - adam_.beta1) * grad;
    v_ = adam_.beta2 * v_ + (1.0 - adam_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(t_));
    theta.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + adam_.eps);
}

double cosine_lr(double base, long step, long total) {
    if (total <= 0) return base;
    const double frac = static_cast<double>(std::min(step, total)) / static_cast<double>(total);
    return 0.5 * base * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace glsge::optim

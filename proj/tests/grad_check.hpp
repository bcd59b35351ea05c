#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "glsge/objective.hpp"
#include "glsge/oracle.hpp"

namespace glsge::testing {

struct BlockError {
    std::string block;
    double rel_error = 0.0;
};

/// A small one-hidden-layer problem whose residuals all sit away from the L1 kink.
struct GradProblem {
    model::ShallowModel model;
    objective::LossContext ctx;
};

inline GradProblem make_grad_problem(std::uint64_t seed, double lambda) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto draw = [&](Eigen::Index r, Eigen::Index c, double s) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = s * nd(rng);
        }
        return m;
    };
    const Eigen::Index n = 10, d = 5;
    for (;;) {
        GradProblem p;
        p.model = model::ShallowModel::init(model::FeatureMap::Mlp, d, 6, 3, seed);
        Vector theta = p.model.params();
        theta += draw(theta.size(), 1, 0.2).col(0);
        p.model.set_params(theta);
        p.ctx.xs = draw(n, d, 1.0);
        p.ctx.ys = draw(n, 2, 0.3);
        p.ctx.xt = draw(n, d, 1.0).array() + 0.3;
        p.ctx.yt = draw(n, 2, 0.3);
        Vector c = draw(n, 1, 1.0).col(0).cwiseAbs().array() + 0.2;
        p.ctx.task_coef = c / c.sum();
        p.ctx.q = label::normalize_weights(draw(n, 1, 1.0).col(0).cwiseAbs().array() + 0.2);
        p.ctx.lambda = lambda;
        p.ctx.epsilon = 1e-2;
        p.ctx.kz = kernels::KernelSpec::rbf(1.5);
        p.ctx.ky = kernels::KernelSpec::rbf(0.5);
        const Matrix r = model::predict(p.model, p.ctx.xs) - p.ctx.ys;
        if (r.cwiseAbs().minCoeff() > 1e-2) return p;
    }
}

/// Relative error ||g - g_fd|| / max(||g_fd||, 1e-8) for each parameter block.
inline std::vector<BlockError> gradient_block_errors(const GradProblem &p) {
    const auto an = objective::analytic_gradient(p.model, p.ctx).grad;
    const Vector fd = oracle::fd_gradient(
        [&](const Vector &theta) {
            auto m = p.model;
            m.set_params(theta);
            return objective::total_loss(m, p.ctx).total;
        },
        p.model.params(), 1e-5);
    std::vector<BlockError> out;
    for (const auto &[name, range] : p.model.blocks()) {
        const Eigen::Index len = range.second - range.first;
        const double num = (an.segment(range.first, len) - fd.segment(range.first, len)).norm();
        const double den = std::max(fd.segment(range.first, len).norm(), 1e-8);
        out.push_back({name, num / den});
    }
    return out;
}

}  // namespace glsge::testing

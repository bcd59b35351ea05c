#include <cmath>

#include <gtest/gtest.h>

#include "glsge/error.hpp"
#include "glsge/objective.hpp"
#include "grad_check.hpp"

using namespace glsge;
using namespace glsge::objective;

TEST(WeightedL1, HandCases) {
    Matrix pred(2, 2), labels(2, 2);
    pred << 0.1, 0.2, -0.3, 0.0;
    labels << 0.0, 0.0, 0.0, 0.5;
    Vector c(2);
    c << 0.5, 0.5;
    EXPECT_NEAR(weighted_l1(pred, labels, c), 0.5 * 0.3 + 0.5 * 0.8, 1e-15);
    c << 1.0, 0.0;
    EXPECT_NEAR(weighted_l1(pred, labels, c), 0.3, 1e-15);
    EXPECT_THROW((void)weighted_l1(pred, labels, Vector::Ones(3)), Error);
}

TEST(TaskCoefficients, NormalizedAndRaw) {
    label::TruncGaussParams p;
    p.sigma << 1.0, 0.0, 0.0, 1.0;
    p.a = {-1.0, 1.0};
    p.b = {-1.0, 1.0};
    const label::TruncGauss t(p);
    Matrix y(3, 2);
    y << 0.0, 0.0, 0.5, -0.5, 2.0, 0.0;
    const Vector n = task_coefficients(y, t, WeightMode::Normalized);
    EXPECT_NEAR(n.sum(), 1.0, 1e-14);
    EXPECT_EQ(n(2), 0.0);
    const Vector r = task_coefficients(y, t, WeightMode::Raw);
    EXPECT_NEAR(r(0), t.pdf({0.0, 0.0}), 1e-15);
    EXPECT_NEAR(n(0) / n(1), r(0) / r(1), 1e-12);
    Matrix outside(1, 2);
    outside << 3.0, 3.0;
    EXPECT_THROW((void)task_coefficients(outside, t, WeightMode::Raw), Error);
    EXPECT_EQ(weight_mode_from_name(weight_mode_name(WeightMode::Raw)), WeightMode::Raw);
}

TEST(TotalLoss, LambdaZeroIsTaskOnly) {
    auto p = glsge::testing::make_grad_problem(3, 0.0);
    const auto v = total_loss(p.model, p.ctx);
    EXPECT_EQ(v.total, v.task);
    EXPECT_NEAR(v.task, weighted_l1(model::predict(p.model, p.ctx.xs), p.ctx.ys, p.ctx.task_coef), 1e-15);
    p.ctx.lambda = 2.0;
    const auto w = total_loss(p.model, p.ctx);
    EXPECT_NEAR(w.total, w.task + 2.0 * w.report.cond_loss, 1e-12);
}

TEST(AnalyticGradient, MatchesFiniteDifferences) {
    for (const double lambda : {0.0, 1.0}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            for (const auto &e : glsge::testing::gradient_block_errors(glsge::testing::make_grad_problem(seed, lambda))) {
                EXPECT_LE(e.rel_error, 1e-4) << "lambda " << lambda << " seed " << seed << " block " << e.block;
            }
        }
    }
}

TEST(LossContext, Validation) {
    auto p = glsge::testing::make_grad_problem(4, 1.0);
    p.ctx.lambda = -1.0;
    EXPECT_THROW(validate(p.ctx), Error);
    p.ctx.lambda = 1.0;
    p.ctx.xt = p.ctx.xt.topRows(5);
    p.ctx.yt = p.ctx.yt.topRows(5);
    EXPECT_THROW(validate(p.ctx), Error);
}

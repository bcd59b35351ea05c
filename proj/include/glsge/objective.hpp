#pragma once

#include "glsge/discrepancy.hpp"
#include "glsge/kernels.hpp"
#include "glsge/label_model.hpp"
#include "glsge/model.hpp"

// Training objective: reweighted L1 task loss plus lambda times the conditional
// alignment loss, evaluated on Z = g(X).
namespace glsge::objective {

enum class WeightMode {
    Normalized,  // densities scaled to batch mean 1
    Raw,         // densities as evaluated
};

[[nodiscard]] std::string weight_mode_name(WeightMode m);
[[nodiscard]] WeightMode weight_mode_from_name(const std::string &name);

/// Target predictions h(g(x)); treated as constants by the gradient.
[[nodiscard]] Matrix pseudo_labels(const model::ShallowModel &m, const Matrix &target_features);

/// Per-sample coefficients c_i of the task loss sum_i c_i ||r_i||_1.  Normalized mode
/// uses mean-1 densities divided by n, so uniform densities give the mean L1.
[[nodiscard]] Vector task_coefficients(const Matrix &source_labels, const label::TruncGauss &target, WeightMode mode);

/// sum_i c_i ||pred_i - y_i||_1.
[[nodiscard]] double weighted_l1(const Matrix &pred, const Matrix &labels, const Vector &coef);

[[nodiscard]] double task_loss_w(const model::ShallowModel &m, const Matrix &source_features, const Matrix &source_labels,
                                 const label::TruncGaussParams &target_params, WeightMode mode = WeightMode::Normalized);

/// Everything total_loss needs besides the model.  The target labels are pseudo-labels
/// fixed for the duration of a gradient step.
struct LossContext {
    Matrix xs;
    Matrix ys;
    Matrix xt;
    Matrix yt;
    Vector task_coef;  // length n_s
    label::WeightVector q = label::WeightVector::uniform(1);
    double lambda = 1.0;
    double epsilon = discrepancy::kDefaultEpsilon;
    kernels::KernelSpec kz;
    kernels::KernelSpec ky;
    discrepancy::CondForm form = discrepancy::CondForm::Distance;
};

void validate(const LossContext &ctx);

struct LossValue {
    double task = 0.0;
    double total = 0.0;
    discrepancy::DiscrepancyReport report;  // zeros when lambda = 0
};

[[nodiscard]] LossValue total_loss(const model::ShallowModel &m, const LossContext &ctx);

struct LossGradient {
    LossValue value;
    Vector grad;
};

/// total_loss and its gradient over model::ShallowModel::params().  The L1 subgradient at a
/// zero residual is 0.  Non-finite gradients throw Numerical/"non_finite".
[[nodiscard]] LossGradient analytic_gradient(const model::ShallowModel &m, const LossContext &ctx);

}  // namespace glsge::objective

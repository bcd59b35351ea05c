#include "glsge/objective.hpp"

#include "glsge/error.hpp"

namespace glsge::objective {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

bool cond_active(const LossContext &ctx) { return ctx.lambda != 0.0; }

}  // namespace

std::string weight_mode_name(WeightMode m) { return m == WeightMode::Raw ? "raw" : "normalized"; }

WeightMode weight_mode_from_name(const std::string &name) {
    if (name == "normalized") return WeightMode::Normalized;
    if (name == "raw") return WeightMode::Raw;
    fail(ErrorKind::Config, "bad_weight_mode", "unknown weight mode '" + name + "'");
}

Matrix pseudo_labels(const model::ShallowModel &m, const Matrix &target_features) {
    return model::predict(m, target_features);
}

Vector task_coefficients(const Matrix &source_labels, const label::TruncGauss &target, WeightMode mode) {
    if (mode == WeightMode::Normalized) return label::reweight_vector(source_labels, target).values();
    Vector p(source_labels.rows());
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = target.pdf(source_labels.row(i).transpose());
    if (!(p.sum() > 0.0)) fail(ErrorKind::Data, "disjoint_supports", "no source label has positive target density");
    return p;
}

double weighted_l1(const Matrix &pred, const Matrix &labels, const Vector &coef) {
    if (pred.rows() != labels.rows() || pred.cols() != labels.cols() || coef.size() != pred.rows()) {
        fail(ErrorKind::Data, "dim_mismatch", "weighted_l1: inconsistent shapes");
    }
    return coef.dot((pred - labels).cwiseAbs().rowwise().sum());
}

double task_loss_w(const model::ShallowModel &m, const Matrix &source_features, const Matrix &source_labels,
                   const label::TruncGaussParams &target_params, WeightMode mode) {
    const label::TruncGauss target(target_params);
    return weighted_l1(model::predict(m, source_features), source_labels,
                       task_coefficients(source_labels, target, mode));
}

void validate(const LossContext &ctx) {
    if (ctx.xs.rows() != ctx.ys.rows() || ctx.ys.cols() != 2 || ctx.task_coef.size() != ctx.xs.rows()) {
        fail(ErrorKind::Data, "dim_mismatch", "loss context: source features, labels and coefficients disagree");
    }
    if (!(ctx.lambda >= 0.0)) fail(ErrorKind::Config, "out_of_range", "lambda must be >= 0");
    if (!cond_active(ctx)) return;
    if (ctx.xt.rows() != ctx.yt.rows() || ctx.yt.cols() != 2 || ctx.q.size() != ctx.xs.rows()) {
        fail(ErrorKind::Data, "dim_mismatch", "loss context: target rows, pseudo-labels or q disagree");
    }
    if (ctx.xs.rows() != ctx.xt.rows()) {
        fail(ErrorKind::Data, "unequal_batches", "source and target minibatches must have equal size");
    }
}

LossValue total_loss(const model::ShallowModel &m, const LossContext &ctx) {
    validate(ctx);
    LossValue out;
    const auto fps = model::forward(m, ctx.xs);
    out.task = weighted_l1(fps.pred, ctx.ys, ctx.task_coef);
    out.total = out.task;
    if (!cond_active(ctx)) return out;
    const auto fpt = model::forward(m, ctx.xt);
    const auto bundle = kernels::make_bundle(fps.z, fpt.z, ctx.ys, ctx.yt, ctx.kz, ctx.ky);
    out.report = discrepancy::cond_loss(bundle, ctx.q, ctx.epsilon, ctx.form);
    out.total += ctx.lambda * out.report.cond_loss;
    return out;
}

LossGradient analytic_gradient(const model::ShallowModel &m, const LossContext &ctx) {
    validate(ctx);
    LossGradient out;
    const auto fps = model::forward(m, ctx.xs);
    const Matrix resid = fps.pred - ctx.ys;
    out.value.task = weighted_l1(fps.pred, ctx.ys, ctx.task_coef);
    out.value.total = out.value.task;

    Matrix dpred_s = resid.unaryExpr(&sign);
    dpred_s.array().colwise() *= ctx.task_coef.array();

    if (!cond_active(ctx)) {
        out.grad = model::backward(m, ctx.xs, fps, Matrix::Zero(fps.z.rows(), fps.z.cols()), dpred_s);
    } else {
        const auto fpt = model::forward(m, ctx.xt);
        const auto bundle = kernels::make_bundle(fps.z, fpt.z, ctx.ys, ctx.yt, ctx.kz, ctx.ky);
        const auto eval = discrepancy::cond_loss_with_grad(bundle, ctx.q, ctx.epsilon, ctx.form);
        out.value.report = eval.report;
        out.value.total += ctx.lambda * eval.report.cond_loss;

        const auto gss = kernels::gram_backward(fps.z, fps.z, ctx.kz, bundle.kz_ss, eval.grad.d_ss);
        const auto gtt = kernels::gram_backward(fpt.z, fpt.z, ctx.kz, bundle.kz_tt, eval.grad.d_tt);
        const auto gts = kernels::gram_backward(fpt.z, fps.z, ctx.kz, bundle.kz_ts, eval.grad.d_ts);
        const Matrix dzs = ctx.lambda * (gss.da + gss.db + gts.db);
        const Matrix dzt = ctx.lambda * (gtt.da + gtt.db + gts.da);
        out.grad = model::backward(m, ctx.xs, fps, dzs, dpred_s) +
                   model::backward(m, ctx.xt, fpt, dzt, Matrix::Zero(fpt.pred.rows(), 2));
    }
    if (!out.grad.allFinite()) fail(ErrorKind::Numerical, "non_finite", "analytic gradient is not finite");
    return out;
}

}  // namespace glsge::objective

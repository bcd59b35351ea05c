#pragma once

#include <string>

#include "glsge/kernels.hpp"
#include "glsge/label_model.hpp"

// Conditional operator discrepancy between a (reweighted) source conditional
// P(Z | Y^w) and the target conditional P(Z | Y), estimated with Gram matrices.
//
// The estimate splits into a conditional-mean part (cmmd_w) and a
// conditional-covariance part (ckb_w).  Every target-side term is the q = 1/n
// specialization of the source formula, which is why the target inverses carry the
// eps * n shift.
namespace glsge::discrepancy {

inline constexpr double kDefaultEpsilon = 1e-3;

/// How the PCOD and marginal distances enter the conditional loss.
enum class CondForm {
    Distance,  // sqrt(pcod_sq) + sqrt(mmd_sq)
    Squared,   // pcod_sq + mmd_sq
};

struct DiscrepancyReport {
    double cmmd_w = 0.0;
    double ckb_w = 0.0;
    double pcod_sq = 0.0;  // cmmd_w + ckb_w
    double mmd_sq = 0.0;
    double pcod = 0.0;      // PCOD term on the CondForm scale
    double marginal = 0.0;  // marginal term on the CondForm scale
    double cond_loss = 0.0; // pcod + marginal
    double epsilon = kDefaultEpsilon;
};

/// Flat `key = value` record of every field.
[[nodiscard]] std::string to_record(const DiscrepancyReport &r);

[[nodiscard]] double cmmd_w(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps);

/// Requires equal source and target sizes.
[[nodiscard]] double ckb_w(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps);

/// Square-root factors of the conditional covariance products.
///   target_product = H_n eps (G^t_Y / n + eps I)^{-1} H_n = M M^T
///   source_product = B eps (G^s_{Y^w} + eps I)^{-1} B^T = M^w M^w^T
/// so that the cross-covariance trace is ||M^T K^{ts}_Z M^w||_* / sqrt(n).
struct CovarianceFactors {
    Matrix m;
    Matrix m_w;
    Matrix target_product;
    Matrix source_product;
};
[[nodiscard]] CovarianceFactors covariance_factors(const kernels::GramBundle &bundle, const label::WeightVector &q,
                                                   double eps);

/// cmmd_w + ckb_w; cond-loss fields are left at zero.
[[nodiscard]] DiscrepancyReport pcod(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps);

/// Unweighted COD computed from centered Grams directly (no B, no Q); equals pcod at
/// uniform q.  Source and target sizes may differ.
[[nodiscard]] double cod(const kernels::GramBundle &bundle, double eps);

/// Biased V-statistic MMD^2 of the feature samples.
[[nodiscard]] double mmd_sq(const Matrix &kz_ss, const Matrix &kz_tt, const Matrix &kz_ts);

[[nodiscard]] DiscrepancyReport cond_loss(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps,
                                          CondForm form = CondForm::Distance);

/// d cond_loss / d K_Z for each feature block; the label Grams are held fixed.
struct FeatureGramGrad {
    Matrix d_ss;
    Matrix d_tt;
    Matrix d_ts;
};

struct CondLossEval {
    DiscrepancyReport report;
    FeatureGramGrad grad;
};

[[nodiscard]] CondLossEval cond_loss_with_grad(const kernels::GramBundle &bundle, const label::WeightVector &q,
                                               double eps, CondForm form = CondForm::Distance);

}  // namespace glsge::discrepancy

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glsge/dataio.hpp"
#include "glsge/discrepancy.hpp"
#include "glsge/kernels.hpp"
#include "glsge/label_model.hpp"
#include "glsge/model.hpp"
#include "glsge/objective.hpp"
#include "glsge/optim.hpp"
#include "glsge/synth.hpp"

namespace glsge::trainer {

struct TrainerConfig {
    double lambda = 1.0;
    double epsilon = discrepancy::kDefaultEpsilon;
    double confidence = 0.7;
    label::RectStrategy rect_strategy = label::RectStrategy::AxisQuantile;
    int n_outer = 10;
    int n_inner = 5;
    double step_size = 2e-3;
    int batch = 100;
    std::uint64_t seed = 1;
    optim::OptimizerKind optimizer = optim::OptimizerKind::Adam;
    // rbf bandwidth <= 0 means: median heuristic, frozen at adaptation start.
    kernels::KernelSpec kz = kernels::KernelSpec::rbf(0.0);
    kernels::KernelSpec ky = kernels::KernelSpec::rbf(0.0);
    objective::WeightMode weight_mode = objective::WeightMode::Normalized;
    discrepancy::CondForm cond_form = discrepancy::CondForm::Distance;
    bool freeze_pseudo = false;   // pseudo-labels refreshed per outer step instead of per epoch
    bool reweight_task = true;    // L^w_src instead of L_src
    bool reweight_cond = true;    // q from the label model instead of uniform
    double jitter = 1e-6;

    model::FeatureMap model_kind = model::FeatureMap::Mlp;
    Eigen::Index hidden = 16;
    Eigen::Index embed_dim = 8;
    int pretrain_epochs = 300;
    double pretrain_step = 1e-2;

    int n_seeds = 5;
    std::vector<double> sweep_lambdas{0.1, 1.0, 10.0};
    std::vector<double> sweep_confidences{0.5, 0.7, 0.9};
};

void validate(const TrainerConfig &cfg);

struct Metrics {
    double l1_yaw = 0.0;    // radians
    double l1_pitch = 0.0;  // radians
    double l1_mean = 0.0;   // mean of the two axes
    double angular_deg = 0.0;
};

[[nodiscard]] Metrics evaluate(const model::ShallowModel &m, const data::DomainSet &labeled);

/// Fresh model from cfg.seed trained on the uniform L1 source loss; this is the
/// source-only baseline and the starting point for adaptation.
[[nodiscard]] model::ShallowModel pretrain_source(const data::DomainSet &source, const TrainerConfig &cfg);

struct OuterRecord {
    int outer = 0;
    label::TruncGaussParams params;
    double q_entropy = 0.0;  // mean over the step's minibatches
};

struct EpochRecord {
    int outer = 0;
    int inner = 0;
    double loss_task = 0.0;
    double loss_pcod = 0.0;
    double loss_marg = 0.0;
    double loss_total = 0.0;  // loss_task + lambda * (loss_pcod + loss_marg)
    double eval_l1 = 0.0;     // NaN when no evaluation labels were supplied
    double eval_deg = 0.0;
};

struct AdaptHistory {
    double bandwidth_z = 0.0;
    double bandwidth_y = 0.0;
    std::vector<OuterRecord> outer;
    std::vector<EpochRecord> epochs;

    /// Columns: outer,inner,loss_task,loss_pcod,loss_marg,loss_total,eval_l1,eval_deg.
    [[nodiscard]] std::string to_csv() const;
    /// One `[outer k]` block of label-model key-value records per outer step.
    [[nodiscard]] std::string label_trajectory() const;
};

struct AdaptResult {
    model::ShallowModel model;
    AdaptHistory history;
};

/// Alternates label-model estimation from pseudo-labels with n_inner epochs of
/// updates on the objective.  Target labels, if given, are used for history metrics
/// only.
[[nodiscard]] AdaptResult adapt(const data::DomainSet &source, const Matrix &target_features,
                                const model::ShallowModel &init, const TrainerConfig &cfg,
                                const std::optional<Matrix> &target_labels = std::nullopt);

struct Variant {
    std::string name;
    bool train = true;  // false: pretrained model as is
    bool reweight_task = false;
    bool use_cond = false;
    bool reweight_cond = false;
};

/// source_only, then the four loss variants L_src, L^w_src, L_src + PCOD(uniform q),
/// L^w_src + PCOD(reweighted q).
[[nodiscard]] std::vector<Variant> ablation_variants();

struct AblationRow {
    std::string variant;
    int seed = 0;
    Metrics metrics;
};

struct AblationSummary {
    std::string variant;
    double mean_deg = 0.0;
    double std_deg = 0.0;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    [[nodiscard]] std::vector<AblationSummary> summary() const;
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string summary_csv() const;
};

/// Seed k regenerates the synthetic data with synth.seed + k and trains with
/// cfg.seed + k.
[[nodiscard]] AblationTable run_ablation(const synth::SynthConfig &synth_cfg, const TrainerConfig &cfg);

/// Fixed data; seed k only changes initialization and minibatching.
[[nodiscard]] AblationTable run_ablation(const data::DomainSet &source, const data::DomainSet &target,
                                         const TrainerConfig &cfg);

struct SweepRow {
    double lambda = 0.0;
    double confidence = 0.0;
    double mean_deg = 0.0;
    double std_deg = 0.0;
};

/// Full method over the lambda x confidence grid, cfg.n_seeds runs per cell.
[[nodiscard]] std::vector<SweepRow> sweep(const synth::SynthConfig &synth_cfg, const TrainerConfig &cfg);
[[nodiscard]] std::string sweep_csv(const std::vector<SweepRow> &rows);

/// Sample mean and (n - 1) standard deviation; std is 0 for a single value.
[[nodiscard]] std::pair<double, double> mean_std(const std::vector<double> &v);

}  // namespace glsge::trainer

#include "glsge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "glsge/error.hpp"
#include "glsge/gaze.hpp"
#include "glsge/kv.hpp"

namespace glsge::trainer {

namespace {

constexpr std::uint64_t kBatchStream = 101;

using Index = Eigen::Index;

/// One epoch of `steps` batches of size b cut from a shuffled permutation that is
/// redrawn whenever it runs out.
std::vector<std::vector<Index>> plain_epoch(Index n, Index steps, Index b, std::mt19937_64 &rng) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t cursor = 0;
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(steps));
    for (auto &batch : out) {
        if (cursor + static_cast<std::size_t>(b) > perm.size()) {
            std::shuffle(perm.begin(), perm.end(), rng);
            cursor = 0;
        }
        batch.assign(perm.begin() + static_cast<std::ptrdiff_t>(cursor),
                     perm.begin() + static_cast<std::ptrdiff_t>(cursor + static_cast<std::size_t>(b)));
        cursor += static_cast<std::size_t>(b);
    }
    return out;
}

/// Source batches stratified on the target label support: rows with positive target
/// density are dealt round-robin over the batches (reused when there are fewer of
/// them than batches), the rest fill the remaining slots.  Every batch therefore has
/// a positive reweighted mass whenever any source row does.
std::vector<std::vector<Index>> stratified_epoch(const std::vector<bool> &in_support, Index steps, Index b,
                                                 std::mt19937_64 &rng) {
    std::vector<Index> plus;
    std::vector<Index> minus;
    for (std::size_t i = 0; i < in_support.size(); ++i) (in_support[i] ? plus : minus).push_back(static_cast<Index>(i));
    if (plus.empty() || minus.empty()) return plain_epoch(static_cast<Index>(in_support.size()), steps, b, rng);
    std::shuffle(plus.begin(), plus.end(), rng);
    std::shuffle(minus.begin(), minus.end(), rng);
    const auto n_plus = static_cast<Index>(plus.size());
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(steps));
    for (Index k = 0; k < steps; ++k) {
        auto &batch = out[static_cast<std::size_t>(k)];
        if (n_plus >= steps) {
            for (Index j = k; j < n_plus && static_cast<Index>(batch.size()) < b; j += steps) batch.push_back(plus[j]);
        } else {
            batch.push_back(plus[k % n_plus]);
        }
    }
    std::size_t cursor = 0;
    for (auto &batch : out) {
        while (static_cast<Index>(batch.size()) < b) {
            if (cursor == minus.size()) {
                std::shuffle(minus.begin(), minus.end(), rng);
                cursor = 0;
            }
            batch.push_back(minus[cursor++]);
        }
    }
    return out;
}

Matrix rows_of(const Matrix &m, const std::vector<Index> &idx) {
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
    return out;
}

kernels::KernelSpec freeze_bandwidth(kernels::KernelSpec spec, const Matrix &rows) {
    if (spec.family == kernels::Family::GaussianRbf && spec.bandwidth <= 0.0) spec.bandwidth = kernels::median_heuristic(rows);
    return spec;
}

[[noreturn]] void rethrow_at(const Error &e, int outer) {
    fail(e.kind(), e.code(), "outer step " + std::to_string(outer) + ": " + e.what());
}

void check_range(bool ok, const std::string &what) {
    if (!ok) fail(ErrorKind::Config, "out_of_range", what);
}

TrainerConfig variant_config(const TrainerConfig &cfg, const Variant &v) {
    TrainerConfig c = cfg;
    c.reweight_task = v.reweight_task;
    c.reweight_cond = v.reweight_cond;
    if (!v.use_cond) c.lambda = 0.0;
    return c;
}

}  // namespace

void validate(const TrainerConfig &cfg) {
    check_range(cfg.lambda >= 0.0 && std::isfinite(cfg.lambda), "lambda must be a finite value >= 0");
    check_range(cfg.epsilon > 0.0 && std::isfinite(cfg.epsilon), "epsilon must be > 0");
    check_range(cfg.confidence > 0.0 && cfg.confidence < 1.0, "confidence must be in (0, 1)");
    check_range(cfg.n_outer >= 1, "n_outer must be >= 1");
    check_range(cfg.n_inner >= 0, "n_inner must be >= 0");
    check_range(cfg.step_size > 0.0 && std::isfinite(cfg.step_size), "step_size must be > 0");
    check_range(cfg.batch >= 2, "batch must be >= 2");
    check_range(cfg.jitter >= 0.0, "jitter must be >= 0");
    check_range(cfg.hidden >= 1, "hidden must be >= 1");
    check_range(cfg.embed_dim >= 1, "embed_dim must be >= 1");
    check_range(cfg.pretrain_epochs >= 0, "pretrain_epochs must be >= 0");
    check_range(cfg.pretrain_step > 0.0, "pretrain_step must be > 0");
    check_range(cfg.n_seeds >= 1, "n_seeds must be >= 1");
    check_range(!cfg.sweep_lambdas.empty() && !cfg.sweep_confidences.empty(), "sweep grids must be non-empty");
    for (double l : cfg.sweep_lambdas) check_range(l >= 0.0, "sweep_lambdas entries must be >= 0");
    for (double c : cfg.sweep_confidences) check_range(c > 0.0 && c < 1.0, "sweep_confidences entries must be in (0, 1)");
    kernels::KernelSpec kz = cfg.kz;
    kernels::KernelSpec ky = cfg.ky;
    if (kz.family == kernels::Family::GaussianRbf && kz.bandwidth <= 0.0) kz.bandwidth = 1.0;
    if (ky.family == kernels::Family::GaussianRbf && ky.bandwidth <= 0.0) ky.bandwidth = 1.0;
    kernels::validate(kz);
    kernels::validate(ky);
}

Metrics evaluate(const model::ShallowModel &m, const data::DomainSet &labeled) {
    const Matrix &y = labeled.require_labels();
    const Matrix pred = model::predict(m, labeled.features);
    const Matrix abs = (pred - y).cwiseAbs();
    Metrics out;
    out.l1_yaw = abs.col(0).mean();
    out.l1_pitch = abs.col(1).mean();
    out.l1_mean = 0.5 * (out.l1_yaw + out.l1_pitch);
    out.angular_deg = gaze::angular_errors(pred, y).mean();
    return out;
}

model::ShallowModel pretrain_source(const data::DomainSet &source, const TrainerConfig &cfg) {
    validate(cfg);
    const Matrix &ys = source.require_labels();
    auto m = model::ShallowModel::init(cfg.model_kind, source.dim(), cfg.hidden, cfg.embed_dim, cfg.seed);
    objective::LossContext ctx;
    ctx.xs = source.features;
    ctx.ys = ys;
    ctx.task_coef = Vector::Constant(source.size(), 1.0 / static_cast<double>(source.size()));
    ctx.lambda = 0.0;
    optim::Optimizer opt(optim::OptimizerKind::Adam, m.num_params());
    Vector theta = m.params();
    for (int e = 0; e < cfg.pretrain_epochs; ++e) {
        const auto lg = objective::analytic_gradient(m, ctx);
        opt.step(theta, lg.grad, optim::cosine_lr(cfg.pretrain_step, e, cfg.pretrain_epochs));
        m.set_params(theta);
    }
    return m;
}

std::string AdaptHistory::to_csv() const {
    std::ostringstream os;
    os << "outer,inner,loss_task,loss_pcod,loss_marg,loss_total,eval_l1,eval_deg\n";
    for (const auto &e : epochs) {
        os << e.outer << ',' << e.inner << ',' << format_double(e.loss_task) << ',' << format_double(e.loss_pcod) << ','
           << format_double(e.loss_marg) << ',' << format_double(e.loss_total) << ',' << format_double(e.eval_l1) << ','
           << format_double(e.eval_deg) << '\n';
    }
    return os.str();
}

std::string AdaptHistory::label_trajectory() const {
    std::ostringstream os;
    for (const auto &o : outer) {
        os << "[outer " << o.outer << "]\n" << label::to_record(o.params) << "q_entropy = " << format_double(o.q_entropy) << "\n";
    }
    return os.str();
}

AdaptResult adapt(const data::DomainSet &source, const Matrix &target_features, const model::ShallowModel &init,
                  const TrainerConfig &cfg, const std::optional<Matrix> &target_labels) {
    validate(cfg);
    model::validate(init);
    const Matrix &ys_all = source.require_labels();
    const Matrix &xs_all = source.features;
    const Matrix &xt_all = target_features;
    if (xt_all.cols() != xs_all.cols() || init.input_dim != xs_all.cols()) {
        fail(ErrorKind::Data, "dim_mismatch", "adapt: source, target and model feature dims disagree");
    }
    if (xt_all.rows() < 2 || xs_all.rows() < 2) fail(ErrorKind::Data, "too_few_rows", "adapt needs >= 2 rows per domain");
    if (target_labels && (target_labels->rows() != xt_all.rows() || target_labels->cols() != 2)) {
        fail(ErrorKind::Data, "dim_mismatch", "adapt: evaluation labels do not match target rows");
    }

    AdaptResult out{init, {}};
    model::ShallowModel &m = out.model;
    AdaptHistory &hist = out.history;

    const Index ns = xs_all.rows();
    const Index nt = xt_all.rows();
    {
        Matrix z0(ns + nt, m.embed_dim);
        z0 << model::forward(m, xs_all).z, model::forward(m, xt_all).z;
        const auto kz = freeze_bandwidth(cfg.kz, z0);
        const auto ky = freeze_bandwidth(cfg.ky, ys_all);
        hist.bandwidth_z = kz.bandwidth;
        hist.bandwidth_y = ky.bandwidth;
    }
    objective::LossContext ctx;
    ctx.lambda = cfg.lambda;
    ctx.epsilon = cfg.epsilon;
    ctx.form = cfg.cond_form;
    ctx.kz = cfg.kz;
    ctx.ky = cfg.ky;
    if (ctx.kz.family == kernels::Family::GaussianRbf) ctx.kz.bandwidth = hist.bandwidth_z;
    if (ctx.ky.family == kernels::Family::GaussianRbf) ctx.ky.bandwidth = hist.bandwidth_y;

    const Index b = std::min<Index>({static_cast<Index>(cfg.batch), ns, nt});
    const Index steps_per_epoch = (std::max(ns, nt) + b - 1) / b;
    const long total_steps = static_cast<long>(cfg.n_outer) * cfg.n_inner * steps_per_epoch;
    std::mt19937_64 rng(synth::derive_seed(cfg.seed, kBatchStream));
    const Vector uniform_coef = Vector::Constant(b, 1.0 / static_cast<double>(b));
    optim::Optimizer opt(cfg.optimizer, m.num_params());
    Vector theta = m.params();
    long step = 0;

    for (int outer = 1; outer <= cfg.n_outer; ++outer) {
        Matrix yt_hat = objective::pseudo_labels(m, xt_all);
        OuterRecord rec;
        rec.outer = outer;
        std::optional<label::TruncGauss> target_model;
        try {
            rec.params = label::fit_trunc_gauss(yt_hat, cfg.confidence, cfg.rect_strategy, cfg.jitter);
            target_model.emplace(rec.params);
        } catch (const Error &e) {
            rethrow_at(e, outer);
        }
        double entropy_sum = 0.0;
        long entropy_count = 0;
        std::vector<bool> in_support(static_cast<std::size_t>(ns));
        for (Index i = 0; i < ns; ++i) in_support[static_cast<std::size_t>(i)] = target_model->params().inside(ys_all.row(i).transpose());

        for (int inner = 1; inner <= cfg.n_inner; ++inner) {
            if (!cfg.freeze_pseudo && inner > 1) yt_hat = objective::pseudo_labels(m, xt_all);
            double sum_task = 0.0;
            double sum_pcod = 0.0;
            double sum_marg = 0.0;
            const auto source_batches = stratified_epoch(in_support, steps_per_epoch, b, rng);
            const auto target_batches = plain_epoch(nt, steps_per_epoch, b, rng);
            for (Index s = 0; s < steps_per_epoch; ++s) {
                const auto &is = source_batches[static_cast<std::size_t>(s)];
                const auto &it = target_batches[static_cast<std::size_t>(s)];
                ctx.xs = rows_of(xs_all, is);
                ctx.ys = rows_of(ys_all, is);
                ctx.xt = rows_of(xt_all, it);
                ctx.yt = rows_of(yt_hat, it);
                try {
                    const auto qw = label::reweight_vector(ctx.ys, *target_model);
                    entropy_sum += qw.entropy();
                    ++entropy_count;
                    ctx.task_coef = cfg.reweight_task ? objective::task_coefficients(ctx.ys, *target_model, cfg.weight_mode)
                                                      : uniform_coef;
                    ctx.q = cfg.reweight_cond ? qw : label::WeightVector::uniform(b);
                } catch (const Error &e) {
                    rethrow_at(e, outer);
                }
                const auto lg = objective::analytic_gradient(m, ctx);
                if (!std::isfinite(lg.value.total)) {
                    std::ostringstream msg;
                    msg << "outer step " << outer << ", epoch " << inner << ", batch " << s
                        << ": non-finite loss (task=" << lg.value.task << ", pcod_sq=" << lg.value.report.pcod_sq
                        << ", mmd_sq=" << lg.value.report.mmd_sq << ")";
                    fail(ErrorKind::Numerical, "non_finite_loss", msg.str());
                }
                sum_task += lg.value.task;
                sum_pcod += lg.value.report.pcod;
                sum_marg += lg.value.report.marginal;
                opt.step(theta, lg.grad, optim::cosine_lr(cfg.step_size, step, total_steps));
                m.set_params(theta);
                ++step;
            }
            EpochRecord e;
            e.outer = outer;
            e.inner = inner;
            const auto k = static_cast<double>(steps_per_epoch);
            e.loss_task = sum_task / k;
            e.loss_pcod = sum_pcod / k;
            e.loss_marg = sum_marg / k;
            e.loss_total = e.loss_task + cfg.lambda * (e.loss_pcod + e.loss_marg);
            e.eval_l1 = std::numeric_limits<double>::quiet_NaN();
            e.eval_deg = std::numeric_limits<double>::quiet_NaN();
            if (target_labels) {
                data::DomainSet eval_set{xt_all, *target_labels};
                const auto metrics = evaluate(m, eval_set);
                e.eval_l1 = metrics.l1_mean;
                e.eval_deg = metrics.angular_deg;
            }
            hist.epochs.push_back(e);
        }
        rec.q_entropy = entropy_count ? entropy_sum / static_cast<double>(entropy_count) : 0.0;
        hist.outer.push_back(rec);
    }
    return out;
}

std::vector<Variant> ablation_variants() {
    return {
        {"source_only", false, false, false, false},
        {"L_src", true, false, false, false},
        {"Lw_src", true, true, false, false},
        {"L_src+PCOD_uniform", true, false, true, false},
        {"Lw_src+PCOD", true, true, true, true},
    };
}

std::pair<double, double> mean_std(const std::vector<double> &v) {
    if (v.empty()) return {0.0, 0.0};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::vector<AblationSummary> AblationTable::summary() const {
    std::vector<AblationSummary> out;
    for (const auto &v : ablation_variants()) {
        std::vector<double> vals;
        for (const auto &r : rows) {
            if (r.variant == v.name) vals.push_back(r.metrics.angular_deg);
        }
        if (vals.empty()) continue;
        const auto [mean, sd] = mean_std(vals);
        out.push_back({v.name, mean, sd});
    }
    return out;
}

std::string AblationTable::to_csv() const {
    std::ostringstream os;
    os << "variant,seed,l1_yaw,l1_pitch,l1_mean,angular_error_deg\n";
    for (const auto &r : rows) {
        os << r.variant << ',' << r.seed << ',' << format_double(r.metrics.l1_yaw) << ','
           << format_double(r.metrics.l1_pitch) << ',' << format_double(r.metrics.l1_mean) << ','
           << format_double(r.metrics.angular_deg) << '\n';
    }
    return os.str();
}

std::string AblationTable::summary_csv() const {
    std::ostringstream os;
    os << "variant,mean_deg,std_deg\n";
    for (const auto &s : summary()) os << s.variant << ',' << format_double(s.mean_deg) << ',' << format_double(s.std_deg) << '\n';
    return os.str();
}

namespace {

void ablate_one(const data::DomainSet &source, const data::DomainSet &target, const TrainerConfig &cfg, int seed_index,
                AblationTable &table) {
    TrainerConfig seeded = cfg;
    seeded.seed = cfg.seed + static_cast<std::uint64_t>(seed_index);
    const auto init = pretrain_source(source, seeded);
    for (const auto &v : ablation_variants()) {
        model::ShallowModel fitted = init;
        if (v.train) fitted = adapt(source, target.features, init, variant_config(seeded, v)).model;
        table.rows.push_back({v.name, seed_index, evaluate(fitted, target)});
    }
}

}  // namespace

AblationTable run_ablation(const synth::SynthConfig &synth_cfg, const TrainerConfig &cfg) {
    validate(cfg);
    AblationTable table;
    for (int k = 0; k < cfg.n_seeds; ++k) {
        synth::SynthConfig sc = synth_cfg;
        sc.seed = synth_cfg.seed + static_cast<std::uint64_t>(k);
        const auto d = synth::gen_synthetic(sc);
        ablate_one(d.source, d.target, cfg, k, table);
    }
    return table;
}

AblationTable run_ablation(const data::DomainSet &source, const data::DomainSet &target, const TrainerConfig &cfg) {
    validate(cfg);
    (void)target.require_labels();
    AblationTable table;
    for (int k = 0; k < cfg.n_seeds; ++k) ablate_one(source, target, cfg, k, table);
    return table;
}

std::vector<SweepRow> sweep(const synth::SynthConfig &synth_cfg, const TrainerConfig &cfg) {
    validate(cfg);
    const std::size_t nl = cfg.sweep_lambdas.size();
    const std::size_t nc = cfg.sweep_confidences.size();
    std::vector<std::vector<double>> errors(nl * nc);
    for (int k = 0; k < cfg.n_seeds; ++k) {
        synth::SynthConfig sc = synth_cfg;
        sc.seed = synth_cfg.seed + static_cast<std::uint64_t>(k);
        const auto d = synth::gen_synthetic(sc);
        TrainerConfig seeded = cfg;
        seeded.seed = cfg.seed + static_cast<std::uint64_t>(k);
        const auto init = pretrain_source(d.source, seeded);
        for (std::size_t i = 0; i < nl; ++i) {
            for (std::size_t j = 0; j < nc; ++j) {
                TrainerConfig cell = seeded;
                cell.lambda = cfg.sweep_lambdas[i];
                cell.confidence = cfg.sweep_confidences[j];
                const auto fitted = adapt(d.source, d.target.features, init, cell).model;
                errors[i * nc + j].push_back(evaluate(fitted, d.target).angular_deg);
            }
        }
    }
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < nl; ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            const auto [mean, sd] = mean_std(errors[i * nc + j]);
            rows.push_back({cfg.sweep_lambdas[i], cfg.sweep_confidences[j], mean, sd});
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow> &rows) {
    std::ostringstream os;
    os << "lambda,confidence,mean_deg,std_deg\n";
    for (const auto &r : rows) {
        os << format_double(r.lambda) << ',' << format_double(r.confidence) << ',' << format_double(r.mean_deg) << ','
           << format_double(r.std_deg) << '\n';
    }
    return os.str();
}

}  // namespace glsge::trainer

// glsge: command-line front end for synthetic generation, adaptation, ablation,
// discrepancy evaluation, label-model fitting, hyper-parameter sweeps and evaluation.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glsge/config.hpp"
#include "glsge/dataio.hpp"
#include "glsge/discrepancy.hpp"
#include "glsge/error.hpp"
#include "glsge/kv.hpp"
#include "glsge/model.hpp"
#include "glsge/synth.hpp"
#include "glsge/trainer.hpp"

namespace fs = std::filesystem;
using namespace glsge;

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    bool verbose = false;

    std::string source_path;
    std::string target_path;
    std::string truth_path;
    std::string model_path;
    std::string labels_path;
    std::string q_source = "uniform";
    std::optional<double> confidence;
};

config::Config load_config(const Options &o) {
    if (o.config_path.empty()) return config::parse_config_text("", o.overrides);
    return config::parse_config(o.config_path, o.overrides);
}

std::string out_path(const Options &o, const std::string &name) {
    fs::create_directories(o.out_dir);
    return (fs::path(o.out_dir) / name).string();
}

void log(const Options &o, const std::string &msg) {
    if (o.verbose) std::cerr << msg << '\n';
}

std::string metrics_record(const std::string &prefix, const trainer::Metrics &m) {
    return prefix + "angular_error_deg=" + format_double(m.angular_deg) + "\n" + prefix + "l1_yaw=" + format_double(m.l1_yaw) +
           "\n" + prefix + "l1_pitch=" + format_double(m.l1_pitch) + "\n" + prefix + "l1_mean=" + format_double(m.l1_mean) + "\n";
}

/// Source (labeled) and target (features, optional truth) from files, or from the
/// synthetic generator when no source path is given.
struct Inputs {
    data::DomainSet source;
    data::DomainSet target;
};

Inputs load_inputs(const Options &o, const config::Config &cfg, bool need_truth) {
    Inputs in;
    if (o.source_path.empty()) {
        auto d = synth::gen_synthetic(cfg.synth);
        in.source = std::move(d.source);
        in.target = std::move(d.target);
        return in;
    }
    if (o.target_path.empty()) fail(ErrorKind::Config, "missing_argument", "--target is required with --source");
    in.source = data::load_domain_csv(o.source_path, true);
    in.target = data::load_domain_csv(o.target_path, false);
    if (!o.truth_path.empty()) {
        const Matrix truth = data::load_label_csv(o.truth_path);
        if (truth.rows() != in.target.size()) fail(ErrorKind::Data, "dim_mismatch", "truth rows do not match target rows");
        in.target.labels = truth;
    } else if (need_truth) {
        fail(ErrorKind::Config, "missing_argument", "--truth is required for this command with file inputs");
    }
    if (in.source.dim() != in.target.dim()) fail(ErrorKind::Data, "dim_mismatch", "source and target feature dims differ");
    return in;
}

int cmd_synth(const Options &o) {
    const auto cfg = load_config(o);
    const auto d = synth::gen_synthetic(cfg.synth);
    data::save_domain_csv(d.source, out_path(o, "source.csv"));
    data::save_domain_csv({d.target.features, std::nullopt}, out_path(o, "target.csv"));
    data::save_domain_csv({Matrix(d.target.size(), 0), d.target.labels}, out_path(o, "truth.csv"));
    log(o, "wrote source.csv, target.csv, truth.csv to " + o.out_dir);
    return 0;
}

int cmd_adapt(const Options &o) {
    const auto cfg = load_config(o);
    const auto in = load_inputs(o, cfg, false);
    const auto init = o.model_path.empty() ? trainer::pretrain_source(in.source, cfg.trainer)
                                           : model::from_checkpoint(read_text_file(o.model_path));
    log(o, "pretrained; adapting");
    const auto result = trainer::adapt(in.source, in.target.features, init, cfg.trainer, in.target.labels);
    write_text_file(out_path(o, "model.ckpt"), model::to_checkpoint(result.model));
    write_text_file(out_path(o, "history.csv"), result.history.to_csv());
    write_text_file(out_path(o, "label_trajectory.txt"), result.history.label_trajectory());
    std::string metrics;
    if (in.target.has_labels()) {
        metrics += metrics_record("", trainer::evaluate(result.model, in.target));
        metrics += metrics_record("baseline_", trainer::evaluate(init, in.target));
    }
    metrics += metrics_record("source_", trainer::evaluate(result.model, in.source));
    write_text_file(out_path(o, "metrics.txt"), metrics);
    std::cout << metrics;
    return 0;
}

int cmd_ablate(const Options &o) {
    const auto cfg = load_config(o);
    trainer::AblationTable table;
    if (o.source_path.empty()) {
        table = trainer::run_ablation(cfg.synth, cfg.trainer);
    } else {
        const auto in = load_inputs(o, cfg, true);
        table = trainer::run_ablation(in.source, in.target, cfg.trainer);
    }
    write_text_file(out_path(o, "ablation.csv"), table.to_csv());
    write_text_file(out_path(o, "ablation_summary.csv"), table.summary_csv());
    std::cout << table.summary_csv();
    return 0;
}

int cmd_pcod(const Options &o) {
    const auto cfg = load_config(o);
    if (o.source_path.empty() || o.target_path.empty()) {
        fail(ErrorKind::Config, "missing_argument", "pcod needs --source and --target");
    }
    if (o.q_source != "uniform" && o.q_source != "tgau-fit") {
        fail(ErrorKind::Config, "bad_argument", "--q must be uniform or tgau-fit");
    }
    auto source = data::load_domain_csv(o.source_path, true);
    auto target = data::load_domain_csv(o.target_path, o.truth_path.empty());
    if (!o.truth_path.empty()) target.labels = data::load_label_csv(o.truth_path);
    data::validate(target);
    if (source.dim() != target.dim()) fail(ErrorKind::Data, "dim_mismatch", "source and target feature dims differ");

    const Eigen::Index n = std::min(source.size(), target.size());
    Matrix zs = source.features.topRows(n);
    Matrix zt = target.features.topRows(n);
    if (!o.model_path.empty()) {
        const auto m = model::from_checkpoint(read_text_file(o.model_path));
        zs = model::forward(m, zs).z;
        zt = model::forward(m, zt).z;
    }
    const Matrix ys = source.labels->topRows(n);
    const Matrix yt = target.labels->topRows(n);

    auto kz = cfg.trainer.kz;
    auto ky = cfg.trainer.ky;
    if (kz.family == kernels::Family::GaussianRbf && kz.bandwidth <= 0.0) {
        Matrix all(2 * n, zs.cols());
        all << zs, zt;
        kz.bandwidth = kernels::median_heuristic(all);
    }
    if (ky.family == kernels::Family::GaussianRbf && ky.bandwidth <= 0.0) ky.bandwidth = kernels::median_heuristic(ys);

    auto q = label::WeightVector::uniform(n);
    if (o.q_source == "tgau-fit") {
        const label::TruncGauss fit(label::fit_trunc_gauss(yt, o.confidence.value_or(cfg.trainer.confidence),
                                                           cfg.trainer.rect_strategy, cfg.trainer.jitter));
        q = label::reweight_vector(ys, fit);
    }
    const auto bundle = kernels::make_bundle(zs, zt, ys, yt, kz, ky);
    std::cout << discrepancy::to_record(discrepancy::cond_loss(bundle, q, cfg.trainer.epsilon, cfg.trainer.cond_form));
    return 0;
}

int cmd_fit_label(const Options &o) {
    const auto cfg = load_config(o);
    if (o.labels_path.empty()) fail(ErrorKind::Config, "missing_argument", "fit-label needs --labels");
    const Matrix labels = data::load_label_csv(o.labels_path);
    const auto params = label::fit_trunc_gauss(labels, o.confidence.value_or(cfg.trainer.confidence),
                                               cfg.trainer.rect_strategy, cfg.trainer.jitter);
    std::cout << label::to_record(params);
    return 0;
}

int cmd_sweep(const Options &o) {
    const auto cfg = load_config(o);
    const auto rows = trainer::sweep(cfg.synth, cfg.trainer);
    const std::string csv = trainer::sweep_csv(rows);
    write_text_file(out_path(o, "sweep.csv"), csv);
    std::cout << csv;
    return 0;
}

int cmd_eval(const Options &o) {
    if (o.model_path.empty() || o.target_path.empty()) fail(ErrorKind::Config, "missing_argument", "eval needs --model and --target");
    const auto m = model::from_checkpoint(read_text_file(o.model_path));
    data::DomainSet set = data::load_domain_csv(o.target_path, o.truth_path.empty());
    if (!o.truth_path.empty()) set.labels = data::load_label_csv(o.truth_path);
    data::validate(set);
    std::cout << metrics_record("", trainer::evaluate(m, set));
    return 0;
}

void apply_thread_env() {
    const char *env = std::getenv("GLSGE_THREADS");
    if (!env || !*env) return;
    const long n = parse_long(env, "GLSGE_THREADS");
    if (n < 1) fail(ErrorKind::Config, "out_of_range", "GLSGE_THREADS must be >= 1");
    Eigen::setNbThreads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Gaze-label-shift adaptation toolkit"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Options o;
    app.add_option("-c,--config", o.config_path, "key = value config file");
    app.add_option("--set", o.overrides, "override a config key (key=value), repeatable");
    app.add_option("-o,--out", o.out_dir, "output directory (created if absent)");
    app.add_flag("-v,--verbose", o.verbose, "progress on stderr");

    const auto data_opts = [&o](CLI::App *sub) {
        sub->add_option("--source", o.source_path, "labeled source CSV");
        sub->add_option("--target", o.target_path, "target feature CSV");
        sub->add_option("--truth", o.truth_path, "target labels CSV (evaluation only)");
    };

    auto *synth_cmd = app.add_subcommand("synth", "write source.csv, target.csv and truth.csv");
    auto *adapt_cmd = app.add_subcommand("adapt", "pretrain on source, adapt to target");
    data_opts(adapt_cmd);
    adapt_cmd->add_option("--init", o.model_path, "start from this checkpoint instead of pretraining");
    auto *ablate_cmd = app.add_subcommand("ablate", "loss-variant ablation over seeds");
    data_opts(ablate_cmd);
    auto *pcod_cmd = app.add_subcommand("pcod", "print the discrepancy report for two labeled sets");
    data_opts(pcod_cmd);
    pcod_cmd->add_option("--q", o.q_source, "uniform or tgau-fit");
    pcod_cmd->add_option("--model", o.model_path, "map features through this checkpoint first");
    pcod_cmd->add_option("--confidence", o.confidence, "confidence level for tgau-fit");
    auto *fit_cmd = app.add_subcommand("fit-label", "fit a truncated Gaussian to labels");
    fit_cmd->add_option("--labels", o.labels_path, "CSV with yaw,pitch columns")->required();
    fit_cmd->add_option("--confidence", o.confidence, "confidence level");
    auto *sweep_cmd = app.add_subcommand("sweep", "lambda x confidence grid");
    auto *eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on labeled data");
    eval_cmd->add_option("--model", o.model_path, "checkpoint")->required();
    eval_cmd->add_option("--target", o.target_path, "feature CSV, labeled unless --truth is given")->required();
    eval_cmd->add_option("--truth", o.truth_path, "labels CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "ERROR usage: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Config);
    }

    try {
        apply_thread_env();
        if (*synth_cmd) return cmd_synth(o);
        if (*adapt_cmd) return cmd_adapt(o);
        if (*ablate_cmd) return cmd_ablate(o);
        if (*pcod_cmd) return cmd_pcod(o);
        if (*fit_cmd) return cmd_fit_label(o);
        if (*sweep_cmd) return cmd_sweep(o);
        if (*eval_cmd) return cmd_eval(o);
    } catch (const Error &e) {
        std::cerr << "ERROR " << e.code() << ": " << e.what() << '\n';
        return e.exit_status();
    } catch (const fs::filesystem_error &e) {
        std::cerr << "ERROR io: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Data);
    }
    return static_cast<int>(ErrorKind::Config);
}

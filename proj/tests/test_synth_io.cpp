#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "glsge/config.hpp"
#include "glsge/dataio.hpp"
#include "glsge/discrepancy.hpp"
#include "glsge/error.hpp"
#include "glsge/kv.hpp"
#include "glsge/synth.hpp"

using namespace glsge;

namespace {

std::string error_code(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST(Synth, DeterministicWithIndependentStreams) {
    synth::SynthConfig cfg;
    cfg.n_source = 50;
    cfg.n_target = 40;
    const auto a = synth::gen_synthetic(cfg);
    const auto b = synth::gen_synthetic(cfg);
    EXPECT_EQ(a.source.features, b.source.features);
    EXPECT_EQ(*a.target.labels, *b.target.labels);
    EXPECT_EQ(a.source.size(), 50);
    EXPECT_EQ(a.target.size(), 40);
    EXPECT_EQ(a.source.dim(), cfg.feature_dim);

    auto shifted = cfg;
    shifted.cond_shift = 0.0;
    const auto c = synth::gen_synthetic(shifted);
    EXPECT_EQ(*c.source.labels, *a.source.labels);
    EXPECT_EQ(*c.target.labels, *a.target.labels);
    EXPECT_EQ(c.source.features, a.source.features);

    cfg.seed = 2;
    EXPECT_NE(synth::gen_synthetic(cfg).source.features, a.source.features);
    EXPECT_NE(synth::derive_seed(1, 0), synth::derive_seed(1, 1));
    EXPECT_NE(synth::derive_seed(1, 0), synth::derive_seed(2, 0));
}

TEST(Synth, LabelsRespectTruncation) {
    synth::SynthConfig cfg;
    const auto d = synth::gen_synthetic(cfg);
    for (Eigen::Index i = 0; i < d.source.size(); ++i) EXPECT_TRUE(cfg.source.inside(d.source.labels->row(i).transpose()));
    for (Eigen::Index i = 0; i < d.target.size(); ++i) EXPECT_TRUE(cfg.target.inside(d.target.labels->row(i).transpose()));
}

TEST(Synth, MapsAndLift) {
    synth::SynthConfig cfg;
    cfg.cond_shift = 0.0;
    auto m = synth::make_maps(cfg);
    EXPECT_EQ(m.a_source, m.a_target);
    EXPECT_EQ(m.b_source, m.b_target);
    cfg.cond_shift = 1.0;
    m = synth::make_maps(cfg);
    const Eigen::Index core = cfg.feature_dim - cfg.shortcut_dims;
    EXPECT_EQ(m.a_source.topRows(core), m.a_target.topRows(core));
    EXPECT_NE(m.a_source.bottomRows(cfg.shortcut_dims), m.a_target.bottomRows(cfg.shortcut_dims));

    Matrix y(1, 2);
    y << 0.2, -0.1;
    Matrix want(1, 6);
    want << 0.2, -0.1, std::sin(0.2), std::sin(-0.1), -0.02, 1.0;
    EXPECT_LE((synth::lift(y) - want).cwiseAbs().maxCoeff(), 1e-15);
    cfg.feature_dim = 3;
    EXPECT_THROW(synth::validate(cfg), Error);
}

TEST(Synth, DomainsExchangeableWithoutShift) {
    // Identical label models and no conditional shift: the feature MMD must stay below
    // the 95% permutation threshold.
    synth::SynthConfig cfg;
    cfg.cond_shift = 0.0;
    cfg.target = cfg.source;
    cfg.seed = 5;
    const auto d = synth::gen_synthetic(cfg);
    const Eigen::Index n = cfg.n_source;
    ASSERT_EQ(n, 500);
    Matrix all(2 * n, cfg.feature_dim);
    all << d.source.features, d.target.features;
    const Matrix k = kernels::gram(all, all, kernels::KernelSpec::rbf(kernels::median_heuristic(all)));
    std::vector<int> idx(2 * n);
    std::iota(idx.begin(), idx.end(), 0);
    const auto stat = [&] {
        double ss = 0.0, tt = 0.0, st = 0.0;
        for (Eigen::Index i = 0; i < 2 * n; ++i) {
            for (Eigen::Index j = 0; j < 2 * n; ++j) {
                const double v = k(idx[i], idx[j]);
                if (i < n && j < n) ss += v;
                else if (i >= n && j >= n) tt += v;
                else st += v;
            }
        }
        return (ss + tt - st) / double(n * n);
    };
    const double observed = stat();
    std::mt19937_64 rng(9);
    int exceed = 0;
    const int reps = 99;
    for (int r = 0; r < reps; ++r) {
        std::shuffle(idx.begin(), idx.end(), rng);
        if (stat() >= observed) ++exceed;
    }
    EXPECT_GT((exceed + 1.0) / (reps + 1.0), 0.05);
}

TEST(Synth, NoiselessFeaturesAreExactMaps) {
    synth::SynthConfig cfg;
    cfg.noise = 0.0;
    cfg.shortcut_noise = 0.0;
    cfg.n_source = 30;
    cfg.n_target = 20;
    const auto d = synth::gen_synthetic(cfg);
    const auto m = synth::make_maps(cfg);
    Matrix ws = synth::lift(*d.source.labels) * m.a_source.transpose();
    ws.rowwise() += m.b_source.transpose();
    Matrix wt = synth::lift(*d.target.labels) * m.a_target.transpose();
    wt.rowwise() += m.b_target.transpose();
    EXPECT_LE((d.source.features - ws).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((d.target.features - wt).cwiseAbs().maxCoeff(), 1e-12);
    // The core rows have full column rank, so labels are recoverable from features.
    const Eigen::Index core = cfg.feature_dim - cfg.shortcut_dims;
    Eigen::ColPivHouseholderQR<Matrix> qr(m.a_source.topRows(core));
    EXPECT_EQ(qr.rank(), 6);
}

TEST(Synth, DefaultSourceRectContainsTarget) {
    const auto s = synth::SynthConfig::default_source(), t = synth::SynthConfig::default_target();
    EXPECT_LT(s.a.lo, t.a.lo);
    EXPECT_GT(s.a.hi, t.a.hi);
    EXPECT_LT(s.b.lo, t.b.lo);
    EXPECT_GT(s.b.hi, t.b.hi);
}

TEST(Synth, LabelTvGrowsWithTargetOffset) {
    // Offsetting the target mean is the label-shift knob; the empirical label TV on a
    // 20 x 20 grid must increase along it.
    const auto tv_at = [](double offset) {
        synth::SynthConfig cfg;
        cfg.n_source = 4000;
        cfg.n_target = 4000;
        cfg.target.mu = {0.0, 0.0};
        cfg.target.mu(0) += offset;
        cfg.target.mu(1) += 0.5 * offset;
        cfg.target.a = cfg.source.a;
        cfg.target.b = cfg.source.b;
        const auto d = synth::gen_synthetic(cfg);
        const auto box = cfg.source.rect();
        const auto hist = [&](const Matrix &y) {
            Matrix h = Matrix::Zero(20, 20);
            for (Eigen::Index i = 0; i < y.rows(); ++i) {
                const int cx = std::clamp(int((y(i, 0) - box.x0) / (box.x1 - box.x0) * 20), 0, 19);
                const int cy = std::clamp(int((y(i, 1) - box.y0) / (box.y1 - box.y0) * 20), 0, 19);
                h(cx, cy) += 1.0 / double(y.rows());
            }
            return h;
        };
        return 0.5 * (hist(*d.source.labels) - hist(*d.target.labels)).cwiseAbs().sum();
    };
    double prev = -1.0;
    for (const double offset : {0.0, 0.1, 0.2, 0.3, 0.4}) {
        const double tv = tv_at(offset);
        EXPECT_GT(tv, prev) << "offset " << offset;
        prev = tv;
    }
}

TEST(DomainCsv, RoundTripIsExact) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> nd;
    data::DomainSet set;
    set.features = Matrix(4, 3);
    for (Eigen::Index i = 0; i < set.features.size(); ++i) set.features.data()[i] = nd(rng) / 3.0;
    set.labels = Matrix(4, 2);
    for (Eigen::Index i = 0; i < 8; ++i) set.labels->data()[i] = nd(rng) * 1e-7;
    const std::string text = data::format_domain_csv(set);
    EXPECT_EQ(text.substr(0, text.find('\n')), "f0,f1,f2,yaw,pitch");
    const auto back = data::parse_domain_csv(text, true);
    EXPECT_EQ(back.features, set.features);
    EXPECT_EQ(*back.labels, *set.labels);

    const auto path = (std::filesystem::temp_directory_path() / "glsge_roundtrip.csv").string();
    data::save_domain_csv(set, path);
    EXPECT_EQ(data::load_domain_csv(path, true).features, set.features);
    EXPECT_EQ(data::load_label_csv(path).rows(), 4);
    std::filesystem::remove(path);
}

TEST(DomainCsv, Errors) {
    EXPECT_EQ(error_code([] { (void)data::parse_domain_csv("", false); }), "no_rows");
    EXPECT_EQ(error_code([] { (void)data::parse_domain_csv("f0,f1\n", false); }), "no_rows");
    try {
        (void)data::parse_domain_csv("f0,f1\n1,2\n3,x\n", false, "in.csv");
        FAIL() << "expected throw";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), "malformed_csv");
        EXPECT_NE(std::string(e.what()).find("in.csv:3"), std::string::npos) << e.what();
    }
    EXPECT_EQ(error_code([] { (void)data::parse_domain_csv("f0,f1\n1,2,3\n", false); }), "malformed_csv");
    EXPECT_EQ(error_code([] { (void)data::load_domain_csv("/nonexistent/x.csv", false); }), "file_not_found");
    data::DomainSet unlabeled{Matrix::Zero(2, 2), std::nullopt};
    EXPECT_EQ(error_code([&] { (void)unlabeled.require_labels(); }), "missing_labels");
}

TEST(Config, EmptyTextGivesDefaults) {
    const auto c = config::parse_config_text("");
    const trainer::TrainerConfig t;
    EXPECT_EQ(c.trainer.lambda, t.lambda);
    EXPECT_EQ(c.trainer.n_outer, t.n_outer);
    EXPECT_EQ(c.synth.n_source, synth::SynthConfig{}.n_source);
    EXPECT_EQ(config::to_text(c), config::to_text(config::Config{}));
}

TEST(Config, ParsesOverridesAndRoundTrips) {
    const auto c = config::parse_config_text("lambda = 0.5\n# comment\nsynth.cond_shift = 0.25\n", {"n_outer=3"});
    EXPECT_EQ(c.trainer.lambda, 0.5);
    EXPECT_EQ(c.synth.cond_shift, 0.25);
    EXPECT_EQ(c.trainer.n_outer, 3);
    EXPECT_EQ(config::parse_config_text("lambda = 0.5\n", {"lambda=2"}).trainer.lambda, 2.0);
    const std::string text = config::to_text(c);
    EXPECT_EQ(config::to_text(config::parse_config_text(text)), text);
    for (const auto &key : config::known_keys()) EXPECT_NE(text.find(key + " ="), std::string::npos) << key;
}

TEST(Config, Errors) {
    EXPECT_EQ(error_code([] { (void)config::parse_config_text("lambda = -1\n"); }), "out_of_range");
    EXPECT_EQ(error_code([] { (void)config::parse_config_text("lamda = 1\n"); }), "unknown_key");
    EXPECT_EQ(error_code([] { (void)config::parse_config_text("lambda = 1\nlambda = 2\n"); }), "duplicate_key");
    EXPECT_EQ(error_code([] { (void)config::parse_config_text("", {"lambda=1", "lambda=2"}); }), "duplicate_override");
    EXPECT_EQ(error_code([] { (void)config::parse_config_text("lambda = abc\n"); }), "type_mismatch");
    EXPECT_EQ(error_code([] { (void)config::parse_config_text("just words\n"); }), "malformed_line");
    EXPECT_EQ(error_code([] { (void)config::parse_config_text("confidence = 1.5\n"); }), "out_of_range");
}

TEST(Config, ShippedConfigsParse) {
    const auto c = config::parse_config(GLSGE_SOURCE_DIR "/configs/default.cfg");
    EXPECT_EQ(c.trainer.lambda, 0.3);
    EXPECT_EQ(c.trainer.confidence, 0.9);
    EXPECT_EQ(c.synth.cond_shift, 1.5);
    EXPECT_EQ(config::parse_config(GLSGE_SOURCE_DIR "/configs/label_shift.cfg").synth.cond_shift, 0.0);
    EXPECT_EQ(config::to_text(c), read_text_file(GLSGE_SOURCE_DIR "/tests/golden/default_config.txt"));
}

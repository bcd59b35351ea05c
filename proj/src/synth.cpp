#include "glsge/synth.hpp"

#include <cmath>
#include <random>

#include "glsge/error.hpp"

namespace glsge::synth {

namespace {

enum Stream : std::uint64_t {
    kSourceLabels = 1,
    kTargetLabels = 2,
    kMaps = 3,
    kSourceNoise = 4,
    kTargetNoise = 5,
};

constexpr Eigen::Index kLiftDim = 6;

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
}

data::DomainSet render(const Matrix &labels, const Matrix &a, const Vector &b, const SynthConfig &cfg,
                       std::uint64_t noise_seed) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    Matrix x = lift(labels) * a.transpose();
    x.rowwise() += b.transpose();
    const Eigen::Index core = cfg.feature_dim - cfg.shortcut_dims;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) += (j < core ? cfg.noise : cfg.shortcut_noise) * unit(rng);
    }
    data::DomainSet out;
    out.features = std::move(x);
    out.labels = labels;
    return out;
}

}  // namespace

label::TruncGaussParams SynthConfig::default_source() {
    label::TruncGaussParams p;
    p.mu = {0.0, 0.0};
    p.sigma << 4.0, 0.0, 0.0, 4.0;
    p.a = {-0.6, 0.6};
    p.b = {-0.4, 0.4};
    return p;
}

label::TruncGaussParams SynthConfig::default_target() {
    label::TruncGaussParams p;
    p.mu = {0.15, 0.05};
    p.sigma << 0.06, 0.005, 0.005, 0.03;
    p.a = {-0.25, 0.55};
    p.b = {-0.25, 0.35};
    return p;
}

void validate(const SynthConfig &cfg) {
    if (cfg.feature_dim < kLiftDim) fail(ErrorKind::Config, "out_of_range", "synth.feature_dim must be >= 6");
    if (cfg.shortcut_dims < 0 || cfg.shortcut_dims >= cfg.feature_dim) {
        fail(ErrorKind::Config, "out_of_range", "synth.shortcut_dims must be in [0, feature_dim)");
    }
    if (cfg.n_source < 1 || cfg.n_target < 1) fail(ErrorKind::Config, "out_of_range", "synth sample counts must be >= 1");
    if (!(cfg.noise >= 0.0) || !(cfg.shortcut_noise >= 0.0)) {
        fail(ErrorKind::Config, "out_of_range", "synth noise levels must be >= 0");
    }
    if (!std::isfinite(cfg.cond_shift)) fail(ErrorKind::Config, "out_of_range", "synth.cond_shift must be finite");
    label::validate(cfg.source);
    label::validate(cfg.target);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Matrix lift(const Matrix &labels) {
    if (labels.cols() != 2) fail(ErrorKind::Data, "dim_mismatch", "lift expects n x 2 labels");
    Matrix out(labels.rows(), kLiftDim);
    for (Eigen::Index i = 0; i < labels.rows(); ++i) {
        const double y1 = labels(i, 0);
        const double y2 = labels(i, 1);
        out.row(i) << y1, y2, std::sin(y1), std::sin(y2), y1 * y2, 1.0;
    }
    return out;
}

DomainMaps make_maps(const SynthConfig &cfg) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kMaps));
    DomainMaps maps;
    maps.a_source = gaussian_matrix(cfg.feature_dim, kLiftDim, rng, 1.0);
    maps.b_source = gaussian_matrix(cfg.feature_dim, 1, rng, 0.5).col(0);
    // At cond_shift = 1 the target shortcut rows read yaw terms where the source reads
    // pitch terms and vice versa.  Offsets are shared, so the shift moves no mass by itself.
    const Matrix rows = maps.a_source.bottomRows(cfg.shortcut_dims);
    Matrix swapped = rows;
    swapped.col(0).swap(swapped.col(1));
    swapped.col(2).swap(swapped.col(3));
    maps.a_target = maps.a_source;
    maps.b_target = maps.b_source;
    maps.a_target.bottomRows(cfg.shortcut_dims) += cfg.cond_shift * (swapped - rows);
    return maps;
}

SynthData gen_synthetic(const SynthConfig &cfg) {
    validate(cfg);
    const auto maps = make_maps(cfg);
    const Matrix ys = label::tgau_sample(cfg.source, derive_seed(cfg.seed, kSourceLabels), cfg.n_source);
    const Matrix yt = label::tgau_sample(cfg.target, derive_seed(cfg.seed, kTargetLabels), cfg.n_target);
    SynthData out;
    out.source = render(ys, maps.a_source, maps.b_source, cfg, derive_seed(cfg.seed, kSourceNoise));
    out.target = render(yt, maps.a_target, maps.b_target, cfg, derive_seed(cfg.seed, kTargetNoise));
    return out;
}

}  // namespace glsge::synth

#include "glsge/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "glsge/error.hpp"
#include "glsge/kv.hpp"

namespace glsge::model {

namespace {

Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = dist(rng);
    }
    return w;
}

template <typename Block>
void put(Vector &theta, Eigen::Index &at, const Block &b) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) theta(at++) = b(i, j);
    }
}

template <typename Block>
void take(const Vector &theta, Eigen::Index &at, Block &b) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = theta(at++);
    }
}

void write_block(std::ostream &os, const std::string &name, const Matrix &m) {
    os << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_double(m(i, j));
        os << "\n";
    }
}

Matrix read_block(std::istream &is, const std::string &name, Eigen::Index rows, Eigen::Index cols) {
    std::string got;
    Eigen::Index r = -1;
    Eigen::Index c = -1;
    if (!(is >> got >> r >> c) || got != name || r != rows || c != cols) {
        std::ostringstream msg;
        msg << "checkpoint: expected block '" << name << " " << rows << " " << cols << "'";
        fail(ErrorKind::Data, "bad_checkpoint", msg.str());
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            std::string tok;
            if (!(is >> tok)) fail(ErrorKind::Data, "bad_checkpoint", "checkpoint: truncated block '" + name + "'");
            m(i, j) = parse_double(tok, name, ErrorKind::Data);
        }
    }
    return m;
}

}  // namespace

std::string feature_map_name(FeatureMap f) { return f == FeatureMap::Linear ? "linear" : "mlp"; }

FeatureMap feature_map_from_name(const std::string &name) {
    if (name == "linear") return FeatureMap::Linear;
    if (name == "mlp") return FeatureMap::Mlp;
    fail(ErrorKind::Config, "bad_model", "unknown feature map '" + name + "'");
}

ShallowModel ShallowModel::init(FeatureMap kind, Eigen::Index input_dim, Eigen::Index hidden, Eigen::Index embed_dim,
                                std::uint64_t seed) {
    if (input_dim < 1 || embed_dim < 1 || (kind == FeatureMap::Mlp && hidden < 1)) {
        fail(ErrorKind::Config, "bad_model", "model dimensions must be positive");
    }
    ShallowModel m;
    m.kind = kind;
    m.input_dim = input_dim;
    m.hidden = kind == FeatureMap::Mlp ? hidden : 0;
    m.embed_dim = embed_dim;
    m.seed = seed;
    std::mt19937_64 rng(seed);
    if (kind == FeatureMap::Mlp) {
        m.w1 = glorot(hidden, input_dim, rng);
        m.b1 = Vector::Zero(hidden);
        m.w2 = glorot(embed_dim, hidden, rng);
        m.b2 = Vector::Zero(embed_dim);
    } else {
        m.w1 = glorot(embed_dim, input_dim, rng);
        m.b1 = Vector::Zero(embed_dim);
    }
    m.wh = glorot(2, embed_dim, rng);
    m.bh = Vector::Zero(2);
    return m;
}

Eigen::Index ShallowModel::num_params() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + wh.size() + bh.size();
}

Vector ShallowModel::params() const {
    Vector theta(num_params());
    Eigen::Index at = 0;
    put(theta, at, w1);
    put(theta, at, b1);
    if (kind == FeatureMap::Mlp) {
        put(theta, at, w2);
        put(theta, at, b2);
    }
    put(theta, at, wh);
    put(theta, at, bh);
    return theta;
}

void ShallowModel::set_params(const Vector &theta) {
    if (theta.size() != num_params()) fail(ErrorKind::Data, "dim_mismatch", "set_params: wrong parameter count");
    Eigen::Index at = 0;
    take(theta, at, w1);
    take(theta, at, b1);
    if (kind == FeatureMap::Mlp) {
        take(theta, at, w2);
        take(theta, at, b2);
    }
    take(theta, at, wh);
    take(theta, at, bh);
}

std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> ShallowModel::blocks() const {
    std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> out;
    Eigen::Index at = 0;
    const auto add = [&](const std::string &name, Eigen::Index size) {
        out.push_back({name, {at, at + size}});
        at += size;
    };
    add("w1", w1.size());
    add("b1", b1.size());
    if (kind == FeatureMap::Mlp) {
        add("w2", w2.size());
        add("b2", b2.size());
    }
    add("wh", wh.size());
    add("bh", bh.size());
    return out;
}

void validate(const ShallowModel &m) {
    bool ok = m.wh.rows() == 2 && m.wh.cols() == m.embed_dim && m.bh.size() == 2 && m.w1.cols() == m.input_dim;
    if (m.kind == FeatureMap::Mlp) {
        ok = ok && m.w1.rows() == m.hidden && m.b1.size() == m.hidden && m.w2.rows() == m.embed_dim &&
             m.w2.cols() == m.hidden && m.b2.size() == m.embed_dim;
    } else {
        ok = ok && m.w1.rows() == m.embed_dim && m.b1.size() == m.embed_dim;
    }
    if (!ok) fail(ErrorKind::Data, "bad_model", "model parameter shapes are inconsistent with declared dims");
    if (!m.params().allFinite()) fail(ErrorKind::Numerical, "non_finite", "model parameters are not finite");
}

ForwardPass forward(const ShallowModel &m, const Matrix &x) {
    if (x.cols() != m.input_dim) {
        std::ostringstream msg;
        msg << "forward: features have " << x.cols() << " columns, model expects " << m.input_dim;
        fail(ErrorKind::Data, "dim_mismatch", msg.str());
    }
    ForwardPass fp;
    Matrix pre = x * m.w1.transpose();
    pre.rowwise() += m.b1.transpose();
    if (m.kind == FeatureMap::Mlp) {
        fp.hidden_act = pre.array().tanh().matrix();
        fp.z = fp.hidden_act * m.w2.transpose();
        fp.z.rowwise() += m.b2.transpose();
    } else {
        fp.z = std::move(pre);
    }
    fp.pred = fp.z * m.wh.transpose();
    fp.pred.rowwise() += m.bh.transpose();
    return fp;
}

Matrix predict(const ShallowModel &m, const Matrix &x) { return forward(m, x).pred; }

Vector backward(const ShallowModel &m, const Matrix &x, const ForwardPass &fp, const Matrix &dz, const Matrix &dpred) {
    Vector grad(m.num_params());
    Eigen::Index at = 0;
    const Matrix dz_total = dz + dpred * m.wh;
    if (m.kind == FeatureMap::Mlp) {
        const Matrix dpre = (dz_total * m.w2).cwiseProduct((1.0 - fp.hidden_act.array().square()).matrix());
        put(grad, at, Matrix(dpre.transpose() * x));
        put(grad, at, Matrix(dpre.colwise().sum().transpose()));
        put(grad, at, Matrix(dz_total.transpose() * fp.hidden_act));
        put(grad, at, Matrix(dz_total.colwise().sum().transpose()));
    } else {
        put(grad, at, Matrix(dz_total.transpose() * x));
        put(grad, at, Matrix(dz_total.colwise().sum().transpose()));
    }
    put(grad, at, Matrix(dpred.transpose() * fp.z));
    put(grad, at, Matrix(dpred.colwise().sum().transpose()));
    return grad;
}

std::string to_checkpoint(const ShallowModel &m) {
    std::ostringstream os;
    os << "glsge-model 1\n"
       << "feature_map " << feature_map_name(m.kind) << "\n"
       << "input_dim " << m.input_dim << "\n"
       << "hidden " << m.hidden << "\n"
       << "embed_dim " << m.embed_dim << "\n"
       << "seed " << m.seed << "\n";
    write_block(os, "w1", m.w1);
    write_block(os, "b1", m.b1.transpose());
    if (m.kind == FeatureMap::Mlp) {
        write_block(os, "w2", m.w2);
        write_block(os, "b2", m.b2.transpose());
    }
    write_block(os, "wh", m.wh);
    write_block(os, "bh", m.bh.transpose());
    return os.str();
}

ShallowModel from_checkpoint(const std::string &text) {
    std::istringstream is(text);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "glsge-model") fail(ErrorKind::Data, "bad_checkpoint", "not a glsge model checkpoint");
    if (version != 1) fail(ErrorKind::Data, "bad_checkpoint", "unsupported checkpoint version " + std::to_string(version));
    const auto field = [&](const std::string &name) {
        std::string key;
        std::string value;
        if (!(is >> key >> value) || key != name) fail(ErrorKind::Data, "bad_checkpoint", "checkpoint: expected '" + name + "'");
        return value;
    };
    ShallowModel m;
    m.kind = feature_map_from_name(field("feature_map"));
    m.input_dim = parse_long(field("input_dim"), "input_dim", ErrorKind::Data);
    m.hidden = parse_long(field("hidden"), "hidden", ErrorKind::Data);
    m.embed_dim = parse_long(field("embed_dim"), "embed_dim", ErrorKind::Data);
    m.seed = static_cast<std::uint64_t>(parse_long(field("seed"), "seed", ErrorKind::Data));
    const Eigen::Index first_rows = m.kind == FeatureMap::Mlp ? m.hidden : m.embed_dim;
    m.w1 = read_block(is, "w1", first_rows, m.input_dim);
    m.b1 = read_block(is, "b1", 1, first_rows).transpose();
    if (m.kind == FeatureMap::Mlp) {
        m.w2 = read_block(is, "w2", m.embed_dim, m.hidden);
        m.b2 = read_block(is, "b2", 1, m.embed_dim).transpose();
    }
    m.wh = read_block(is, "wh", 2, m.embed_dim);
    m.bh = read_block(is, "bh", 1, 2).transpose();
    validate(m);
    return m;
}

}  // namespace glsge::model

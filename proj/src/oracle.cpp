#include "glsge/oracle.hpp"

#include <cmath>
#include <sstream>

#include "glsge/error.hpp"

namespace glsge::oracle {

namespace {

Matrix sqrt_psd(const Matrix &s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

void check_dim(Eigen::Index d) {
    if (d > kMaxExplicitDim) {
        std::ostringstream msg;
        msg << "explicit dimension " << d << " exceeds " << kMaxExplicitDim;
        fail(ErrorKind::Data, "dim_overflow", msg.str());
    }
}

}  // namespace

ExplicitEmbedding::ExplicitEmbedding(const kernels::KernelSpec &spec, Eigen::Index input_dim)
    : spec_(spec), input_dim_(input_dim), dim_(0) {
    switch (spec.family) {
    case kernels::Family::Linear:
        dim_ = input_dim;
        break;
    case kernels::Family::Polynomial:
        if (spec.degree == 1) {
            dim_ = input_dim + 1;
        } else if (spec.degree == 2) {
            dim_ = input_dim + input_dim * (input_dim - 1) / 2 + input_dim + 1;
        } else {
            fail(ErrorKind::Config, "no_explicit_map", "explicit map only for polynomial degree 1 or 2");
        }
        break;
    case kernels::Family::GaussianRbf:
        fail(ErrorKind::Config, "no_explicit_map", "rbf kernel has no finite explicit map");
    }
    check_dim(dim_);
}

Matrix ExplicitEmbedding::embed(const Matrix &x) const {
    if (x.cols() != input_dim_) fail(ErrorKind::Data, "dim_mismatch", "embed: wrong input dimension");
    if (spec_.family == kernels::Family::Linear) return x;
    Matrix out(x.rows(), dim_);
    const double c = spec_.offset;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        Eigen::Index k = 0;
        if (spec_.degree == 1) {
            for (Eigen::Index i = 0; i < input_dim_; ++i) out(r, k++) = x(r, i);
            out(r, k++) = std::sqrt(c);
            continue;
        }
        for (Eigen::Index i = 0; i < input_dim_; ++i) out(r, k++) = x(r, i) * x(r, i);
        for (Eigen::Index i = 0; i < input_dim_; ++i) {
            for (Eigen::Index j = i + 1; j < input_dim_; ++j) out(r, k++) = std::sqrt(2.0) * x(r, i) * x(r, j);
        }
        for (Eigen::Index i = 0; i < input_dim_; ++i) out(r, k++) = std::sqrt(2.0 * c) * x(r, i);
        out(r, k++) = c;
    }
    return out;
}

Matrix explicit_cond_mean(const Matrix &phi, const Matrix &psi, const label::WeightVector &q, double eps) {
    check_dim(phi.cols());
    check_dim(psi.cols());
    const Matrix qpsi = q.values().asDiagonal() * psi;
    Matrix cyy = psi.transpose() * qpsi;
    cyy.diagonal().array() += eps;
    const Matrix cxy = phi.transpose() * qpsi;
    // U = C_xy C_yy^{-1}  <=>  C_yy U^T = C_xy^T (C_yy symmetric)
    return cyy.ldlt().solve(cxy.transpose()).transpose();
}

Matrix explicit_cond_cov(const Matrix &phi, const label::WeightVector &q, double eps, const Matrix &psi) {
    check_dim(phi.cols());
    check_dim(psi.cols());
    const Vector &w = q.values();
    const Matrix hq = Matrix(w.asDiagonal()) - w * w.transpose();
    const Matrix cxx = phi.transpose() * hq * phi;
    const Matrix cxy = phi.transpose() * hq * psi;
    Matrix cyy = psi.transpose() * hq * psi;
    cyy.diagonal().array() += eps;
    const Matrix c = cxx - cxy * cyy.ldlt().solve(cxy.transpose());
    return 0.5 * (c + c.transpose());
}

double oracle_pcod(const Matrix &phi_s, const Matrix &psi_s, const Matrix &phi_t, const Matrix &psi_t,
                   const label::WeightVector &q, double eps) {
    const auto uniform = label::WeightVector::uniform(phi_t.rows());
    const Matrix us = explicit_cond_mean(phi_s, psi_s, q, eps);
    const Matrix ut = explicit_cond_mean(phi_t, psi_t, uniform, eps);
    const Matrix cs = explicit_cond_cov(phi_s, q, eps, psi_s);
    const Matrix ct = explicit_cond_cov(phi_t, uniform, eps, psi_t);
    const Matrix root = sqrt_psd(cs);
    const Matrix inner = root * ct * root;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (inner + inner.transpose()));
    const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return (us - ut).squaredNorm() + cs.trace() + ct.trace() - 2.0 * cross;
}

Vector fd_gradient(const std::function<double(const Vector &)> &f, const Vector &theta, double rel_step) {
    Vector g(theta.size());
    Vector probe = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = rel_step * (1.0 + std::abs(theta(i)));
        probe(i) = theta(i) + h;
        const double up = f(probe);
        probe(i) = theta(i) - h;
        const double down = f(probe);
        probe(i) = theta(i);
        if (!std::isfinite(up) || !std::isfinite(down)) {
            fail(ErrorKind::Numerical, "non_finite", "fd_gradient: non-finite evaluation at coordinate " + std::to_string(i));
        }
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace glsge::oracle

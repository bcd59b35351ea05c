#include "glsge/discrepancy.hpp"

#include <cmath>
#include <sstream>

#include "glsge/error.hpp"
#include "glsge/kv.hpp"

namespace glsge::discrepancy {

namespace {

// Below this the square root is treated as flat: value is kept, gradient dropped.
constexpr double kSqrtFloor = 1e-12;

void check_inputs(const kernels::GramBundle &g, const label::WeightVector &q, double eps) {
    if (!(eps > 0.0)) fail(ErrorKind::Config, "bad_epsilon", "epsilon must be positive");
    kernels::validate(g);
    if (q.size() != g.n_source()) {
        std::ostringstream msg;
        msg << "weight vector has " << q.size() << " entries for " << g.n_source() << " source samples";
        fail(ErrorKind::Data, "dim_mismatch", msg.str());
    }
}

void require_equal_sizes(const kernels::GramBundle &g) {
    if (g.n_source() != g.n_target()) {
        std::ostringstream msg;
        msg << "covariance term needs equal batch sizes, got " << g.n_source() << " source vs " << g.n_target()
            << " target";
        fail(ErrorKind::Data, "unequal_batches", msg.str());
    }
}

void check_finite(const Matrix &m, const char *term) {
    if (!m.allFinite()) fail(ErrorKind::Numerical, "inverse_failed", std::string("non-finite inverse in ") + term);
}

// R = Q (K_Y Q + eps I)^{-1}, obtained from the transpose system (Q K_Y + eps I) R^T = Q.
Matrix weighted_resolvent(const Matrix &ky, const Vector &q, double eps) {
    const Eigen::Index n = ky.rows();
    Matrix lhs = q.asDiagonal() * ky;
    lhs.diagonal().array() += eps;
    const Eigen::PartialPivLU<Matrix> lu(lhs);
    const Matrix rt = lu.solve(Matrix(q.asDiagonal()));
    check_finite(rt, "(K_Y^ss Q + eps I)");
    const double residual = (lhs * rt - Matrix(q.asDiagonal())).cwiseAbs().maxCoeff();
    if (residual > 1e-8 * std::max(1.0, lhs.cwiseAbs().maxCoeff())) {
        fail(ErrorKind::Numerical, "inverse_failed", "(K_Y^ss Q + eps I) is singular to working precision");
    }
    (void)n;
    return rt.transpose();
}

Matrix safe_reg_inverse(const Matrix &s, double eps, const char *term) {
    try {
        return linalg::reg_inverse(s, eps);
    } catch (const Error &e) {
        fail(ErrorKind::Numerical, "inverse_failed", std::string(term) + ": " + e.what());
    }
}

struct CmmdParts {
    double value = 0.0;
    Matrix r;  // Q (K_Y Q + eps I)^{-1}
    Matrix p;  // (K_Y^tt + eps n I)^{-1}
};

CmmdParts cmmd_parts(const kernels::GramBundle &g, const label::WeightVector &q, double eps) {
    CmmdParts c;
    const double n = static_cast<double>(g.n_target());
    c.r = weighted_resolvent(g.ky_ss, q.values(), eps);
    c.p = safe_reg_inverse(g.ky_tt, eps * n, "(K_Y^tt + eps n I)");
    const double source = (g.kz_ss * c.r * g.ky_ss * c.r.transpose()).trace();
    const double target = (g.kz_tt * c.p * g.ky_tt * c.p).trace();
    const double cross = (g.kz_ts * c.r * g.ky_ts.transpose() * c.p).trace();
    c.value = source + target - 2.0 * cross;
    return c;
}

struct CkbParts {
    double value = 0.0;
    Matrix b;
    Matrix h;
    Matrix ls;  // (G^s_{Y^w} + eps I)^{-1}
    Matrix lt;  // (G^t_Y + eps n I)^{-1}
    CovarianceFactors factors;
    linalg::NuclearNorm nuclear;
};

CkbParts ckb_parts(const kernels::GramBundle &g, const label::WeightVector &q, double eps, bool want_polar) {
    require_equal_sizes(g);
    CkbParts c;
    const Eigen::Index n = g.n_target();
    const double nd = static_cast<double>(n);
    c.b = kernels::b_factor(q);
    c.h = kernels::centering_matrix(n);
    const Matrix gy_w = linalg::symmetrize(c.b.transpose() * g.ky_ss * c.b);
    const Matrix gz_w = linalg::symmetrize(c.b.transpose() * g.kz_ss * c.b);
    const Matrix gy_t = kernels::centered_gram(g.ky_tt);
    const Matrix gz_t = kernels::centered_gram(g.kz_tt);
    c.ls = safe_reg_inverse(gy_w, eps, "(G^s_{Y^w} + eps I)");
    c.lt = safe_reg_inverse(gy_t, eps * nd, "(G^t_Y + eps n I)");
    const double source = eps * (gz_w * c.ls).trace();
    const double target = eps * (gz_t * c.lt).trace();

    CovarianceFactors &f = c.factors;
    f.target_product = linalg::symmetrize(c.h * ((nd * eps) * c.lt) * c.h);
    f.source_product = linalg::symmetrize(c.b * (eps * c.ls) * c.b.transpose());
    try {
        f.m = linalg::psd_sqrt(f.target_product);
        f.m_w = c.b * linalg::psd_sqrt(linalg::symmetrize(eps * c.ls));
    } catch (const Error &e) {
        fail(ErrorKind::Numerical, "not_psd", std::string("covariance factor: ") + e.what());
    }
    const Matrix cross = f.m.transpose() * g.kz_ts * f.m_w;
    if (want_polar) {
        c.nuclear = linalg::nuclear_norm_with_polar(cross);
    } else {
        c.nuclear.value = linalg::nuclear_norm(cross);
    }
    c.value = source + target - 2.0 / std::sqrt(nd) * c.nuclear.value;
    return c;
}

double distance_scale(double sq, double &slope) {
    if (sq > kSqrtFloor) {
        const double d = std::sqrt(sq);
        slope = 0.5 / d;
        return d;
    }
    slope = 0.0;
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace

std::string to_record(const DiscrepancyReport &r) {
    std::ostringstream os;
    os << "cmmd_w = " << format_double(r.cmmd_w) << "\n"
       << "ckb_w = " << format_double(r.ckb_w) << "\n"
       << "pcod_sq = " << format_double(r.pcod_sq) << "\n"
       << "mmd_sq = " << format_double(r.mmd_sq) << "\n"
       << "pcod = " << format_double(r.pcod) << "\n"
       << "marginal = " << format_double(r.marginal) << "\n"
       << "cond_loss = " << format_double(r.cond_loss) << "\n"
       << "epsilon = " << format_double(r.epsilon) << "\n";
    return os.str();
}

double cmmd_w(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps) {
    check_inputs(bundle, q, eps);
    return cmmd_parts(bundle, q, eps).value;
}

double ckb_w(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps) {
    check_inputs(bundle, q, eps);
    return ckb_parts(bundle, q, eps, false).value;
}

CovarianceFactors covariance_factors(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps) {
    check_inputs(bundle, q, eps);
    return ckb_parts(bundle, q, eps, false).factors;
}

DiscrepancyReport pcod(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps) {
    check_inputs(bundle, q, eps);
    DiscrepancyReport r;
    r.epsilon = eps;
    r.cmmd_w = cmmd_parts(bundle, q, eps).value;
    r.ckb_w = ckb_parts(bundle, q, eps, false).value;
    r.pcod_sq = r.cmmd_w + r.ckb_w;
    return r;
}

double cod(const kernels::GramBundle &g, double eps) {
    if (!(eps > 0.0)) fail(ErrorKind::Config, "bad_epsilon", "epsilon must be positive");
    kernels::validate(g);
    const double ns = static_cast<double>(g.n_source());
    const double nt = static_cast<double>(g.n_target());

    const Matrix ps = safe_reg_inverse(g.ky_ss, eps * ns, "(K_Y^ss + eps n I)");
    const Matrix pt = safe_reg_inverse(g.ky_tt, eps * nt, "(K_Y^tt + eps n I)");
    const double mean_part = (g.kz_ss * ps * g.ky_ss * ps).trace() + (g.kz_tt * pt * g.ky_tt * pt).trace() -
                             2.0 * (g.kz_ts * ps * g.ky_ts.transpose() * pt).trace();

    const Matrix gys = kernels::centered_gram(g.ky_ss);
    const Matrix gyt = kernels::centered_gram(g.ky_tt);
    const Matrix gzs = kernels::centered_gram(g.kz_ss);
    const Matrix gzt = kernels::centered_gram(g.kz_tt);
    const Matrix ls = safe_reg_inverse(gys, eps * ns, "(G^s_Y + eps n I)");
    const Matrix lt = safe_reg_inverse(gyt, eps * nt, "(G^t_Y + eps n I)");
    const Matrix hs = kernels::centering_matrix(g.n_source());
    const Matrix ht = kernels::centering_matrix(g.n_target());
    // C = Phi H eps (G + eps n I)^{-1} H Phi^T = (Phi M)(Phi M)^T
    const Matrix ms = linalg::psd_sqrt(linalg::symmetrize(eps * hs * ls * hs));
    const Matrix mt = linalg::psd_sqrt(linalg::symmetrize(eps * ht * lt * ht));
    const double cov_part = eps * (gzs * ls).trace() + eps * (gzt * lt).trace() -
                            2.0 * linalg::nuclear_norm(mt.transpose() * g.kz_ts * ms);
    return mean_part + cov_part;
}

double mmd_sq(const Matrix &kz_ss, const Matrix &kz_tt, const Matrix &kz_ts) {
    if (kz_ts.rows() != kz_tt.rows() || kz_ts.cols() != kz_ss.rows()) {
        fail(ErrorKind::Data, "dim_mismatch", "mmd_sq: cross block shape disagrees with the domain blocks");
    }
    return std::max(0.0, kz_ss.mean() + kz_tt.mean() - 2.0 * kz_ts.mean());
}

DiscrepancyReport cond_loss(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps, CondForm form) {
    DiscrepancyReport r = pcod(bundle, q, eps);
    r.mmd_sq = mmd_sq(bundle.kz_ss, bundle.kz_tt, bundle.kz_ts);
    double unused = 0.0;
    if (form == CondForm::Distance) {
        r.pcod = distance_scale(r.pcod_sq, unused);
        r.marginal = distance_scale(r.mmd_sq, unused);
    } else {
        r.pcod = r.pcod_sq;
        r.marginal = r.mmd_sq;
    }
    r.cond_loss = r.pcod + r.marginal;
    return r;
}

CondLossEval cond_loss_with_grad(const kernels::GramBundle &bundle, const label::WeightVector &q, double eps,
                                 CondForm form) {
    check_inputs(bundle, q, eps);
    const CmmdParts cm = cmmd_parts(bundle, q, eps);
    const CkbParts ck = ckb_parts(bundle, q, eps, true);

    CondLossEval out;
    DiscrepancyReport &r = out.report;
    r.epsilon = eps;
    r.cmmd_w = cm.value;
    r.ckb_w = ck.value;
    r.pcod_sq = cm.value + ck.value;
    r.mmd_sq = mmd_sq(bundle.kz_ss, bundle.kz_tt, bundle.kz_ts);

    double pcod_slope = 1.0;
    double marg_slope = 1.0;
    if (form == CondForm::Distance) {
        r.pcod = distance_scale(r.pcod_sq, pcod_slope);
        r.marginal = distance_scale(r.mmd_sq, marg_slope);
    } else {
        r.pcod = r.pcod_sq;
        r.marginal = r.mmd_sq;
    }
    r.cond_loss = r.pcod + r.marginal;

    const double n = static_cast<double>(bundle.n_target());
    const double ns = static_cast<double>(bundle.n_source());
    const Matrix &ky_ts = bundle.ky_ts;
    // The pcod_sq expression is linear in each K_Z block apart from the nuclear norm.
    Matrix d_ss = cm.r * bundle.ky_ss * cm.r.transpose() + eps * ck.b * ck.ls * ck.b.transpose();
    Matrix d_tt = cm.p * bundle.ky_tt * cm.p + eps * ck.h * ck.lt * ck.h;
    Matrix d_ts = -2.0 * cm.p * ky_ts * cm.r.transpose() -
                  (2.0 / std::sqrt(n)) * ck.factors.m * ck.nuclear.polar * ck.factors.m_w.transpose();

    out.grad.d_ss = pcod_slope * d_ss + marg_slope * Matrix::Constant(d_ss.rows(), d_ss.cols(), 1.0 / (ns * ns));
    out.grad.d_tt = pcod_slope * d_tt + marg_slope * Matrix::Constant(d_tt.rows(), d_tt.cols(), 1.0 / (n * n));
    out.grad.d_ts = pcod_slope * d_ts + marg_slope * Matrix::Constant(d_ts.rows(), d_ts.cols(), -2.0 / (ns * n));
    return out;
}

}  // namespace glsge::discrepancy

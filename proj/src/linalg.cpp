#include "glsge/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "glsge/error.hpp"

namespace glsge::linalg {

namespace {

// Gauss-Kronrod 15-point abscissae/weights on [-1, 1] (non-negative half).
// Odd indices are the embedded 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Full 15-node rule expanded to both sides; gauss_w is zero on Kronrod-only nodes.
struct Rule15 {
    std::array<double, 15> x{};
    std::array<double, 15> wk{};
    std::array<double, 15> wg{};
};

Rule15 make_rule() {
    Rule15 r;
    int k = 0;
    for (int i = 0; i < 7; ++i) {
        r.x[k] = -kXgk[i];
        r.wk[k] = kWgk[i];
        r.wg[k] = (i % 2 == 1) ? kWg[i / 2] : 0.0;
        ++k;
    }
    r.x[k] = 0.0;
    r.wk[k] = kWgk[7];
    r.wg[k] = kWg[3];
    ++k;
    for (int i = 6; i >= 0; --i) {
        r.x[k] = kXgk[i];
        r.wk[k] = kWgk[i];
        r.wg[k] = (i % 2 == 1) ? kWg[i / 2] : 0.0;
        ++k;
    }
    return r;
}

const Rule15 &rule() {
    static const Rule15 r = make_rule();
    return r;
}

struct Cell1 {
    double a, b, value, error;
    bool operator<(const Cell1 &o) const { return error < o.error; }
};

Cell1 eval_interval(const std::function<double(double)> &f, double a, double b, long &evals) {
    const Rule15 &r = rule();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double k = 0.0;
    double g = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double v = f(c + h * r.x[i]);
        k += r.wk[i] * v;
        g += r.wg[i] * v;
    }
    evals += 15;
    return {a, b, k * h, std::abs((k - g) * h)};
}

struct Cell2 {
    Rect rect;
    double value, error;
    bool operator<(const Cell2 &o) const { return error < o.error; }
};

Cell2 eval_cell(const std::function<double(double, double)> &f, const Rect &q, long &evals) {
    const Rule15 &r = rule();
    const double cx = 0.5 * (q.x0 + q.x1);
    const double hx = 0.5 * (q.x1 - q.x0);
    const double cy = 0.5 * (q.y0 + q.y1);
    const double hy = 0.5 * (q.y1 - q.y0);
    double k = 0.0;
    double g = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double x = cx + hx * r.x[i];
        for (int j = 0; j < 15; ++j) {
            const double v = f(x, cy + hy * r.x[j]);
            k += r.wk[i] * r.wk[j] * v;
            g += r.wg[i] * r.wg[j] * v;
        }
    }
    evals += 225;
    const double area = hx * hy;
    return {q, k * area, std::abs((k - g) * area)};
}

}  // namespace

double symmetry_defect(const Matrix &s) {
    if (s.rows() != s.cols()) return INFINITY;
    return (s - s.transpose()).cwiseAbs().maxCoeff();
}

Matrix symmetrize(const Matrix &s) { return 0.5 * (s + s.transpose()); }

SpectralDecomp sym_eig(const Matrix &s, double sym_tol) {
    if (s.rows() != s.cols()) {
        std::ostringstream msg;
        msg << "sym_eig: matrix is " << s.rows() << "x" << s.cols() << ", expected square";
        fail(ErrorKind::Numerical, "not_square", msg.str());
    }
    SpectralDecomp out;
    if (s.size() == 0) return out;
    if (!s.allFinite()) fail(ErrorKind::Numerical, "non_finite", "sym_eig: non-finite entry");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    const double defect = symmetry_defect(s);
    if (defect > sym_tol * scale) {
        std::ostringstream msg;
        msg << "sym_eig: symmetry defect " << defect << " exceeds " << sym_tol * scale;
        fail(ErrorKind::Numerical, "not_symmetric", msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "sym_eig: QR iteration did not converge within "
            << Eigen::SelfAdjointEigenSolver<Matrix>::m_maxIterations * s.rows() << " iterations";
        fail(ErrorKind::Numerical, "eig_no_convergence", msg.str());
    }
    // Eigen returns ascending order.
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

Matrix psd_sqrt(const Matrix &s, double clamp_floor) {
    const SpectralDecomp d = sym_eig(s);
    if (d.eigenvalues.size() == 0) return Matrix(0, 0);
    const double lo = d.eigenvalues.minCoeff();
    if (lo < -clamp_floor) {
        std::ostringstream msg;
        msg << "psd_sqrt: eigenvalue " << lo << " below -" << clamp_floor;
        fail(ErrorKind::Numerical, "not_psd", msg.str());
    }
    const Vector root = d.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return d.eigenvectors * root.asDiagonal();
}

double nuclear_norm(const Matrix &a) {
    if (a.size() == 0) return 0.0;
    if (!a.allFinite()) fail(ErrorKind::Numerical, "non_finite", "nuclear_norm: non-finite entry");
    Eigen::BDCSVD<Matrix> svd(a);
    if (svd.info() == Eigen::Success && svd.singularValues().allFinite()) return svd.singularValues().sum();
    // BDCSVD occasionally reports success with NaN output; Jacobi is slower but robust.
    Eigen::JacobiSVD<Matrix> jac(a);
    if (jac.info() != Eigen::Success || !jac.singularValues().allFinite()) {
        fail(ErrorKind::Numerical, "svd_no_convergence", "nuclear_norm: SVD did not converge");
    }
    return jac.singularValues().sum();
}

NuclearNorm nuclear_norm_with_polar(const Matrix &a, double rank_tol) {
    NuclearNorm out;
    out.polar = Matrix::Zero(a.rows(), a.cols());
    if (a.size() == 0) return out;
    if (!a.allFinite()) fail(ErrorKind::Numerical, "non_finite", "nuclear_norm: non-finite entry");
    const auto finish = [&](const auto &svd) {
        const Vector &sv = svd.singularValues();
        out.value = sv.sum();
        const double cut = rank_tol * (sv.size() > 0 ? sv(0) : 0.0);
        Eigen::Index r = 0;
        while (r < sv.size() && sv(r) > cut) ++r;
        if (r > 0) out.polar = svd.matrixU().leftCols(r) * svd.matrixV().leftCols(r).transpose();
        return out;
    };
    const auto ok = [](const auto &svd) {
        return svd.info() == Eigen::Success && svd.singularValues().allFinite() && svd.matrixU().allFinite() &&
               svd.matrixV().allFinite();
    };
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (ok(svd)) return finish(svd);
    Eigen::JacobiSVD<Matrix> jac(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (!ok(jac)) fail(ErrorKind::Numerical, "svd_no_convergence", "nuclear_norm: SVD did not converge");
    return finish(jac);
}

Matrix reg_inverse(const Matrix &s, double eps) {
    if (!(eps > 0.0)) fail(ErrorKind::Numerical, "bad_epsilon", "reg_inverse: epsilon must be positive");
    if (s.rows() != s.cols()) fail(ErrorKind::Numerical, "not_square", "reg_inverse: matrix must be square");
    const Eigen::Index n = s.rows();
    Matrix shifted = symmetrize(s);
    shifted.diagonal().array() += eps;
    Eigen::LDLT<Matrix> ldlt(shifted);
    Matrix inv = ldlt.solve(Matrix::Identity(n, n));
    if (ldlt.info() != Eigen::Success || !inv.allFinite()) {
        fail(ErrorKind::Numerical, "singular", "reg_inverse: factorization failed");
    }
    inv = symmetrize(inv);
    const double residual = n == 0 ? 0.0 : (shifted * inv - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (residual > 1e-8) {
        std::ostringstream msg;
        msg << "reg_inverse: residual " << residual << " after regularization by " << eps;
        fail(ErrorKind::Numerical, "singular", msg.str());
    }
    return inv;
}

QuadResult integrate_1d(const std::function<double(double)> &f, double a, double b, double tol,
                        int max_intervals) {
    QuadResult out;
    if (a == b) return out;
    std::priority_queue<Cell1> heap;
    Cell1 first = eval_interval(f, a, b, out.evaluations);
    double total = first.value;
    double err = first.error;
    heap.push(first);
    int intervals = 1;
    while (err > tol && intervals < max_intervals) {
        const Cell1 worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Cell1 left = eval_interval(f, worst.a, mid, out.evaluations);
        const Cell1 right = eval_interval(f, mid, worst.b, out.evaluations);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // Re-sum to shed drift from the incremental updates.
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = err;
    if (!std::isfinite(total)) fail(ErrorKind::Numerical, "non_finite", "integrate_1d: non-finite integrand");
    if (err > tol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "integrate_1d: budget of " << max_intervals << " intervals exhausted; estimate " << total
            << " with error bound " << err;
        fail(ErrorKind::Numerical, "quad_budget", msg.str());
    }
    return out;
}

QuadResult rect_quad_2d(const std::function<double(double, double)> &f, const Rect &rect, double tol,
                        int max_cells) {
    if (!(tol > 0.0)) fail(ErrorKind::Numerical, "bad_tolerance", "rect_quad_2d: tolerance must be positive");
    if (!(rect.x1 >= rect.x0) || !(rect.y1 >= rect.y0)) {
        fail(ErrorKind::Numerical, "bad_rect", "rect_quad_2d: rectangle bounds are inverted");
    }
    QuadResult out;
    if (rect.x0 == rect.x1 || rect.y0 == rect.y1) return out;
    std::priority_queue<Cell2> heap;
    Cell2 first = eval_cell(f, rect, out.evaluations);
    double err = first.error;
    heap.push(first);
    int cells = 1;
    while (err > tol && cells + 3 <= max_cells) {
        const Cell2 worst = heap.top();
        heap.pop();
        const Rect &q = worst.rect;
        const double mx = 0.5 * (q.x0 + q.x1);
        const double my = 0.5 * (q.y0 + q.y1);
        const std::array<Rect, 4> parts = {Rect{q.x0, mx, q.y0, my}, Rect{mx, q.x1, q.y0, my},
                                           Rect{q.x0, mx, my, q.y1}, Rect{mx, q.x1, my, q.y1}};
        err -= worst.error;
        for (const Rect &p : parts) {
            Cell2 c = eval_cell(f, p, out.evaluations);
            err += c.error;
            heap.push(c);
        }
        cells += 3;
    }
    double total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = err;
    if (!std::isfinite(total)) fail(ErrorKind::Numerical, "non_finite", "rect_quad_2d: non-finite integrand");
    if (err > tol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "rect_quad_2d: budget of " << max_cells << " cells exhausted; estimate " << total
            << " with error bound " << err;
        fail(ErrorKind::Numerical, "quad_budget", msg.str());
    }
    return out;
}

}  // namespace glsge::linalg

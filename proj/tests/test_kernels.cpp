#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "glsge/error.hpp"
#include "glsge/kernels.hpp"
#include "test_util.hpp"

using namespace glsge;
using namespace glsge::kernels;
using glsge::testing::max_abs;

TEST(Gram, Examples) {
    std::mt19937_64 rng(1);
    const Matrix x = glsge::testing::random_matrix(6, 3, rng);
    for (double bw : {0.1, 1.0, 10.0}) {
        const Matrix k = gram(x, x, KernelSpec::rbf(bw));
        for (int i = 0; i < 6; ++i) EXPECT_EQ(k(i, i), 1.0);
    }
    const Matrix e = Matrix::Identity(2, 2);
    EXPECT_EQ(gram(e, e, KernelSpec::linear()), Matrix::Identity(2, 2));

    Matrix two(2, 1);
    two << 0.0, 1.5;
    const Matrix k = gram(two, two, KernelSpec::rbf(0.7));
    EXPECT_NEAR(k(0, 1), std::exp(-1.5 * 1.5 / (2 * 0.49)), 1e-15);
}

TEST(Gram, PolynomialMatchesFormula) {
    std::mt19937_64 rng(2);
    const Matrix a = glsge::testing::random_matrix(4, 3, rng);
    const Matrix b = glsge::testing::random_matrix(5, 3, rng);
    const Matrix k = gram(a, b, KernelSpec::polynomial(3, 0.5));
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 5; ++j) EXPECT_NEAR(k(i, j), std::pow(a.row(i).dot(b.row(j)) + 0.5, 3), 1e-12);
    }
}

TEST(Gram, PsdOnRandomInputs) {
    std::mt19937_64 rng(3);
    for (const auto &spec : {KernelSpec::rbf(0.8), KernelSpec::linear(), KernelSpec::polynomial(2, 1.0)}) {
        const Matrix x = glsge::testing::random_matrix(40, 3, rng);
        const Matrix k = gram(x, x, spec);
        Eigen::SelfAdjointEigenSolver<Matrix> es(k);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * 40);
        EXPECT_LE(max_abs(k - k.transpose()), 0.0);
    }
}

TEST(Gram, PermutationEquivariance) {
    std::mt19937_64 rng(4);
    const Matrix a = glsge::testing::random_matrix(6, 2, rng);
    const Matrix b = glsge::testing::random_matrix(6, 2, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(6);
    p.indices() << 3, 0, 5, 1, 4, 2;
    const Matrix k = gram(a, b, KernelSpec::rbf(1.0));
    const Matrix kp = gram(p * a, p * b, KernelSpec::rbf(1.0));
    EXPECT_LE(max_abs(kp - p * k * p.transpose()), 1e-15);
}

TEST(Gram, DimensionMismatchThrows) {
    try {
        (void)gram(Matrix::Zero(2, 3), Matrix::Zero(2, 2), KernelSpec::linear());
        FAIL() << "expected throw";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), "dim_mismatch");
    }
    EXPECT_THROW(validate(KernelSpec::rbf(0.0)), Error);
}

TEST(MedianHeuristic, Examples) {
    Matrix a(2, 1);
    a << 0, 2;
    EXPECT_EQ(median_heuristic(a), 2.0);
    Matrix b(3, 1);
    b << 0, 1, 3;
    EXPECT_EQ(median_heuristic(b), 2.0);
    std::mt19937_64 rng(5);
    const Matrix x = glsge::testing::random_matrix(31, 3, rng);
    EXPECT_NEAR(median_heuristic(2.5 * x), 2.5 * median_heuristic(x), 1e-12);
    EXPECT_THROW((void)median_heuristic(Matrix::Zero(4, 2)), Error);
}

TEST(Centering, Examples) {
    EXPECT_EQ(centering_matrix(1), Matrix::Zero(1, 1));
    Matrix h2(2, 2);
    h2 << 0.5, -0.5, -0.5, 0.5;
    EXPECT_EQ(centering_matrix(2), h2);
    const Matrix h = centering_matrix(7);
    EXPECT_LE(max_abs(h * Vector::Ones(7)), 1e-15);
    EXPECT_LE(max_abs(h * h - h), 1e-12);
}

TEST(BFactor, Examples) {
    Vector half(2);
    half << 0.5, 0.5;
    const Matrix b = b_factor(label::WeightVector(half));
    EXPECT_NEAR(b(0, 0), std::sqrt(0.5) - 0.5 * std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(b(0, 0), 0.353553, 1e-6);
    EXPECT_NEAR(b(0, 1), -0.353553, 1e-6);
    Matrix bbt(2, 2);
    bbt << 0.25, -0.25, -0.25, 0.25;
    EXPECT_LE(max_abs(b * b.transpose() - bbt), 1e-15);

    EXPECT_LE(max_abs(b_factor(label::WeightVector::uniform(1))), 0.0);

    const Matrix bu = b_factor(label::WeightVector::uniform(9));
    EXPECT_LE(max_abs(bu - centering_matrix(9) / 3.0), 1e-15);
}

TEST(BFactor, ReconstructsWeightedCentering) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + trial;
        const auto q = glsge::testing::random_weights(n, rng);
        const Matrix b = b_factor(q);
        const Matrix hq = Matrix(q.values().asDiagonal()) - q.values() * q.values().transpose();
        EXPECT_LE(max_abs(b * b.transpose() - hq), 1e-12);
    }
}

TEST(CenteredGram, Examples) {
    EXPECT_LE(max_abs(centered_gram(Matrix::Ones(5, 5))), 1e-15);
    std::mt19937_64 rng(7);
    const Matrix k = glsge::testing::random_psd(6, rng);
    EXPECT_LE(max_abs(reweighted_gram(k, label::WeightVector::uniform(6)) - centered_gram(k) / 6.0), 1e-13);
    Vector half(2);
    half << 0.5, 0.5;
    Matrix want(2, 2);
    want << 0.25, -0.25, -0.25, 0.25;
    EXPECT_LE(max_abs(reweighted_gram(Matrix::Identity(2, 2), label::WeightVector(half)) - want), 1e-15);
}

TEST(CenteredGram, CommutesWithRegularizedInverse) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 3 + trial % 15;
        const Matrix g = centered_gram(glsge::testing::random_psd(n, rng));
        const Matrix h = centering_matrix(n);
        const Matrix inv = linalg::reg_inverse(g, 0.01);
        EXPECT_LE(max_abs(h * inv - inv * h), 1e-10);
    }
}

TEST(GramBackward, MatchesFiniteDifferences) {
    std::mt19937_64 rng(9);
    const Matrix a = glsge::testing::random_matrix(4, 3, rng);
    const Matrix b = glsge::testing::random_matrix(5, 3, rng);
    const Matrix w = glsge::testing::random_matrix(4, 5, rng);
    for (const auto &spec : {KernelSpec::rbf(1.3), KernelSpec::linear(), KernelSpec::polynomial(2, 0.7)}) {
        const auto f = [&](const Matrix &aa, const Matrix &bb) { return (gram(aa, bb, spec).array() * w.array()).sum(); };
        const auto g = gram_backward(a, b, spec, gram(a, b, spec), w);
        const double h = 1e-6;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 3; ++j) {
                Matrix up = a, dn = a;
                up(i, j) += h;
                dn(i, j) -= h;
                EXPECT_NEAR(g.da(i, j), (f(up, b) - f(dn, b)) / (2 * h), 1e-7);
            }
        }
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 3; ++j) {
                Matrix up = b, dn = b;
                up(i, j) += h;
                dn(i, j) -= h;
                EXPECT_NEAR(g.db(i, j), (f(a, up) - f(a, dn)) / (2 * h), 1e-7);
            }
        }
    }
}

TEST(Bundle, ShapesAndValidation) {
    std::mt19937_64 rng(10);
    const auto bundle = make_bundle(glsge::testing::random_matrix(5, 3, rng), glsge::testing::random_matrix(4, 3, rng),
                                    glsge::testing::random_matrix(5, 2, rng), glsge::testing::random_matrix(4, 2, rng),
                                    KernelSpec::rbf(1.0), KernelSpec::rbf(1.0));
    EXPECT_EQ(bundle.n_source(), 5);
    EXPECT_EQ(bundle.n_target(), 4);
    EXPECT_EQ(bundle.kz_ts.rows(), 4);
    EXPECT_EQ(bundle.kz_ts.cols(), 5);
    EXPECT_NO_THROW(validate(bundle));
    EXPECT_THROW((void)make_bundle(Matrix::Zero(5, 3), Matrix::Zero(4, 3), Matrix::Zero(4, 2), Matrix::Zero(4, 2),
                                   KernelSpec::rbf(1.0), KernelSpec::rbf(1.0)),
                 Error);
}

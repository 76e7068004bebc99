#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hope/estimators.hpp"
#include "oracles.hpp"

using namespace hope;

TEST_CASE("lasso on the 2x2 identity matches grid minimisation") {
    const Matrix X = Matrix::Identity(2, 2);
    const Vector y = (Vector(2) << 3.0, 0.5).finished();
    const auto objective = [](double a, double b) {
        return (3.0 - a) * (3.0 - a) + (0.5 - b) * (0.5 - b) + std::abs(a) + std::abs(b);
    };
    const Eigen::Vector2d grid = testing::grid_minimize_2d(objective, -1.0, 4.0, 0.005);
    CHECK(grid(0) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(std::abs(grid(1)) < 1e-9);

    LassoConfig cfg;
    cfg.lambda = 1.0;
    cfg.objective_scale = ObjectiveScale::Unit;
    const LassoFit fit = fit_lasso(X, y, cfg);
    CHECK(fit.converged);
    CHECK(fit.coefficients(0) == doctest::Approx(grid(0)).epsilon(1e-9));
    CHECK(fit.coefficients(1) == 0.0);
}

TEST_CASE("unpenalised lasso on a square invertible design is least squares") {
    RngStream rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix X = 0.3 * testing::gaussian_matrix(rng, 6, 6) + 3.0 * Matrix::Identity(6, 6);
        const Vector y = rng.normal_vector(6);
        LassoConfig cfg;
        cfg.lambda = 0.0;
        cfg.tol = 1e-14;
        const Vector ls = X.partialPivLu().solve(y);
        const LassoFit fit = fit_lasso(X, y, cfg);
        CHECK(fit.converged);
        CHECK((fit.coefficients - ls).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("lasso with zero response is zero") {
    RngStream rng(2);
    const Matrix X = testing::gaussian_matrix(rng, 10, 30);
    for (ObjectiveScale scale : {ObjectiveScale::Unit, ObjectiveScale::InverseN}) {
        LassoConfig cfg;
        cfg.lambda = 0.1;
        cfg.objective_scale = scale;
        CHECK(fit_lasso(X, Vector::Zero(10), cfg).coefficients.isZero(0.0));
    }
}

TEST_CASE("lasso on orthonormal designs equals soft-thresholded least squares") {
    RngStream rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index n = 8 + trial % 5;
        const Matrix Q = testing::random_orthonormal(rng, n);
        const Vector y = 2.0 * rng.normal_vector(n);
        LassoConfig cfg;
        cfg.lambda = rng.uniform(0.1, 3.0);
        cfg.objective_scale = ObjectiveScale::Unit;
        const Vector ols = Q.transpose() * y;
        const Vector fit = fit_lasso(Q, y, cfg).coefficients;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double expected = std::copysign(std::max(std::abs(ols(j)) - cfg.lambda / 2.0, 0.0), ols(j));
            CHECK(fit(j) == doctest::Approx(expected).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("lasso objective never exceeds the zero vector's") {
    RngStream rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix X = testing::gaussian_matrix(rng, 15, 40);
        const Vector y = rng.normal_vector(15);
        LassoConfig cfg;
        cfg.lambda = rng.uniform(0.01, 1.0);
        cfg.objective_scale = trial % 2 ? ObjectiveScale::Unit : ObjectiveScale::InverseN;
        const Vector b = fit_lasso(X, y, cfg).coefficients;
        CHECK(lasso_objective(X, y, b, cfg.lambda, cfg.objective_scale) <=
              lasso_objective(X, y, Vector::Zero(40), cfg.lambda, cfg.objective_scale) + 1e-12);
    }
}

TEST_CASE("lasso above lambda_max returns zero") {
    RngStream rng(31);
    const Matrix X = testing::gaussian_matrix(rng, 12, 20);
    const Vector y = rng.normal_vector(12);
    for (ObjectiveScale scale : {ObjectiveScale::Unit, ObjectiveScale::InverseN}) {
        LassoConfig cfg;
        cfg.objective_scale = scale;
        cfg.lambda = 1.0001 * lasso_lambda_max(X, y, scale);
        CHECK(fit_lasso(X, y, cfg).coefficients.isZero(0.0));
        cfg.lambda = 0.9 * lasso_lambda_max(X, y, scale);
        CHECK_FALSE(fit_lasso(X, y, cfg).coefficients.isZero(0.0));
    }
}

TEST_CASE("zero-variance columns keep a zero coefficient") {
    RngStream rng(37);
    Matrix X = testing::gaussian_matrix(rng, 10, 6);
    X.col(2).setZero();
    const Vector y = X.col(0) - X.col(4) + 0.1 * rng.normal_vector(10);
    LassoConfig cfg;
    cfg.lambda = 0.01;
    const LassoFit fit = fit_lasso(X, y, cfg);
    CHECK(fit.coefficients(2) == 0.0);
    CHECK(fit.coefficients.allFinite());
}

TEST_CASE("lasso path is monotone in lambda") {
    RngStream rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix X = testing::gaussian_matrix(rng, 20, 50);
        Vector truth = Vector::Zero(50);
        for (Eigen::Index j = 0; j < 5; ++j) truth(j * 7) = rng.normal();
        const Vector y = X * truth + 0.3 * rng.normal_vector(20);
        LassoConfig cfg;
        cfg.tol = 1e-13;
        const double lmax = lasso_lambda_max(X, y, cfg.objective_scale);
        std::vector<double> lambdas;
        for (int k = 0; k < 20; ++k) lambdas.push_back(lmax * std::pow(10.0, -3.0 * k / 19.0));
        const auto fits = fit_lasso_path(X, y, lambdas, cfg);
        REQUIRE(fits.size() == lambdas.size());
        for (std::size_t k = 1; k < fits.size(); ++k) {
            const double prev = lasso_objective(X, y, fits[k - 1].coefficients, lambdas[k - 1], cfg.objective_scale);
            const double cur = lasso_objective(X, y, fits[k].coefficients, lambdas[k], cfg.objective_scale);
            CHECK(cur <= prev + 1e-8);
            CHECK(fits[k].coefficients.lpNorm<1>() >= fits[k - 1].coefficients.lpNorm<1>() - 1e-8);
        }
    }
}

TEST_CASE("lasso config validation") {
    LassoConfig cfg;
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_iters = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(fit_lasso(Matrix::Ones(3, 2), Vector::Ones(4), LassoConfig{}), StructuralError);
}

TEST_CASE("soft threshold") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-1.0, 1.0) == 0.0);
}

TEST_CASE("ridgeless fit on single rows") {
    Matrix X(1, 3);
    X << 1, 0, 0;
    CHECK(fit_rdl(X, Vector::Constant(1, 2.0)).isApprox((Vector(3) << 2, 0, 0).finished()));

    X << 1, 1, 0;
    const Vector theta = fit_rdl(X, Vector::Constant(1, 2.0));
    const Vector expected = testing::pinv_solve(X, Vector::Constant(1, 2.0));
    CHECK((theta - expected).norm() < 1e-12);
    CHECK(theta.isApprox((Vector(3) << 1, 1, 0).finished()));
    CHECK(theta.norm() < (Vector(3) << 2, 0, 0).finished().norm());

    CHECK(fit_rdl(X, Vector::Zero(1)).isZero(0.0));
}

TEST_CASE("ridgeless fit interpolates and is minimum norm") {
    RngStream rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 5 + trial;
        const Eigen::Index p = n + 10 + 3 * trial;
        const Matrix X = testing::gaussian_matrix(rng, n, p);
        const Vector y = rng.normal_vector(n);
        const Vector theta = fit_rdl(X, y);
        CHECK((X * theta - y).norm() <= 1e-8 * y.norm());
        CHECK((theta - testing::pinv_solve(X, y)).norm() <= 1e-8 * theta.norm());
        const Matrix null = testing::null_space(X);
        for (int k = 0; k < 10; ++k) {
            const Vector alt = theta + null * rng.normal_vector(null.cols());
            CHECK((X * alt - y).norm() <= 1e-8 * y.norm());
            CHECK(theta.norm() <= alt.norm());
        }
    }
}

TEST_CASE("ridgeless fit on a rank-deficient design") {
    RngStream rng(47);
    Matrix X = testing::gaussian_matrix(rng, 6, 20);
    X.row(5) = X.row(0);
    Vector y = rng.normal_vector(6);
    y(5) = y(0);
    const Vector theta = fit_rdl(X, y);
    CHECK(theta.allFinite());
    CHECK((X * theta - y).norm() <= 1e-8 * y.norm());
    CHECK((theta - testing::pinv_solve(X, y)).norm() <= 1e-8 * theta.norm());
}

TEST_CASE("lasso support thresholds") {
    CHECK(lasso_support((Vector(4) << 0, 1.5, 0, -0.2).finished(), 0.0).indices() ==
          std::vector<Eigen::Index>{1, 3});
    CHECK(lasso_support((Vector(2) << 1e-12, 2).finished(), 1e-8).indices() == std::vector<Eigen::Index>{1});
    const SupportSet empty = lasso_support(Vector::Zero(5), 1e-8);
    CHECK(empty.empty());
    CHECK(empty.source() == SupportSource::LassoSupport);
}

TEST_CASE("sis picks the aligned column") {
    const Matrix X = Matrix::Identity(6, 6);
    const Vector y = X.col(3);
    CHECK(sis_screen(X, y, 1).indices() == std::vector<Eigen::Index>{3});
    const SupportSet all = sis_screen(X, y, 6);
    CHECK(all.is_full());
    CHECK(all.source() == SupportSource::Full);
}

TEST_CASE("sis ties go to the lower index") {
    RngStream rng(53);
    Matrix X = testing::gaussian_matrix(rng, 10, 4);
    const Vector y = rng.normal_vector(10);
    X.col(0) = y;
    X.col(1) = y;
    CHECK(sis_screen(X, y, 1).indices() == std::vector<Eigen::Index>{0});
}

TEST_CASE("sis is permutation equivariant") {
    RngStream rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix X = testing::gaussian_matrix(rng, 12, 15);
        const Vector y = X.col(2) - 0.5 * X.col(9) + 0.2 * rng.normal_vector(12);
        std::vector<Eigen::Index> perm(15);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng.engine());
        Matrix Xp(12, 15);
        for (Eigen::Index j = 0; j < 15; ++j) Xp.col(j) = X.col(perm[static_cast<std::size_t>(j)]);
        const SupportSet base = sis_screen(X, y, 4);
        const SupportSet permuted = sis_screen(Xp, y, 4);
        std::vector<Eigen::Index> mapped;
        for (Eigen::Index j : permuted.indices()) mapped.push_back(perm[static_cast<std::size_t>(j)]);
        std::sort(mapped.begin(), mapped.end());
        CHECK(mapped == base.indices());
    }
}

TEST_CASE("sis keep bounds") {
    CHECK_THROWS(sis_screen(Matrix::Identity(3, 3), Vector::Ones(3), 0));
    CHECK_THROWS(sis_screen(Matrix::Identity(3, 3), Vector::Ones(3), 4));
    CHECK(sis_default_keep(22, 200) == static_cast<Eigen::Index>(std::ceil(22.0 / std::log(22.0))));
    CHECK(sis_default_keep(100, 10) == 10);
}

TEST_CASE("initial lasso lambda rate") {
    CHECK(initial_lasso_lambda(2.0, 100, 25, 1.0) == doctest::Approx(2.0 * std::sqrt(std::log(100.0) / 25.0)));
    CHECK(initial_lasso_lambda(0.0, 100, 25, 1.0) == 0.0);
}

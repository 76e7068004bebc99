#pragma once

#include <vector>

#include "hope/core.hpp"

namespace hope {

// Selects the weight on the squared-error term of the Lasso objective:
//   Unit:       ||y - X b||^2       + lambda ||b||_1
//   InverseN:   (1/N) ||y - X b||^2 + lambda ||b||_1
enum class ObjectiveScale { Unit, InverseN };

struct LassoConfig {
    double lambda = 0.0;
    ObjectiveScale objective_scale = ObjectiveScale::InverseN;
    int max_iters = 100000;
    double tol = 1e-10;
    // Number of geometric warm-start steps per decade between lambda_max and lambda.
    int path_steps_per_decade = 4;

    void validate() const;
};

struct LassoFit {
    Vector coefficients;
    bool converged = true;
    int sweeps = 0;
};

/// Cyclic coordinate descent with soft-thresholding on covariance-precomputed
/// updates. Runs a geometric warm-start path from the smallest lambda that zeroes
/// every coefficient down to cfg.lambda. Non-convergence is reported through
/// LassoFit::converged rather than an exception; the last iterate is returned.
LassoFit fit_lasso(const ConstMatrixRef& X, const ConstVectorRef& y, const LassoConfig& cfg);

/// Solves along a caller-supplied lambda sequence, warm starting each fit from
/// the previous one. Returns one fit per lambda, in input order.
std::vector<LassoFit> fit_lasso_path(const ConstMatrixRef& X, const ConstVectorRef& y,
                                     const std::vector<double>& lambdas, const LassoConfig& cfg);

/// Smallest lambda for which the all-zero vector is optimal.
double lasso_lambda_max(const ConstMatrixRef& X, const ConstVectorRef& y, ObjectiveScale scale);

double lasso_objective(const ConstMatrixRef& X, const ConstVectorRef& y, const ConstVectorRef& beta,
                       double lambda, ObjectiveScale scale);

// sign(v) * max(|v| - t, 0)
double soft_threshold(double v, double t);

/// Minimum-norm least squares X^T (X X^T)^+ y. Eigenvalues of X X^T below
/// rel_cutoff * largest are treated as zero.
Vector fit_rdl(const ConstMatrixRef& X, const ConstVectorRef& y, double rel_cutoff = 1e-10);

SupportSet lasso_support(const ConstVectorRef& theta, double zero_tol = 1e-8);

/// Keeps the `keep` features with the largest absolute marginal correlation
/// (1/N) sum_t x_tk y_t. Ties go to the lower index.
SupportSet sis_screen(const ConstMatrixRef& X, const ConstVectorRef& y, Eigen::Index keep);

// ceil(N / log N), at least 1 and at most p.
Eigen::Index sis_default_keep(Eigen::Index n_samples, Eigen::Index dim);

// c * sigma * sqrt(log p / N)
double initial_lasso_lambda(double sigma, Eigen::Index dim, Eigen::Index n_samples, double constant = 1.0);

}  // namespace hope

#pragma once

#include <optional>
#include <string_view>

#include "hope/core.hpp"
#include "hope/estimators.hpp"

namespace hope {

// The query context (or its image X x) vanishes; the pointwise transform is undefined.
class DegenerateQuery : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class InitialEstimator { Lasso, Rdl, CrossValidated };
enum class SupportRule { LassoSupport, Sis, Full };

std::string_view to_string(InitialEstimator e);
std::string_view to_string(SupportRule r);
InitialEstimator parse_initial_estimator(std::string_view s);
SupportRule parse_support_rule(std::string_view s);

struct PweConfig {
    // lambda_N = lambda_constant * sigma * sqrt(log N / N) for the transformed Lasso.
    double lambda_constant = 0.5;
    // Floor applied to lambda_N so noiseless runs still solve a strictly convex-ish problem.
    double lambda_floor = 1e-8;
    // Initial-estimator and screening Lasso: initial_lambda_constant * sigma * sqrt(log p / N).
    double initial_lambda_constant = 1.0;
    InitialEstimator initial_estimator = InitialEstimator::Lasso;
    SupportRule support_rule = SupportRule::LassoSupport;
    // 0 selects ceil(N / log N).
    Eigen::Index sis_keep = 0;
    double support_zero_tol = 1e-8;
    double gamma_sigma_tol = 1e-10;
    // Replaces the known sigma by the residual spread of the initial fit.
    bool plug_in_sigma = false;
    LassoConfig solver{};

    double lambda_n(Eigen::Index n, double sigma) const;
    void validate() const;
};

/// Output of the pointwise split X theta = sqrt(N) alpha z + sqrt(N) zeta.
struct ProjectSplit {
    double alpha = 0.0;
    // ||X x|| / (sqrt(N) ||x||^2); alpha = scale * <x, theta>.
    double scale = 0.0;
    Vector z;
    Vector zeta;
};

/// Splits X theta along the query direction x. Throws DegenerateQuery when
/// ||x|| or ||X x|| vanishes.
ProjectSplit project_split(const ConstMatrixRef& X, const ConstVectorRef& x, const ConstVectorRef& theta);

struct GammaBasis {
    Matrix gamma;
    // Column replaced by the normalized nuisance estimate; empty when the pure
    // eigenvector basis is used.
    std::optional<Eigen::Index> replaced_index;
    // Eigenvalues of N^{-1} X Q X^T in descending order.
    Vector eigenvalues;
};

/// Eigenvectors of N^{-1} X Q_x X^T (descending, first nonzero component
/// positive) with the column best aligned with z swapped for the normalized
/// X Q_x theta_hat. Only columns on which that vector has a nonzero loading
/// are eligible for the swap. Falls back to the plain eigenbasis when that vector
/// vanishes or the swap makes the basis singular.
GammaBasis build_gamma(const ConstMatrixRef& X, const ConstVectorRef& x, const ConstVectorRef& z,
                       const ConstVectorRef& theta_hat, double gamma_sigma_tol = 1e-10);

// Same construction from a precomputed Gram matrix X X^T, used on the hot path.
GammaBasis build_gamma_from_gram(const ConstMatrixRef& gram, const ConstVectorRef& Xx, double x_sq_norm,
                                 const ConstVectorRef& z, const ConstVectorRef& X_theta_hat,
                                 double x_dot_theta_hat, double gamma_sigma_tol);

// sqrt(N) [z, Gamma]
Matrix transformed_design(const ConstVectorRef& z, const ConstMatrixRef& gamma);

struct TransformedFit {
    double alpha_hat = 0.0;
    Vector xi_hat;
    bool converged = true;
};

/// Lasso on beta = [alpha, xi] with objective (1/N)||y - Z beta||^2 + lambda ||beta||_1.
TransformedFit solve_transformed(const ConstMatrixRef& Z, const ConstVectorRef& y, double lambda,
                                 const LassoConfig& solver = {});

/// alpha_hat * sqrt(N) ||x||^2 / ||X x||.
double predict_mu(double alpha_hat, const ConstMatrixRef& X, const ConstVectorRef& x);

/// Per-arm artifacts that do not depend on the query: support, truncated
/// estimation half, its Gram matrix and the initial estimate on the support.
struct PwePreparation {
    SupportSet support;
    InitialEstimator estimator_used = InitialEstimator::Lasso;
    Matrix X_est{};
    Vector y_est{};
    Matrix gram{};
    Vector theta_hat{};
    Vector X_theta_hat{};
    double sigma = 0.0;
    bool fell_back_to_full = false;
};

/// Fits support and initial estimator from the dataset halves. When
/// `injected_theta` is given (length p) it replaces the fitted initial estimate;
/// when `injected_support` is given it replaces the screening step.
PwePreparation prepare_pwe(const ArmDataset& ds, const PweConfig& cfg, double sigma,
                           const std::optional<Vector>& injected_theta = std::nullopt,
                           const std::optional<SupportSet>& injected_support = std::nullopt);

struct PweDiagnostics {
    bool degenerate = false;
    bool converged = true;
    std::optional<Eigen::Index> replaced_index;
    double alpha_hat = 0.0;
};

/// Reward prediction at query x (full dimension p) from a prepared arm.
double pwe_predict(const PwePreparation& prep, const ConstVectorRef& x, const PweConfig& cfg,
                   PweDiagnostics* diag = nullptr);

/// Full pointwise estimate: prepare_pwe followed by pwe_predict.
double pwe_estimate(const ArmDataset& ds, const ConstVectorRef& x, const PweConfig& cfg, double sigma);

/// 5-fold cross-validation on the preparation half choosing between Lasso and
/// ridgeless least squares by held-out squared error. Fewer than 10 samples
/// selects Lasso; ties select Lasso.
InitialEstimator cross_validate_initial(const ConstMatrixRef& X, const ConstVectorRef& y, double lasso_lambda,
                                        const LassoConfig& solver = {});

}  // namespace hope

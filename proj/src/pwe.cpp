#include "hope/pwe.hpp"

#include <algorithm>
#include <cmath>

namespace hope {

std::string_view to_string(InitialEstimator e) {
    switch (e) {
        case InitialEstimator::Lasso: return "lasso";
        case InitialEstimator::Rdl: return "rdl";
        case InitialEstimator::CrossValidated: return "cross-validated";
    }
    return "unknown";
}

std::string_view to_string(SupportRule r) {
    switch (r) {
        case SupportRule::LassoSupport: return "lasso-support";
        case SupportRule::Sis: return "sis";
        case SupportRule::Full: return "full";
    }
    return "unknown";
}

InitialEstimator parse_initial_estimator(std::string_view s) {
    if (s == "lasso") return InitialEstimator::Lasso;
    if (s == "rdl") return InitialEstimator::Rdl;
    if (s == "cross-validated") return InitialEstimator::CrossValidated;
    throw ConfigError("unknown initial estimator '" + std::string(s) + "'");
}

SupportRule parse_support_rule(std::string_view s) {
    if (s == "lasso-support") return SupportRule::LassoSupport;
    if (s == "sis") return SupportRule::Sis;
    if (s == "full") return SupportRule::Full;
    throw ConfigError("unknown support rule '" + std::string(s) + "'");
}

double PweConfig::lambda_n(Eigen::Index n, double sigma) const {
    double rate = 0.0;
    if (n >= 2) {
        const double nn = static_cast<double>(n);
        rate = lambda_constant * sigma * std::sqrt(std::log(nn) / nn);
    }
    return std::max(rate, lambda_floor);
}

void PweConfig::validate() const {
    if (!(lambda_constant >= 0.0)) throw ConfigError("pwe: lambda_constant must be nonnegative");
    if (!(lambda_floor > 0.0)) throw ConfigError("pwe: lambda_floor must be positive");
    if (!(initial_lambda_constant >= 0.0)) throw ConfigError("pwe: initial_lambda_constant must be nonnegative");
    if (sis_keep < 0) throw ConfigError("pwe: sis_keep must be nonnegative");
    if (!(support_zero_tol >= 0.0)) throw ConfigError("pwe: support_zero_tol must be nonnegative");
    if (!(gamma_sigma_tol > 0.0 && gamma_sigma_tol < 1.0)) {
        throw ConfigError("pwe: gamma_sigma_tol must lie in (0, 1)");
    }
    solver.validate();
}

ProjectSplit project_split(const ConstMatrixRef& X, const ConstVectorRef& x, const ConstVectorRef& theta) {
    if (X.cols() != x.size() || X.cols() != theta.size()) {
        throw StructuralError("project_split: dimension mismatch");
    }
    const double x_sq = x.squaredNorm();
    if (!(x_sq > 0.0)) {
        throw DegenerateQuery("project_split: query context is zero");
    }
    const Vector v = X * x;
    const double v_norm = v.norm();
    if (!(v_norm > 0.0)) {
        throw DegenerateQuery("project_split: X x is zero");
    }
    const double root_n = std::sqrt(static_cast<double>(X.rows()));
    const double x_theta = x.dot(theta);

    ProjectSplit out;
    out.scale = v_norm / (root_n * x_sq);
    out.alpha = out.scale * x_theta;
    out.z = v / v_norm;
    out.zeta = (X * theta - v * (x_theta / x_sq)) / root_n;
    return out;
}

namespace {

constexpr double kSwapLoadingTol = 1e-8;

// Descending eigenpairs with the first non-negligible component of each vector positive.
void sorted_eigensystem(const Matrix& sym, Vector& values, Matrix& vectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Eigen::Index n = sym.rows();
    values = eig.eigenvalues().reverse();
    vectors = eig.eigenvectors().rowwise().reverse();
    for (Eigen::Index k = 0; k < n; ++k) {
        auto col = vectors.col(k);
        const double cutoff = 1e-12 * col.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(col(i)) > cutoff) {
                if (col(i) < 0.0) col = -col;
                break;
            }
        }
    }
}

bool well_conditioned(const Matrix& gamma, double rel_tol) {
    Eigen::JacobiSVD<Matrix> svd(gamma);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || !(s(0) > 0.0)) return false;
    return s(s.size() - 1) > rel_tol * s(0);
}

}  // namespace

GammaBasis build_gamma_from_gram(const ConstMatrixRef& gram, const ConstVectorRef& Xx, double x_sq_norm,
                                 const ConstVectorRef& z, const ConstVectorRef& X_theta_hat,
                                 double x_dot_theta_hat, double gamma_sigma_tol) {
    const Eigen::Index n = gram.rows();
    if (gram.cols() != n || Xx.size() != n || z.size() != n || X_theta_hat.size() != n) {
        throw StructuralError("build_gamma: dimension mismatch");
    }
    if (!(x_sq_norm > 0.0)) {
        throw DegenerateQuery("build_gamma: query context is zero");
    }

    // N^{-1} X Q X^T = N^{-1} (X X^T - (X x)(X x)^T / ||x||^2)
    Matrix projected = gram - (Xx * Xx.transpose()) / x_sq_norm;
    projected /= static_cast<double>(n);
    projected = 0.5 * (projected + projected.transpose());

    GammaBasis out;
    Matrix eigvecs;
    sorted_eigensystem(projected, out.eigenvalues, eigvecs);
    out.gamma = eigvecs;

    // X Q theta_hat
    const Vector nuisance = X_theta_hat - Xx * (x_dot_theta_hat / x_sq_norm);
    const double nuisance_norm = nuisance.norm();
    if (!(nuisance_norm > 1e-12 * X_theta_hat.norm()) || nuisance_norm == 0.0) {
        return out;
    }

    // Candidates are the columns with a nonzero loading of the nuisance direction.
    const Vector nuisance_coords = eigvecs.transpose() * (nuisance / nuisance_norm);
    const Vector alignment = (eigvecs.transpose() * z).cwiseAbs();
    Eigen::Index replaced = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(nuisance_coords(i)) <= kSwapLoadingTol) continue;
        if (replaced < 0 || alignment(i) > alignment(replaced)) replaced = i;
    }
    if (replaced < 0) {
        return out;
    }
    Matrix candidate = eigvecs;
    candidate.col(replaced) = nuisance / nuisance_norm;
    if (!well_conditioned(candidate, gamma_sigma_tol)) {
        return out;
    }
    out.gamma = std::move(candidate);
    out.replaced_index = replaced;
    return out;
}

GammaBasis build_gamma(const ConstMatrixRef& X, const ConstVectorRef& x, const ConstVectorRef& z,
                       const ConstVectorRef& theta_hat, double gamma_sigma_tol) {
    if (X.cols() != x.size() || X.cols() != theta_hat.size() || X.rows() != z.size()) {
        throw StructuralError("build_gamma: dimension mismatch");
    }
    const Matrix gram = X * X.transpose();
    const Vector Xx = X * x;
    const Vector X_theta = X * theta_hat;
    return build_gamma_from_gram(gram, Xx, x.squaredNorm(), z, X_theta, x.dot(theta_hat), gamma_sigma_tol);
}

Matrix transformed_design(const ConstVectorRef& z, const ConstMatrixRef& gamma) {
    const Eigen::Index n = gamma.rows();
    if (z.size() != n) {
        throw StructuralError("transformed_design: z length differs from basis rows");
    }
    Matrix Z(n, gamma.cols() + 1);
    Z.col(0) = z;
    Z.rightCols(gamma.cols()) = gamma;
    Z *= std::sqrt(static_cast<double>(n));
    return Z;
}

TransformedFit solve_transformed(const ConstMatrixRef& Z, const ConstVectorRef& y, double lambda,
                                 const LassoConfig& solver) {
    if (Z.cols() != Z.rows() + 1) {
        throw StructuralError("solve_transformed: Z must have N rows and N+1 columns");
    }
    if (!(lambda > 0.0)) {
        throw ConfigError("solve_transformed: lambda must be positive");
    }
    LassoConfig cfg = solver;
    cfg.lambda = lambda;
    cfg.objective_scale = ObjectiveScale::InverseN;
    LassoFit fit = fit_lasso(Z, y, cfg);
    TransformedFit out;
    out.alpha_hat = fit.coefficients(0);
    out.xi_hat = fit.coefficients.tail(Z.rows());
    out.converged = fit.converged;
    return out;
}

double predict_mu(double alpha_hat, const ConstMatrixRef& X, const ConstVectorRef& x) {
    if (X.cols() != x.size()) {
        throw StructuralError("predict_mu: dimension mismatch");
    }
    const double v_norm = (X * x).norm();
    if (!(v_norm > 0.0)) {
        throw DegenerateQuery("predict_mu: X x is zero");
    }
    return alpha_hat * std::sqrt(static_cast<double>(X.rows())) * x.squaredNorm() / v_norm;
}

namespace {

Vector fit_initial(InitialEstimator kind, const ConstMatrixRef& X, const ConstVectorRef& y, double lambda,
                   const LassoConfig& solver) {
    if (kind == InitialEstimator::Rdl) {
        return fit_rdl(X, y);
    }
    LassoConfig cfg = solver;
    cfg.lambda = lambda;
    cfg.objective_scale = ObjectiveScale::InverseN;
    return fit_lasso(X, y, cfg).coefficients;
}

}  // namespace

InitialEstimator cross_validate_initial(const ConstMatrixRef& X, const ConstVectorRef& y, double lasso_lambda,
                                        const LassoConfig& solver) {
    constexpr Eigen::Index kFolds = 5;
    const Eigen::Index n = X.rows();
    if (n < 10) {
        return InitialEstimator::Lasso;
    }
    double lasso_err = 0.0;
    double rdl_err = 0.0;
    for (Eigen::Index f = 0; f < kFolds; ++f) {
        const Eigen::Index begin = f * n / kFolds;
        const Eigen::Index end = (f + 1) * n / kFolds;
        const Eigen::Index n_test = end - begin;
        Matrix X_train(n - n_test, X.cols());
        Vector y_train(n - n_test);
        X_train << X.topRows(begin), X.bottomRows(n - end);
        y_train << y.head(begin), y.tail(n - end);
        const auto X_test = X.middleRows(begin, n_test);
        const auto y_test = y.segment(begin, n_test);

        const Vector lasso = fit_initial(InitialEstimator::Lasso, X_train, y_train, lasso_lambda, solver);
        const Vector rdl = fit_initial(InitialEstimator::Rdl, X_train, y_train, lasso_lambda, solver);
        lasso_err += (y_test - X_test * lasso).squaredNorm();
        rdl_err += (y_test - X_test * rdl).squaredNorm();
    }
    return rdl_err < lasso_err ? InitialEstimator::Rdl : InitialEstimator::Lasso;
}

PwePreparation prepare_pwe(const ArmDataset& ds, const PweConfig& cfg, double sigma,
                           const std::optional<Vector>& injected_theta,
                           const std::optional<SupportSet>& injected_support) {
    cfg.validate();
    if (!(sigma >= 0.0)) {
        throw ConfigError("pwe: sigma must be nonnegative");
    }
    const Halves halves = split_halves(ds);
    const Eigen::Index n = ds.split_point();
    const Eigen::Index p = ds.dim();
    const double screen_lambda = initial_lasso_lambda(sigma, p, n, cfg.initial_lambda_constant);

    PwePreparation prep{.support = SupportSet::full(p)};
    prep.sigma = sigma;

    if (injected_support) {
        if (injected_support->dim() != p) {
            throw StructuralError("prepare_pwe: injected support has wrong dimension");
        }
        prep.support = *injected_support;
    } else {
        switch (cfg.support_rule) {
            case SupportRule::LassoSupport: {
                LassoConfig lc = cfg.solver;
                lc.lambda = screen_lambda;
                lc.objective_scale = ObjectiveScale::InverseN;
                prep.support = lasso_support(fit_lasso(halves.prep.X, halves.prep.y, lc).coefficients,
                                             cfg.support_zero_tol);
                break;
            }
            case SupportRule::Sis: {
                const Eigen::Index keep = cfg.sis_keep > 0 ? std::min(cfg.sis_keep, p) : sis_default_keep(n, p);
                prep.support = sis_screen(halves.prep.X, halves.prep.y, keep);
                break;
            }
            case SupportRule::Full:
                break;
        }
    }
    if (prep.support.empty()) {
        prep.support = SupportSet::full(p);
        prep.fell_back_to_full = true;
    }

    prep.estimator_used = cfg.initial_estimator;
    if (cfg.initial_estimator == InitialEstimator::CrossValidated) {
        prep.estimator_used = cross_validate_initial(halves.prep.X, halves.prep.y, screen_lambda, cfg.solver);
    }

    prep.X_est = truncate_columns(halves.est.X, prep.support);
    prep.y_est = halves.est.y;
    if (injected_theta) {
        if (injected_theta->size() != p) {
            throw StructuralError("prepare_pwe: injected theta has wrong dimension");
        }
        prep.theta_hat = truncate_entries(*injected_theta, prep.support);
    } else {
        const double est_lambda =
            initial_lasso_lambda(sigma, prep.support.size(), n, cfg.initial_lambda_constant);
        prep.theta_hat = fit_initial(prep.estimator_used, prep.X_est, prep.y_est, est_lambda, cfg.solver);
    }
    prep.gram = prep.X_est * prep.X_est.transpose();
    prep.X_theta_hat = prep.X_est * prep.theta_hat;
    if (cfg.plug_in_sigma) {
        prep.sigma = (prep.y_est - prep.X_theta_hat).norm() / std::sqrt(static_cast<double>(n));
    }
    return prep;
}

double pwe_predict(const PwePreparation& prep, const ConstVectorRef& x, const PweConfig& cfg,
                   PweDiagnostics* diag) {
    if (x.size() != prep.support.dim()) {
        throw StructuralError("pwe_predict: query dimension differs from dataset dimension");
    }
    PweDiagnostics local;
    PweDiagnostics& d = diag != nullptr ? *diag : local;
    d = PweDiagnostics{};

    const Vector xs = truncate_entries(x, prep.support);
    const double x_sq = xs.squaredNorm();
    const Vector Xx = prep.X_est * xs;
    const double v_norm = Xx.norm();
    if (!(x_sq > 0.0) || !(v_norm > 1e-300) || !std::isfinite(v_norm)) {
        // Zero-mean prior.
        d.degenerate = true;
        return 0.0;
    }
    const Eigen::Index n = prep.X_est.rows();
    const Vector z = Xx / v_norm;
    const GammaBasis basis = build_gamma_from_gram(prep.gram, Xx, x_sq, z, prep.X_theta_hat,
                                                   xs.dot(prep.theta_hat), cfg.gamma_sigma_tol);
    const Matrix Z = transformed_design(z, basis.gamma);
    const TransformedFit fit = solve_transformed(Z, prep.y_est, cfg.lambda_n(n, prep.sigma), cfg.solver);
    d.converged = fit.converged;
    d.replaced_index = basis.replaced_index;
    d.alpha_hat = fit.alpha_hat;
    const double mu = fit.alpha_hat * std::sqrt(static_cast<double>(n)) * x_sq / v_norm;
    if (!std::isfinite(mu)) {
        d.degenerate = true;
        return 0.0;
    }
    return mu;
}

double pwe_estimate(const ArmDataset& ds, const ConstVectorRef& x, const PweConfig& cfg, double sigma) {
    if (x.size() != ds.dim()) {
        throw StructuralError("pwe_estimate: query dimension differs from dataset dimension");
    }
    if (!(x.squaredNorm() > 0.0)) {
        return 0.0;
    }
    const PwePreparation prep = prepare_pwe(ds, cfg, sigma);
    return pwe_predict(prep, x, cfg);
}

}  // namespace hope

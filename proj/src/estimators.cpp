#include "hope/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hope {

void LassoConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("lasso: lambda must be finite and nonnegative");
    }
    if (!(tol > 0.0)) {
        throw ConfigError("lasso: tol must be positive");
    }
    if (max_iters < 1) {
        throw ConfigError("lasso: max_iters must be at least 1");
    }
    if (path_steps_per_decade < 1) {
        throw ConfigError("lasso: path_steps_per_decade must be at least 1");
    }
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

namespace {

double loss_weight(ObjectiveScale scale, Eigen::Index n) {
    return scale == ObjectiveScale::Unit ? 1.0 : 1.0 / static_cast<double>(n);
}

void check_xy(const ConstMatrixRef& X, const ConstVectorRef& y, const char* who) {
    check_design(X, who);
    if (X.rows() != y.size()) {
        throw StructuralError(std::string(who) + ": X rows and y length differ");
    }
    if (!y.allFinite()) {
        throw StructuralError(std::string(who) + ": response contains non-finite entries");
    }
}

// Coordinate descent state over a fixed Gram matrix. `grad` tracks X^T (y - X b).
class CoordinateDescent {
public:
    CoordinateDescent(const ConstMatrixRef& X, const ConstVectorRef& y, ObjectiveScale scale)
        : gram_(X.transpose() * X),
          xty_(X.transpose() * y),
          weight_(loss_weight(scale, X.rows())),
          beta_(Vector::Zero(X.cols())),
          grad_(xty_),
          active_(static_cast<std::size_t>(X.cols()), false) {
        const double diag_max = gram_.diagonal().cwiseAbs().maxCoeff();
        usable_.resize(static_cast<std::size_t>(X.cols()));
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            // Zero-variance columns keep a zero coefficient.
            usable_[static_cast<std::size_t>(j)] = gram_(j, j) > 1e-14 * std::max(diag_max, 1e-300);
        }
    }

    const Vector& beta() const { return beta_; }
    const Vector& xty() const { return xty_; }

    // Returns (converged, sweeps).
    std::pair<bool, int> solve(double lambda, double tol, int max_sweeps) {
        const double threshold = lambda / (2.0 * weight_);
        int sweeps = 0;
        while (sweeps < max_sweeps) {
            double delta = sweep(threshold, /*active_only=*/false);
            ++sweeps;
            if (delta < tol) {
                return {true, sweeps};
            }
            while (sweeps < max_sweeps) {
                delta = sweep(threshold, /*active_only=*/true);
                ++sweeps;
                if (delta < tol) break;
            }
        }
        return {false, sweeps};
    }

private:
    double sweep(double threshold, bool active_only) {
        double max_change = 0.0;
        const Eigen::Index p = beta_.size();
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (!usable_[uj] || (active_only && !active_[uj])) continue;
            const double a = gram_(j, j);
            const double old = beta_(j);
            const double c = grad_(j) + a * old;
            const double updated = soft_threshold(c, threshold) / a;
            const double change = updated - old;
            if (change != 0.0) {
                beta_(j) = updated;
                grad_.noalias() -= change * gram_.col(j);
                max_change = std::max(max_change, std::abs(change));
            }
            active_[uj] = updated != 0.0;
        }
        return max_change;
    }

    Matrix gram_;
    Vector xty_;
    double weight_;
    Vector beta_;
    Vector grad_;
    std::vector<bool> active_;
    std::vector<bool> usable_;
};

LassoFit finish(const ConstMatrixRef& X, const ConstVectorRef& y, Vector beta, double lambda,
                ObjectiveScale scale, bool converged, int sweeps) {
    const Vector zero = Vector::Zero(X.cols());
    if (lasso_objective(X, y, beta, lambda, scale) > lasso_objective(X, y, zero, lambda, scale)) {
        beta = zero;
    }
    return LassoFit{std::move(beta), converged, sweeps};
}

}  // namespace

double lasso_lambda_max(const ConstMatrixRef& X, const ConstVectorRef& y, ObjectiveScale scale) {
    const double w = loss_weight(scale, X.rows());
    return 2.0 * w * (X.transpose() * y).cwiseAbs().maxCoeff();
}

double lasso_objective(const ConstMatrixRef& X, const ConstVectorRef& y, const ConstVectorRef& beta,
                       double lambda, ObjectiveScale scale) {
    const double w = loss_weight(scale, X.rows());
    return w * (y - X * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

LassoFit fit_lasso(const ConstMatrixRef& X, const ConstVectorRef& y, const LassoConfig& cfg) {
    cfg.validate();
    check_xy(X, y, "fit_lasso");

    const double lambda_max = lasso_lambda_max(X, y, cfg.objective_scale);
    if (!(lambda_max > 0.0) || cfg.lambda >= lambda_max) {
        return LassoFit{Vector::Zero(X.cols()), true, 0};
    }

    CoordinateDescent cd(X, y, cfg.objective_scale);
    int sweeps = 0;

    // Warm-start path; intermediate solves use a looser tolerance.
    constexpr double kMaxDecades = 12.0;
    const double floor_lambda = lambda_max * std::pow(10.0, -kMaxDecades);
    const double target = std::max(cfg.lambda, floor_lambda);
    const double decades = std::log10(lambda_max / target);
    const int steps = static_cast<int>(std::ceil(decades * cfg.path_steps_per_decade));
    const double path_tol = std::max(cfg.tol, 1e-6);
    for (int s = 1; s < steps && sweeps < cfg.max_iters; ++s) {
        const double lam = lambda_max * std::pow(target / lambda_max, static_cast<double>(s) / steps);
        sweeps += cd.solve(lam, path_tol, cfg.max_iters - sweeps).second;
    }
    bool converged = false;
    if (sweeps < cfg.max_iters) {
        auto [ok, used] = cd.solve(cfg.lambda, cfg.tol, cfg.max_iters - sweeps);
        converged = ok;
        sweeps += used;
    }
    return finish(X, y, cd.beta(), cfg.lambda, cfg.objective_scale, converged, sweeps);
}

std::vector<LassoFit> fit_lasso_path(const ConstMatrixRef& X, const ConstVectorRef& y,
                                     const std::vector<double>& lambdas, const LassoConfig& cfg) {
    cfg.validate();
    check_xy(X, y, "fit_lasso_path");
    CoordinateDescent cd(X, y, cfg.objective_scale);
    std::vector<LassoFit> out;
    out.reserve(lambdas.size());
    for (double lam : lambdas) {
        if (!(lam >= 0.0)) {
            throw ConfigError("fit_lasso_path: lambdas must be nonnegative");
        }
        auto [ok, used] = cd.solve(lam, cfg.tol, cfg.max_iters);
        out.push_back(finish(X, y, cd.beta(), lam, cfg.objective_scale, ok, used));
    }
    return out;
}

Vector fit_rdl(const ConstMatrixRef& X, const ConstVectorRef& y, double rel_cutoff) {
    check_xy(X, y, "fit_rdl");
    const Matrix gram = X * X.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const Vector& evals = eig.eigenvalues();
    const Matrix& evecs = eig.eigenvectors();
    const double top = evals.cwiseAbs().maxCoeff();
    if (!(top > 0.0)) {
        return Vector::Zero(X.cols());
    }
    // w = (X X^T)^+ y in the eigenbasis.
    Vector coords = evecs.transpose() * y;
    for (Eigen::Index k = 0; k < evals.size(); ++k) {
        coords(k) = evals(k) > rel_cutoff * top ? coords(k) / evals(k) : 0.0;
    }
    return X.transpose() * (evecs * coords);
}

SupportSet lasso_support(const ConstVectorRef& theta, double zero_tol) {
    if (!(zero_tol >= 0.0)) {
        throw StructuralError("lasso_support: zero_tol must be nonnegative");
    }
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (std::abs(theta(j)) > zero_tol) idx.push_back(j);
    }
    return SupportSet(std::move(idx), theta.size(), SupportSource::LassoSupport);
}

SupportSet sis_screen(const ConstMatrixRef& X, const ConstVectorRef& y, Eigen::Index keep) {
    check_xy(X, y, "sis_screen");
    const Eigen::Index p = X.cols();
    if (keep < 1 || keep > p) {
        throw StructuralError("sis_screen: keep must lie in [1, p]");
    }
    if (keep == p) {
        return SupportSet::full(p);
    }
    const Vector rho = (X.transpose() * y).cwiseAbs() / static_cast<double>(X.rows());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return rho(a) > rho(b); });
    order.resize(static_cast<std::size_t>(keep));
    std::sort(order.begin(), order.end());
    return SupportSet(std::move(order), p, SupportSource::Sis);
}

Eigen::Index sis_default_keep(Eigen::Index n_samples, Eigen::Index dim) {
    Eigen::Index keep = n_samples;
    if (n_samples > 1) {
        const double n = static_cast<double>(n_samples);
        keep = static_cast<Eigen::Index>(std::ceil(n / std::log(n)));
    }
    return std::clamp<Eigen::Index>(keep, 1, dim);
}

double initial_lasso_lambda(double sigma, Eigen::Index dim, Eigen::Index n_samples, double constant) {
    if (n_samples < 1 || dim < 1) {
        throw StructuralError("initial_lasso_lambda: sizes must be positive");
    }
    return constant * sigma *
           std::sqrt(std::log(static_cast<double>(std::max<Eigen::Index>(dim, 2))) /
                     static_cast<double>(n_samples));
}

}  // namespace hope

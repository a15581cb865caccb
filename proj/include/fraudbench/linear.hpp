#pragma once

// Regularized linear classifiers: logistic regression and a linear SVC with
// squared hinge loss. Both minimise
//
//     sum_i loss(y_i, w.x_i + b) + (1/C) R(w)
//
// with R(w) = |w|_1 or |w|^2 / 2, intercept unpenalized. The smooth part is
// handled by accelerated proximal gradient with backtracking; L1 enters through
// soft-thresholding.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fraudbench/features.hpp"

namespace fraudbench {

enum class Penalty { l1, l2 };
enum class LinearLoss { logistic, squared_hinge };

inline double sigmoid(double z) noexcept
{
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Problem data for the solver. Labels are +1 (fraud) / -1 (clean).
struct LinearProblem {
    const FeatureMatrix* x = nullptr;
    Eigen::VectorXd y;
    LinearLoss loss = LinearLoss::logistic;
    Penalty penalty = Penalty::l2;
    double c = 1.0;

    LinearProblem(const FeatureMatrix& features, std::span<const Label> labels, LinearLoss l, Penalty p, double c_value)
        : x(&features), y(static_cast<Eigen::Index>(labels.size())), loss(l), penalty(p), c(c_value)
    {
        for (std::size_t i = 0; i < labels.size(); ++i)
            y(static_cast<Eigen::Index>(i)) = is_fraud(labels[i]) ? 1.0 : -1.0;
    }

    Eigen::Index dim() const noexcept { return x->cols(); }

    /// Loss sum plus the L2 term when the penalty is L2. theta = [w; b].
    double smooth_value(const Eigen::VectorXd& theta) const
    {
        const auto d = dim();
        const Eigen::VectorXd m = (*x) * theta.head(d) + Eigen::VectorXd::Constant(x->rows(), theta(d));
        double f = 0.0;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const double z = y(i) * m(i);
            if (loss == LinearLoss::logistic) {
                f += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
            } else {
                const double h = std::max(0.0, 1.0 - z);
                f += h * h;
            }
        }
        if (penalty == Penalty::l2)
            f += theta.head(d).squaredNorm() / (2.0 * c);
        return f;
    }

    Eigen::VectorXd smooth_gradient(const Eigen::VectorXd& theta) const
    {
        const auto d = dim();
        const Eigen::VectorXd m = (*x) * theta.head(d) + Eigen::VectorXd::Constant(x->rows(), theta(d));
        Eigen::VectorXd r(m.size());  // d loss / d margin
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const double z = y(i) * m(i);
            if (loss == LinearLoss::logistic)
                r(i) = -y(i) * sigmoid(-z);
            else
                r(i) = -2.0 * y(i) * std::max(0.0, 1.0 - z);
        }
        Eigen::VectorXd g(d + 1);
        g.head(d) = x->transpose() * r;
        g(d) = r.sum();
        if (penalty == Penalty::l2)
            g.head(d) += theta.head(d) / c;
        return g;
    }

    double penalty_value(const Eigen::VectorXd& theta) const
    {
        return penalty == Penalty::l1 ? theta.head(dim()).lpNorm<1>() / c : 0.0;
    }

    double objective(const Eigen::VectorXd& theta) const { return smooth_value(theta) + penalty_value(theta); }

    /// Proximal step of the non-smooth part with step size t.
    Eigen::VectorXd prox(Eigen::VectorXd v, double t) const
    {
        if (penalty == Penalty::l1) {
            const double thr = t / c;
            for (Eigen::Index j = 0; j < dim(); ++j) {
                const double a = std::abs(v(j)) - thr;
                v(j) = a > 0.0 ? std::copysign(a, v(j)) : 0.0;
            }
        }
        return v;
    }

    /// Gradient mapping (theta - prox(theta - t grad, t)) / t; zero exactly at the optimum.
    Eigen::VectorXd gradient_mapping(const Eigen::VectorXd& theta, double t) const
    {
        return (theta - prox(theta - t * smooth_gradient(theta), t)) / t;
    }
};

struct SolverOptions {
    int max_iterations = 5000;
    double tolerance = 1e-6;
};

struct SolveResult {
    Eigen::VectorXd theta;  // [w; b]
    double objective = 0.0;
    double gradient_norm = 0.0;  // gradient mapping norm at theta, relative to the start
    int iterations = 0;
    bool converged = false;
};

namespace detail {

/// Largest eigenvalue of [X 1]^T [X 1] by power iteration.
inline double design_spectral_sq(const FeatureMatrix& x)
{
    const auto d = x.cols();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(d + 1) / std::sqrt(static_cast<double>(d + 1));
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
        const Eigen::VectorXd u = x * v.head(d) + Eigen::VectorXd::Constant(x.rows(), v(d));
        Eigen::VectorXd w(d + 1);
        w.head(d) = x.transpose() * u;
        w(d) = u.sum();
        const double norm = w.norm();
        if (norm == 0.0)
            return 1.0;
        lambda = norm;
        v = w / norm;
    }
    return lambda;
}

}  // namespace detail

inline SolveResult solve(const LinearProblem& p, const SolverOptions& opt = {})
{
    const auto n_params = p.dim() + 1;
    const double curvature = p.loss == LinearLoss::logistic ? 0.25 : 2.0;
    double lipschitz = curvature * detail::design_spectral_sq(*p.x) * 1.05;
    if (p.penalty == Penalty::l2)
        lipschitz += 1.0 / p.c;
    double step = 1.0 / std::max(lipschitz, 1e-12);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_params);
    Eigen::VectorXd y = x;
    double momentum = 1.0;
    double fx = p.objective(x);

    const double scale = std::max(1.0, p.gradient_mapping(x, step).norm());
    SolveResult best{x, fx, std::numeric_limits<double>::infinity(), 0, false};

    for (int it = 1; it <= opt.max_iterations; ++it) {
        const Eigen::VectorXd gy = p.smooth_gradient(y);
        const double sy = p.smooth_value(y);
        Eigen::VectorXd next;
        for (;;) {
            next = p.prox(y - step * gy, step);
            const Eigen::VectorXd diff = next - y;
            if (p.smooth_value(next) <= sy + gy.dot(diff) + diff.squaredNorm() / (2.0 * step) + 1e-12 * std::abs(sy))
                break;
            step *= 0.5;
        }
        const double gmap = ((y - next) / step).norm() / scale;
        const double fnext = p.objective(next);

        if (fnext > fx) {
            // function-value restart
            momentum = 1.0;
            y = x;
            best.iterations = it;
            continue;
        }
        const double m_next = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
        y = next + ((momentum - 1.0) / m_next) * (next - x);
        momentum = m_next;
        x = next;
        fx = fnext;
        best.iterations = it;
        if (fx <= best.objective) {
            best.theta = x;
            best.objective = fx;
        }
        if (gmap <= opt.tolerance) {
            best.converged = true;
            break;
        }
    }
    best.gradient_norm = p.gradient_mapping(best.theta, step).norm() / scale;
    if (best.gradient_norm <= opt.tolerance)
        best.converged = true;
    return best;
}

/// Fitted linear separator over standardized features.
struct LinearModel {
    LinearLoss loss = LinearLoss::logistic;
    Standardizer standardizer;
    Eigen::VectorXd weights;
    double bias = 0.0;
    int iterations = 0;
    bool converged = true;

    double margin(std::span<const double> row) const { return weights.dot(standardizer.apply(row)) + bias; }

    /// Logistic posterior for LOG; sigmoid of the signed margin for SVC.
    double score(std::span<const double> row) const { return sigmoid(margin(row)); }
};

inline LinearModel fit_linear(const FeatureMatrix& x, std::span<const Label> y, LinearLoss loss, Penalty penalty,
                              double c, const SolverOptions& opt = {})
{
    LinearModel m;
    m.loss = loss;
    m.standardizer = Standardizer::fit(x);
    const FeatureMatrix z = m.standardizer.apply(x);
    const LinearProblem problem(z, y, loss, penalty, c);
    const auto r = solve(problem, opt);
    m.weights = r.theta.head(z.cols());
    m.bias = r.theta(z.cols());
    m.iterations = r.iterations;
    m.converged = r.converged;
    return m;
}

}  // namespace fraudbench

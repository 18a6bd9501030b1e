#pragma once

#include <Eigen/Dense>
#include <functional>

namespace longvine {

struct ScalarOptimum {
    double x;
    double fx;
    int iterations;
};

//! Brent's derivative-free minimization of f on [lo, hi].
ScalarOptimum brent_minimize(const std::function<double(double)>& f, double lo,
                             double hi, double tol = 1e-8, int max_iter = 200);

//! Solve f(x) = target for f nondecreasing on [lo, hi] by safeguarded
//! Newton (optional derivative) with bisection fallback. Stops when the
//! residual drops below ftol or the bracket below xtol.
//! Throws std::runtime_error on non-convergence.
double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi,
                       const std::function<double(double)>& derivative = nullptr,
                       double ftol = 1e-12, double xtol = 1e-13, int max_iter = 200);

struct SimplexOptimum {
    Eigen::VectorXd x;
    double fx;
    int evaluations;
    bool converged;
};

//! Nelder-Mead minimization with one restart from the best point found.
SimplexOptimum nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& start, double step = 0.1,
                           double tol = 1e-8, int max_evals = 20000);

} // namespace longvine

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

//! scalar statistical functions shared across the library
namespace longvine::stats {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double sqrt2 = 1.41421356237309504880;
inline constexpr double log_2pi = 1.83787706640934548356;

//! standard normal density
inline double dnorm(double x)
{
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
}

//! standard normal cdf
inline double pnorm(double x)
{
    return 0.5 * std::erfc(-x / sqrt2);
}

//! standard normal quantile (Acklam's rational approximation plus one
//! Halley refinement step; accurate to full double precision for
//! p in (1e-300, 1 - 1e-16))
inline double qnorm(double p)
{
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("qnorm: p must lie strictly in (0, 1)");

    static constexpr double a[6] = {
        -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00
    };
    static constexpr double b[5] = {
        -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01, -1.328068155288572e+01
    };
    static constexpr double c[6] = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00
    };
    static constexpr double d[4] = {
        7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00
    };
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement
    double e = pnorm(x) - p;
    double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

//! upper-orthant bivariate normal probability P(X > dh, Y > dk) for
//! standard normal (X, Y) with correlation r.
//!
//! Port of Alan Genz's BVND (Drezner & Wesolowsky 1990 with Gauss-Legendre
//! quadrature on the tetrachoric series; 20-point rule near |r| = 1).
double bvnu(double dh, double dk, double r);

//! bivariate normal cdf P(X <= dh, Y <= dk) with correlation r
inline double bvnl(double dh, double dk, double r)
{
    return bvnu(-dh, -dk, r);
}

//! sample Kendall's tau (tau-b; ties corrected)
//! @param uv n x 2 matrix of paired observations.
double kendall_tau(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 2>>& uv);

//! Neumaier compensated accumulator for long likelihood sums
class KahanSum {
public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

//! first Debye function D1(x) = (1/x) * int_0^x t/(e^t - 1) dt, x > 0
double debye1(double x);

//! adaptive Simpson quadrature on [a, b]
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10, int max_depth = 30);

} // namespace longvine::stats

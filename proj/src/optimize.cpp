#include "longvine/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace longvine {

ScalarOptimum brent_minimize(const std::function<double(double)>& f, double lo,
                             double hi, double tol, int max_iter)
{
    if (!(lo < hi))
        throw std::invalid_argument("brent_minimize: invalid bracket");

    const double golden = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    int it = 0;
    for (; it < max_iter; ++it) {
        double m = 0.5 * (a + b);
        double tol1 = tol * std::abs(x) + 1e-12;
        double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a))
            break;

        bool use_golden = true;
        if (std::abs(e) > tol1) {
            // parabolic interpolation through x, w, v
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0)
                p = -p;
            q = std::abs(q);
            double e_old = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x)
                && p < q * (b - x)) {
                d = p / q;
                double u = x + d;
                if (u - a < tol2 || b - u < tol2)
                    d = (m > x) ? tol1 : -tol1;
                use_golden = false;
            }
        }
        if (use_golden) {
            e = (x < m) ? b - x : a - x;
            d = golden * e;
        }

        double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
        double fu = f(u);
        if (fu <= fx) {
            if (u < x)
                b = x;
            else
                a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return { x, fx, it };
}

double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi,
                       const std::function<double(double)>& derivative,
                       double ftol, double xtol, int max_iter)
{
    double a = lo, b = hi;
    double fa = f(a) - target;
    double fb = f(b) - target;
    if (fa >= 0.0)
        return a;
    if (fb <= 0.0)
        return b;

    double x = 0.5 * (a + b);
    for (int it = 0; it < max_iter; ++it) {
        double fx = f(x) - target;
        if (std::abs(fx) < ftol || b - a < xtol)
            return x;
        if (fx > 0.0)
            b = x;
        else
            a = x;

        double x_next = std::numeric_limits<double>::quiet_NaN();
        if (derivative) {
            double dfx = derivative(x);
            if (dfx > 0.0 && std::isfinite(dfx))
                x_next = x - fx / dfx;
        }
        // fall back to bisection whenever Newton leaves the bracket
        if (!(x_next > a && x_next < b))
            x_next = 0.5 * (a + b);
        x = x_next;
    }
    throw std::runtime_error("invert_monotone: no convergence after max iterations "
                             "(target " + std::to_string(target) + ")");
}

SimplexOptimum nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& start, double step, double tol,
                           int max_evals)
{
    const int n = static_cast<int>(start.size());
    int evals = 0;

    auto run = [&](const Eigen::VectorXd& x0) {
        std::vector<Eigen::VectorXd> pts(n + 1, x0);
        std::vector<double> fv(n + 1);
        for (int i = 0; i < n; ++i)
            pts[i + 1](i) += (x0(i) != 0.0) ? step * std::abs(x0(i)) + step : step;
        for (int i = 0; i <= n; ++i) {
            fv[i] = f(pts[i]);
            ++evals;
        }

        auto order = [&]() {
            for (int i = 1; i <= n; ++i) {
                for (int j = i; j > 0 && fv[j] < fv[j - 1]; --j) {
                    std::swap(fv[j], fv[j - 1]);
                    std::swap(pts[j], pts[j - 1]);
                }
            }
        };
        order();

        while (evals < max_evals) {
            if (std::abs(fv[n] - fv[0]) < tol * (std::abs(fv[0]) + tol))
                break;

            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i)
                centroid += pts[i];
            centroid /= n;

            Eigen::VectorXd xr = centroid + (centroid - pts[n]);
            double fr = f(xr);
            ++evals;

            if (fr < fv[0]) {
                Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[n]);
                double fe = f(xe);
                ++evals;
                if (fe < fr) {
                    pts[n] = xe; fv[n] = fe;
                } else {
                    pts[n] = xr; fv[n] = fr;
                }
            } else if (fr < fv[n - 1]) {
                pts[n] = xr; fv[n] = fr;
            } else {
                Eigen::VectorXd xc = centroid + 0.5 * (pts[n] - centroid);
                double fc = f(xc);
                ++evals;
                if (fc < fv[n]) {
                    pts[n] = xc; fv[n] = fc;
                } else {
                    for (int i = 1; i <= n; ++i) {
                        pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                        fv[i] = f(pts[i]);
                        ++evals;
                    }
                }
            }
            order();
        }
        return std::make_pair(pts[0], fv[0]);
    };

    auto [x1, f1] = run(start);
    auto [x2, f2] = run(x1); // restart tightens shrunken simplices
    bool converged = evals < max_evals;
    if (f2 <= f1)
        return { x2, f2, evals, converged };
    return { x1, f1, evals, converged };
}

} // namespace longvine

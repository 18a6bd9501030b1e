#include "longvine/stats.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace longvine::stats {

namespace {

// Gauss-Legendre half-rules used by bvnu (positive nodes; symmetric)
constexpr std::array<double, 3> w6 = { 0.1713244923791705, 0.3607615730481384,
                                       0.4679139345726904 };
constexpr std::array<double, 3> x6 = { 0.9324695142031522, 0.6612093864662647,
                                       0.2386191860831970 };
constexpr std::array<double, 6> w12 = { 0.04717533638651177, 0.1069393259953183,
                                        0.1600783285433464,  0.2031674267230659,
                                        0.2334925365383547,  0.2491470458134029 };
constexpr std::array<double, 6> x12 = { 0.9815606342467191, 0.9041172563704750,
                                        0.7699026741943050, 0.5873179542866171,
                                        0.3678314989981802, 0.1252334085114692 };
constexpr std::array<double, 10> w20 = { 0.01761400713915212, 0.04060142980038694,
                                         0.06267204833410906, 0.08327674157670475,
                                         0.1019301198172404,  0.1181945319615184,
                                         0.1316886384491766,  0.1420961093183821,
                                         0.1491729864726037,  0.1527533871307259 };
constexpr std::array<double, 10> x20 = { 0.9931285991850949, 0.9639719272779138,
                                         0.9122344282513259, 0.8391169718222188,
                                         0.7463319064601508, 0.6360536807265150,
                                         0.5108670019508271, 0.3737060887154196,
                                         0.2277858511416451, 0.07652652113349733 };

} // namespace

double bvnu(double dh, double dk, double r)
{
    const double inf = std::numeric_limits<double>::infinity();
    if (dh == inf || dk == inf)
        return 0.0;
    if (dh == -inf)
        return (dk == -inf) ? 1.0 : pnorm(-dk);
    if (dk == -inf)
        return pnorm(-dh);
    if (r == 0.0)
        return pnorm(-dh) * pnorm(-dk);

    const double twopi = 2.0 * pi;
    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;

    const double* w = w20.data();
    const double* x = x20.data();
    int ng = 10;
    if (std::abs(r) < 0.3) {
        w = w6.data();
        x = x6.data();
        ng = 3;
    } else if (std::abs(r) < 0.75) {
        w = w12.data();
        x = x12.data();
        ng = 6;
    }

    if (std::abs(r) < 0.925) {
        double hs = (h * h + k * k) / 2.0;
        double asr = std::asin(r) / 2.0;
        for (int i = 0; i < ng; ++i) {
            for (int is = -1; is <= 1; is += 2) {
                double sn = std::sin(asr * (is * x[i] + 1.0));
                bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / twopi + pnorm(-h) * pnorm(-k);
    } else {
        if (r < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (std::abs(r) < 1.0) {
            double as = (1.0 - r) * (1.0 + r);
            double a = std::sqrt(as);
            double bs = (h - k) * (h - k);
            double c = (4.0 - hk) / 8.0;
            double d = (12.0 - hk) / 16.0;
            double asr = -(bs / as + hk) / 2.0;
            if (asr > -100.0)
                bvn = a * std::exp(asr)
                      * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0
                         + c * d * as * as / 5.0);
            if (-hk < 100.0) {
                double b = std::sqrt(bs);
                double sp = std::sqrt(twopi) * pnorm(-b / a);
                bvn -= std::exp(-hk / 2.0) * sp * b
                       * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for (int i = 0; i < ng; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    double xs = a * (is * x[i] + 1.0);
                    xs *= xs;
                    double rs = std::sqrt(1.0 - xs);
                    double asr1 = -(bs / xs + hk) / 2.0;
                    if (asr1 > -100.0) {
                        double sp = 1.0 + c * xs * (1.0 + d * xs);
                        double ep = std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
                        bvn += a * w[i] * std::exp(asr1) * (ep - sp);
                    }
                }
            }
            bvn = -bvn / twopi;
        }
        if (r > 0.0) {
            bvn += pnorm(-std::max(h, k));
        } else {
            bvn = -bvn;
            if (k > h)
                bvn += pnorm(k) - pnorm(h);
        }
    }
    return std::clamp(bvn, 0.0, 1.0);
}

double kendall_tau(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 2>>& uv)
{
    const Eigen::Index n = uv.rows();
    if (n < 2)
        throw std::invalid_argument("kendall_tau: need at least 2 observations");

    long long concordant = 0, discordant = 0, ties_u = 0, ties_v = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double du = uv(i, 0) - uv(j, 0);
            double dv = uv(i, 1) - uv(j, 1);
            if (du == 0.0 && dv == 0.0)
                continue;
            if (du == 0.0) {
                ++ties_u;
            } else if (dv == 0.0) {
                ++ties_v;
            } else if (du * dv > 0.0) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    double denom = std::sqrt((n0 - ties_u) * (n0 - ties_v));
    if (denom == 0.0)
        throw std::invalid_argument("kendall_tau: degenerate sample (all values tied)");
    return static_cast<double>(concordant - discordant) / denom;
}

double debye1(double x)
{
    if (x <= 0.0)
        throw std::domain_error("debye1: x must be positive");
    // For large x the integral is pi^2/6 up to an exponentially small tail.
    if (x > 40.0)
        return (pi * pi / 6.0) / x;

    // composite 16-point Gauss-Legendre on panels of width <= 2
    static constexpr std::array<double, 8> gx = {
        0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
        0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
        0.9445750230732326, 0.9894009349916499
    };
    static constexpr std::array<double, 8> gw = {
        0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
        0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
        0.0622535239386479, 0.0271524594117541
    };
    auto f = [](double t) {
        if (t < 1e-8)
            return 1.0 - t / 2.0; // t/(e^t - 1) ~ 1 - t/2
        return t / std::expm1(t);
    };
    int panels = static_cast<int>(std::ceil(x / 2.0));
    double hw = x / (2.0 * panels);
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double mid = (2.0 * p + 1.0) * hw;
        double s = 0.0;
        for (std::size_t i = 0; i < gx.size(); ++i)
            s += gw[i] * (f(mid + hw * gx[i]) + f(mid - hw * gx[i]));
        total += s * hw;
    }
    return total / x;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm, double whole,
               double tol, int depth)
{
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
           + simpson(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth)
{
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

} // namespace longvine::stats

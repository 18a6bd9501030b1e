#include "longvine/bicop.hpp"

#include "longvine/optimize.hpp"
#include "longvine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace longvine {

namespace {

constexpr double u_min = 1e-10;
constexpr double u_max = 1.0 - 1e-10;

double clamp_unit(double u) { return std::clamp(u, u_min, u_max); }

double logsumexp2(double a, double b)
{
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ---------------------------------------------------------------- Gaussian

double gauss_log_pdf(double rho, double u, double v)
{
    double x = stats::qnorm(u);
    double y = stats::qnorm(v);
    double r2 = rho * rho;
    double om = 1.0 - r2;
    return -0.5 * std::log(om) - (r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * om);
}

double gauss_cdf(double rho, double u, double v)
{
    return stats::bvnl(stats::qnorm(u), stats::qnorm(v), rho);
}

double gauss_h1(double rho, double u, double v)
{
    double x = stats::qnorm(u);
    double y = stats::qnorm(v);
    return stats::pnorm((y - rho * x) / std::sqrt(1.0 - rho * rho));
}

double gauss_hinv1(double rho, double u, double w)
{
    double x = stats::qnorm(u);
    return stats::pnorm(rho * x + std::sqrt(1.0 - rho * rho) * stats::qnorm(w));
}

// ----------------------------------------------------------------- Clayton

// log(u^-theta + v^-theta - 1), stable for both tiny and huge theta
double clayton_log_s(double theta, double u, double v)
{
    double a = -theta * std::log(u);
    double b = -theta * std::log(v);
    double m = std::max(a, b);
    if (m < 30.0)
        return std::log1p(std::expm1(a) + std::expm1(b));
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

double clayton_log_pdf(double theta, double u, double v)
{
    double ls = clayton_log_s(theta, u, v);
    return std::log1p(theta) - (theta + 1.0) * (std::log(u) + std::log(v))
           - (2.0 + 1.0 / theta) * ls;
}

double clayton_cdf(double theta, double u, double v)
{
    return std::exp(-clayton_log_s(theta, u, v) / theta);
}

double clayton_h1(double theta, double u, double v)
{
    double ls = clayton_log_s(theta, u, v);
    return std::exp(-(theta + 1.0) * std::log(u) - (1.0 + 1.0 / theta) * ls);
}

double clayton_hinv1(double theta, double u, double w)
{
    double a = -theta * std::log(u);
    double delta = -theta / (1.0 + theta) * std::log(w); // >= 0
    if (delta == 0.0)
        return u_max;
    // v^-theta = exp(a) * expm1(delta) + 1
    double t = a + std::log(std::expm1(delta));
    double log_vt = (t > 30.0) ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    return clamp_unit(std::exp(-log_vt / theta));
}

// ------------------------------------------------------------------ Gumbel

struct GumbelTerms {
    double lx, ly; // log(-log u), log(-log v)
    double log_t;  // log T, T = ((-log u)^theta + (-log v)^theta)^(1/theta)
    double t;
};

GumbelTerms gumbel_terms(double theta, double u, double v)
{
    GumbelTerms g;
    g.lx = std::log(-std::log(u));
    g.ly = std::log(-std::log(v));
    g.log_t = logsumexp2(theta * g.lx, theta * g.ly) / theta;
    g.t = std::exp(g.log_t);
    return g;
}

double gumbel_log_pdf(double theta, double u, double v)
{
    auto g = gumbel_terms(theta, u, v);
    return -g.t - std::log(u) - std::log(v) + (theta - 1.0) * (g.lx + g.ly)
           + (2.0 - 2.0 * theta) * g.log_t + std::log1p((theta - 1.0) / g.t);
}

double gumbel_cdf(double theta, double u, double v)
{
    return std::exp(-gumbel_terms(theta, u, v).t);
}

double gumbel_h1(double theta, double u, double v)
{
    auto g = gumbel_terms(theta, u, v);
    double lh = -g.t + (1.0 - theta) * g.log_t + (theta - 1.0) * g.lx - std::log(u);
    return std::exp(std::min(lh, 0.0));
}

// ------------------------------------------------------------------- Frank
// Implemented for theta > 0; negative theta is handled by the reflection
// (U, 1-V), under which Frank(theta) maps to Frank(-theta).

// log D with D = e^{-theta u} + e^{-theta v} - e^{-theta} - e^{-theta(u+v)}
double frank_log_d(double theta, double u, double v)
{
    double a = -theta * u;
    double b = -theta * v;
    if (theta <= 30.0)
        return std::log(-std::expm1(-theta) - std::expm1(a) * std::expm1(b));
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-theta - m)
                        - std::exp(a + b - m));
}

double frank_log_pdf_pos(double theta, double u, double v)
{
    return std::log(theta) + std::log(-std::expm1(-theta)) - theta * (u + v)
           - 2.0 * frank_log_d(theta, u, v);
}

double frank_cdf_pos(double theta, double u, double v)
{
    // C = -(1/theta) log(D / (1 - e^{-theta}))
    double lr = frank_log_d(theta, u, v) - std::log(-std::expm1(-theta));
    return std::clamp(-lr / theta, 0.0, 1.0);
}

double frank_h1_pos(double theta, double u, double v)
{
    double lh = -theta * u + std::log(-std::expm1(-theta * v))
                - frank_log_d(theta, u, v);
    return std::exp(std::min(lh, 0.0));
}

double frank_hinv1_pos(double theta, double u, double w)
{
    // 1 + g_v = ((1-w) e^{-theta u} + w e^{-theta}) / (w + (1-w) e^{-theta u})
    double la = std::log1p(-w) - theta * u;
    double log_num = logsumexp2(la, std::log(w) - theta);
    double log_den = logsumexp2(std::log(w), la);
    return clamp_unit(-(log_num - log_den) / theta);
}

double frank_log_pdf(double theta, double u, double v)
{
    return (theta > 0.0) ? frank_log_pdf_pos(theta, u, v)
                         : frank_log_pdf_pos(-theta, u, 1.0 - v);
}

double frank_cdf(double theta, double u, double v)
{
    return (theta > 0.0) ? frank_cdf_pos(theta, u, v)
                         : u - frank_cdf_pos(-theta, u, 1.0 - v);
}

double frank_h1(double theta, double u, double v)
{
    return (theta > 0.0) ? frank_h1_pos(theta, u, v)
                         : 1.0 - frank_h1_pos(-theta, u, 1.0 - v);
}

double frank_hinv1(double theta, double u, double w)
{
    return (theta > 0.0) ? frank_hinv1_pos(theta, u, w)
                         : 1.0 - frank_hinv1_pos(-theta, u, 1.0 - w);
}

// --------------------------------------------------------------------- Joe

// log S with S = (1-u)^theta + (1-v)^theta - (1-u)^theta (1-v)^theta
double joe_log_s(double theta, double u, double v)
{
    double big = theta * std::max(std::log1p(-u), std::log1p(-v));   // in (-inf, 0]
    double small = theta * std::min(std::log1p(-u), std::log1p(-v));
    return big + std::log1p(std::exp(small - big) * (-std::expm1(big)));
}

double joe_log_pdf(double theta, double u, double v)
{
    double ls = joe_log_s(theta, u, v);
    return (1.0 / theta - 2.0) * ls
           + (theta - 1.0) * (std::log1p(-u) + std::log1p(-v))
           + std::log(theta - 1.0 + std::exp(ls));
}

double joe_cdf(double theta, double u, double v)
{
    return -std::expm1(joe_log_s(theta, u, v) / theta);
}

double joe_h1(double theta, double u, double v)
{
    double ls = joe_log_s(theta, u, v);
    double lh = (1.0 / theta - 1.0) * ls + (theta - 1.0) * std::log1p(-u)
                + std::log(-std::expm1(theta * std::log1p(-v)));
    return std::exp(std::min(lh, 0.0));
}

// ---------------------------------------------------- base-family dispatch

double base_log_pdf(CopulaFamily f, double theta, double u, double v)
{
    switch (f) {
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::gaussian: return gauss_log_pdf(theta, u, v);
    case CopulaFamily::clayton: return clayton_log_pdf(theta, u, v);
    case CopulaFamily::gumbel: return gumbel_log_pdf(theta, u, v);
    case CopulaFamily::frank: return frank_log_pdf(theta, u, v);
    case CopulaFamily::joe: return joe_log_pdf(theta, u, v);
    }
    throw std::logic_error("unknown family");
}

double base_cdf(CopulaFamily f, double theta, double u, double v)
{
    switch (f) {
    case CopulaFamily::independence: return u * v;
    case CopulaFamily::gaussian: return gauss_cdf(theta, u, v);
    case CopulaFamily::clayton: return clayton_cdf(theta, u, v);
    case CopulaFamily::gumbel: return gumbel_cdf(theta, u, v);
    case CopulaFamily::frank: return frank_cdf(theta, u, v);
    case CopulaFamily::joe: return joe_cdf(theta, u, v);
    }
    throw std::logic_error("unknown family");
}

double base_h1(CopulaFamily f, double theta, double u, double v)
{
    switch (f) {
    case CopulaFamily::independence: return v;
    case CopulaFamily::gaussian: return gauss_h1(theta, u, v);
    case CopulaFamily::clayton: return clayton_h1(theta, u, v);
    case CopulaFamily::gumbel: return gumbel_h1(theta, u, v);
    case CopulaFamily::frank: return frank_h1(theta, u, v);
    case CopulaFamily::joe: return joe_h1(theta, u, v);
    }
    throw std::logic_error("unknown family");
}

// numeric inversion for families without a closed-form h-inverse; converges
// on the argument (not the residual) so flat conditional-cdf regions still
// resolve the root to ~1e-11
double base_hinv1_numeric(CopulaFamily f, double theta, double u, double w)
{
    auto fn = [&](double v) { return base_h1(f, theta, u, v); };
    auto dfn = [&](double v) { return std::exp(base_log_pdf(f, theta, u, v)); };
    return invert_monotone(fn, w, u_min, u_max, dfn, 1e-15, 1e-11);
}

double base_hinv1(CopulaFamily f, double theta, double u, double w)
{
    switch (f) {
    case CopulaFamily::independence: return w;
    case CopulaFamily::gaussian: return gauss_hinv1(theta, u, w);
    case CopulaFamily::clayton: return clayton_hinv1(theta, u, w);
    case CopulaFamily::frank: return frank_hinv1(theta, u, w);
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return base_hinv1_numeric(f, theta, u, w);
    }
    throw std::logic_error("unknown family");
}

// ---------------------------------------------------------- Kendall's tau
// tau(theta) of the unrotated family

double joe_tau(double theta)
{
    // tau = 1 - 4 sum_{k>=1} 1 / (k (theta k + 2) (theta (k-1) + 2)),
    // summed directly with an integral tail estimate
    const int terms = 5000;
    stats::KahanSum s;
    for (int k = 1; k <= terms; ++k) {
        double kk = k;
        s.add(1.0 / (kk * (theta * kk + 2.0) * (theta * (kk - 1.0) + 2.0)));
    }
    double tail = 1.0 / (2.0 * theta * theta * (terms + 0.5) * (terms + 0.5));
    return 1.0 - 4.0 * (s.value() + tail);
}

double frank_tau(double theta)
{
    if (theta < 0.0)
        return -frank_tau(-theta);
    if (theta < 1e-10)
        return theta / 9.0;
    return 1.0 - 4.0 / theta * (1.0 - stats::debye1(theta));
}

double base_tau(CopulaFamily f, double theta)
{
    switch (f) {
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::gaussian: return 2.0 / stats::pi * std::asin(theta);
    case CopulaFamily::clayton: return theta / (theta + 2.0);
    case CopulaFamily::gumbel: return 1.0 - 1.0 / theta;
    case CopulaFamily::frank: return frank_tau(theta);
    case CopulaFamily::joe: return joe_tau(theta);
    }
    throw std::logic_error("unknown family");
}

// inverse of base_tau for positive tau (all families), root-finding where
// no closed form exists
double base_theta_from_tau(CopulaFamily f, double tau)
{
    switch (f) {
    case CopulaFamily::gaussian: return std::sin(0.5 * stats::pi * tau);
    case CopulaFamily::clayton: return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::gumbel: return 1.0 / (1.0 - tau);
    case CopulaFamily::frank: {
        if (tau < 0.0)
            return -base_theta_from_tau(f, -tau);
        return invert_monotone([](double t) { return frank_tau(t); }, tau, 1e-8,
                               1e5, nullptr, 1e-12, 0.0, 300);
    }
    case CopulaFamily::joe:
        return invert_monotone([](double t) { return joe_tau(t); }, tau,
                               1.0 + 1e-10, 1e6, nullptr, 1e-12, 0.0, 300);
    default:
        throw std::logic_error("base_theta_from_tau: family has no parameter");
    }
}

bool negates_tau(Rotation r)
{
    return r == Rotation::deg90 || r == Rotation::deg270;
}

} // namespace

// ------------------------------------------------------------- conversions

std::string to_string(CopulaFamily family)
{
    switch (family) {
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::gaussian: return "gaussian";
    case CopulaFamily::clayton: return "clayton";
    case CopulaFamily::gumbel: return "gumbel";
    case CopulaFamily::frank: return "frank";
    case CopulaFamily::joe: return "joe";
    }
    return "?";
}

std::string to_string(Rotation rotation)
{
    return std::to_string(degrees(rotation));
}

CopulaFamily family_from_string(const std::string& name)
{
    if (name == "independence") return CopulaFamily::independence;
    if (name == "gaussian") return CopulaFamily::gaussian;
    if (name == "clayton") return CopulaFamily::clayton;
    if (name == "gumbel") return CopulaFamily::gumbel;
    if (name == "frank") return CopulaFamily::frank;
    if (name == "joe") return CopulaFamily::joe;
    throw std::invalid_argument("unknown copula family: " + name);
}

Rotation rotation_from_degrees(int deg)
{
    switch (deg) {
    case 0: return Rotation::deg0;
    case 90: return Rotation::deg90;
    case 180: return Rotation::deg180;
    case 270: return Rotation::deg270;
    }
    throw std::invalid_argument("rotation must be one of 0, 90, 180, 270");
}

int degrees(Rotation rotation)
{
    switch (rotation) {
    case Rotation::deg0: return 0;
    case Rotation::deg90: return 90;
    case Rotation::deg180: return 180;
    case Rotation::deg270: return 270;
    }
    return 0;
}

void validate(const PairCopula& pc)
{
    double t = pc.theta;
    bool ok = true;
    switch (pc.family) {
    case CopulaFamily::independence: return; // parameter ignored
    case CopulaFamily::gaussian: ok = t > -1.0 && t < 1.0; break;
    case CopulaFamily::clayton: ok = t > 0.0; break;
    case CopulaFamily::gumbel: ok = t >= 1.0; break;
    case CopulaFamily::frank: ok = t != 0.0 && std::isfinite(t); break;
    case CopulaFamily::joe: ok = t > 1.0; break;
    }
    if (!ok || !std::isfinite(t))
        throw std::domain_error("parameter " + std::to_string(t)
                                + " outside the domain of the "
                                + to_string(pc.family) + " family");
}

bool positive_dependence_only(CopulaFamily family)
{
    return family == CopulaFamily::clayton || family == CopulaFamily::gumbel
           || family == CopulaFamily::joe;
}

// ----------------------------------------------------------- rotated ops

double log_pdf(const PairCopula& pc, double u, double v)
{
    validate(pc);
    u = clamp_unit(u);
    v = clamp_unit(v);
    switch (pc.rotation) {
    case Rotation::deg0: return base_log_pdf(pc.family, pc.theta, u, v);
    case Rotation::deg90: return base_log_pdf(pc.family, pc.theta, 1.0 - u, v);
    case Rotation::deg180: return base_log_pdf(pc.family, pc.theta, 1.0 - u, 1.0 - v);
    case Rotation::deg270: return base_log_pdf(pc.family, pc.theta, u, 1.0 - v);
    }
    throw std::logic_error("unknown rotation");
}

double pdf(const PairCopula& pc, double u, double v)
{
    return std::exp(log_pdf(pc, u, v));
}

double cdf(const PairCopula& pc, double u, double v)
{
    validate(pc);
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    if (u == 0.0 || v == 0.0)
        return 0.0;
    if (u == 1.0)
        return v;
    if (v == 1.0)
        return u;
    u = clamp_unit(u);
    v = clamp_unit(v);
    double c = 0.0;
    switch (pc.rotation) {
    case Rotation::deg0: c = base_cdf(pc.family, pc.theta, u, v); break;
    case Rotation::deg90: c = v - base_cdf(pc.family, pc.theta, 1.0 - u, v); break;
    case Rotation::deg180:
        c = u + v - 1.0 + base_cdf(pc.family, pc.theta, 1.0 - u, 1.0 - v);
        break;
    case Rotation::deg270: c = u - base_cdf(pc.family, pc.theta, u, 1.0 - v); break;
    }
    return std::clamp(c, std::max(u + v - 1.0, 0.0), std::min(u, v));
}

double hfunc1(const PairCopula& pc, double u, double v)
{
    validate(pc);
    u = clamp_unit(u);
    v = clamp_unit(v);
    double h = 0.0;
    switch (pc.rotation) {
    case Rotation::deg0: h = base_h1(pc.family, pc.theta, u, v); break;
    case Rotation::deg90: h = base_h1(pc.family, pc.theta, 1.0 - u, v); break;
    case Rotation::deg180:
        h = 1.0 - base_h1(pc.family, pc.theta, 1.0 - u, 1.0 - v);
        break;
    case Rotation::deg270: h = 1.0 - base_h1(pc.family, pc.theta, u, 1.0 - v); break;
    }
    return std::clamp(h, 0.0, 1.0);
}

double hfunc2(const PairCopula& pc, double u, double v)
{
    // exchangeable base families: dC0/dv (u, v) = dC0/du (v, u)
    validate(pc);
    u = clamp_unit(u);
    v = clamp_unit(v);
    double h = 0.0;
    switch (pc.rotation) {
    case Rotation::deg0: h = base_h1(pc.family, pc.theta, v, u); break;
    case Rotation::deg90: h = 1.0 - base_h1(pc.family, pc.theta, v, 1.0 - u); break;
    case Rotation::deg180:
        h = 1.0 - base_h1(pc.family, pc.theta, 1.0 - v, 1.0 - u);
        break;
    case Rotation::deg270: h = base_h1(pc.family, pc.theta, 1.0 - v, u); break;
    }
    return std::clamp(h, 0.0, 1.0);
}

double hinv1(const PairCopula& pc, double u, double w)
{
    validate(pc);
    u = clamp_unit(u);
    w = clamp_unit(w);
    double v = 0.0;
    switch (pc.rotation) {
    case Rotation::deg0: v = base_hinv1(pc.family, pc.theta, u, w); break;
    case Rotation::deg90: v = base_hinv1(pc.family, pc.theta, 1.0 - u, w); break;
    case Rotation::deg180:
        v = 1.0 - base_hinv1(pc.family, pc.theta, 1.0 - u, 1.0 - w);
        break;
    case Rotation::deg270:
        v = 1.0 - base_hinv1(pc.family, pc.theta, u, 1.0 - w);
        break;
    }
    return std::clamp(v, u_min, u_max);
}

double hinv2(const PairCopula& pc, double v, double w)
{
    validate(pc);
    v = clamp_unit(v);
    w = clamp_unit(w);
    double u = 0.0;
    switch (pc.rotation) {
    case Rotation::deg0: u = base_hinv1(pc.family, pc.theta, v, w); break;
    case Rotation::deg90:
        u = 1.0 - base_hinv1(pc.family, pc.theta, v, 1.0 - w);
        break;
    case Rotation::deg180:
        u = 1.0 - base_hinv1(pc.family, pc.theta, 1.0 - v, 1.0 - w);
        break;
    case Rotation::deg270: u = base_hinv1(pc.family, pc.theta, 1.0 - v, w); break;
    }
    return std::clamp(u, u_min, u_max);
}

double param_to_tau(const PairCopula& pc)
{
    validate(pc);
    double t = base_tau(pc.family, pc.theta);
    return negates_tau(pc.rotation) ? -t : t;
}

PairCopula tau_to_param(CopulaFamily family, Rotation rotation, double tau)
{
    if (!(std::abs(tau) < 1.0))
        throw std::domain_error("tau_to_param: |tau| must be < 1");
    if (family == CopulaFamily::independence || tau == 0.0)
        return independence_copula();

    double base = negates_tau(rotation) ? -tau : tau;
    if (positive_dependence_only(family) && base <= 0.0)
        throw std::domain_error("tau_to_param: tau sign incompatible with the "
                                + to_string(family) + " family at rotation "
                                + to_string(rotation));
    return { family, rotation, base_theta_from_tau(family, base) };
}

TailDependence tail_dependence(const PairCopula& pc)
{
    validate(pc);
    TailDependence td { 0.0, 0.0 };
    switch (pc.family) {
    case CopulaFamily::clayton: td.lower = std::exp2(-1.0 / pc.theta); break;
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: td.upper = 2.0 - std::exp2(1.0 / pc.theta); break;
    default: break;
    }
    switch (pc.rotation) {
    case Rotation::deg0: return td;
    case Rotation::deg180: return { td.upper, td.lower };
    case Rotation::deg90:
    case Rotation::deg270: return { 0.0, 0.0 }; // corner mass moves off-diagonal
    }
    return td;
}

// --------------------------------------------------------------- fitting

namespace {

void check_fit_data(const UvData& data)
{
    const Eigen::Index n = data.rows();
    if (n < 2)
        throw std::invalid_argument("fit_pair_mle: need at least 2 observations");
    bool u_varies = false, v_varies = false;
    for (Eigen::Index i = 1; i < n && !(u_varies && v_varies); ++i) {
        u_varies = u_varies || data(i, 0) != data(0, 0);
        v_varies = v_varies || data(i, 1) != data(0, 1);
    }
    if (!u_varies || !v_varies)
        throw std::invalid_argument("fit_pair_mle: degenerate sample "
                                    "(a margin is constant)");
}

double data_loglik(const PairCopula& pc, const UvData& data)
{
    stats::KahanSum ll;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        ll.add(log_pdf(pc, data(i, 0), data(i, 1)));
    return ll.value();
}

} // namespace

PairFit fit_pair_mle(CopulaFamily family, Rotation rotation, const UvData& data)
{
    check_fit_data(data);
    if (family == CopulaFamily::independence)
        return { independence_copula(), 0.0 };

    // compactified search domain: Kendall's tau in [-0.99, 0.99], restricted
    // to the sign reachable by the family/rotation
    double lo = -0.99, hi = 0.99;
    if (positive_dependence_only(family)) {
        if (rotation == Rotation::deg90 || rotation == Rotation::deg270)
            hi = -1e-5;
        else
            lo = 1e-5;
    }

    auto objective = [&](double tau) {
        PairCopula pc = tau_to_param(family, rotation, tau);
        return -data_loglik(pc, data);
    };
    auto opt = brent_minimize(objective, lo, hi, 1e-8);
    if (!std::isfinite(opt.fx))
        throw std::runtime_error("fit_pair_mle: non-finite likelihood for family "
                                 + to_string(family));
    PairCopula fitted = tau_to_param(family, rotation, opt.x);
    return { fitted, -opt.fx };
}

IndependenceTest independence_test(const UvData& data, double level)
{
    const double n = static_cast<double>(data.rows());
    if (n < 10)
        throw std::invalid_argument("independence_test: need at least 10 "
                                    "observations");
    double tau_hat = stats::kendall_tau(data);
    double z = tau_hat * std::sqrt(9.0 * n * (n - 1.0) / (2.0 * (2.0 * n + 5.0)));
    double p = 2.0 * stats::pnorm(-std::abs(z));
    p = std::clamp(p, 0.0, 1.0);
    return { tau_hat, p, p < level };
}

std::vector<FamilyRotation> default_candidates()
{
    std::vector<FamilyRotation> out;
    out.push_back({ CopulaFamily::gaussian, Rotation::deg0 });
    out.push_back({ CopulaFamily::frank, Rotation::deg0 });
    for (auto fam : { CopulaFamily::clayton, CopulaFamily::gumbel, CopulaFamily::joe })
        for (auto rot : { Rotation::deg0, Rotation::deg90, Rotation::deg180,
                          Rotation::deg270 })
            out.push_back({ fam, rot });
    return out;
}

SelectedPair select_pair(const UvData& data,
                         const std::vector<FamilyRotation>& candidates,
                         SelectionCriterion criterion, double independence_level)
{
    if (candidates.empty())
        throw std::invalid_argument("select_pair: empty candidate list");

    double tau_hat;
    if (data.rows() >= 10 && independence_level > 0.0) {
        auto test = independence_test(data, independence_level);
        if (!test.reject)
            return { independence_copula(), 0.0, false };
        tau_hat = test.tau_hat;
    } else {
        tau_hat = stats::kendall_tau(data);
    }

    const double log_n = std::log(static_cast<double>(data.rows()));
    auto score = [&](double ll, int n_par) {
        switch (criterion) {
        case SelectionCriterion::bic: return -2.0 * ll + n_par * log_n;
        case SelectionCriterion::aic: return -2.0 * ll + 2.0 * n_par;
        case SelectionCriterion::loglik: return -ll;
        }
        return -ll;
    };

    bool have_best = false;
    SelectedPair best { independence_copula(), 0.0, true };
    double best_score = 0.0;
    for (const auto& cand : candidates) {
        if (cand.family == CopulaFamily::independence) {
            double s = score(0.0, 0);
            if (!have_best || s < best_score) {
                best = { independence_copula(), 0.0, false };
                best_score = s;
                have_best = true;
            }
            continue;
        }
        if (positive_dependence_only(cand.family)) {
            bool wants_negative = negates_tau(cand.rotation);
            if ((wants_negative && tau_hat >= 0.0) || (!wants_negative && tau_hat <= 0.0))
                continue;
        }
        auto fit = fit_pair_mle(cand.family, cand.rotation, data);
        double s = score(fit.loglik, 1);
        if (!have_best || s < best_score) {
            best = { fit.copula, fit.loglik, false };
            best_score = s;
            have_best = true;
        }
    }
    if (!have_best)
        return { independence_copula(), 0.0, true };
    return best;
}

} // namespace longvine

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace longvine {

//! n x 2 matrix of copula-scale observations
using UvData = Eigen::Matrix<double, Eigen::Dynamic, 2>;

//! One-parameter bivariate copula families. Parameter domains:
//!   gaussian  rho   in (-1, 1)
//!   clayton   theta in (0, inf)
//!   gumbel    theta in [1, inf)
//!   frank     theta in R \ {0}
//!   joe       theta in (1, inf)
//! independence carries no parameter.
enum class CopulaFamily { independence, gaussian, clayton, gumbel, frank, joe };

//! Counter-clockwise data rotation applied to a base copula density c0:
//!   deg0    c(u,v) = c0(u, v)
//!   deg90   c(u,v) = c0(1-u, v)
//!   deg180  c(u,v) = c0(1-u, 1-v)      (survival copula)
//!   deg270  c(u,v) = c0(u, 1-v)
//! The cdf, h-functions and their inverses follow by integration:
//!   C90(u,v)  = v - C0(1-u, v)         C270(u,v) = u - C0(u, 1-v)
//!   C180(u,v) = u + v - 1 + C0(1-u, 1-v)
enum class Rotation { deg0, deg90, deg180, deg270 };

struct PairCopula {
    CopulaFamily family = CopulaFamily::independence;
    Rotation rotation = Rotation::deg0;
    double theta = 0.0;
};

inline PairCopula independence_copula() { return {}; }

std::string to_string(CopulaFamily family);
std::string to_string(Rotation rotation);
CopulaFamily family_from_string(const std::string& name);
Rotation rotation_from_degrees(int degrees);
int degrees(Rotation rotation);

//! throws std::domain_error if theta lies outside the family's domain
void validate(const PairCopula& pc);

//! true for families supporting only positive dependence at rotation 0
bool positive_dependence_only(CopulaFamily family);

//! copula density c(u, v); inputs clamped to [1e-10, 1 - 1e-10]
double pdf(const PairCopula& pc, double u, double v);
double log_pdf(const PairCopula& pc, double u, double v);

//! copula distribution function C(u, v); boundary values are exact
//! (C(u,1) = u, C(1,v) = v, C(u,0) = C(0,v) = 0)
double cdf(const PairCopula& pc, double u, double v);

//! h-functions: hfunc1(u, v) = dC/du = C(v | u), hfunc2(u, v) = dC/dv = C(u | v)
double hfunc1(const PairCopula& pc, double u, double v);
double hfunc2(const PairCopula& pc, double u, double v);

//! inverse h-functions: hinv1(u, w) returns v with hfunc1(u, v) = w,
//! hinv2(v, w) returns u with hfunc2(u, v) = w
double hinv1(const PairCopula& pc, double u, double w);
double hinv2(const PairCopula& pc, double v, double w);

//! Kendall's tau implied by the pair copula (sign flips under 90/270 rotation)
double param_to_tau(const PairCopula& pc);

//! Pair copula of the given family/rotation matching Kendall's tau.
//! tau = 0 collapses to the independence copula. Throws std::domain_error
//! when the sign of tau is incompatible with the family/rotation.
PairCopula tau_to_param(CopulaFamily family, Rotation rotation, double tau);

struct TailDependence {
    double lower;
    double upper;
};

//! lower/upper tail dependence coefficients; 180° rotation swaps them,
//! 90°/270° rotations zero both
TailDependence tail_dependence(const PairCopula& pc);

struct PairFit {
    PairCopula copula;
    double loglik;
};

//! Maximum-likelihood fit of a fixed family/rotation on copula data.
//! One-dimensional Brent search over the Kendall's-tau compactification
//! of the parameter domain.
PairFit fit_pair_mle(CopulaFamily family, Rotation rotation, const UvData& data);

struct IndependenceTest {
    double tau_hat;
    double p_value;
    bool reject;
};

//! Asymptotic normal Kendall's-tau independence test:
//! z = tau_hat * sqrt(9 n (n-1) / (2 (2n+5))), two-sided p-value.
IndependenceTest independence_test(const UvData& data, double level = 0.05);

enum class SelectionCriterion { bic, aic, loglik };

struct FamilyRotation {
    CopulaFamily family;
    Rotation rotation;
};

//! default candidate set: the five parametric families, with the four
//! rotations for the asymmetric ones (clayton, gumbel, joe)
std::vector<FamilyRotation> default_candidates();

struct SelectedPair {
    PairCopula copula;
    double loglik;
    bool fallback_independence; // no sign-compatible candidate could be fitted
};

//! Family selection on copula data: keeps the independence copula unless the
//! tau test rejects at `independence_level` (test skipped for n < 10), then
//! fits every sign-compatible candidate and picks the criterion-best one
//! (ties resolved by candidate order).
SelectedPair select_pair(const UvData& data,
                         const std::vector<FamilyRotation>& candidates,
                         SelectionCriterion criterion = SelectionCriterion::bic,
                         double independence_level = 0.05);

} // namespace longvine

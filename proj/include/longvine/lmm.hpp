#pragma once

#include "longvine/dvine.hpp"
#include "longvine/margins.hpp"

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace longvine {

enum class ErrorKind { iid, compound_symmetry, ar1, exponential_decay, general };

//! Error covariance structure Sigma for the within-individual errors.
//! Entries (k, l), 1-based:
//!   iid                 sigma2 * 1{k == l}
//!   compound_symmetry   sigma2 * rho^{1{k != l}}
//!   ar1                 sigma2 * rho^{|k - l|}
//!   exponential_decay   sigma2 * exp(-|k - l| / range_r)
//!   general             sigma2 * R(partials), R via partials_to_corr
struct ErrorStructure {
    ErrorKind kind = ErrorKind::iid;
    double sigma2 = 1.0;
    double rho = 0.0;      // compound_symmetry / ar1
    double range_r = 1.0;  // exponential_decay
    Eigen::MatrixXd full_correlation; // general: d x d correlation matrix

    //! leading di x di error covariance block (homogeneous across individuals)
    Eigen::MatrixXd covariance(int di) const;
};

std::string to_string(ErrorKind kind);
ErrorKind error_kind_from_string(const std::string& name);

//! Linear mixed model with homogeneous correlation: the random-effect
//! design depends on the individual only through its number of
//! measurements, so every implied correlation matrix is a leading
//! submatrix of the d-dimensional one.
struct LmmSpec {
    Eigen::VectorXd beta;
    std::vector<std::string> covariate_names; // first entry is "intercept"
    Eigen::MatrixXd random_effect_cov;        // q x q, PSD
    std::function<Eigen::MatrixXd(int)> z_builder; // di -> di x q design
    ErrorStructure error;
};

//! random-intercept design: Z = column of ones
std::function<Eigen::MatrixXd(int)> random_intercept_design();

//! Z D Z' + Sigma, leading di x di block
Eigen::MatrixXd implied_covariance(const LmmSpec& spec, int di);

//! unit-diagonal scaling of implied_covariance
Eigen::MatrixXd implied_correlation(const LmmSpec& spec, int di);

//! D-vine partial correlations rho_{k,l;(k+1):(l-1)} of a correlation
//! matrix under the order 1..d; keyed by edge, tree-major like DVineSpec
Eigen::MatrixXd corr_to_partials(const Eigen::MatrixXd& corr);

//! inverse map: any partials in (-1, 1) yield a valid correlation matrix
Eigen::MatrixXd partials_to_corr(const Eigen::MatrixXd& partials);

struct GaussianDVine {
    DVineSpec spec { 2 };
    MarginVector margins;
};

//! The LMM re-expressed as an all-Gaussian D-vine with normal regression
//! margins N(x' beta, phi_j^2); the composed density equals the LMM's
//! multivariate normal density.
GaussianDVine lmm_as_gaussian_dvine(const LmmSpec& spec, int d);

struct LmmFit {
    LmmSpec spec;
    double loglik = 0.0;
    int n_parameters = 0;
    bool converged = true;
    std::vector<std::string> warnings;
};

//! Maximum-likelihood fit (not REML) of a random-intercept LMM with the
//! requested error structure. Fixed effects are profiled out by GLS;
//! variance parameters are optimized on log/atanh scales.
LmmFit lmm_fit(const LongitudinalDataset& data, ErrorKind kind,
               const std::vector<std::string>& covariates);

//! multivariate-normal log-likelihood of a dataset under an LMM spec
double lmm_loglik(const LmmSpec& spec, const LongitudinalDataset& data);

} // namespace longvine

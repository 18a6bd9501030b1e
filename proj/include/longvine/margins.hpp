#pragma once

#include "longvine/dvine.hpp"

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace longvine {

using Covariates = std::map<std::string, double>;

struct Measurement {
    double y = std::numeric_limits<double>::quiet_NaN(); // NaN: covariates-only row
    Covariates covariates;
};

struct Individual {
    std::string id;
    std::vector<std::optional<Measurement>> measurements; // slot j-1 <-> index j
};

struct LongitudinalDataset {
    int dim = 0; // maximum measurement index
    std::vector<Individual> individuals;
};

//! Normal linear-regression margin for one measurement index:
//! Y ~ N(x' beta, sigma^2). index 0 marks a pooled margin shared by all
//! measurement indices.
struct MarginalModel {
    int index = 0;
    std::vector<std::string> covariate_names; // first entry is "intercept"
    Eigen::VectorXd coefficients;
    double sigma = 1.0;

    double mean(const Covariates& covariates) const;
};

//! OLS fit with BIC-based forward selection from an intercept-only model;
//! sigma is the maximum-likelihood (1/n) residual standard deviation.
//! Rank-deficient additions are dropped with a warning.
MarginalModel fit_margin(const LongitudinalDataset& data, int j,
                         const std::vector<std::string>& candidate_covariates,
                         std::vector<std::string>* warnings = nullptr);

//! pooled variant: one regression over the measurements of every index
MarginalModel fit_pooled_margin(const LongitudinalDataset& data,
                                const std::vector<std::string>& candidate_covariates,
                                std::vector<std::string>* warnings = nullptr);

//! probability integral transform Phi((y - x'beta) / sigma), clamped to
//! the bicop evaluation range
double pit(const MarginalModel& model, double y, const Covariates& covariates);

//! x'beta + sigma * Phi^{-1}(u)
double inverse_pit(const MarginalModel& model, double u, const Covariates& covariates);

//! margins indexed by measurement position (slot j-1 <-> index j); an
//! engaged entry is required wherever the dataset has measurements
using MarginVector = std::vector<std::optional<MarginalModel>>;

//! spread a fitted margin set over the d slots: per-index list or a pooled
//! model replicated to every index
MarginVector per_index_margins(std::vector<MarginalModel> models, int dim);
MarginVector pooled_margins(const MarginalModel& model, int dim);

//! sum of normal log-densities over all present measurements
double margins_loglik(const MarginVector& models, const LongitudinalDataset& data);

//! transform a dataset to the copula scale; missing measurements stay NaN
CopulaDataset pit_dataset(const MarginVector& models, const LongitudinalDataset& data);

} // namespace longvine

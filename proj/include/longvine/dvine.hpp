#pragma once

#include "longvine/bicop.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace longvine {

//! D-vine copula with order 1-2-...-d. Edge (k, l), 1 <= k < l <= d, carries
//! the pair copula of (U_k, U_l) given the variables strictly between them;
//! its tree index is l - k. All d(d-1)/2 edges are stored; the simplifying
//! assumption is built in.
class DVineSpec {
public:
    explicit DVineSpec(int dim);

    int dim() const { return dim_; }
    int n_edges() const { return dim_ * (dim_ - 1) / 2; }

    //! 1-based edge access, k < l
    PairCopula& pair(int k, int l) { return pairs_[index(k, l)]; }
    const PairCopula& pair(int k, int l) const { return pairs_[index(k, l)]; }

    //! number of non-independence edges (each carries one parameter)
    int n_parameters() const;

private:
    int index(int k, int l) const;

    int dim_;
    std::vector<PairCopula> pairs_;
};

//! One individual's copula-scale measurements, indexed 1..d; NaN marks a
//! missing measurement.
using ObservationU = Eigen::VectorXd;

inline bool is_present(double x) { return !std::isnan(x); }

//! length of the initial run of present entries
int leading_length(const ObservationU& u);

//! number of present entries
int present_count(const ObservationU& u);

struct CopulaDataset {
    int dim = 0;
    std::vector<ObservationU> observations;
};

//! n_j: number of observations whose leading run of present entries has
//! length exactly j (index 0 of the result corresponds to j = 1)
std::vector<int> group_sizes(const CopulaDataset& data);

//! N_j = sum_{k >= j} n_k: observations with at least j leading measurements
std::vector<int> cumulative_group_sizes(const CopulaDataset& data);

//! D-vine copula density at a complete point (all coordinates present)
double density(const DVineSpec& spec, const Eigen::VectorXd& u);
double log_density(const DVineSpec& spec, const Eigen::VectorXd& u);

//! restriction of the vine to variables 1..j; its density is the
//! j-dimensional margin of the full vine
DVineSpec subvine(const DVineSpec& spec, int j);

struct DatasetLoglik {
    double value;
    int degenerate_observations; // fewer than two present entries
};

//! Log-likelihood over a dataset with gaps: edge (k, l) contributes one
//! log-density term for every observation whose entries k..l are all
//! present (the h-cascade for the edge needs each intermediate coordinate).
DatasetLoglik loglik(const DVineSpec& spec, const CopulaDataset& data);

//! conditional cdf C_{j+1 | 1:j}(u_next | history), history = (u_1, ..., u_j)
double conditional_cdf(const DVineSpec& spec, const Eigen::VectorXd& history,
                       double u_next);

//! conditional quantile C^{-1}_{j+1 | 1:j}(alpha | history) via the inverse
//! h-function cascade
double conditional_quantile(const DVineSpec& spec, const Eigen::VectorXd& history,
                            double alpha);

//! inverse-Rosenblatt sampling of n complete observations
CopulaDataset simulate(const DVineSpec& spec, int n, std::uint64_t seed);

} // namespace longvine

#pragma once

#include "longvine/dvine.hpp"
#include "longvine/margins.hpp"

#include <Eigen/Dense>

namespace longvine {

//! Parameter ladder for the unbalanced-data BIC. delta_p(j-1) counts the
//! parameters first needed at measurement j; n_at_least(j-1) counts the
//! observations with at least j leading measurements.
struct ParamLadder {
    Eigen::VectorXi delta_p;
    Eigen::VectorXi n_at_least;

    int total_parameters() const { return delta_p.sum(); }
};

//! BIC with per-measurement sample sizes: -2 loglik + sum_j delta_p_j log N_j.
//! Collapses to the standard BIC when all N_j are equal.
double adjusted_bic(double loglik, const ParamLadder& ladder);

//! -2 loglik + 2 p
double aic(double loglik, int p_total);

//! Ladder for a fitted D-vine model with margins. Margin parameters
//! (coefficients plus sigma) are attributed to their measurement index, or
//! to index 1 when pooled across measurements; the parameter of edge (k, l)
//! is attributed to measurement l, the latest one the edge needs.
ParamLadder build_ladder(const MarginVector& margins, const DVineSpec& spec,
                         const CopulaDataset& data);

} // namespace longvine

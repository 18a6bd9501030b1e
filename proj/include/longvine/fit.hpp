#pragma once

#include "longvine/bicop.hpp"
#include "longvine/dvine.hpp"

#include <map>
#include <string>
#include <vector>

namespace longvine {

struct FitConfig {
    std::vector<FamilyRotation> candidates = default_candidates();
    double independence_level = 0.05; // 0 disables the screen
    SelectionCriterion criterion = SelectionCriterion::bic;
    int truncation_level = 0; // 0: no truncation; t: trees > t independence
    bool joint_refine = false;
    int min_edge_observations = 10; // below: edge forced to independence
};

struct EdgeDiagnostics {
    int k = 0;
    int l = 0;
    PairCopula copula;
    int n_used = 0;
    double tau_hat = 0.0; // Kendall's tau of the fitted pair copula
    double lambda_lower = 0.0;
    double lambda_upper = 0.0;
    double loglik = 0.0;
};

struct FitReport {
    DVineSpec spec { 2 };
    std::vector<EdgeDiagnostics> edges; // tree-major order
    double total_loglik = 0.0;
    int group_dim = 0; // dimension of the fitted (sub-)model
    std::vector<std::string> warnings;

    const EdgeDiagnostics& edge(int k, int l) const;
};

//! Sequential tree-by-tree selection and estimation (Model B). Trees are
//! processed in order of the conditioning-set size; every edge is fitted on
//! the pseudo-observations of exactly those observations whose entries
//! k..l are all present. Edges with fewer than min_edge_observations usable
//! observations, or beyond the truncation level, are set to independence.
FitReport sequential_fit(const CopulaDataset& data, const FitConfig& config);

//! Model A: one independent sequential fit per observation-length group.
//! Requires gap-free observations. Groups with fewer than
//! min_edge_observations members are skipped with a warning.
std::vector<FitReport> fit_model_a(const CopulaDataset& data, const FitConfig& config);

struct JointRefineResult {
    DVineSpec spec { 2 };
    double loglik = 0.0;
    bool improved = false;
    std::vector<std::string> warnings;
};

//! Joint maximization of the dataset log-likelihood over all edge
//! parameters with families held fixed, initialized at (and never worse
//! than) the given estimates.
JointRefineResult joint_refine(const DVineSpec& spec, const CopulaDataset& data);

} // namespace longvine

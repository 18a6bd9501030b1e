#pragma once

#include "longvine/dvine.hpp"
#include "longvine/fit.hpp"
#include "longvine/random.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace longvine {

//! distribution of the pruned observation length on {2, ..., d}
struct PruneDistribution {
    std::map<int, double> probabilities;

    void validate(int d) const;

    //! the paper-style distributions for d = 5 and d = 10
    static PruneDistribution reference(int d);
};

struct StudyConfig {
    int d = 5;
    int n = 2000;
    int replicates = 100;
    std::vector<FamilyRotation> family_pool = default_candidates();
    PruneDistribution prune = PruneDistribution::reference(5);
    std::uint64_t seed = 1;
    FitConfig fit;
    int threads = 0; // 0: hardware concurrency
};

//! Random D-vine generation: for tree i the d-i partial-correlation draws
//! come from a Beta((d-i+1)/2, (d-i+1)/2) distribution mapped linearly to
//! [-1, 1] (mean 0, variance 1/(d-i+2)), converted to Kendall's tau through
//! tau = (2/pi) arcsin(rho); each edge's family is drawn uniformly from the
//! pool. A draw whose tau sign the family cannot reach is rotated by 90
//! degrees (or back to 0/180) to accommodate it.
DVineSpec random_dvine(int d, const std::vector<FamilyRotation>& family_pool,
                       Rng& rng);

//! prune each observation to its first d_i components, d_i drawn i.i.d.
//! from dist; entries beyond d_i become missing
CopulaDataset prune(const CopulaDataset& data, const PruneDistribution& dist,
                    std::uint64_t seed);

struct EdgeDeviation {
    int k = 0;
    int l = 0;
    double mean_abs_dtau = 0.0;
    double mean_abs_dlambda_lower = 0.0;
    double mean_abs_dlambda_upper = 0.0;
    double mean_n_used_full = 0.0;
    double mean_n_used_pruned = 0.0;
};

struct StudyResult {
    std::vector<EdgeDeviation> edges; // tree-major order
    int replicates_done = 0;
    int replicates_failed = 0;
};

//! Full-vs-pruned refit study: per replicate draw a vine, simulate n
//! observations, prune them, fit both datasets sequentially, and average
//! the per-edge |tau| and tail-coefficient deviations of the fitted pairs.
//! Deterministic given the seed; replicates run in parallel.
StudyResult run_study(const StudyConfig& config);

} // namespace longvine

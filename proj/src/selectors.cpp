#include "longvine/selectors.hpp"

#include <cmath>
#include <stdexcept>

namespace longvine {

double adjusted_bic(double loglik, const ParamLadder& ladder)
{
    if (ladder.delta_p.size() != ladder.n_at_least.size())
        throw std::invalid_argument("adjusted_bic: ladder length mismatch");
    double penalty = 0.0;
    for (Eigen::Index j = 0; j < ladder.delta_p.size(); ++j) {
        int dp = ladder.delta_p(j);
        if (dp < 0)
            throw std::invalid_argument("adjusted_bic: negative parameter count");
        if (dp == 0)
            continue;
        int nj = ladder.n_at_least(j);
        if (nj <= 0)
            throw std::invalid_argument(
                "adjusted_bic: parameters attributed to measurement "
                + std::to_string(j + 1) + " but no observations reach it");
        penalty += dp * std::log(static_cast<double>(nj));
    }
    return -2.0 * loglik + penalty;
}

double aic(double loglik, int p_total)
{
    if (p_total < 0)
        throw std::invalid_argument("aic: negative parameter count");
    return -2.0 * loglik + 2.0 * p_total;
}

ParamLadder build_ladder(const MarginVector& margins, const DVineSpec& spec,
                         const CopulaDataset& data)
{
    const int d = spec.dim();
    ParamLadder ladder;
    ladder.delta_p = Eigen::VectorXi::Zero(d);
    // observations contributing at measurement j: those with entry j present.
    // Equals the group count N_j = sum_{k >= j} n_k on gap-free data and
    // extends the per-parameter weighting principle to data with gaps.
    ladder.n_at_least = Eigen::VectorXi::Zero(d);
    for (const auto& u : data.observations)
        for (int j = 0; j < d; ++j)
            if (is_present(u(j)))
                ++ladder.n_at_least(j);

    // margins: pooled coefficients (index 0) are shared by every measurement,
    // so they enter at j = 1; per-index margins enter at their own index
    bool pooled = !margins.empty() && margins.front() && margins.front()->index == 0;
    if (pooled) {
        ladder.delta_p(0) +=
            static_cast<int>(margins.front()->covariate_names.size()) + 1;
    } else {
        for (std::size_t slot = 0; slot < margins.size(); ++slot) {
            if (!margins[slot])
                continue;
            if (static_cast<int>(slot) >= d)
                throw std::invalid_argument("build_ladder: margin beyond dim");
            ladder.delta_p(static_cast<int>(slot)) +=
                static_cast<int>(margins[slot]->covariate_names.size()) + 1;
        }
    }

    // edge (k, l) first becomes estimable at measurement l
    for (int l = 2; l <= d; ++l)
        for (int k = 1; k < l; ++k)
            if (spec.pair(k, l).family != CopulaFamily::independence)
                ladder.delta_p(l - 1) += 1;

    return ladder;
}

} // namespace longvine

#include "longvine/margins.hpp"

#include "longvine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace longvine {

namespace {

constexpr double u_min = 1e-10;
constexpr double u_max = 1.0 - 1e-10;

double covariate_value(const Covariates& covariates, const std::string& name)
{
    auto it = covariates.find(name);
    if (it == covariates.end())
        throw std::invalid_argument("missing covariate '" + name + "'");
    return it->second;
}

struct RegressionRows {
    std::vector<double> y;
    std::vector<const Covariates*> covs;
};

// measurements with an observed response at index j (or all indices if j == 0)
RegressionRows gather_rows(const LongitudinalDataset& data, int j)
{
    RegressionRows rows;
    for (const auto& ind : data.individuals) {
        for (std::size_t slot = 0; slot < ind.measurements.size(); ++slot) {
            if (j != 0 && static_cast<int>(slot) + 1 != j)
                continue;
            const auto& m = ind.measurements[slot];
            if (!m || std::isnan(m->y))
                continue;
            rows.y.push_back(m->y);
            rows.covs.push_back(&m->covariates);
        }
    }
    return rows;
}

struct OlsFit {
    Eigen::VectorXd beta;
    double sigma;
    double loglik;
    bool full_rank;
};

OlsFit ols(const RegressionRows& rows, const std::vector<std::string>& names)
{
    const auto n = static_cast<Eigen::Index>(rows.y.size());
    const auto p = static_cast<Eigen::Index>(names.size());
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = rows.y[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        for (Eigen::Index c = 1; c < p; ++c)
            x(i, c) = covariate_value(*rows.covs[static_cast<std::size_t>(i)],
                                      names[static_cast<std::size_t>(c)]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    OlsFit fit;
    fit.full_rank = qr.rank() == p;
    fit.beta = qr.solve(y);
    double rss = (y - x * fit.beta).squaredNorm();
    fit.sigma = std::max(std::sqrt(rss / static_cast<double>(n)), 1e-10);
    fit.loglik = -0.5 * static_cast<double>(n)
                 * (stats::log_2pi + 2.0 * std::log(fit.sigma) + rss
                    / (static_cast<double>(n) * fit.sigma * fit.sigma));
    return fit;
}

double bic_of(const OlsFit& fit, Eigen::Index n, std::size_t n_coef)
{
    // +1 for sigma
    return -2.0 * fit.loglik
           + static_cast<double>(n_coef + 1) * std::log(static_cast<double>(n));
}

MarginalModel forward_select(const RegressionRows& rows, int index,
                             const std::vector<std::string>& candidates,
                             std::vector<std::string>* warnings)
{
    const auto n = static_cast<Eigen::Index>(rows.y.size());
    if (n < 2)
        throw std::invalid_argument("fit_margin: need at least 2 observations "
                                    "at measurement index "
                                    + std::to_string(index));

    std::vector<std::string> selected { "intercept" };
    OlsFit current = ols(rows, selected);
    double current_bic = bic_of(current, n, selected.size());

    std::vector<std::string> remaining = candidates;
    bool improved = true;
    while (improved && !remaining.empty()) {
        improved = false;
        std::size_t best_idx = 0;
        double best_bic = current_bic;
        OlsFit best_fit = current;
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            auto trial = selected;
            trial.push_back(remaining[c]);
            if (n < static_cast<Eigen::Index>(trial.size()) + 1)
                continue; // p + 2 observations required for p covariates
            OlsFit fit = ols(rows, trial);
            if (!fit.full_rank) {
                if (warnings)
                    warnings->push_back("margin " + std::to_string(index)
                                        + ": covariate '" + remaining[c]
                                        + "' dropped (rank-deficient design)");
                continue;
            }
            double bic = bic_of(fit, n, trial.size());
            if (bic < best_bic) {
                best_bic = bic;
                best_idx = c;
                best_fit = fit;
                improved = true;
            }
        }
        if (improved) {
            selected.push_back(remaining[best_idx]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_idx));
            current = best_fit;
            current_bic = best_bic;
        }
    }

    MarginalModel model;
    model.index = index;
    model.covariate_names = selected;
    model.coefficients = current.beta;
    model.sigma = current.sigma;
    return model;
}

} // namespace

double MarginalModel::mean(const Covariates& covariates) const
{
    double mu = coefficients(0);
    for (std::size_t c = 1; c < covariate_names.size(); ++c)
        mu += coefficients(static_cast<Eigen::Index>(c))
              * covariate_value(covariates, covariate_names[c]);
    return mu;
}

MarginalModel fit_margin(const LongitudinalDataset& data, int j,
                         const std::vector<std::string>& candidate_covariates,
                         std::vector<std::string>* warnings)
{
    if (j < 1 || j > data.dim)
        throw std::invalid_argument("fit_margin: index out of range");
    return forward_select(gather_rows(data, j), j, candidate_covariates, warnings);
}

MarginalModel fit_pooled_margin(const LongitudinalDataset& data,
                                const std::vector<std::string>& candidate_covariates,
                                std::vector<std::string>* warnings)
{
    return forward_select(gather_rows(data, 0), 0, candidate_covariates, warnings);
}

double pit(const MarginalModel& model, double y, const Covariates& covariates)
{
    double u = stats::pnorm((y - model.mean(covariates)) / model.sigma);
    return std::clamp(u, u_min, u_max);
}

double inverse_pit(const MarginalModel& model, double u, const Covariates& covariates)
{
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("inverse_pit: u must lie in (0, 1)");
    return model.mean(covariates) + model.sigma * stats::qnorm(u);
}

MarginVector per_index_margins(std::vector<MarginalModel> models, int dim)
{
    MarginVector out(static_cast<std::size_t>(dim));
    for (auto& m : models) {
        if (m.index < 1 || m.index > dim)
            throw std::invalid_argument("per_index_margins: model index out of range");
        out[static_cast<std::size_t>(m.index - 1)] = std::move(m);
    }
    return out;
}

MarginVector pooled_margins(const MarginalModel& model, int dim)
{
    MarginVector out(static_cast<std::size_t>(dim));
    for (int j = 1; j <= dim; ++j) {
        MarginalModel m = model;
        m.index = 0; // shared across measurement indices
        out[static_cast<std::size_t>(j - 1)] = m;
    }
    return out;
}

double margins_loglik(const MarginVector& models, const LongitudinalDataset& data)
{
    stats::KahanSum ll;
    for (const auto& ind : data.individuals) {
        for (std::size_t slot = 0; slot < ind.measurements.size(); ++slot) {
            const auto& m = ind.measurements[slot];
            if (!m || std::isnan(m->y))
                continue;
            if (slot >= models.size() || !models[slot])
                throw std::invalid_argument("margins_loglik: no margin for "
                                            "measurement index "
                                            + std::to_string(slot + 1));
            const MarginalModel& margin = *models[slot];
            double z = (m->y - margin.mean(m->covariates)) / margin.sigma;
            ll.add(-0.5 * (stats::log_2pi + z * z) - std::log(margin.sigma));
        }
    }
    return ll.value();
}

CopulaDataset pit_dataset(const MarginVector& models, const LongitudinalDataset& data)
{
    CopulaDataset out;
    out.dim = data.dim;
    out.observations.reserve(data.individuals.size());
    for (const auto& ind : data.individuals) {
        Eigen::VectorXd u = Eigen::VectorXd::Constant(
            data.dim, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t slot = 0; slot < ind.measurements.size(); ++slot) {
            const auto& m = ind.measurements[slot];
            if (!m || std::isnan(m->y))
                continue;
            if (slot >= models.size() || !models[slot])
                throw std::invalid_argument("pit_dataset: no margin for "
                                            "measurement index "
                                            + std::to_string(slot + 1));
            u(static_cast<Eigen::Index>(slot)) = pit(*models[slot], m->y, m->covariates);
        }
        out.observations.push_back(std::move(u));
    }
    return out;
}

} // namespace longvine

#include "longvine/fit.hpp"

#include "longvine/optimize.hpp"
#include "longvine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace longvine {

const EdgeDiagnostics& FitReport::edge(int k, int l) const
{
    for (const auto& e : edges)
        if (e.k == k && e.l == l)
            return e;
    throw std::invalid_argument("FitReport: no edge (" + std::to_string(k) + ", "
                                + std::to_string(l) + ")");
}

FitReport sequential_fit(const CopulaDataset& data, const FitConfig& config)
{
    const int d = data.dim;
    if (d < 2)
        throw std::invalid_argument("sequential_fit: dataset dimension must be >= 2");
    if (config.candidates.empty())
        throw std::invalid_argument("sequential_fit: empty candidate list");

    const auto n = data.observations.size();
    FitReport report;
    report.spec = DVineSpec(d);
    report.group_dim = d;

    // per-observation pseudo-observation matrices, filled tree by tree
    std::vector<Eigen::MatrixXd> a_mat(n), b_mat(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& u = data.observations[i];
        if (u.size() != d)
            throw std::invalid_argument("sequential_fit: observation dimension "
                                        "mismatch");
        a_mat[i].setConstant(d + 1, d + 1, std::numeric_limits<double>::quiet_NaN());
        b_mat[i] = a_mat[i];
        for (int k = 1; k <= d; ++k) {
            if (is_present(u(k - 1))) {
                a_mat[i](k, k) = u(k - 1);
                b_mat[i](k, k) = u(k - 1);
            }
        }
    }

    int usable_edges = 0;
    for (int t = 1; t <= d - 1; ++t) {
        for (int k = 1; k + t <= d; ++k) {
            const int l = k + t;
            // edge (k, l) is estimable for observations with entries k..l all
            // present; those carry pseudo-observations from the previous tree
            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < n; ++i)
                if (is_present(a_mat[i](k, l - 1)) && is_present(b_mat[i](k + 1, l)))
                    rows.push_back(i);

            EdgeDiagnostics diag;
            diag.k = k;
            diag.l = l;
            diag.n_used = static_cast<int>(rows.size());

            bool truncated = config.truncation_level > 0 && t > config.truncation_level;
            if (truncated) {
                diag.copula = independence_copula();
            } else if (diag.n_used < config.min_edge_observations) {
                diag.copula = independence_copula();
                report.warnings.push_back(
                    "edge (" + std::to_string(k) + "," + std::to_string(l) + "): only "
                    + std::to_string(diag.n_used)
                    + " usable observations, independence imposed");
            } else {
                UvData uv(static_cast<Eigen::Index>(rows.size()), 2);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    uv(static_cast<Eigen::Index>(r), 0) = a_mat[rows[r]](k, l - 1);
                    uv(static_cast<Eigen::Index>(r), 1) = b_mat[rows[r]](k + 1, l);
                }
                auto sel = select_pair(uv, config.candidates, config.criterion,
                                       config.independence_level);
                if (sel.fallback_independence)
                    report.warnings.push_back(
                        "edge (" + std::to_string(k) + "," + std::to_string(l)
                        + "): no sign-compatible candidate, independence imposed");
                diag.copula = sel.copula;
                diag.loglik = sel.loglik;
                ++usable_edges;
            }

            diag.tau_hat = param_to_tau(diag.copula);
            auto td = tail_dependence(diag.copula);
            diag.lambda_lower = td.lower;
            diag.lambda_upper = td.upper;
            report.spec.pair(k, l) = diag.copula;
            report.edges.push_back(diag);

            // propagate pseudo-observations for the next tree
            for (std::size_t i : rows) {
                double a = a_mat[i](k, l - 1);
                double b = b_mat[i](k + 1, l);
                a_mat[i](k, l) = hfunc2(diag.copula, a, b);
                b_mat[i](k, l) = hfunc1(diag.copula, a, b);
            }
        }
    }

    if (usable_edges == 0)
        throw std::invalid_argument("sequential_fit: no edge reaches the minimum "
                                    "number of usable observations");

    report.total_loglik = loglik(report.spec, data).value;
    return report;
}

namespace {

CopulaDataset restrict_group(const CopulaDataset& data, int j)
{
    CopulaDataset g;
    g.dim = j;
    for (const auto& u : data.observations) {
        if (present_count(u) != leading_length(u))
            throw std::invalid_argument("fit_model_a: observations must be gap-free");
        if (leading_length(u) == j)
            g.observations.push_back(u.head(j));
    }
    return g;
}

} // namespace

std::vector<FitReport> fit_model_a(const CopulaDataset& data, const FitConfig& config)
{
    auto sizes = group_sizes(data);
    std::vector<FitReport> reports;
    for (int j = 2; j <= data.dim; ++j) {
        int nj = sizes[static_cast<std::size_t>(j - 1)];
        if (nj == 0)
            continue;
        auto group = restrict_group(data, j);
        if (nj < config.min_edge_observations) {
            FitReport skipped;
            skipped.spec = DVineSpec(j);
            skipped.group_dim = j;
            skipped.warnings.push_back("group " + std::to_string(j) + " skipped: only "
                                       + std::to_string(nj) + " observations");
            reports.push_back(std::move(skipped));
            continue;
        }
        auto rep = sequential_fit(group, config);
        rep.group_dim = j;
        reports.push_back(std::move(rep));
    }
    if (reports.empty())
        throw std::invalid_argument("fit_model_a: no usable groups");
    return reports;
}

JointRefineResult joint_refine(const DVineSpec& spec, const CopulaDataset& data)
{
    const int d = spec.dim();
    std::vector<std::pair<int, int>> free_edges;
    for (int t = 1; t <= d - 1; ++t)
        for (int k = 1; k + t <= d; ++k)
            if (spec.pair(k, k + t).family != CopulaFamily::independence)
                free_edges.emplace_back(k, k + t);

    JointRefineResult result;
    result.spec = spec;
    result.loglik = loglik(spec, data).value;
    if (free_edges.empty())
        return result;

    // optimize in atanh(tau / 0.9999) coordinates; smooth and unconstrained
    const double tau_cap = 0.9999;
    auto to_spec = [&](const Eigen::VectorXd& x) {
        DVineSpec s = spec;
        for (std::size_t e = 0; e < free_edges.size(); ++e) {
            auto [k, l] = free_edges[e];
            double tau = tau_cap * std::tanh(x(static_cast<Eigen::Index>(e)));
            const PairCopula& pc = spec.pair(k, l);
            // keep the sign reachable by the family/rotation
            if (positive_dependence_only(pc.family)) {
                double base = (pc.rotation == Rotation::deg90
                               || pc.rotation == Rotation::deg270)
                                  ? -tau
                                  : tau;
                if (base <= 0.0)
                    return std::optional<DVineSpec>();
            }
            if (tau == 0.0)
                return std::optional<DVineSpec>();
            s.pair(k, l) = tau_to_param(pc.family, pc.rotation, tau);
        }
        return std::optional<DVineSpec>(std::move(s));
    };

    Eigen::VectorXd x0(static_cast<Eigen::Index>(free_edges.size()));
    for (std::size_t e = 0; e < free_edges.size(); ++e) {
        auto [k, l] = free_edges[e];
        double tau = param_to_tau(spec.pair(k, l));
        x0(static_cast<Eigen::Index>(e)) =
            std::atanh(std::clamp(tau / tau_cap, -0.999, 0.999));
    }

    auto objective = [&](const Eigen::VectorXd& x) {
        auto s = to_spec(x);
        if (!s)
            return 1e100;
        double ll = loglik(*s, data).value;
        return std::isfinite(ll) ? -ll : 1e100;
    };

    auto opt = nelder_mead(objective, x0, 0.05, 1e-10);
    if (!opt.converged)
        result.warnings.push_back("joint_refine: optimizer evaluation budget "
                                  "exhausted, keeping best point found");
    if (-opt.fx > result.loglik) {
        auto s = to_spec(opt.x);
        if (s) {
            result.spec = *s;
            result.loglik = -opt.fx;
            result.improved = true;
        }
    } else if (!std::isfinite(opt.fx)) {
        result.warnings.push_back("joint_refine: optimizer failed, sequential "
                                  "estimates kept");
    }
    return result;
}

} // namespace longvine

#include "longvine/simlab.hpp"

#include "longvine/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace longvine {

void PruneDistribution::validate(int d) const
{
    if (probabilities.empty())
        throw std::invalid_argument("PruneDistribution: empty support");
    double total = 0.0;
    for (const auto& [j, p] : probabilities) {
        if (j < 2 || j > d)
            throw std::invalid_argument("PruneDistribution: support must lie in "
                                        "{2, ..., d}");
        if (p < 0.0)
            throw std::invalid_argument("PruneDistribution: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("PruneDistribution: probabilities must sum to 1");
}

PruneDistribution PruneDistribution::reference(int d)
{
    PruneDistribution dist;
    if (d == 5) {
        dist.probabilities = { { 2, 0.20 }, { 3, 0.20 }, { 4, 0.15 }, { 5, 0.45 } };
    } else if (d == 10) {
        dist.probabilities = { { 2, 0.10 }, { 3, 0.10 }, { 4, 0.10 },  { 5, 0.10 },
                               { 6, 0.10 }, { 7, 0.05 }, { 8, 0.05 },  { 9, 0.05 },
                               { 10, 0.35 } };
    } else {
        throw std::invalid_argument("PruneDistribution::reference: only d = 5 "
                                    "and d = 10 are tabulated");
    }
    return dist;
}

namespace {

// toggle the rotation's tau sign class: 0 <-> 90, 180 <-> 270
Rotation toggle_sign(Rotation r)
{
    switch (r) {
    case Rotation::deg0: return Rotation::deg90;
    case Rotation::deg90: return Rotation::deg0;
    case Rotation::deg180: return Rotation::deg270;
    case Rotation::deg270: return Rotation::deg180;
    }
    return r;
}

bool reaches_negative_tau(CopulaFamily f, Rotation r)
{
    if (!positive_dependence_only(f))
        return true;
    return r == Rotation::deg90 || r == Rotation::deg270;
}

bool reaches_positive_tau(CopulaFamily f, Rotation r)
{
    if (!positive_dependence_only(f))
        return true;
    return r == Rotation::deg0 || r == Rotation::deg180;
}

} // namespace

DVineSpec random_dvine(int d, const std::vector<FamilyRotation>& family_pool,
                       Rng& rng)
{
    if (d < 2)
        throw std::invalid_argument("random_dvine: d must be >= 2");
    if (family_pool.empty())
        throw std::invalid_argument("random_dvine: empty family pool");

    DVineSpec spec(d);
    for (int tree = 1; tree <= d - 1; ++tree) {
        int m = d - tree + 1; // 2 * Beta shape
        for (int k = 1; k + tree <= d; ++k) {
            double rho = 2.0 * rng.beta_symmetric_half_integer(m) - 1.0;
            double tau = 2.0 / stats::pi * std::asin(rho);
            tau = std::clamp(tau, -0.99, 0.99);
            auto pick = family_pool[rng.integer(family_pool.size())];
            if (tau == 0.0 || pick.family == CopulaFamily::independence) {
                spec.pair(k, k + tree) = independence_copula();
                continue;
            }
            Rotation rot = pick.rotation;
            if (tau > 0.0 && !reaches_positive_tau(pick.family, rot))
                rot = toggle_sign(rot);
            if (tau < 0.0 && !reaches_negative_tau(pick.family, rot))
                rot = toggle_sign(rot);
            spec.pair(k, k + tree) = tau_to_param(pick.family, rot, tau);
        }
    }
    return spec;
}

CopulaDataset prune(const CopulaDataset& data, const PruneDistribution& dist,
                    std::uint64_t seed)
{
    dist.validate(data.dim);
    for (const auto& u : data.observations)
        if (leading_length(u) != data.dim)
            throw std::invalid_argument("prune: input must be gap-free with all "
                                        "observations of full length");

    Rng rng(seed);
    CopulaDataset out;
    out.dim = data.dim;
    out.observations.reserve(data.observations.size());
    for (const auto& u : data.observations) {
        double uu = rng.uniform();
        double acc = 0.0;
        int di = data.dim;
        for (const auto& [j, p] : dist.probabilities) {
            acc += p;
            if (uu <= acc) {
                di = j;
                break;
            }
        }
        Eigen::VectorXd v = u;
        for (int j = di; j < data.dim; ++j)
            v(j) = std::numeric_limits<double>::quiet_NaN();
        out.observations.push_back(std::move(v));
    }
    return out;
}

StudyResult run_study(const StudyConfig& config)
{
    config.prune.validate(config.d);
    if (config.replicates < 1)
        throw std::invalid_argument("run_study: need at least one replicate");

    const int n_edges = config.d * (config.d - 1) / 2;
    struct ReplicateOutcome {
        bool ok = false;
        Eigen::ArrayXd dtau, dll, dlu, nf, np;
    };
    std::vector<ReplicateOutcome> outcomes(
        static_cast<std::size_t>(config.replicates));

    auto one_replicate = [&](int r) {
        ReplicateOutcome out;
        out.dtau.setZero(n_edges);
        out.dll.setZero(n_edges);
        out.dlu.setZero(n_edges);
        out.nf.setZero(n_edges);
        out.np.setZero(n_edges);
        try {
            Rng gen = Rng::substream(config.seed, 3 * static_cast<std::uint64_t>(r));
            DVineSpec truth = random_dvine(config.d, config.family_pool, gen);
            auto full = simulate(
                truth, config.n,
                Rng::derive_seed(config.seed, 3 * static_cast<std::uint64_t>(r) + 1));
            auto pruned = prune(
                full, config.prune,
                Rng::derive_seed(config.seed, 3 * static_cast<std::uint64_t>(r) + 2));

            auto fit_full = sequential_fit(full, config.fit);
            auto fit_pruned = sequential_fit(pruned, config.fit);

            for (int e = 0; e < n_edges; ++e) {
                const auto& ef = fit_full.edges[static_cast<std::size_t>(e)];
                const auto& ep = fit_pruned.edges[static_cast<std::size_t>(e)];
                out.dtau(e) = std::abs(ep.tau_hat - ef.tau_hat);
                out.dll(e) = std::abs(ep.lambda_lower - ef.lambda_lower);
                out.dlu(e) = std::abs(ep.lambda_upper - ef.lambda_upper);
                out.nf(e) = ef.n_used;
                out.np(e) = ep.n_used;
            }
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;
        }
        outcomes[static_cast<std::size_t>(r)] = std::move(out);
    };

    unsigned n_threads = config.threads > 0
                             ? static_cast<unsigned>(config.threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads,
                                   static_cast<unsigned>(config.replicates));
    if (n_threads <= 1) {
        for (int r = 0; r < config.replicates; ++r)
            one_replicate(r);
    } else {
        std::atomic<int> next { 0 };
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back([&]() {
                int r;
                while ((r = next.fetch_add(1)) < config.replicates)
                    one_replicate(r);
            });
        for (auto& th : pool)
            th.join();
    }

    StudyResult result;
    Eigen::ArrayXd dtau = Eigen::ArrayXd::Zero(n_edges);
    Eigen::ArrayXd dll = Eigen::ArrayXd::Zero(n_edges);
    Eigen::ArrayXd dlu = Eigen::ArrayXd::Zero(n_edges);
    Eigen::ArrayXd nf = Eigen::ArrayXd::Zero(n_edges);
    Eigen::ArrayXd np = Eigen::ArrayXd::Zero(n_edges);
    for (const auto& out : outcomes) {
        if (!out.ok) {
            ++result.replicates_failed;
            continue;
        }
        ++result.replicates_done;
        dtau += out.dtau;
        dll += out.dll;
        dlu += out.dlu;
        nf += out.nf;
        np += out.np;
    }
    if (result.replicates_done == 0)
        throw std::runtime_error("run_study: every replicate failed");

    double denom = static_cast<double>(result.replicates_done);
    int e = 0;
    for (int t = 1; t <= config.d - 1; ++t) {
        for (int k = 1; k + t <= config.d; ++k, ++e) {
            EdgeDeviation dev;
            dev.k = k;
            dev.l = k + t;
            dev.mean_abs_dtau = dtau(e) / denom;
            dev.mean_abs_dlambda_lower = dll(e) / denom;
            dev.mean_abs_dlambda_upper = dlu(e) / denom;
            dev.mean_n_used_full = nf(e) / denom;
            dev.mean_n_used_pruned = np(e) / denom;
            result.edges.push_back(dev);
        }
    }
    return result;
}

} // namespace longvine

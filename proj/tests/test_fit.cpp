#include "longvine/fit.hpp"

#include "longvine/random.hpp"
#include "longvine/simlab.hpp"
#include "longvine/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace longvine;

namespace {

DVineSpec truncated_spec_d4()
{
    DVineSpec spec(4); // trees 2+ stay independence
    spec.pair(1, 2) = tau_to_param(CopulaFamily::gumbel, Rotation::deg0, 0.5);
    spec.pair(2, 3) = tau_to_param(CopulaFamily::clayton, Rotation::deg0, 0.45);
    spec.pair(3, 4) = tau_to_param(CopulaFamily::frank, Rotation::deg0, 0.4);
    return spec;
}

DVineSpec mixed_spec_d5()
{
    DVineSpec spec(5);
    spec.pair(1, 2) = tau_to_param(CopulaFamily::clayton, Rotation::deg0, 0.5);
    spec.pair(2, 3) = tau_to_param(CopulaFamily::gaussian, Rotation::deg0, 0.45);
    spec.pair(3, 4) = tau_to_param(CopulaFamily::gumbel, Rotation::deg0, 0.4);
    spec.pair(4, 5) = tau_to_param(CopulaFamily::frank, Rotation::deg0, 0.45);
    spec.pair(1, 3) = tau_to_param(CopulaFamily::frank, Rotation::deg0, 0.25);
    spec.pair(2, 4) = tau_to_param(CopulaFamily::gaussian, Rotation::deg0, -0.2);
    spec.pair(3, 5) = tau_to_param(CopulaFamily::clayton, Rotation::deg180, 0.2);
    spec.pair(1, 4) = tau_to_param(CopulaFamily::gaussian, Rotation::deg0, 0.15);
    spec.pair(2, 5) = tau_to_param(CopulaFamily::frank, Rotation::deg0, -0.1);
    spec.pair(1, 5) = tau_to_param(CopulaFamily::gaussian, Rotation::deg0, 0.1);
    return spec;
}

} // namespace

TEST_CASE("sequential fit on 1-truncated data sets higher trees to independence")
{
    int independent_edges = 0;
    int higher_edges = 0;
    for (int rep = 0; rep < 10; ++rep) {
        auto data = simulate(truncated_spec_d4(), 2000,
                             100 + static_cast<std::uint64_t>(rep));
        auto report = sequential_fit(data, FitConfig {});
        for (const auto& e : report.edges) {
            if (e.l - e.k >= 2) {
                ++higher_edges;
                independent_edges +=
                    (e.copula.family == CopulaFamily::independence) ? 1 : 0;
            }
        }
    }
    CHECK(independent_edges >= static_cast<int>(0.9 * higher_edges));
}

TEST_CASE("gap-free balanced data reduces to the classical tree-by-tree fit")
{
    auto data = simulate(mixed_spec_d5(), 1500, 55);
    FitConfig config;
    auto report = sequential_fit(data, config);

    // every edge sees every observation
    for (const auto& e : report.edges)
        CHECK(e.n_used == 1500);

    // tree-1 edges must agree with a direct select_pair on the raw columns
    for (int k = 1; k <= 4; ++k) {
        UvData uv(1500, 2);
        for (int i = 0; i < 1500; ++i) {
            uv(i, 0) = data.observations[static_cast<std::size_t>(i)](k - 1);
            uv(i, 1) = data.observations[static_cast<std::size_t>(i)](k);
        }
        auto direct = select_pair(uv, config.candidates, config.criterion,
                                  config.independence_level);
        const auto& e = report.edge(k, k + 1);
        CHECK(e.copula.family == direct.copula.family);
        CHECK(e.copula.theta == doctest::Approx(direct.copula.theta).epsilon(1e-12));
    }
}

TEST_CASE("pruned refit keeps the first edge identical and stays close elsewhere")
{
    auto spec = mixed_spec_d5();
    auto full = simulate(spec, 2000, 77);
    auto pruned = prune(full, PruneDistribution::reference(5), 78);

    // true families supplied: selection restricted to each edge's own family
    FitConfig config;
    config.independence_level = 0.0;
    std::vector<FamilyRotation> pool;
    for (int t = 1; t <= 4; ++t)
        for (int k = 1; k + t <= 5; ++k)
            pool.push_back({ spec.pair(k, k + t).family,
                             spec.pair(k, k + t).rotation });
    config.candidates = pool;

    auto fit_full = sequential_fit(full, config);
    auto fit_pruned = sequential_fit(pruned, config);

    CHECK(fit_pruned.edge(1, 2).tau_hat
          == doctest::Approx(fit_full.edge(1, 2).tau_hat).epsilon(1e-14));
    for (const auto& e : fit_full.edges) {
        double d_tau = std::abs(fit_pruned.edge(e.k, e.l).tau_hat - e.tau_hat);
        CHECK(d_tau < 0.08);
    }

    SUBCASE("edge usage counts follow the pruning distribution")
    {
        // P(d_i >= l) = 1.0 / 0.8 / 0.6 / 0.45 for l = 2..5
        std::vector<double> p_at_least = { 1.0, 0.8, 0.6, 0.45 };
        for (const auto& e : fit_pruned.edges) {
            double expected = 2000.0 * p_at_least[static_cast<std::size_t>(e.l - 2)];
            double sd = std::sqrt(2000.0
                                  * p_at_least[static_cast<std::size_t>(e.l - 2)]
                                  * (1.0 - p_at_least[static_cast<std::size_t>(e.l - 2)]));
            CHECK(std::abs(e.n_used - expected) <= 3.0 * sd + 1e-9);
        }
    }
}

TEST_CASE("edge observation accounting matches a brute-force scan")
{
    auto full = simulate(mixed_spec_d5(), 400, 91);
    // punch random gaps
    Rng rng(17);
    CopulaDataset gappy;
    gappy.dim = 5;
    for (const auto& u : full.observations) {
        Eigen::VectorXd v = u;
        for (int j = 0; j < 5; ++j)
            if (rng.uniform() < 0.25)
                v(j) = std::numeric_limits<double>::quiet_NaN();
        gappy.observations.push_back(v);
    }

    FitConfig config;
    config.min_edge_observations = 5;
    auto report = sequential_fit(gappy, config);
    for (const auto& e : report.edges) {
        int count = 0;
        for (const auto& v : gappy.observations) {
            bool all = true;
            for (int j = e.k; j <= e.l; ++j)
                all = all && is_present(v(j - 1));
            count += all ? 1 : 0;
        }
        CHECK(e.n_used == count);
    }

    SUBCASE("fit is invariant to observation order")
    {
        CopulaDataset shuffled = gappy;
        std::reverse(shuffled.observations.begin(), shuffled.observations.end());
        auto report2 = sequential_fit(shuffled, config);
        for (std::size_t e = 0; e < report.edges.size(); ++e) {
            CHECK(report.edges[e].copula.family == report2.edges[e].copula.family);
            CHECK(report.edges[e].copula.theta
                  == doctest::Approx(report2.edges[e].copula.theta).epsilon(1e-9));
        }
    }
}

TEST_CASE("low-count edges fall back to independence with a warning")
{
    auto data = simulate(truncated_spec_d4(), 30, 5);
    // keep only 4 full-length observations; the rest lose entry 4
    for (std::size_t i = 4; i < data.observations.size(); ++i)
        data.observations[i](3) = std::numeric_limits<double>::quiet_NaN();

    FitConfig config;
    config.min_edge_observations = 10;
    auto report = sequential_fit(data, config);
    CHECK(report.edge(3, 4).copula.family == CopulaFamily::independence);
    CHECK(report.edge(3, 4).n_used == 4);
    CHECK(!report.warnings.empty());
}

TEST_CASE("truncation level forces higher trees to independence")
{
    auto data = simulate(mixed_spec_d5(), 500, 8);
    FitConfig config;
    config.truncation_level = 1;
    auto report = sequential_fit(data, config);
    for (const auto& e : report.edges)
        if (e.l - e.k > 1)
            CHECK(e.copula.family == CopulaFamily::independence);
}

TEST_CASE("sequential fit input validation")
{
    CopulaDataset tiny;
    tiny.dim = 3;
    Eigen::VectorXd u(3);
    u << 0.1, 0.5, 0.9;
    tiny.observations.assign(3, u); // below every edge minimum
    CHECK_THROWS_AS(sequential_fit(tiny, FitConfig {}), std::invalid_argument);

    FitConfig no_candidates;
    no_candidates.candidates.clear();
    CHECK_THROWS_AS(sequential_fit(tiny, no_candidates), std::invalid_argument);
}

TEST_CASE("model A")
{
    SUBCASE("single-group data equals sequential_fit")
    {
        auto data = simulate(truncated_spec_d4(), 300, 33);
        auto reports = fit_model_a(data, FitConfig {});
        REQUIRE(reports.size() == 1);
        auto direct = sequential_fit(data, FitConfig {});
        CHECK(reports[0].total_loglik
              == doctest::Approx(direct.total_loglik).epsilon(1e-12));
    }

    SUBCASE("group logliks sum to the Model A total")
    {
        auto spec2 = DVineSpec(2);
        spec2.pair(1, 2) = tau_to_param(CopulaFamily::frank, Rotation::deg0, 0.5);
        auto spec3 = DVineSpec(3);
        spec3.pair(1, 2) = tau_to_param(CopulaFamily::clayton, Rotation::deg0, 0.6);
        spec3.pair(2, 3) = tau_to_param(CopulaFamily::gumbel, Rotation::deg0, 0.4);
        spec3.pair(1, 3) = independence_copula();

        CopulaDataset data;
        data.dim = 3;
        auto g2 = simulate(spec2, 400, 1);
        auto g3 = simulate(spec3, 400, 2);
        for (const auto& u : g2.observations) {
            Eigen::VectorXd v(3);
            v << u(0), u(1), std::numeric_limits<double>::quiet_NaN();
            data.observations.push_back(v);
        }
        for (const auto& u : g3.observations)
            data.observations.push_back(u);

        auto reports = fit_model_a(data, FitConfig {});
        REQUIRE(reports.size() == 2);
        CHECK(reports[0].group_dim == 2);
        CHECK(reports[1].group_dim == 3);

        double total = 0.0;
        for (const auto& r : reports)
            total += r.total_loglik;
        CHECK(total == doctest::Approx(reports[0].total_loglik
                                       + reports[1].total_loglik));

        // per-group fits recover their own dependence
        CHECK(reports[0].edge(1, 2).tau_hat == doctest::Approx(0.5).epsilon(0.12));
        CHECK(std::abs(reports[0].edge(1, 2).tau_hat - 0.5) < 0.05);
        CHECK(std::abs(reports[1].edge(1, 2).tau_hat - 0.6) < 0.05);
    }

    SUBCASE("gapped observations are rejected")
    {
        CopulaDataset data;
        data.dim = 3;
        Eigen::VectorXd u(3);
        u << 0.2, std::numeric_limits<double>::quiet_NaN(), 0.8;
        data.observations.assign(30, u);
        CHECK_THROWS_AS(fit_model_a(data, FitConfig {}), std::invalid_argument);
    }
}

TEST_CASE("joint refinement")
{
    SUBCASE("all-independence spec is unchanged")
    {
        auto data = simulate(truncated_spec_d4(), 100, 3);
        DVineSpec indep(4);
        auto result = joint_refine(indep, data);
        CHECK(result.loglik == 0.0);
        CHECK_FALSE(result.improved);
    }

    SUBCASE("d = 3 Gaussian vine: joint stays near sequential and never below")
    {
        DVineSpec truth(3);
        truth.pair(1, 2) = PairCopula { CopulaFamily::gaussian, Rotation::deg0, 0.6 };
        truth.pair(2, 3) = PairCopula { CopulaFamily::gaussian, Rotation::deg0, 0.4 };
        truth.pair(1, 3) = PairCopula { CopulaFamily::gaussian, Rotation::deg0, 0.2 };
        auto data = simulate(truth, 2000, 44);

        FitConfig config;
        config.candidates = { { CopulaFamily::gaussian, Rotation::deg0 } };
        config.independence_level = 0.0;
        auto seq = sequential_fit(data, config);
        auto refined = joint_refine(seq.spec, data);

        CHECK(refined.loglik >= seq.total_loglik - 1e-6);
        for (int l = 2; l <= 3; ++l)
            for (int k = 1; k < l; ++k)
                CHECK(std::abs(refined.spec.pair(k, l).theta
                               - seq.spec.pair(k, l).theta)
                      < 0.02);
    }
}

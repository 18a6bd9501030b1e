#include "longvine/io.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace longvine;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path()
               / ("longvine_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("ingest")
{
    SUBCASE("gaps come from absent rows")
    {
        std::istringstream in("id,meas_index,y,age\n"
                              "p1,1,1.5,30\n"
                              "p1,3,2.5,31\n"
                              "p1,4,3.5,32\n");
        auto data = ingest_stream(in);
        CHECK(data.dim == 4);
        REQUIRE(data.individuals.size() == 1);
        const auto& ind = data.individuals[0];
        CHECK(ind.measurements[0].has_value());
        CHECK_FALSE(ind.measurements[1].has_value());
        CHECK(ind.measurements[2].has_value());
        CHECK(ind.measurements[3].has_value());
        CHECK(ind.measurements[2]->y == doctest::Approx(2.5));
        CHECK(ind.measurements[2]->covariates.at("age") == doctest::Approx(31.0));
    }

    SUBCASE("paper-style grouping of nine individuals")
    {
        std::ostringstream src;
        src << "id,meas_index,y\n";
        auto add = [&](const std::string& id, int len) {
            for (int j = 1; j <= len; ++j)
                src << id << "," << j << "," << (0.1 * j) << "\n";
        };
        add("a1", 2);
        add("a2", 2);
        add("a3", 2);
        add("b1", 3);
        add("b2", 3);
        add("c1", 4);
        add("c2", 4);
        add("c3", 4);
        add("c4", 4);
        std::istringstream in(src.str());
        auto data = ingest_stream(in);
        CHECK(data.dim == 4);
        CHECK(data.individuals.size() == 9);
        std::vector<int> n_by_len(5, 0);
        for (const auto& ind : data.individuals) {
            int len = 0;
            while (len < 4 && ind.measurements[static_cast<std::size_t>(len)])
                ++len;
            ++n_by_len[static_cast<std::size_t>(len)];
        }
        CHECK(n_by_len[2] == 3);
        CHECK(n_by_len[3] == 2);
        CHECK(n_by_len[4] == 4);
    }

    SUBCASE("error paths")
    {
        std::istringstream empty("");
        CHECK_THROWS_AS(ingest_stream(empty), std::invalid_argument);

        std::istringstream no_rows("id,meas_index,y\n");
        CHECK_THROWS_AS(ingest_stream(no_rows), std::invalid_argument);

        std::istringstream dup("id,meas_index,y\na,1,0.5\na,1,0.7\n");
        CHECK_THROWS_WITH_AS(ingest_stream(dup),
                             doctest::Contains("duplicate (id, meas_index)"),
                             std::invalid_argument);

        std::istringstream bad_y("id,meas_index,y\na,1,abc\n");
        CHECK_THROWS_AS(ingest_stream(bad_y), std::invalid_argument);

        std::istringstream missing_col("id,y\na,0.5\n");
        CHECK_THROWS_AS(ingest_stream(missing_col), std::invalid_argument);
    }

    SUBCASE("missing y allowed only when requested")
    {
        std::istringstream strict("id,meas_index,y\na,1,NA\n");
        CHECK_THROWS_AS(ingest_stream(strict), std::invalid_argument);
        std::istringstream relaxed("id,meas_index,y,age\na,1,2.0,30\na,2,NA,31\n");
        auto data = ingest_stream(relaxed, ',', true);
        CHECK(std::isnan(data.individuals[0].measurements[1]->y));
        CHECK(data.individuals[0].measurements[1]->covariates.at("age") == 31.0);
    }
}

TEST_CASE("dataset export-ingest roundtrip preserves the data")
{
    TempDir tmp;
    std::istringstream in("id,meas_index,y,x\n"
                          "a,1,1.25,0.5\n"
                          "a,2,2.5,0.25\n"
                          "b,1,-0.75,1.5\n"
                          "b,3,0.125,2.5\n");
    auto data = ingest_stream(in);
    write_dataset(data, tmp.file("roundtrip.csv"));
    auto back = ingest(tmp.file("roundtrip.csv"));
    REQUIRE(back.individuals.size() == data.individuals.size());
    CHECK(back.dim == data.dim);
    for (std::size_t i = 0; i < data.individuals.size(); ++i) {
        CHECK(back.individuals[i].id == data.individuals[i].id);
        for (std::size_t j = 0; j < data.individuals[i].measurements.size(); ++j) {
            const auto& a = data.individuals[i].measurements[j];
            const auto& b = back.individuals[i].measurements[j];
            CHECK(a.has_value() == b.has_value());
            if (a && b) {
                CHECK(a->y == b->y);
                CHECK(a->covariates == b->covariates);
            }
        }
    }
}

TEST_CASE("model file roundtrip")
{
    TempDir tmp;
    FittedModel model { DVineSpec(3), {} };
    model.spec.pair(1, 2) = tau_to_param(CopulaFamily::gumbel, Rotation::deg180, 0.55);
    model.spec.pair(2, 3) = tau_to_param(CopulaFamily::frank, Rotation::deg0, -0.3);
    model.spec.pair(1, 3) = independence_copula();

    MarginalModel m;
    m.covariate_names = { "intercept", "x" };
    m.coefficients = Eigen::Vector2d(1.5, -2.25);
    m.sigma = 0.75;

    SUBCASE("per-index margins")
    {
        std::vector<MarginalModel> list;
        for (int j = 1; j <= 3; ++j) {
            m.index = j;
            m.sigma = 0.5 + 0.25 * j;
            list.push_back(m);
        }
        model.margins = per_index_margins(list, 3);
        write_model(model, tmp.file("model.txt"));
        auto back = read_model(tmp.file("model.txt"));
        CHECK(back.spec.dim() == 3);
        CHECK(back.spec.pair(1, 2).family == CopulaFamily::gumbel);
        CHECK(back.spec.pair(1, 2).rotation == Rotation::deg180);
        CHECK(back.spec.pair(1, 2).theta == model.spec.pair(1, 2).theta);
        CHECK(back.spec.pair(1, 3).family == CopulaFamily::independence);
        for (int j = 1; j <= 3; ++j) {
            const auto& mm = back.margins[static_cast<std::size_t>(j - 1)];
            REQUIRE(mm.has_value());
            CHECK(mm->sigma == 0.5 + 0.25 * j);
            CHECK(mm->coefficients == m.coefficients);
        }
    }

    SUBCASE("pooled margins")
    {
        m.index = 0;
        model.margins = pooled_margins(m, 3);
        write_model(model, tmp.file("model.txt"));
        auto back = read_model(tmp.file("model.txt"));
        REQUIRE(back.margins[0].has_value());
        CHECK(back.margins[0]->index == 0);
        CHECK(back.margins[2]->coefficients == m.coefficients);
    }

    SUBCASE("unknown header is rejected")
    {
        std::ofstream bad(tmp.file("bad.txt"));
        bad << "something-else\n";
        bad.close();
        CHECK_THROWS_AS(read_model(tmp.file("bad.txt")), std::invalid_argument);
    }
}

TEST_CASE("config files")
{
    TempDir tmp;
    std::ofstream cfg(tmp.file("run.cfg"));
    cfg << "# study configuration\n"
        << "d = 5\n"
        << "n = 2000   # sample size\n"
        << "seed = 42\n";
    cfg.close();
    auto kv = read_config(tmp.file("run.cfg"));
    CHECK(kv.at("d") == "5");
    CHECK(kv.at("n") == "2000");
    CHECK(kv.at("seed") == "42");
    CHECK(kv.size() == 3);
}

TEST_CASE("table writer")
{
    TempDir tmp;
    TableWriter table({ "a", "b" });
    table.add_row({ "1", "x" });
    table.add_row({ "2.5", "y" });
    table.write(tmp.file("t.csv"));
    std::ifstream in(tmp.file("t.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b");
    std::getline(in, line);
    CHECK(line == "1,x");
    CHECK_THROWS_AS(table.add_row({ "only-one" }), std::invalid_argument);
}

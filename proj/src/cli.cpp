#include "longvine/cli.hpp"

#include "longvine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

namespace longvine {

namespace {

void ensure_out_dir(const std::string& dir)
{
    if (dir.empty())
        throw std::invalid_argument("output directory must be given");
    std::filesystem::create_directories(dir);
}

std::string join_path(const std::string& dir, const std::string& name)
{
    return (std::filesystem::path(dir) / name).string();
}

std::vector<std::string> all_covariate_names(const LongitudinalDataset& data)
{
    std::set<std::string> names;
    for (const auto& ind : data.individuals)
        for (const auto& m : ind.measurements)
            if (m)
                for (const auto& [name, value] : m->covariates)
                    names.insert(name);
    return { names.begin(), names.end() };
}

// count individuals whose first j measurements all have observed responses
Eigen::VectorXi leading_counts(const LongitudinalDataset& data)
{
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(data.dim);
    for (const auto& ind : data.individuals) {
        int len = 0;
        while (len < static_cast<int>(ind.measurements.size())
               && ind.measurements[static_cast<std::size_t>(len)]
               && !std::isnan(ind.measurements[static_cast<std::size_t>(len)]->y))
            ++len;
        for (int j = 0; j < len; ++j)
            ++counts(j);
    }
    return counts;
}

struct MarginsResult {
    MarginVector margins;
    LongitudinalDataset usable; // measurements without a margin blanked out
    std::vector<std::string> warnings;
};

MarginsResult fit_all_margins(const LongitudinalDataset& data,
                              const std::vector<std::string>& candidates,
                              bool pooled)
{
    MarginsResult result;
    result.usable = data;
    if (pooled) {
        auto model = fit_pooled_margin(data, candidates, &result.warnings);
        result.margins = pooled_margins(model, data.dim);
        return result;
    }
    std::vector<MarginalModel> models;
    for (int j = 1; j <= data.dim; ++j) {
        try {
            models.push_back(fit_margin(data, j, candidates, &result.warnings));
        } catch (const std::invalid_argument&) {
            result.warnings.push_back("margin " + std::to_string(j)
                                      + " skipped: too few observations");
            for (auto& ind : result.usable.individuals)
                ind.measurements[static_cast<std::size_t>(j - 1)].reset();
        }
    }
    result.margins = per_index_margins(std::move(models), data.dim);
    return result;
}

struct ModelCriteria {
    double loglik;
    double aic_value;
    double bic_value;
    int n_parameters;
};

ModelCriteria dvine_criteria(const MarginVector& margins, const FitReport& report,
                             const LongitudinalDataset& data,
                             const CopulaDataset& copula_data)
{
    double ll = margins_loglik(margins, data) + report.total_loglik;
    auto ladder = build_ladder(margins, report.spec, copula_data);
    return { ll, aic(ll, ladder.total_parameters()), adjusted_bic(ll, ladder),
             ladder.total_parameters() };
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err)
{
    for (const auto& w : warnings)
        err << "warning: " << w << "\n";
}

} // namespace

std::vector<FamilyRotation> candidates_from_names(const std::string& names)
{
    std::vector<FamilyRotation> out;
    std::stringstream ss(names);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token.erase(std::remove_if(token.begin(), token.end(), ::isspace),
                    token.end());
        if (token.empty())
            continue;
        auto family = family_from_string(token);
        if (family == CopulaFamily::independence) {
            out.push_back({ family, Rotation::deg0 });
        } else if (positive_dependence_only(family)) {
            for (auto rot : { Rotation::deg0, Rotation::deg90, Rotation::deg180,
                              Rotation::deg270 })
                out.push_back({ family, rot });
        } else {
            out.push_back({ family, Rotation::deg0 });
        }
    }
    if (out.empty())
        throw std::invalid_argument("no copula families given");
    return out;
}

int cmd_fit(const FitCommand& cmd, std::ostream& out, std::ostream& err)
{
    try {
        ensure_out_dir(cmd.out_dir);
        auto data = ingest(cmd.data_path, cmd.delimiter);
        auto candidates = cmd.covariates.empty() ? all_covariate_names(data)
                                                 : cmd.covariates;

        auto margins = fit_all_margins(data, candidates, cmd.pooled_margins);
        print_warnings(margins.warnings, err);

        auto copula_data = pit_dataset(margins.margins, margins.usable);
        auto report = sequential_fit(copula_data, cmd.fit);
        print_warnings(report.warnings, err);

        if (cmd.refine) {
            auto refined = joint_refine(report.spec, copula_data);
            print_warnings(refined.warnings, err);
            report.spec = refined.spec;
            report.total_loglik = refined.loglik;
            for (auto& e : report.edges) {
                e.copula = report.spec.pair(e.k, e.l);
                e.tau_hat = param_to_tau(e.copula);
                auto td = tail_dependence(e.copula);
                e.lambda_lower = td.lower;
                e.lambda_upper = td.upper;
            }
        }

        auto criteria = dvine_criteria(margins.margins, report, margins.usable,
                                       copula_data);

        write_model({ report.spec, margins.margins },
                    join_path(cmd.out_dir, "model.txt"));

        TableWriter edges({ "edge", "k", "l", "family", "rotation", "theta", "tau",
                            "lambda_lower", "lambda_upper", "n_used", "loglik" });
        for (const auto& e : report.edges) {
            std::string id = "c" + std::to_string(e.k) + "," + std::to_string(e.l);
            edges.add_row({ id, std::to_string(e.k), std::to_string(e.l),
                            to_string(e.copula.family), to_string(e.copula.rotation),
                            TableWriter::format(e.copula.theta),
                            TableWriter::format(e.tau_hat),
                            TableWriter::format(e.lambda_lower),
                            TableWriter::format(e.lambda_upper),
                            std::to_string(e.n_used),
                            TableWriter::format(e.loglik) });
        }
        edges.write(join_path(cmd.out_dir, "edges.csv"));

        TableWriter summary({ "key", "value" });
        summary.add_row({ "individuals", std::to_string(data.individuals.size()) });
        summary.add_row({ "dim", std::to_string(data.dim) });
        summary.add_row({ "margins_mode",
                          cmd.pooled_margins ? "pooled" : "per_index" });
        summary.add_row({ "loglik_copula", TableWriter::format(report.total_loglik) });
        summary.add_row(
            { "loglik_total", TableWriter::format(criteria.loglik) });
        summary.add_row({ "aic", TableWriter::format(criteria.aic_value) });
        summary.add_row({ "adjusted_bic", TableWriter::format(criteria.bic_value) });
        summary.add_row({ "n_parameters", std::to_string(criteria.n_parameters) });
        summary.write(join_path(cmd.out_dir, "summary.csv"));

        out << "fitted D-vine on " << data.individuals.size() << " individuals (d = "
            << data.dim << ")\n\n";
        edges.print(out);
        out << "\n";
        summary.print(out);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_predict(const PredictCommand& cmd, std::ostream& out, std::ostream& err)
{
    try {
        ensure_out_dir(cmd.out_dir);
        for (double a : cmd.alphas)
            if (!(a > 0.0 && a < 1.0))
                throw std::invalid_argument("alpha levels must lie in (0, 1)");

        auto model = read_model(cmd.model_path);
        auto data = ingest(cmd.data_path, cmd.delimiter, /*allow_missing_y=*/true);
        const int d = model.spec.dim();
        if (data.dim > d)
            throw std::invalid_argument("history data has measurement indices "
                                        "beyond the fitted model's dimension");

        TableWriter table({ "id", "alpha", "y_predicted" });
        for (const auto& ind : data.individuals) {
            int j = 0;
            while (j < static_cast<int>(ind.measurements.size())
                   && ind.measurements[static_cast<std::size_t>(j)]
                   && !std::isnan(ind.measurements[static_cast<std::size_t>(j)]->y))
                ++j;
            if (j == 0)
                throw std::invalid_argument("individual '" + ind.id
                                            + "': no observed history");
            if (j > d - 1)
                throw std::invalid_argument("individual '" + ind.id
                                            + "': history longer than d - 1");
            for (int rest = j + 1; rest < static_cast<int>(ind.measurements.size());
                 ++rest)
                if (ind.measurements[static_cast<std::size_t>(rest)]
                    && !std::isnan(
                        ind.measurements[static_cast<std::size_t>(rest)]->y))
                    throw std::invalid_argument(
                        "individual '" + ind.id
                        + "': observed measurements must be consecutive from 1");
            const auto& next = ind.measurements[static_cast<std::size_t>(j)];
            if (!next)
                throw std::invalid_argument("individual '" + ind.id
                                            + "': covariates for measurement "
                                            + std::to_string(j + 1) + " are missing");

            Eigen::VectorXd hist(j);
            for (int slot = 0; slot < j; ++slot) {
                const auto& margin = model.margins[static_cast<std::size_t>(slot)];
                if (!margin)
                    throw std::invalid_argument("model has no margin for index "
                                                + std::to_string(slot + 1));
                const auto& m = *ind.measurements[static_cast<std::size_t>(slot)];
                hist(slot) = pit(*margin, m.y, m.covariates);
            }
            const auto& next_margin = model.margins[static_cast<std::size_t>(j)];
            if (!next_margin)
                throw std::invalid_argument("model has no margin for index "
                                            + std::to_string(j + 1));

            for (double alpha : cmd.alphas) {
                double q_u = conditional_quantile(model.spec, hist, alpha);
                double y_hat = inverse_pit(*next_margin, q_u, next->covariates);
                table.add_row({ ind.id, TableWriter::format(alpha),
                                TableWriter::format(y_hat) });
            }
        }
        table.write(join_path(cmd.out_dir, "predictions.csv"));
        table.print(out);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

namespace {

// parameter ladder of a fitted LMM under the same attribution rule as the
// D-vine: shared parameters enter at measurement 1, correlation-lag
// parameters at the first measurement that exposes them
ParamLadder lmm_ladder(const LmmFit& fit, const LongitudinalDataset& data)
{
    const int d = data.dim;
    ParamLadder ladder;
    ladder.delta_p = Eigen::VectorXi::Zero(d);
    ladder.n_at_least = leading_counts(data);

    int at_first = static_cast<int>(fit.spec.beta.size()) + 1 /* tau2 */
                   + 1 /* sigma2 */;
    ladder.delta_p(0) = at_first;
    switch (fit.spec.error.kind) {
    case ErrorKind::iid:
        break;
    case ErrorKind::compound_symmetry:
    case ErrorKind::ar1:
    case ErrorKind::exponential_decay:
        if (d >= 2)
            ladder.delta_p(1) += 1;
        break;
    case ErrorKind::general:
        for (int l = 2; l <= d; ++l)
            ladder.delta_p(l - 1) += l - 1; // one correlation per (k, l), k < l
        break;
    }
    return ladder;
}

} // namespace

int cmd_compare(const CompareCommand& cmd, std::ostream& out, std::ostream& err)
{
    try {
        ensure_out_dir(cmd.out_dir);
        auto data = ingest(cmd.data_path, cmd.delimiter);
        auto covariates = cmd.covariates.empty() ? all_covariate_names(data)
                                                 : cmd.covariates;

        struct Row {
            std::string model;
            bool ok = false;
            std::string note;
            ModelCriteria criteria {};
        };
        std::vector<Row> rows;
        bool any_lmm = false;
        bool any_failed = false;

        for (const auto& name : cmd.models) {
            Row row;
            row.model = name;
            try {
                if (name.rfind("lmm_", 0) == 0) {
                    any_lmm = true;
                    auto kind = error_kind_from_string(name.substr(4));
                    auto fit = lmm_fit(data, kind, covariates);
                    print_warnings(fit.warnings, err);
                    auto ladder = lmm_ladder(fit, data);
                    row.criteria = { fit.loglik, aic(fit.loglik, fit.n_parameters),
                                     adjusted_bic(fit.loglik, ladder),
                                     fit.n_parameters };
                    row.ok = true;
                } else if (name == "gaussian_dvine" || name == "general_dvine") {
                    auto margins = fit_all_margins(data, covariates,
                                                   cmd.pooled_margins);
                    print_warnings(margins.warnings, err);
                    auto copula_data = pit_dataset(margins.margins, margins.usable);
                    FitConfig config = cmd.fit;
                    if (name == "gaussian_dvine")
                        config.candidates = { { CopulaFamily::gaussian,
                                                Rotation::deg0 } };
                    auto report = sequential_fit(copula_data, config);
                    print_warnings(report.warnings, err);
                    row.criteria = dvine_criteria(margins.margins, report,
                                                  margins.usable, copula_data);
                    row.ok = true;
                } else {
                    throw std::invalid_argument("unknown model '" + name + "'");
                }
            } catch (const std::exception& e) {
                row.note = e.what();
                any_failed = true;
                err << "error: model " << name << " failed: " << e.what() << "\n";
            }
            rows.push_back(std::move(row));
        }

        double best_ll = -std::numeric_limits<double>::infinity();
        double best_aic = std::numeric_limits<double>::infinity();
        double best_bic = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) {
            if (!r.ok)
                continue;
            best_ll = std::max(best_ll, r.criteria.loglik);
            best_aic = std::min(best_aic, r.criteria.aic_value);
            best_bic = std::min(best_bic, r.criteria.bic_value);
        }

        TableWriter table({ "model", "loglik", "aic", "adjusted_bic",
                            "n_parameters", "note" });
        for (const auto& r : rows) {
            if (!r.ok) {
                table.add_row({ r.model, "", "", "", "", "failed: " + r.note });
                continue;
            }
            auto mark = [](double value, double best, bool lower_better) {
                bool is_best = lower_better ? value <= best : value >= best;
                return TableWriter::format(value) + (is_best ? "*" : "");
            };
            table.add_row({ r.model, mark(r.criteria.loglik, best_ll, false),
                            mark(r.criteria.aic_value, best_aic, true),
                            mark(r.criteria.bic_value, best_bic, true),
                            std::to_string(r.criteria.n_parameters), "" });
        }
        table.write(join_path(cmd.out_dir, "comparison.csv"));
        table.print(out);
        if (any_lmm)
            err << "note: the adjusted BIC applies to linear mixed models only "
                   "when each covariate enters a single marginal regression\n";
        return any_failed ? 1 : 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_contour(const ContourCommand& cmd, std::ostream& out, std::ostream& err)
{
    try {
        ensure_out_dir(cmd.out_dir);
        if (cmd.grid < 2)
            throw std::invalid_argument("grid size must be at least 2");
        auto model = read_model(cmd.model_path);
        if (!(1 <= cmd.k && cmd.k < cmd.l && cmd.l <= model.spec.dim()))
            throw std::invalid_argument("unknown edge (" + std::to_string(cmd.k)
                                        + ", " + std::to_string(cmd.l) + ")");
        const PairCopula& pc = model.spec.pair(cmd.k, cmd.l);

        TableWriter table({ "z1", "z2", "density" });
        for (int i = 0; i < cmd.grid; ++i) {
            double z1 = -3.0 + 6.0 * i / (cmd.grid - 1.0);
            for (int j = 0; j < cmd.grid; ++j) {
                double z2 = -3.0 + 6.0 * j / (cmd.grid - 1.0);
                double value = pdf(pc, stats::pnorm(z1), stats::pnorm(z2))
                               * stats::dnorm(z1) * stats::dnorm(z2);
                table.add_row({ TableWriter::format(z1), TableWriter::format(z2),
                                TableWriter::format(value) });
            }
        }
        table.write(join_path(cmd.out_dir, "contour.csv"));
        out << "wrote " << cmd.grid << "x" << cmd.grid
            << " normal-scores density grid for edge c" << cmd.k << ","
            << cmd.l << " (" << to_string(pc.family) << ")\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

StudyConfig parse_study_config(const std::map<std::string, std::string>& kv)
{
    StudyConfig config;
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto v = get("d"))
        config.d = std::stoi(*v);
    if (auto v = get("n"))
        config.n = std::stoi(*v);
    if (auto v = get("replicates"))
        config.replicates = std::stoi(*v);
    if (auto v = get("seed"))
        config.seed = std::stoull(*v);
    if (auto v = get("threads"))
        config.threads = std::stoi(*v);
    if (auto v = get("families")) {
        config.family_pool = candidates_from_names(*v);
        config.fit.candidates = config.family_pool;
    }
    if (auto v = get("min_edge_observations"))
        config.fit.min_edge_observations = std::stoi(*v);
    if (auto v = get("independence_level"))
        config.fit.independence_level = std::stod(*v);
    if (auto v = get("criterion")) {
        if (*v == "bic")
            config.fit.criterion = SelectionCriterion::bic;
        else if (*v == "aic")
            config.fit.criterion = SelectionCriterion::aic;
        else if (*v == "loglik")
            config.fit.criterion = SelectionCriterion::loglik;
        else
            throw std::invalid_argument("unknown criterion '" + *v + "'");
    }
    if (auto v = get("prune"); v && *v != "reference") {
        PruneDistribution dist;
        std::stringstream ss(*v);
        std::string token;
        while (std::getline(ss, token, ',')) {
            auto colon = token.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("prune entries must look like "
                                            "'length:probability'");
            dist.probabilities[std::stoi(token.substr(0, colon))] =
                std::stod(token.substr(colon + 1));
        }
        config.prune = dist;
    } else {
        config.prune = PruneDistribution::reference(config.d);
    }
    config.prune.validate(config.d);
    return config;
}

int cmd_study(const StudyCommand& cmd, std::ostream& out, std::ostream& err)
{
    try {
        ensure_out_dir(cmd.out_dir);
        auto config = parse_study_config(read_config(cmd.config_path));
        auto result = run_study(config);

        TableWriter table({ "edge", "k", "l", "delta_tau", "delta_lambda_lower",
                            "delta_lambda_upper", "n_used_full", "n_used_pruned" });
        for (const auto& e : result.edges) {
            std::string id = "c" + std::to_string(e.k) + "," + std::to_string(e.l);
            table.add_row({ id, std::to_string(e.k), std::to_string(e.l),
                            TableWriter::format(e.mean_abs_dtau),
                            TableWriter::format(e.mean_abs_dlambda_lower),
                            TableWriter::format(e.mean_abs_dlambda_upper),
                            TableWriter::format(e.mean_n_used_full),
                            TableWriter::format(e.mean_n_used_pruned) });
        }
        table.write(join_path(cmd.out_dir, "study.csv"));
        table.print(out);
        out << "\nreplicates: " << result.replicates_done << " done, "
            << result.replicates_failed << " failed\n";
        if (result.replicates_failed > 0)
            err << "warning: " << result.replicates_failed
                << " replicates failed and were excluded\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace longvine

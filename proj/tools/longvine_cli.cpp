#include "longvine/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

using namespace longvine;

// apply config-file values first, CLI flags override afterwards
void apply_fit_config(const std::map<std::string, std::string>& kv, FitConfig& fit,
                      bool* pooled, bool* refine)
{
    if (auto it = kv.find("candidates"); it != kv.end())
        fit.candidates = candidates_from_names(it->second);
    if (auto it = kv.find("independence_level"); it != kv.end())
        fit.independence_level = std::stod(it->second);
    if (auto it = kv.find("criterion"); it != kv.end()) {
        if (it->second == "bic")
            fit.criterion = SelectionCriterion::bic;
        else if (it->second == "aic")
            fit.criterion = SelectionCriterion::aic;
        else if (it->second == "loglik")
            fit.criterion = SelectionCriterion::loglik;
        else
            throw CLI::ValidationError("criterion", "unknown criterion");
    }
    if (auto it = kv.find("truncation_level"); it != kv.end())
        fit.truncation_level = std::stoi(it->second);
    if (auto it = kv.find("min_edge_observations"); it != kv.end())
        fit.min_edge_observations = std::stoi(it->second);
    if (pooled)
        if (auto it = kv.find("pooled_margins"); it != kv.end())
            *pooled = (it->second == "true" || it->second == "1");
    if (refine)
        if (auto it = kv.find("joint_refine"); it != kv.end())
            *refine = (it->second == "true" || it->second == "1");
}

SelectionCriterion parse_criterion(const std::string& name)
{
    if (name == "bic")
        return SelectionCriterion::bic;
    if (name == "aic")
        return SelectionCriterion::aic;
    if (name == "loglik")
        return SelectionCriterion::loglik;
    throw CLI::ValidationError("criterion", "expected bic, aic or loglik");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "D-vine copula models for unbalanced repeated measurements" };
    app.require_subcommand(1);

    // ---- fit ----
    FitCommand fit_cmd;
    std::string fit_config_path, fit_criterion = "bic", fit_families;
    auto* fit_sub = app.add_subcommand("fit", "fit margins and a D-vine copula");
    fit_sub->add_option("--data", fit_cmd.data_path, "long-format data file")
        ->required();
    fit_sub->add_option("--out", fit_cmd.out_dir, "output directory")->required();
    fit_sub->add_option("--config", fit_config_path, "key-value config file");
    fit_sub->add_option("--delim", fit_cmd.delimiter, "field delimiter");
    fit_sub->add_option("--covariates", fit_cmd.covariates,
                        "candidate covariates (default: all columns)")
        ->delimiter(',');
    auto* fit_pooled =
        fit_sub->add_flag("--pooled-margins", fit_cmd.pooled_margins,
                          "one regression margin shared by all measurements");
    auto* fit_refine = fit_sub->add_flag("--joint-refine", fit_cmd.refine,
                                         "jointly re-optimize edge parameters");
    auto* fit_fams = fit_sub->add_option("--families", fit_families,
                                         "comma-separated candidate families");
    auto* fit_crit =
        fit_sub->add_option("--criterion", fit_criterion, "bic, aic or loglik");
    auto* fit_alpha = fit_sub->add_option("--indep-level",
                                          fit_cmd.fit.independence_level,
                                          "independence test level (0 disables)");
    auto* fit_trunc = fit_sub->add_option("--truncate", fit_cmd.fit.truncation_level,
                                          "truncation tree level (0: none)");
    auto* fit_min = fit_sub->add_option("--min-edge-obs",
                                        fit_cmd.fit.min_edge_observations,
                                        "minimum usable observations per edge");

    // ---- predict ----
    PredictCommand predict_cmd;
    auto* predict_sub =
        app.add_subcommand("predict", "conditional quantiles of the next "
                                      "measurement");
    predict_sub->add_option("--model", predict_cmd.model_path, "fitted model file")
        ->required();
    predict_sub
        ->add_option("--data", predict_cmd.data_path,
                     "history file (y may be NA on the next-index row)")
        ->required();
    predict_sub->add_option("--out", predict_cmd.out_dir, "output directory")
        ->required();
    predict_sub->add_option("--delim", predict_cmd.delimiter, "field delimiter");
    predict_sub->add_option("--alphas", predict_cmd.alphas, "quantile levels")
        ->delimiter(',');

    // ---- compare ----
    CompareCommand compare_cmd;
    std::string compare_config_path, compare_criterion = "bic", compare_families;
    auto* compare_sub =
        app.add_subcommand("compare", "fit several models and tabulate criteria");
    compare_sub->add_option("--data", compare_cmd.data_path, "long-format data file")
        ->required();
    compare_sub->add_option("--out", compare_cmd.out_dir, "output directory")
        ->required();
    compare_sub->add_option("--config", compare_config_path, "key-value config file");
    compare_sub->add_option("--delim", compare_cmd.delimiter, "field delimiter");
    compare_sub
        ->add_option("--models", compare_cmd.models,
                     "lmm_iid, lmm_cs, lmm_ar1, lmm_expdecay, lmm_general, "
                     "gaussian_dvine, general_dvine")
        ->delimiter(',');
    compare_sub->add_option("--covariates", compare_cmd.covariates,
                            "covariates (default: all columns)")
        ->delimiter(',');
    auto* compare_per_index =
        compare_sub->add_flag("--per-index-margins",
                              "fit one margin per measurement index instead of "
                              "a pooled one");
    auto* compare_fams = compare_sub->add_option(
        "--families", compare_families, "candidate families for general_dvine");
    auto* compare_crit = compare_sub->add_option("--criterion", compare_criterion,
                                                 "bic, aic or loglik");

    // ---- contour ----
    ContourCommand contour_cmd;
    std::vector<int> contour_edge { 1, 2 };
    auto* contour_sub = app.add_subcommand(
        "contour", "normal-scores density grid of a fitted pair copula");
    contour_sub->add_option("--model", contour_cmd.model_path, "fitted model file")
        ->required();
    contour_sub->add_option("--out", contour_cmd.out_dir, "output directory")
        ->required();
    contour_sub->add_option("--edge", contour_edge, "edge indices k,l")
        ->delimiter(',')
        ->expected(2);
    contour_sub->add_option("--grid", contour_cmd.grid, "grid points per axis");

    // ---- study ----
    StudyCommand study_cmd;
    auto* study_sub = app.add_subcommand(
        "study", "full-vs-pruned sequential-fit deviation study");
    study_sub->add_option("--config", study_cmd.config_path, "study config file")
        ->required();
    study_sub->add_option("--out", study_cmd.out_dir, "output directory")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_sub->parsed()) {
            if (!fit_config_path.empty()) {
                // config file fills anything the command line did not set
                auto kv = read_config(fit_config_path);
                bool pooled_file = fit_cmd.pooled_margins;
                bool refine_file = fit_cmd.refine;
                FitConfig file_fit = fit_cmd.fit;
                apply_fit_config(kv, file_fit, &pooled_file, &refine_file);
                if (!*fit_alpha)
                    fit_cmd.fit.independence_level = file_fit.independence_level;
                if (!*fit_trunc)
                    fit_cmd.fit.truncation_level = file_fit.truncation_level;
                if (!*fit_min)
                    fit_cmd.fit.min_edge_observations = file_fit.min_edge_observations;
                if (!*fit_crit)
                    fit_cmd.fit.criterion = file_fit.criterion;
                if (!*fit_fams)
                    fit_cmd.fit.candidates = file_fit.candidates;
                if (!*fit_pooled)
                    fit_cmd.pooled_margins = pooled_file;
                if (!*fit_refine)
                    fit_cmd.refine = refine_file;
            }
            if (*fit_crit)
                fit_cmd.fit.criterion = parse_criterion(fit_criterion);
            if (*fit_fams)
                fit_cmd.fit.candidates = candidates_from_names(fit_families);
            return cmd_fit(fit_cmd, std::cout, std::cerr);
        }
        if (predict_sub->parsed())
            return cmd_predict(predict_cmd, std::cout, std::cerr);
        if (compare_sub->parsed()) {
            if (!compare_config_path.empty()) {
                auto kv = read_config(compare_config_path);
                bool pooled_file = compare_cmd.pooled_margins;
                FitConfig file_fit = compare_cmd.fit;
                apply_fit_config(kv, file_fit, &pooled_file, nullptr);
                if (!*compare_crit)
                    compare_cmd.fit.criterion = file_fit.criterion;
                if (!*compare_fams)
                    compare_cmd.fit.candidates = file_fit.candidates;
                if (!*compare_per_index)
                    compare_cmd.pooled_margins = pooled_file;
            }
            if (*compare_crit)
                compare_cmd.fit.criterion = parse_criterion(compare_criterion);
            if (*compare_fams)
                compare_cmd.fit.candidates = candidates_from_names(compare_families);
            if (*compare_per_index)
                compare_cmd.pooled_margins = false;
            return cmd_compare(compare_cmd, std::cout, std::cerr);
        }
        if (contour_sub->parsed()) {
            contour_cmd.k = contour_edge.at(0);
            contour_cmd.l = contour_edge.at(1);
            return cmd_contour(contour_cmd, std::cout, std::cerr);
        }
        if (study_sub->parsed())
            return cmd_study(study_cmd, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

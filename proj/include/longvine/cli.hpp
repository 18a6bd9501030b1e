#pragma once

#include "longvine/fit.hpp"
#include "longvine/io.hpp"
#include "longvine/lmm.hpp"
#include "longvine/margins.hpp"
#include "longvine/selectors.hpp"
#include "longvine/simlab.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace longvine {

//! Command implementations behind the longvine executable. Each returns a
//! process exit status: 0 on success (warnings allowed), nonzero when an
//! error occurred. Human-readable tables go to `out`, machine-readable
//! delimited files into the command's output directory.

struct FitCommand {
    std::string data_path;
    std::string out_dir;
    char delimiter = ',';
    std::vector<std::string> covariates; // empty: every data column
    bool pooled_margins = false;
    bool refine = false;
    FitConfig fit;
};

int cmd_fit(const FitCommand& cmd, std::ostream& out, std::ostream& err);

struct PredictCommand {
    std::string model_path;
    std::string data_path; // long format; y may be NA on the next-index row
    std::string out_dir;
    char delimiter = ',';
    std::vector<double> alphas = { 0.05, 0.5, 0.95 };
};

int cmd_predict(const PredictCommand& cmd, std::ostream& out, std::ostream& err);

struct CompareCommand {
    std::string data_path;
    std::string out_dir;
    char delimiter = ',';
    // any of: lmm_iid, lmm_cs, lmm_ar1, lmm_expdecay, lmm_general,
    // gaussian_dvine, general_dvine
    std::vector<std::string> models = { "lmm_ar1", "gaussian_dvine",
                                        "general_dvine" };
    std::vector<std::string> covariates;
    bool pooled_margins = true;
    FitConfig fit;
};

int cmd_compare(const CompareCommand& cmd, std::ostream& out, std::ostream& err);

struct ContourCommand {
    std::string model_path;
    std::string out_dir;
    int k = 1;
    int l = 2;
    int grid = 50;
};

int cmd_contour(const ContourCommand& cmd, std::ostream& out, std::ostream& err);

struct StudyCommand {
    std::string config_path;
    std::string out_dir;
};

int cmd_study(const StudyCommand& cmd, std::ostream& out, std::ostream& err);

//! parse a study configuration from flat key-value text
StudyConfig parse_study_config(const std::map<std::string, std::string>& kv);

//! candidate list for a comma-separated family list (rotations included
//! for the asymmetric families)
std::vector<FamilyRotation> candidates_from_names(const std::string& names);

} // namespace longvine

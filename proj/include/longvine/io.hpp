#pragma once

#include "longvine/dvine.hpp"
#include "longvine/margins.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace longvine {

//! Long-format delimited ingestion. Required header columns: id,
//! meas_index (1-based), y; every other column is a covariate. A missing
//! measurement is simply an absent row. Individuals are ordered by id.
//! With allow_missing_y, an empty or "NA" y marks a covariates-only row
//! (used to supply the next measurement's covariates for prediction).
LongitudinalDataset ingest(const std::string& path, char delimiter = ',',
                           bool allow_missing_y = false);
LongitudinalDataset ingest_stream(std::istream& in, char delimiter = ',',
                                  bool allow_missing_y = false);

//! long-format export; inverse of ingest up to numeric formatting
void write_dataset(const LongitudinalDataset& data, const std::string& path,
                   char delimiter = ',');

//! fitted model document: margins (mode, index, sigma, coefficients) and
//! edges (k, l, family, rotation, theta); plain text, versioned
struct FittedModel {
    DVineSpec spec { 2 };
    MarginVector margins;
};

void write_model(const FittedModel& model, const std::string& path);
FittedModel read_model(const std::string& path);

//! flat key-value configuration file: one `key = value` per line,
//! '#' starts a comment
std::map<std::string, std::string> read_config(const std::string& path);

//! delimited table writer with fixed formatting (deterministic output)
class TableWriter {
public:
    TableWriter(std::vector<std::string> columns, char delimiter = ',');

    void add_row(const std::vector<std::string>& cells);
    void write(const std::string& path) const;
    void print(std::ostream& out) const; // aligned human-readable form

    static std::string format(double x);

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    char delimiter_;
};

} // namespace longvine

#include "longvine/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace longvine {

namespace {

std::vector<std::string> split(const std::string& line, char delimiter)
{
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delimiter))
        out.push_back(cell);
    if (!line.empty() && line.back() == delimiter)
        out.emplace_back();
    return out;
}

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, int row, const std::string& column)
{
    std::string t = trim(cell);
    try {
        std::size_t pos = 0;
        double v = std::stod(t, &pos);
        if (pos != t.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("row " + std::to_string(row)
                                    + ": non-numeric value '" + t + "' in column '"
                                    + column + "'");
    }
}

bool is_missing_cell(const std::string& cell)
{
    std::string t = trim(cell);
    return t.empty() || t == "NA" || t == "na" || t == "NaN" || t == "nan";
}

} // namespace

LongitudinalDataset ingest(const std::string& path, char delimiter,
                           bool allow_missing_y)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open data file: " + path);
    return ingest_stream(in, delimiter, allow_missing_y);
}

LongitudinalDataset ingest_stream(std::istream& in, char delimiter,
                                  bool allow_missing_y)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("ingest: empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();

    auto header = split(line, delimiter);
    int id_col = -1, idx_col = -1, y_col = -1;
    std::vector<std::pair<int, std::string>> covariate_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string name = trim(header[c]);
        if (name == "id")
            id_col = static_cast<int>(c);
        else if (name == "meas_index")
            idx_col = static_cast<int>(c);
        else if (name == "y")
            y_col = static_cast<int>(c);
        else
            covariate_cols.emplace_back(static_cast<int>(c), name);
    }
    if (id_col < 0 || idx_col < 0 || y_col < 0)
        throw std::invalid_argument("ingest: header must contain columns "
                                    "'id', 'meas_index' and 'y'");

    std::map<std::string, std::map<int, std::pair<Measurement, int>>> by_id;
    int row = 1;
    int max_index = 0;
    bool any_rows = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        any_rows = true;
        auto cells = split(line, delimiter);
        if (cells.size() != header.size())
            throw std::invalid_argument("ingest: row " + std::to_string(row)
                                        + " has " + std::to_string(cells.size())
                                        + " cells, expected "
                                        + std::to_string(header.size()));
        std::string id = trim(cells[static_cast<std::size_t>(id_col)]);
        double idx_val = parse_double(cells[static_cast<std::size_t>(idx_col)], row,
                                      "meas_index");
        int meas_index = static_cast<int>(idx_val);
        if (meas_index < 1 || idx_val != meas_index)
            throw std::invalid_argument("ingest: row " + std::to_string(row)
                                        + ": meas_index must be a positive integer");

        Measurement m;
        const std::string& y_cell = cells[static_cast<std::size_t>(y_col)];
        if (allow_missing_y && is_missing_cell(y_cell))
            m.y = std::numeric_limits<double>::quiet_NaN();
        else
            m.y = parse_double(y_cell, row, "y");
        for (const auto& [c, name] : covariate_cols)
            m.covariates[name] = parse_double(cells[static_cast<std::size_t>(c)],
                                              row, name);

        auto [it, inserted] = by_id[id].try_emplace(meas_index,
                                                    std::make_pair(std::move(m), row));
        if (!inserted)
            throw std::invalid_argument(
                "ingest: duplicate (id, meas_index) = (" + id + ", "
                + std::to_string(meas_index) + ") at rows "
                + std::to_string(it->second.second) + " and " + std::to_string(row));
        max_index = std::max(max_index, meas_index);
    }
    if (!any_rows)
        throw std::invalid_argument("ingest: no data rows");

    LongitudinalDataset data;
    data.dim = max_index;
    for (auto& [id, meas] : by_id) { // std::map iterates ids in sorted order
        Individual ind;
        ind.id = id;
        ind.measurements.resize(static_cast<std::size_t>(max_index));
        for (auto& [j, m_row] : meas)
            ind.measurements[static_cast<std::size_t>(j - 1)] = std::move(m_row.first);
        data.individuals.push_back(std::move(ind));
    }
    return data;
}

void write_dataset(const LongitudinalDataset& data, const std::string& path,
                   char delimiter)
{
    // collect covariate names in deterministic order
    std::vector<std::string> covariates;
    for (const auto& ind : data.individuals)
        for (const auto& m : ind.measurements)
            if (m)
                for (const auto& [name, value] : m->covariates)
                    if (std::find(covariates.begin(), covariates.end(), name)
                        == covariates.end())
                        covariates.push_back(name);
    std::sort(covariates.begin(), covariates.end());

    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("cannot open output file: " + path);
    out << "id" << delimiter << "meas_index" << delimiter << "y";
    for (const auto& c : covariates)
        out << delimiter << c;
    out << "\n";
    for (const auto& ind : data.individuals) {
        for (std::size_t slot = 0; slot < ind.measurements.size(); ++slot) {
            const auto& m = ind.measurements[slot];
            if (!m)
                continue;
            out << ind.id << delimiter << (slot + 1) << delimiter;
            if (std::isnan(m->y))
                out << "NA";
            else
                out << TableWriter::format(m->y);
            for (const auto& c : covariates) {
                auto it = m->covariates.find(c);
                out << delimiter
                    << (it == m->covariates.end() ? "0"
                                                  : TableWriter::format(it->second));
            }
            out << "\n";
        }
    }
}

void write_model(const FittedModel& model, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("cannot open model file for writing: " + path);
    out << "longvine-model 1\n";
    out << "dim " << model.spec.dim() << "\n";

    bool pooled = !model.margins.empty() && model.margins.front()
                  && model.margins.front()->index == 0;
    out << "margins " << (pooled ? "pooled" : "per_index") << "\n";
    out << std::setprecision(17);
    auto write_margin = [&](const MarginalModel& m, int index) {
        out << "margin " << index << " sigma " << m.sigma;
        for (std::size_t c = 0; c < m.covariate_names.size(); ++c)
            out << " " << m.covariate_names[c] << " "
                << m.coefficients(static_cast<Eigen::Index>(c));
        out << "\n";
    };
    if (pooled) {
        write_margin(*model.margins.front(), 0);
    } else {
        for (std::size_t slot = 0; slot < model.margins.size(); ++slot)
            if (model.margins[slot])
                write_margin(*model.margins[slot], static_cast<int>(slot) + 1);
    }

    const int d = model.spec.dim();
    for (int t = 1; t <= d - 1; ++t)
        for (int k = 1; k + t <= d; ++k) {
            const auto& pc = model.spec.pair(k, k + t);
            out << "edge " << k << " " << (k + t) << " " << to_string(pc.family)
                << " " << degrees(pc.rotation) << " " << pc.theta << "\n";
        }
}

FittedModel read_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open model file: " + path);

    std::string line;
    if (!std::getline(in, line) || trim(line) != "longvine-model 1")
        throw std::invalid_argument("model file: unrecognized header (expected "
                                    "'longvine-model 1')");

    int dim = 0;
    bool pooled = false;
    std::vector<MarginalModel> margin_list;
    std::vector<std::tuple<int, int, PairCopula>> edges;

    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "dim") {
            ss >> dim;
        } else if (key == "margins") {
            std::string mode;
            ss >> mode;
            pooled = (mode == "pooled");
        } else if (key == "margin") {
            MarginalModel m;
            std::string sigma_key;
            ss >> m.index >> sigma_key >> m.sigma;
            if (sigma_key != "sigma")
                throw std::invalid_argument("model file: malformed margin line");
            std::vector<double> coefs;
            std::string name;
            double value;
            while (ss >> name >> value) {
                m.covariate_names.push_back(name);
                coefs.push_back(value);
            }
            m.coefficients = Eigen::Map<Eigen::VectorXd>(
                coefs.data(), static_cast<Eigen::Index>(coefs.size()));
            margin_list.push_back(std::move(m));
        } else if (key == "edge") {
            int k, l, deg;
            std::string family;
            double theta;
            ss >> k >> l >> family >> deg >> theta;
            edges.emplace_back(k, l,
                               PairCopula { family_from_string(family),
                                            rotation_from_degrees(deg), theta });
        } else {
            throw std::invalid_argument("model file: unknown directive '" + key + "'");
        }
    }
    if (dim < 2)
        throw std::invalid_argument("model file: missing or invalid dim");

    FittedModel model { DVineSpec(dim), MarginVector(static_cast<std::size_t>(dim)) };
    for (const auto& [k, l, pc] : edges)
        model.spec.pair(k, l) = pc;
    if (pooled) {
        if (margin_list.size() != 1)
            throw std::invalid_argument("model file: pooled mode expects exactly "
                                        "one margin line");
        model.margins = pooled_margins(margin_list.front(), dim);
    } else {
        model.margins = per_index_margins(std::move(margin_list), dim);
    }
    return model;
}

std::map<std::string, std::string> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(row)
                                        + ": expected 'key = value'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

TableWriter::TableWriter(std::vector<std::string> columns, char delimiter)
  : columns_(std::move(columns))
  , delimiter_(delimiter)
{}

void TableWriter::add_row(const std::vector<std::string>& cells)
{
    if (cells.size() != columns_.size())
        throw std::invalid_argument("TableWriter: wrong number of cells");
    rows_.push_back(cells);
}

std::string TableWriter::format(double x)
{
    std::ostringstream ss;
    ss << std::setprecision(12) << x;
    return ss.str();
}

void TableWriter::write(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("cannot open output file: " + path);
    for (std::size_t c = 0; c < columns_.size(); ++c)
        out << (c ? std::string(1, delimiter_) : "") << columns_[c];
    out << "\n";
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? std::string(1, delimiter_) : "") << row[c];
        out << "\n";
    }
}

void TableWriter::print(std::ostream& out) const
{
    std::vector<std::size_t> widths(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c)
        widths[c] = columns_[c].size();
    for (const auto& row : rows_)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            out << (c ? "  " : "") << std::setw(static_cast<int>(widths[c]))
                << cells[c];
        out << "\n";
    };
    line(columns_);
    for (const auto& row : rows_)
        line(row);
}

} // namespace longvine

#include "fdaderiv/dataset.hpp"

#include "fdaderiv/csv.hpp"
#include "fdaderiv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fdaderiv {

FunctionalDataset::FunctionalDataset(DesignGrid grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() < 1) throw ConfigError("dataset needs at least one curve");
    if (static_cast<std::size_t>(values_.cols()) != grid_.total_size())
        throw ConfigError("dataset column count does not match grid size");
    if (!values_.allFinite()) throw ConfigError("dataset contains non-finite values");
}

FunctionalDataset read_wide_csv(std::istream& in, std::optional<DesignGrid> grid) {
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw IoError("CSV is empty");
    ++row;
    const auto coord_fields = split_csv_line(line);
    std::vector<double> coords(coord_fields.size());
    for (std::size_t c = 0; c < coord_fields.size(); ++c) {
        coords[c] = parse_csv_double(coord_fields[c], row, c + 1);
    }

    std::optional<DesignGrid> resolved = std::move(grid);
    if (!resolved) {
        resolved.emplace(std::vector<std::vector<double>>{coords});
    } else if (resolved->total_size() != coords.size()) {
        std::ostringstream os;
        os << "CSV has " << coords.size() << " columns but the grid has "
           << resolved->total_size() << " points";
        throw IoError(os.str());
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != coords.size()) {
            std::ostringstream os;
            os << "CSV row " << row << " has " << fields.size() << " fields, expected "
               << coords.size();
            throw IoError(os.str());
        }
        std::vector<double> vals(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            vals[c] = parse_csv_double(fields[c], row, c + 1);
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw IoError("CSV contains no curve rows");

    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < coords.size(); ++c) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
    }
    return FunctionalDataset(std::move(*resolved), std::move(values));
}

FunctionalDataset read_wide_csv_file(const std::string& path, std::optional<DesignGrid> grid) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_wide_csv(in, std::move(grid));
}

void write_wide_csv(const FunctionalDataset& data, std::ostream& out) {
    const std::size_t p1 = data.grid().total_size();
    std::vector<double> pt(static_cast<std::size_t>(data.grid().dim()));
    for (std::size_t j = 0; j < p1; ++j) {
        data.grid().point_at(j, pt);
        // For d > 1 the coordinate row carries the first axis value; the full
        // grid travels separately as JSON.
        out << (j ? "," : "") << format_double(pt[0]);
    }
    out << "\n";
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.values().cols(); ++j) {
            out << (j ? "," : "") << format_double(data.values()(i, j));
        }
        out << "\n";
    }
}

PeriodicAugmentation periodic_augment(const FunctionalDataset& data, std::size_t pad) {
    if (data.grid().dim() != 1)
        throw ConfigError("periodic augmentation supports 1-d designs only");
    const auto& ax = data.grid().axis(0);
    const std::size_t p = ax.size();
    if (pad == 0 || pad >= p)
        throw ConfigError("periodic pad must lie in [1, p-1]");

    // Wrapped coordinates live on [lo, hi] around [0,1]; rescale back to [0,1].
    std::vector<double> ext;
    ext.reserve(p + 2 * pad);
    for (std::size_t j = p - pad; j < p; ++j) ext.push_back(ax[j] - 1.0);
    for (double t : ax) ext.push_back(t);
    for (std::size_t j = 0; j < pad; ++j) ext.push_back(ax[j] + 1.0);
    const double lo = ext.front();
    const double hi = ext.back();
    const double scale = 1.0 / (hi - lo);
    for (double& t : ext) t = (t - lo) * scale;
    ext.front() = 0.0;
    ext.back() = 1.0;

    Eigen::MatrixXd values(data.n(), static_cast<Eigen::Index>(p + 2 * pad));
    values.middleCols(static_cast<Eigen::Index>(pad), static_cast<Eigen::Index>(p)) = data.values();
    values.leftCols(static_cast<Eigen::Index>(pad)) =
        data.values().rightCols(static_cast<Eigen::Index>(pad));
    values.rightCols(static_cast<Eigen::Index>(pad)) =
        data.values().leftCols(static_cast<Eigen::Index>(pad));

    PeriodicAugmentation out{
        FunctionalDataset(DesignGrid({std::move(ext)}), std::move(values)), scale, -lo * scale};
    return out;
}

} // namespace fdaderiv

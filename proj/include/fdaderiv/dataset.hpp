#pragma once

#include "fdaderiv/design.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>

namespace fdaderiv {

/// Synchronously observed functional data: n curves sampled on a shared
/// design grid. Row i holds curve i; columns follow the grid's flat order.
class FunctionalDataset {
public:
    FunctionalDataset(DesignGrid grid, Eigen::MatrixXd values);

    const DesignGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::Index n() const { return values_.rows(); }

private:
    DesignGrid grid_;
    Eigen::MatrixXd values_;
};

/// Wide CSV: first row = flattened grid coordinates, following rows = curves.
/// The coordinate row defines a 1-d grid unless an explicit grid is supplied
/// (then the first row is validated for column count only).
FunctionalDataset read_wide_csv(std::istream& in, std::optional<DesignGrid> grid = {});
FunctionalDataset read_wide_csv_file(const std::string& path, std::optional<DesignGrid> grid = {});
void write_wide_csv(const FunctionalDataset& data, std::ostream& out);

/// Periodic boundary augmentation for 1-d daily-cycle data: prepends the last
/// `pad` columns with coordinates shifted by -1 and appends the first `pad`
/// columns shifted by +1, then rescales all coordinates affinely back to [0,1].
/// Returns the augmented dataset and the affine map (scale, offset) from
/// original to augmented coordinates.
struct PeriodicAugmentation {
    FunctionalDataset data;
    double scale;
    double offset;
};
PeriodicAugmentation periodic_augment(const FunctionalDataset& data, std::size_t pad);

} // namespace fdaderiv

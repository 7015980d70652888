#include "fdaderiv/weights.hpp"

#include "fdaderiv/errors.hpp"
#include "fdaderiv/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <ostream>
#include <sstream>

namespace fdaderiv {

SingularDesignError::SingularDesignError(std::vector<double> point, double bandwidth,
                                         double eigenvalue)
    : NumericalError([&] {
          std::ostringstream os;
          os << "singular local design at x = (";
          for (std::size_t i = 0; i < point.size(); ++i) os << (i ? ", " : "") << point[i];
          os << "), h = " << bandwidth << ", min eigenvalue = " << eigenvalue;
          return os.str();
      }()),
      point_(std::move(point)),
      bandwidth_(bandwidth),
      eigenvalue_(eigenvalue) {}

double WeightSet::apply(const Eigen::VectorXd& values) const {
    double acc = 0.0;
    for (const auto& [j, w] : weights) acc += w * values[static_cast<Eigen::Index>(j)];
    return acc;
}

double WeightSet::max_abs_weight() const {
    double m = 0.0;
    for (const auto& [j, w] : weights) m = std::max(m, std::abs(w));
    return m;
}

double WeightSet::abs_sum() const {
    double s = 0.0;
    for (const auto& [j, w] : weights) s += std::abs(w);
    return s;
}

namespace {

struct WindowCell {
    std::size_t flat;
    double kernel_value;
    Eigen::VectorXd basis; // U_m((x_j - x)/h)
};

// Assembles the un-normalized normal-equations matrix sum U U^T K together
// with the per-cell basis/kernel values, iterating the window in grid order.
struct LocalSystem {
    Eigen::MatrixXd b_raw;
    std::vector<WindowCell> cells;
};

LocalSystem assemble_local_system(const DesignGrid& grid, std::span<const double> x, double h,
                                  const BasisLayout& layout, const Kernel& kernel) {
    const int d = grid.dim();
    if (static_cast<int>(x.size()) != d)
        throw ConfigError("evaluation point dimension does not match grid");
    if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");
    if (layout.dim() != d) throw ConfigError("basis layout dimension does not match grid");
    if (kernel.dim != d) throw ConfigError("kernel dimension does not match grid");

    std::vector<std::pair<std::size_t, std::size_t>> ranges(static_cast<std::size_t>(d));
    std::vector<std::size_t> strides(static_cast<std::size_t>(d), 1);
    for (int k = d - 2; k >= 0; --k) {
        strides[static_cast<std::size_t>(k)] =
            strides[static_cast<std::size_t>(k + 1)] * grid.axis(k + 1).size();
    }
    bool empty = false;
    for (int k = 0; k < d; ++k) {
        ranges[static_cast<std::size_t>(k)] = grid.axis_window(k, x[static_cast<std::size_t>(k)], h);
        if (ranges[static_cast<std::size_t>(k)].first >= ranges[static_cast<std::size_t>(k)].second)
            empty = true;
    }

    LocalSystem sys;
    sys.b_raw = Eigen::MatrixXd::Zero(layout.size(), layout.size());
    if (empty) return sys;

    std::vector<std::size_t> idx(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) idx[static_cast<std::size_t>(k)] = ranges[static_cast<std::size_t>(k)].first;
    std::vector<double> u(static_cast<std::size_t>(d));
    Eigen::VectorXd basis;
    while (true) {
        std::size_t flat = 0;
        for (int k = 0; k < d; ++k) {
            const std::size_t j = idx[static_cast<std::size_t>(k)];
            flat += j * strides[static_cast<std::size_t>(k)];
            u[static_cast<std::size_t>(k)] =
                (grid.axis(k)[j] - x[static_cast<std::size_t>(k)]) / h;
        }
        const double kv = kernel(u);
        if (kv != 0.0) {
            basis_vector_into(layout, u, basis);
            sys.b_raw.selfadjointView<Eigen::Lower>().rankUpdate(basis, kv);
            sys.cells.push_back({flat, kv, basis});
        }
        int k = d - 1;
        while (k >= 0) {
            if (++idx[static_cast<std::size_t>(k)] < ranges[static_cast<std::size_t>(k)].second) break;
            idx[static_cast<std::size_t>(k)] = ranges[static_cast<std::size_t>(k)].first;
            --k;
        }
        if (k < 0) break;
    }
    sys.b_raw = sys.b_raw.selfadjointView<Eigen::Lower>();
    return sys;
}

} // namespace

MomentMatrix moment_matrix(const DesignGrid& grid, std::span<const double> x, double h,
                           const BasisLayout& layout, const Kernel& kernel) {
    LocalSystem sys = assemble_local_system(grid, x, h, layout, kernel);
    const double norm = static_cast<double>(grid.total_size()) * std::pow(h, grid.dim());
    MomentMatrix mm;
    mm.matrix = sys.b_raw / norm;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mm.matrix, Eigen::EigenvaluesOnly);
    mm.min_eigenvalue = es.eigenvalues().minCoeff();
    return mm;
}

WeightSet local_poly_weights(const DesignGrid& grid, std::span<const double> x, double h,
                             const MultiIndex& s, int m, const Kernel& kernel,
                             const WeightOptions& options) {
    if (s.order() > m)
        throw ConfigError("derivative order exceeds the local polynomial order");
    const BasisLayout layout = enumerate_basis(grid.dim(), m);
    LocalSystem sys = assemble_local_system(grid, x, h, layout, kernel);

    const double p1 = static_cast<double>(grid.total_size());
    const double norm = p1 * std::pow(h, grid.dim());
    const Eigen::MatrixXd b = sys.b_raw / norm;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    const double min_eig = sys.cells.empty() ? 0.0 : es.eigenvalues().minCoeff();
    const double floor = options.eigenvalue_floor_scale * b.trace() / static_cast<double>(layout.size());
    if (sys.cells.empty() || !(min_eig > floor) || !(floor > 0.0)) {
        throw SingularDesignError(std::vector<double>(x.begin(), x.end()), h, min_eig);
    }

    const Eigen::VectorXd selector = derivative_selector(layout, s);
    Eigen::VectorXd v;
    bool degenerate = false;
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() == Eigen::Success) {
        v = llt.solve(selector);
    } else {
        // Eigenvalue-thresholded pseudo-solve for the rare indefinite corner.
        Eigen::VectorXd inv_eig = es.eigenvalues();
        for (Eigen::Index i = 0; i < inv_eig.size(); ++i) {
            inv_eig[i] = inv_eig[i] > floor ? 1.0 / inv_eig[i] : 0.0;
        }
        v = es.eigenvectors() * inv_eig.asDiagonal() * es.eigenvectors().transpose() * selector;
        degenerate = true;
    }

    WeightSet ws;
    ws.x.assign(x.begin(), x.end());
    ws.h = h;
    ws.s = s;
    ws.m = m;
    ws.kernel = kernel;
    ws.degenerate = degenerate;
    ws.min_eigenvalue = min_eig;
    ws.weights.reserve(sys.cells.size());
    const double scale = 1.0 / (p1 * std::pow(h, grid.dim() + s.order()));
    for (const WindowCell& cell : sys.cells) {
        ws.weights.emplace_back(cell.flat, scale * v.dot(cell.basis) * cell.kernel_value);
    }
    return ws;
}

WeightPropertyReport verify_weight_properties(const WeightSet& ws, const DesignGrid& grid,
                                              std::uint64_t sample_seed) {
    WeightPropertyReport report;
    report.degenerate = ws.degenerate;
    const int d = grid.dim();
    const double p1 = static_cast<double>(grid.total_size());
    const BasisLayout layout = enumerate_basis(d, ws.m);

    // Reproduction: sum_j (x_j - x)^r w_j = delta_{r,s} s! for all |r| <= m.
    double max_err = 0.0;
    std::vector<double> diff(static_cast<std::size_t>(d));
    for (const MultiIndex& r : layout.indices()) {
        double acc = 0.0;
        for (const auto& [flat, w] : ws.weights) {
            auto pts = grid.point(flat);
            for (int k = 0; k < d; ++k) {
                diff[static_cast<std::size_t>(k)] =
                    pts[static_cast<std::size_t>(k)] - ws.x[static_cast<std::size_t>(k)];
            }
            acc += r.monomial(diff) * w;
        }
        const double target = (r == ws.s) ? ws.s.factorial() : 0.0;
        max_err = std::max(max_err, std::abs(acc - target));
    }
    report.max_reproduction_error = max_err;
    report.reproduction_ok = max_err <= 1e-8;

    // Locality: every stored index must be inside the sup-norm window.
    report.locality_ok = true;
    for (const auto& [flat, w] : ws.weights) {
        auto pt = grid.point(flat);
        for (int k = 0; k < d; ++k) {
            if (std::abs(pt[static_cast<std::size_t>(k)] - ws.x[static_cast<std::size_t>(k)]) >
                ws.h * (1.0 + 1e-12)) {
                report.locality_ok = false;
            }
        }
    }

    const double hpow = std::pow(ws.h, d + ws.s.order());
    report.scaled_max_weight = ws.max_abs_weight() * p1 * hpow;
    report.scaled_abs_sum = ws.abs_sum() * std::pow(ws.h, ws.s.order());

    // Sampled Lipschitz ratio over evaluation-point pairs (diagnostic only).
    GaussianStream gs(sample_seed);
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<double> y(ws.x);
        double dist = 0.0;
        for (int k = 0; k < d; ++k) {
            const double step = (gs.uniform01() - 0.5) * ws.h;
            double& yk = y[static_cast<std::size_t>(k)];
            yk = std::clamp(yk + step, 0.0, 1.0);
            dist = std::max(dist, std::abs(yk - ws.x[static_cast<std::size_t>(k)]));
        }
        if (dist == 0.0) continue;
        WeightSet other;
        try {
            other = local_poly_weights(grid, y, ws.h, ws.s, ws.m, ws.kernel);
        } catch (const SingularDesignError&) {
            continue;
        }
        std::vector<double> dense_other(grid.total_size(), 0.0);
        for (const auto& [j, w] : other.weights) dense_other[j] = w;
        double max_dw = 0.0;
        std::vector<bool> seen(grid.total_size(), false);
        for (const auto& [j, w] : ws.weights) {
            max_dw = std::max(max_dw, std::abs(w - dense_other[j]));
            seen[j] = true;
        }
        for (const auto& [j, w] : other.weights) {
            if (!seen[j]) max_dw = std::max(max_dw, std::abs(w));
        }
        const double denom = std::max(dist / ws.h, 1.0);
        worst_ratio = std::max(worst_ratio, max_dw * p1 * hpow / denom);
    }
    report.lipschitz_ratio = worst_ratio;
    return report;
}

void write_weights_csv(const WeightSet& ws, std::ostream& out) {
    out << "index,weight\n";
    for (const auto& [j, w] : ws.weights) out << j << "," << w << "\n";
}

} // namespace fdaderiv

#include "fdaderiv/multi_index.hpp"

#include "fdaderiv/errors.hpp"

#include <cmath>
#include <numeric>

namespace fdaderiv {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ConfigError("multi-index must have dimension >= 1");
    for (int e : entries_) {
        if (e < 0) throw ConfigError("multi-index entries must be non-negative");
    }
}

int MultiIndex::order() const {
    return std::accumulate(entries_.begin(), entries_.end(), 0);
}

double MultiIndex::factorial() const {
    double f = 1.0;
    for (int e : entries_) {
        for (int j = 2; j <= e; ++j) f *= j;
    }
    return f;
}

double MultiIndex::monomial(std::span<const double> u) const {
    double v = 1.0;
    for (std::size_t r = 0; r < entries_.size(); ++r) {
        for (int j = 0; j < entries_[r]; ++j) v *= u[r];
    }
    return v;
}

BasisLayout::BasisLayout(int dim, int order, std::vector<MultiIndex> indices)
    : dim_(dim), order_(order), indices_(std::move(indices)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        positions_.emplace(indices_[i].entries(), static_cast<Eigen::Index>(i));
    }
}

Eigen::Index BasisLayout::position(const MultiIndex& k) const {
    auto it = positions_.find(k.entries());
    return it == positions_.end() ? Eigen::Index{-1} : it->second;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double v = 1.0;
    for (int j = 1; j <= k; ++j) v = v * (n - k + j) / j;
    return std::round(v);
}

namespace {

// All k with |k| = grade in `remaining` variables, first coordinate largest first.
void emit_grade(int remaining, int grade, std::vector<int>& prefix,
                std::vector<MultiIndex>& out) {
    if (remaining == 1) {
        prefix.push_back(grade);
        out.emplace_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int e = grade; e >= 0; --e) {
        prefix.push_back(e);
        emit_grade(remaining - 1, grade - e, prefix, out);
        prefix.pop_back();
    }
}

} // namespace

BasisLayout enumerate_basis(int d, int m) {
    if (d < 1) throw ConfigError("basis dimension must be >= 1");
    if (m < 0) throw ConfigError("basis order must be >= 0");
    std::vector<MultiIndex> indices;
    indices.reserve(static_cast<std::size_t>(binomial(d + m, d)));
    std::vector<int> prefix;
    for (int grade = 0; grade <= m; ++grade) {
        emit_grade(d, grade, prefix, indices);
    }
    return BasisLayout(d, m, std::move(indices));
}

void basis_vector_into(const BasisLayout& layout, std::span<const double> u,
                       Eigen::VectorXd& out) {
    if (static_cast<int>(u.size()) != layout.dim())
        throw ConfigError("basis_vector: point dimension does not match layout");
    out.resize(layout.size());
    const auto& idx = layout.indices();
    for (Eigen::Index i = 0; i < layout.size(); ++i) {
        out[i] = idx[static_cast<std::size_t>(i)].monomial(u) /
                 idx[static_cast<std::size_t>(i)].factorial();
    }
}

Eigen::VectorXd basis_vector(const BasisLayout& layout, std::span<const double> u) {
    Eigen::VectorXd out;
    basis_vector_into(layout, u, out);
    return out;
}

Eigen::VectorXd derivative_selector(const BasisLayout& layout, const MultiIndex& s) {
    if (s.dim() != layout.dim())
        throw ConfigError("derivative_selector: index dimension does not match layout");
    if (s.order() > layout.order())
        throw ConfigError("derivative_selector: derivative order exceeds polynomial order");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.size());
    out[layout.position(s)] = 1.0;
    return out;
}

} // namespace fdaderiv

#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <vector>

namespace fdaderiv {

/// Multi-index k = (k_1,...,k_d) of non-negative integer exponents.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries);
    /// 1-d convenience.
    static MultiIndex scalar(int k) { return MultiIndex(std::vector<int>{k}); }

    int dim() const { return static_cast<int>(entries_.size()); }
    int order() const;                       // |k| = sum of entries
    int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& entries() const { return entries_; }

    double factorial() const;                // k! = k_1! ... k_d!
    double monomial(std::span<const double> u) const;  // u^k

    bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }
    bool operator<(const MultiIndex& other) const { return entries_ < other.entries_; }

private:
    std::vector<int> entries_;
};

/// Enumerated monomial basis of all multi-indices with |k| <= m in d variables.
///
/// The order is graded (total order ascending) and, within a grade, the first
/// coordinate carries the largest exponent first. Index 0 is always the zero
/// multi-index. The count is binomial(d + m, d).
class BasisLayout {
public:
    BasisLayout() = default;
    BasisLayout(int dim, int order, std::vector<MultiIndex> indices);

    int dim() const { return dim_; }
    int order() const { return order_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(indices_.size()); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const MultiIndex& index(Eigen::Index pos) const { return indices_[static_cast<std::size_t>(pos)]; }

    /// Position of a multi-index in the enumeration; -1 if not present.
    Eigen::Index position(const MultiIndex& k) const;

private:
    int dim_ = 0;
    int order_ = 0;
    std::vector<MultiIndex> indices_;
    std::map<std::vector<int>, Eigen::Index> positions_;
};

double binomial(int n, int k);

/// Deterministic enumeration of {k : |k| <= m} in d >= 1 variables.
BasisLayout enumerate_basis(int d, int m);

/// Monomial basis vector with entries u^k / k!; entry 0 is always 1.
Eigen::VectorXd basis_vector(const BasisLayout& layout, std::span<const double> u);
void basis_vector_into(const BasisLayout& layout, std::span<const double> u, Eigen::VectorXd& out);

/// Unit vector selecting the coefficient of the monomial u^s / s!.
/// Throws ConfigError if |s| exceeds the layout order.
Eigen::VectorXd derivative_selector(const BasisLayout& layout, const MultiIndex& s);

} // namespace fdaderiv

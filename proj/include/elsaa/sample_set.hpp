#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace elsaa {

/// Row-major n x d matrix of i.i.d. observations. Row i is the datum xi_i.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(std::size_t rows, std::size_t cols);
    SampleSet(std::size_t rows, std::size_t cols, std::vector<double> values);

    /// One observation per inner vector; all rows must have the same length.
    static SampleSet from_rows(const std::vector<std::vector<double>>& rows);
    /// Univariate data, one observation per entry.
    static SampleSet from_column(std::span<const double> column);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

    const std::vector<double>& values() const noexcept { return values_; }

    /// Rows [first, first + count) as a new set.
    SampleSet slice(std::size_t first, std::size_t count) const;
    /// Rows reordered so that result.row(k) == row(order[k]).
    SampleSet permuted(std::span<const std::size_t> order) const;

    /// Indices of the rows sorted lexicographically (ties by index).
    std::vector<std::size_t> canonical_order() const;

    bool operator==(const SampleSet&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

} // namespace elsaa

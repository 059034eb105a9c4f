#include "elsaa/sample_set.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace elsaa {

SampleSet::SampleSet(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

SampleSet::SampleSet(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw std::invalid_argument("SampleSet: value count does not match rows * cols");
    }
}

SampleSet SampleSet::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t d = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * d);
    for (const auto& r : rows) {
        if (r.size() != d) throw std::invalid_argument("SampleSet: ragged rows");
        values.insert(values.end(), r.begin(), r.end());
    }
    return {rows.size(), d, std::move(values)};
}

SampleSet SampleSet::from_column(std::span<const double> column) {
    return {column.size(), 1, std::vector<double>(column.begin(), column.end())};
}

SampleSet SampleSet::slice(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw std::out_of_range("SampleSet::slice");
    auto begin = values_.begin() + static_cast<std::ptrdiff_t>(first * cols_);
    return {count, cols_, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * cols_))};
}

SampleSet SampleSet::permuted(std::span<const std::size_t> order) const {
    if (order.size() != rows_) throw std::invalid_argument("SampleSet::permuted: wrong order length");
    SampleSet out(rows_, cols_);
    for (std::size_t k = 0; k < rows_; ++k) {
        auto src = row(order[k]);
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

std::vector<std::size_t> SampleSet::canonical_order() const {
    std::vector<std::size_t> idx(rows_);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
        auto ra = row(a);
        auto rb = row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    return idx;
}

} // namespace elsaa

#include "xltag/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "xltag/error.hpp"

namespace xltag {

Tensor Tensor::vector(std::size_t n) {
    Tensor t;
    t.rank_ = 1;
    t.rows_ = n;
    t.cols_ = 1;
    t.data_.assign(n, 0.0);
    return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) {
    Tensor t;
    t.rank_ = 2;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_.assign(rows * cols, 0.0);
    return t;
}

Tensor Tensor::from(std::initializer_list<double> values) {
    Tensor t = vector(values.size());
    std::copy(values.begin(), values.end(), t.data_.begin());
    return t;
}

Tensor Tensor::from(std::span<const double> values) {
    Tensor t = vector(values.size());
    std::copy(values.begin(), values.end(), t.data_.begin());
    return t;
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::span<const double> values) {
    if (values.size() != rows * cols) {
        throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape [" +
                         std::to_string(rows) + "x" + std::to_string(cols) + "]");
    }
    Tensor t = matrix(rows, cols);
    std::copy(values.begin(), values.end(), t.data_.begin());
    return t;
}

Tensor Tensor::from(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t cols = rows.size() == 0 ? 0 : rows.begin()->size();
    Tensor t = matrix(rows.size(), cols);
    std::size_t r = 0;
    for (const auto &row : rows) {
        if (row.size() != cols) throw ShapeError("tensor: ragged matrix literal");
        std::copy(row.begin(), row.end(), t.data_.begin() + r * cols);
        ++r;
    }
    return t;
}

Tensor Tensor::zeros_like() const {
    Tensor t;
    t.rank_ = rank_;
    t.rows_ = rows_;
    t.cols_ = cols_;
    t.data_.assign(data_.size(), 0.0);
    return t;
}

std::vector<std::size_t> Tensor::shape() const {
    if (rank_ == 1) return {rows_};
    return {rows_, cols_};
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
    if (rank_ == 1) return "[" + std::to_string(rows_) + "]";
    return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

}  // namespace xltag

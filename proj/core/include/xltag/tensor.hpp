#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace xltag {

/// Dense row-major tensor of doubles, rank 1 (vector) or rank 2 (matrix).
/// Vectors act as column vectors in matrix products.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled vector of length n.
    static Tensor vector(std::size_t n);
    /// Zero-filled rows x cols matrix.
    static Tensor matrix(std::size_t rows, std::size_t cols);
    static Tensor from(std::initializer_list<double> values);
    static Tensor from(std::span<const double> values);
    static Tensor from(std::size_t rows, std::size_t cols, std::span<const double> values);
    static Tensor from(std::initializer_list<std::initializer_list<double>> rows);

    /// A tensor with the same shape, filled with zeros.
    Tensor zeros_like() const;

    std::size_t rank() const { return rank_; }
    std::vector<std::size_t> shape() const;
    std::size_t rows() const { return rows_; }
    /// Columns of a matrix; 1 for a vector.
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Tensor &other) const {
        return rank_ == other.rank_ && rows_ == other.rows_ && cols_ == other.cols_;
    }

    double &operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double &at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    void fill(double v);
    bool all_finite() const;

    /// "[3]" or "[4x2]", for diagnostics.
    std::string shape_string() const;

    friend bool operator==(const Tensor &, const Tensor &) = default;

private:
    std::size_t rank_ = 1;
    std::size_t rows_ = 0;
    std::size_t cols_ = 1;
    std::vector<double> data_;
};

}  // namespace xltag

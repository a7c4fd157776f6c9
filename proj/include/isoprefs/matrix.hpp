#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "isoprefs/common.hpp"

namespace isoprefs {

// Dense row-major matrix of doubles. Allocation size is reported to the
// instrumentation counters so tests can bound peak preference-matrix memory.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        track(bytes());
    }

    Matrix(const Matrix& other)
        : rows_(other.rows_), cols_(other.cols_), data_(other.data_) {
        track(bytes());
    }

    Matrix(Matrix&& other) noexcept
        : rows_(std::exchange(other.rows_, 0)),
          cols_(std::exchange(other.cols_, 0)),
          data_(std::move(other.data_)) {
        other.data_.clear();
    }

    Matrix& operator=(Matrix other) noexcept {
        swap(other);
        return *this;
    }

    ~Matrix() { track(-bytes()); }

    void swap(Matrix& other) noexcept {
        std::swap(rows_, other.rows_);
        std::swap(cols_, other.cols_);
        data_.swap(other.data_);
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::int64_t bytes() const noexcept {
        return static_cast<std::int64_t>(data_.size() * sizeof(double));
    }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

private:
    static void track(std::int64_t delta) {
        if (delta != 0) instrument::add_matrix_bytes(delta);
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using PointRef = std::span<const double>;

} // namespace isoprefs

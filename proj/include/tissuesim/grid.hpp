#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace tissuesim {

// Row-major 2-D array. Index order is (y, x) to match the height x width
// convention used by the label masks and image channels.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, T fill = T{})
        : height_(height), width_(width),
          data_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {}

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }

    T& at(int y, int x) {
        assert(y >= 0 && y < height_ && x >= 0 && x < width_);
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    const T& at(int y, int x) const {
        assert(y >= 0 && y < height_ && x >= 0 && x < width_);
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    bool in_bounds(int y, int x) const {
        return y >= 0 && y < height_ && x >= 0 && x < width_;
    }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

// Small dense row-major matrix of doubles, used for the interaction and
// abundance parameters (N and P are single digits in practice).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& at(int r, int c) {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    double at(int r, int c) const {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Rank-3 tensor indexed (i, j, n); the innermost axis is the neighborhood
// plane, matching the phenotype interaction parameter layout.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int dim0, int dim1, int dim2, double fill = 0.0)
        : d0_(dim0), d1_(dim1), d2_(dim2),
          data_(static_cast<std::size_t>(dim0) * dim1 * dim2, fill) {}

    int dim0() const { return d0_; }
    int dim1() const { return d1_; }
    int dim2() const { return d2_; }

    double& at(int i, int j, int n) {
        assert(i >= 0 && i < d0_ && j >= 0 && j < d1_ && n >= 0 && n < d2_);
        return data_[(static_cast<std::size_t>(i) * d1_ + j) * d2_ + n];
    }
    double at(int i, int j, int n) const {
        assert(i >= 0 && i < d0_ && j >= 0 && j < d1_ && n >= 0 && n < d2_);
        return data_[(static_cast<std::size_t>(i) * d1_ + j) * d2_ + n];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    friend bool operator==(const Tensor3& a, const Tensor3& b) {
        return a.d0_ == b.d0_ && a.d1_ == b.d1_ && a.d2_ == b.d2_ && a.data_ == b.data_;
    }

private:
    int d0_ = 0;
    int d1_ = 0;
    int d2_ = 0;
    std::vector<double> data_;
};

} // namespace tissuesim

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "tlrm/common.hpp"

namespace tlrm::diff {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense row-major real64 array. Rank 1 and 2 are what the networks here
// need; scalars are shape {1}.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);
    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double v);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor from_vector(const VectorXd& v);
    static Tensor from_matrix(const MatrixXd& m);  // row-major copy

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t rank() const { return shape_.size(); }
    std::size_t rows() const { return shape_.at(0); }
    std::size_t cols() const { return shape_.at(1); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;

    VectorXd to_vector() const;
    MatrixXd to_matrix() const;

    // Maps for in-place linear algebra on the flat buffer.
    Eigen::Map<VectorXd> vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
    Eigen::Map<const VectorXd> vec() const {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mat();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mat()
        const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace tlrm::diff

#include "tlrm/tensor.hpp"

#include <cmath>
#include <numeric>

namespace tlrm::diff {

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    std::size_t n = 1;
    for (std::size_t d : shape_) {
        if (d == 0) throw ShapeError("tensor dimension must be positive");
        n *= d;
    }
    if (shape_.empty() || n != data_.size())
        throw ShapeError("tensor shape/data length mismatch");
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return Tensor(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::from_vector(const VectorXd& v) {
    return Tensor({static_cast<std::size_t>(v.size())},
                  std::vector<double>(v.data(), v.data() + v.size()));
}

Tensor Tensor::from_matrix(const MatrixXd& m) {
    Tensor t = zeros({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    t.mat() = m;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

VectorXd Tensor::to_vector() const {
    return vec();
}

MatrixXd Tensor::to_matrix() const {
    if (rank() != 2) throw ShapeError("to_matrix on non-rank-2 tensor");
    return mat();
}

Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Tensor::mat() {
    if (rank() != 2) throw ShapeError("matrix view on non-rank-2 tensor");
    return {data_.data(), static_cast<Eigen::Index>(shape_[0]),
            static_cast<Eigen::Index>(shape_[1])};
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
Tensor::mat() const {
    if (rank() != 2) throw ShapeError("matrix view on non-rank-2 tensor");
    return {data_.data(), static_cast<Eigen::Index>(shape_[0]),
            static_cast<Eigen::Index>(shape_[1])};
}

}  // namespace tlrm::diff

#pragma once

#include <Eigen/Dense>

namespace bioel {

// Row-major dense types. Model state is laid out as (position x channel)
// matrices, so row-major keeps per-position work contiguous and makes the
// binary formats (row-major payloads) straight memory copies.
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matd = Mat<double>;
using Matf = Mat<float>;
using Vecd = Vec<double>;
using Vecf = Vec<float>;

}  // namespace bioel

#pragma once

#include <Eigen/Dense>

namespace caldera {

// Row-major so buffers map directly onto the CMAT payload and numpy C order.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace caldera

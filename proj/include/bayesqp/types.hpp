#pragma once

#include <Eigen/Dense>

namespace bayesqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace bayesqp

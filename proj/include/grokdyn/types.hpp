#pragma once

#include <Eigen/Dense>

namespace grokdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace grokdyn

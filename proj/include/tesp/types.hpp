#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace tesp {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;
using Dims = std::vector<Index>;

inline constexpr cplx kJ{0.0, 1.0};

}  // namespace tesp

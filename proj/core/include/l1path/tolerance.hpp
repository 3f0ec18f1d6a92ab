#pragma once

#include <Eigen/Core>

namespace l1path::tol {

inline constexpr double num = 1e-9;
inline constexpr double scalar = 1e-12;
inline constexpr double cond = 1e-12;

inline double psd(const Eigen::MatrixXd& m) {
  double norm = m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
  return 1e-8 * (1.0 + norm);
}

inline double knot(double sigma2) { return 1e-9 * (1.0 + sigma2); }
// Same with a problem-specific sigma2 unit in place of 1.
inline double knot(double sigma2, double unit) { return 1e-9 * (unit + sigma2); }

} // namespace l1path::tol

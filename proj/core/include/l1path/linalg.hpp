#pragma once

#include <Eigen/Core>

namespace l1path {

inline void symmetrize(Eigen::MatrixXd& M) { M = 0.5 * (M + M.transpose()).eval(); }

bool is_symmetric_psd(const Eigen::MatrixXd& M);

struct SymSolve {
  Eigen::VectorXd x;
  bool rank_deficient = false;
};

// Solves S x = r for symmetric PSD S. Directions whose eigenvalue falls
// below tol::cond * max eigenvalue are dropped, which yields the
// minimum-norm solution; rank_deficient reports whether that happened.
SymSolve sym_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& r);

// Same as sym_solve but several right-hand sides, returns the min-norm
// pseudo-inverse applied to R.
Eigen::MatrixXd sym_solve(const Eigen::MatrixXd& S, const Eigen::MatrixXd& R,
                          bool& rank_deficient);

// Throwing inverse for matrices that must be invertible.
Eigen::MatrixXd sym_inverse(const Eigen::MatrixXd& S, const char* what);

} // namespace l1path

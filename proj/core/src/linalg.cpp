#include "l1path/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "l1path/error.hpp"
#include "l1path/tolerance.hpp"

namespace l1path {

bool is_symmetric_psd(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) return false;
  if (M.size() == 0) return true;
  const double t = tol::psd(M);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > t) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -t;
}

Eigen::MatrixXd sym_solve(const Eigen::MatrixXd& S, const Eigen::MatrixXd& R,
                          bool& rank_deficient) {
  if (S.rows() != S.cols() || S.rows() != R.rows())
    throw DimensionError("sym_solve: shape mismatch");
  rank_deficient = false;
  const Eigen::Index n = S.rows();
  if (n == 0) return Eigen::MatrixXd(0, R.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double top = lam.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (top > 0 && std::abs(lam(i)) > tol::cond * top) {
      inv(i) = 1.0 / lam(i);
    } else {
      inv(i) = 0.0;
      rank_deficient = true;
    }
  }
  const Eigen::MatrixXd& Q = es.eigenvectors();
  return Q * inv.asDiagonal() * (Q.transpose() * R);
}

SymSolve sym_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& r) {
  SymSolve out;
  out.x = sym_solve(S, Eigen::MatrixXd(r), out.rank_deficient).col(0);
  return out;
}

Eigen::MatrixXd sym_inverse(const Eigen::MatrixXd& S, const char* what) {
  bool deficient = false;
  Eigen::MatrixXd inv =
      sym_solve(S, Eigen::MatrixXd::Identity(S.rows(), S.cols()), deficient);
  if (deficient) throw SingularError(std::string(what) + ": matrix is singular");
  return inv;
}

} // namespace l1path

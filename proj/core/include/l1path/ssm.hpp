#pragma once

#include <string>
#include <vector>

#include "l1path/gaussmp.hpp"
#include "l1path/plcost.hpp"

namespace l1path {

// InputReg: the costs penalize u_n, observations are quadratic.
// OutputReg: the costs penalize y_n - y_breve_n, inputs are quadratic.
enum class RegSide { InputReg, OutputReg };

// x_n = A x_{n-1} + b_n u_n,  y_n = c_n^T x_n,  n = 1..N.
//
// InputReg objective:
//   (x0 - x0_breve)^T Q0 (.) + s^2 sum kappa_n(u_n) + sum (y_n - y_breve_n)^2
//   + (x_N - xN_breve)^T QN (.)
// OutputReg objective:
//   (x0 - x0_breve)^T Q0 (.) + sum u_n^2 + s^2 sum kappa_n(y_n - y_breve_n)
//   + (x_N - xN_breve)^T QN (.)
// with s^2 = 2 sigma^2. When fixed_initial_state is set, x0 = x0_breve and
// Q0 is ignored.
struct StateSpaceModel {
  MatrixXd A;
  std::vector<VectorXd> b;
  std::vector<VectorXd> c;
  bool fixed_initial_state = false;
  MatrixXd Q0;
  MatrixXd QN;
  VectorXd x0_breve;
  VectorXd xN_breve;
  VectorXd y_breve;
  std::vector<SegmentedCost> costs;
  RegSide side = RegSide::InputReg;

  Index state_dim() const { return A.rows(); }
  Index horizon() const { return static_cast<Index>(b.size()); }

  // The cost of coordinate n in the variable that the path tracks: u_n for
  // InputReg, y_n (already shifted by y_breve_n) for OutputReg.
  SegmentedCost variable_cost(Index n) const;
};

StateSpaceModel lasso_model(const MatrixXd& F, const VectorXd& y_breve,
                            std::vector<SegmentedCost> costs);
StateSpaceModel output_model(const MatrixXd& F, const VectorXd& y_breve,
                             std::vector<SegmentedCost> costs);
StateSpaceModel trend_filter_model(const VectorXd& y_breve);
StateSpaceModel median_smoother_model(const VectorXd& y_breve, double q0);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const StateSpaceModel& model);
// Throws ModelError listing the violations.
void require_valid(const StateSpaceModel& model);

struct Trajectory {
  std::vector<VectorXd> x; // x_0 .. x_N
  VectorXd y;              // y_1 .. y_N
};

Trajectory simulate(const StateSpaceModel& model, const VectorXd& x0, const VectorXd& u);

} // namespace l1path

#pragma once

#include <vector>

#include "l1path/gaussmp.hpp"
#include "l1path/plcost.hpp"
#include "l1path/ssm.hpp"

namespace l1path {

struct BffdOutput {
  VectorXd u_hat;
  VectorXd y_hat;
  std::vector<VectorXd> x_hat; // x_0 .. x_N
  VectorXd mb_U;               // NaN where b^T W b = 0
  VectorXd Vb_U;               // +inf where b^T W b = 0
  // Coordinates with a flat, zero-net-slope message and b^T W b = 0: they do
  // not influence the objective at all and were decided as 0.
  std::vector<bool> free_coordinate;
  // The fused x0 system was singular; x0_hat is the minimum-norm solution.
  bool x0_rank_deficient = false;
};

struct FfbddOutput {
  VectorXd y_hat;
  VectorXd u_hat;
  std::vector<VectorXd> xi_tilde_X; // X_0 .. X_N
  VectorXd xi_tilde_Y;
  VectorXd mf_Y;
  VectorXd Vf_Y;
  VectorXd x0_hat;
};

// Backward filtering, forward deciding. u_msgs[n] is the degenerate message
// of the active cost segment of u_n.
BffdOutput bffd(const StateSpaceModel& model, double sigma2,
                const std::vector<SegmentGaussParams>& u_msgs);

// Same for the plain LASSO layout y = F u with x0 = 0 and no observations.
BffdOutput bffd_matrix(const MatrixXd& F, const VectorXd& y_breve, double sigma2,
                       const std::vector<SegmentGaussParams>& u_msgs);

// Forward filtering, backward dual deciding. y_msgs[n] refers to y_n itself
// (point locations are absolute output values).
FfbddOutput ffbdd(const StateSpaceModel& model, double sigma2,
                  const std::vector<SegmentGaussParams>& y_msgs);

// Same for the layout y_n = F_n x0 with Q0 = I and no inputs.
FfbddOutput ffbdd_matrix(const MatrixXd& F, const VectorXd& y_breve, double sigma2,
                         const std::vector<SegmentGaussParams>& y_msgs);

// Generalized variants used for cross-checking: BFFD with arbitrary
// canonical observation messages, FFBDD with arbitrary moment input messages.
BffdOutput bffd_general(const StateSpaceModel& model, double sigma2,
                        const std::vector<SegmentGaussParams>& u_msgs,
                        const std::vector<GaussianMsg>& y_msgs);
FfbddOutput ffbdd_general(const StateSpaceModel& model, double sigma2,
                          const std::vector<SegmentGaussParams>& y_msgs,
                          const std::vector<GaussianMsg>& u_msgs);

struct CrosscheckReport {
  double u_discrepancy = 0.0;
  double y_discrepancy = 0.0;
  double x0_discrepancy = 0.0;
};

// Runs BFFD and FFBDD on the configuration both can handle: every input
// clamped to u_clamp, every observation a flat message with xi = y_xi.
// Requires a free initial state with invertible Q0.
CrosscheckReport gaussian_map_crosscheck(const StateSpaceModel& model, double sigma2,
                                         const VectorXd& u_clamp, const VectorXd& y_xi);
// Defaults: u_clamp = 0, y_xi = y_breve.
CrosscheckReport gaussian_map_crosscheck(const StateSpaceModel& model, double sigma2);

} // namespace l1path

#pragma once

// Reference solvers for testing. These do not use the message passing code
// or the shared linear algebra helpers; they work on the explicit dense
// quadratic program in (x0, u).

#include <cstddef>
#include <vector>

#include "l1path/ssm.hpp"

namespace l1path::oracle {

struct OptReport {
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool polished = false; // final point came from an exact fixed-assignment solve
};

struct InputSolution {
  VectorXd u;
  VectorXd x0;
  VectorXd y;
  OptReport report;
};

struct OutputSolution {
  VectorXd u;
  VectorXd x0;
  VectorXd y;
  OptReport report;
};

// Objective of the input-regularized problem with s^2 = 2 sigma2. x0 is
// ignored for a fixed initial state.
double objective_input(const StateSpaceModel& model, double sigma2, const VectorXd& x0,
                       const VectorXd& u);
double objective_output(const StateSpaceModel& model, double sigma2, const VectorXd& x0,
                        const VectorXd& u);

InputSolution solve_input_reg(const StateSpaceModel& model, double sigma2);
OutputSolution solve_output_reg(const StateSpaceModel& model, double sigma2);

// Largest coordinate-wise distance between the negative gradient of the
// quadratic part and s^2 times the subdifferential of the cost. A free x0 is
// minimized out first.
double kkt_residual_input(const StateSpaceModel& model, double sigma2, const VectorXd& u);
// Distance from -grad(quadratic) to the cone of admissible subgradient
// combinations of the output costs, measured in the max norm.
double kkt_residual_output(const StateSpaceModel& model, double sigma2, const VectorXd& x0,
                           const VectorXd& u);

// Minimizer when every coordinate is held to a given segment: lines act as
// linear penalties (no domain constraint), points clamp the variable.
struct FixedSolution {
  bool ok = false; // false if the linear system is singular or inconsistent
  VectorXd u;
  VectorXd x0;
  VectorXd y;
  // Point multipliers divided by s^2, NaN for line coordinates.
  VectorXd multiplier;
};
FixedSolution fixed_assignment_input(const StateSpaceModel& model, double sigma2,
                                     const std::vector<std::size_t>& segments);
FixedSolution fixed_assignment_output(const StateSpaceModel& model, double sigma2,
                                      const std::vector<std::size_t>& segments);

struct BruteForceResult {
  bool found = false;
  VectorXd estimate; // u for InputReg, y for OutputReg
  VectorXd u;
  VectorXd x0;
  VectorXd y;
  double objective = 0.0;
  std::vector<std::size_t> assignment;
};

// Enumerates all segment assignments (at most max_assignments of them).
BruteForceResult brute_force_active_sets(const StateSpaceModel& model, double sigma2,
                                         std::size_t max_assignments = 1u << 16);

} // namespace l1path::oracle

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "l1path/parametric.hpp"
#include "l1path/plcost.hpp"
#include "l1path/ssm.hpp"

namespace l1path {

// value(sigma2) = sigma2 * c1 + c0, per coordinate
struct AffineVec {
  VectorXd c1;
  VectorXd c0;
  VectorXd at(double sigma2) const { return sigma2 * c1 + c0; }
};

struct PathPiece {
  AffineVec estimate;      // u_hat (InputReg) or y_hat (OutputReg)
  AffineVec secondary;     // y_hat (InputReg) or u_hat (OutputReg)
  AffineVec initial_state; // x0_hat
};

struct PathEvent {
  double sigma2;
  Index n;
  std::size_t from;
  std::size_t to;
  std::size_t interval; // index of the first piece using the new segment
};

struct PathStats {
  std::size_t iterations = 0;
  double loop_seconds = 0.0;
  std::string start; // "flat", "redundancy" or "sweep"
};

// knots[0] = 0 < knots[1] < ... ; pieces[i] covers [knots[i], knots[i+1]),
// the last piece extends to infinity.
struct RegPath {
  RegSide side = RegSide::InputReg;
  std::vector<double> knots;
  std::vector<PathPiece> pieces;
  std::vector<std::size_t> initial_active;
  std::vector<PathEvent> events;
  bool truncated = false;
  PathStats stats;

  std::size_t size() const { return pieces.size(); }
  Index dim() const { return pieces.empty() ? 0 : pieces.front().estimate.c1.size(); }
  std::size_t interval_of(double sigma2) const;
  double sigma2_max() const { return knots.empty() ? 0.0 : knots.back(); }
  // Active segment index of every coordinate on interval i.
  std::vector<std::size_t> active_on(std::size_t interval) const;
};

struct PathOptions {
  double bootstrap_sigma2 = 1.0;
  std::size_t max_iterations = 0; // 0: 10 x total segment count
  std::size_t knot_limit = 0;     // stop after this many finite knots (0: no limit)
};

RegPath path_bffd(const StateSpaceModel& model, const PathOptions& opt = {});
RegPath path_ffbdd(const StateSpaceModel& model, const PathOptions& opt = {});
// Dispatches on model.side.
RegPath compute_path(const StateSpaceModel& model, const PathOptions& opt = {});

// Backward (or forward) message of one coordinate in scaled form:
// S mb = mu0 + mu1 sigma^2 and S Vb = nu1 sigma^2 with S >= 0. S = 1 for the
// moment form; PathBFFD uses S = b^T W b sigma^2 so that V = inf stays finite.
struct ScaledMsg {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double nu1 = 0.0;
  double scale = 1.0;
};

struct Exit {
  double sigma2 = kInf;
  int binding = -1; // index into in_subdomain_condition(seg), -1 if none
};

// Sup of sigma2 >= prev for which seg's condition holds. Throws PathError if
// it is violated at prev already. unit sets the sigma2 scale of the knot
// tolerance, 1e-9 (sigma2 + unit).
Exit coordinate_exit(const Segment& seg, const ScaledMsg& msg, double prev, double unit = 1.0);

double exit_sigma2(const Segment& seg, const ParamAffine<double>& mb,
                   const ParamAffine<double>& Vb, double prev_knot);

// Segment index after leaving `current` at knot through the given boundary.
std::size_t next_segment(const SegmentedCost& cost, std::size_t current,
                         const ParamAffine<double>& mb, const ParamAffine<double>& Vb,
                         double knot);

VectorXd eval_path(const RegPath& path, double sigma2);

enum class Series { Estimate, Secondary, InitialState };
VectorXd eval_path(const RegPath& path, double sigma2, Series series);

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

// Structural checks: knots strictly increasing, continuity at knots,
// second differences within intervals.
std::vector<CheckResult> check_path_structure(const RegPath& path);

std::string path_to_json(const RegPath& path);
RegPath path_from_json(const std::string& text);

} // namespace l1path

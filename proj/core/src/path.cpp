#include "l1path/path.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "l1path/error.hpp"
#include "l1path/linalg.hpp"
#include "l1path/solvers.hpp"
#include "l1path/tolerance.hpp"

namespace l1path {

namespace {

// Violations smaller than this (relative to the magnitudes entering the
// condition) are rounding noise.
constexpr double kViolationTol = 1e-7;
// Slopes this small relative to their ingredients are treated as zero.
constexpr double kFlatSlope = 1e-12;
// A condition that is slightly negative but recovers within this many knot
// tolerances is not reported as violated.
constexpr double kRecoverFactor = 1e3;
// The knot tolerance unit relative to the largest exit of the first pass.
constexpr double kUnitFraction = 1e-6;
// Knots below this fraction of the largest first-pass exit are cancellation
// noise, and so are exits above its inverse.
constexpr double kNoiseFloor = 1e-10;

struct Constraint {
  double c0, c1;
  double mag0, mag1;
  LinearCondition::Side side;
};

std::vector<Constraint> scaled_constraints(const Segment& seg, const ScaledMsg& s) {
  std::vector<Constraint> out;
  for (const LinearCondition& k : in_subdomain_condition(seg)) {
    Constraint c;
    c.c0 = k.coef_m * s.mu0 + k.constant * s.scale;
    c.c1 = k.coef_m * s.mu1 + k.coef_v * s.nu1;
    c.mag0 = std::abs(k.coef_m * s.mu0) + std::abs(k.constant * s.scale);
    c.mag1 = std::abs(k.coef_m * s.mu1) + std::abs(k.coef_v * s.nu1);
    if (std::abs(c.c1) <= kFlatSlope * c.mag1) c.c1 = 0.0;
    c.side = k.side;
    out.push_back(c);
  }
  return out;
}

bool violated_at(const Constraint& c, double t, double unit) {
  if (t == kInf) return c.c1 < 0 || (c.c1 == 0 && c.c0 < -kViolationTol * c.mag0);
  const double v = c.c0 + c.c1 * t;
  // A value that recovers within the knot tolerance in sigma2 is not a
  // violation either; this matters at sigma2 = 0 where mags can vanish.
  const double horizon = std::max(kRecoverFactor * tol::knot(t, unit),
                                  kNoiseFloor / kUnitFraction * unit);
  const double slack = std::max(kViolationTol * (c.mag0 + c.mag1 * t), std::max(c.c1, 0.0) * horizon);
  return v < -slack;
}

std::string describe(const Segment& seg) {
  std::ostringstream os;
  if (seg.is_point()) os << "point {" << seg.location << "}";
  else os << "line slope " << seg.slope << " on (" << seg.lo << ", " << seg.hi << ")";
  return os.str();
}

// Entry when walking sigma2 downward from prev: inf of t in [0, prev] such
// that the constraint holds on [t, prev].
// Entries at or below floor count as 0.
Exit coordinate_entry(const Segment& seg, const ScaledMsg& msg, double prev, double floor,
                      double unit) {
  Exit best{0.0, -1};
  const auto cs = scaled_constraints(seg, msg);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Constraint& c = cs[i];
    if (violated_at(c, prev, unit))
      throw PathError("descending sweep: condition of " + describe(seg) + " violated at " +
                      std::to_string(prev));
    if (c.c1 <= 0) continue;
    const double t = std::clamp(-c.c0 / c.c1, 0.0, prev);
    if (t <= floor) continue;
    if (best.binding >= 0 && std::abs(t - best.sigma2) <= tol::knot(t, unit) && seg.is_point())
      throw PathError("both boundaries of " + describe(seg) + " bind at sigma2=" + std::to_string(t));
    if (best.binding < 0 || t > best.sigma2) best = {t, static_cast<int>(i)};
  }
  if (best.binding >= 0 && best.sigma2 <= 0.0) best.binding = -1;
  return best;
}

std::size_t step_segment(const SegmentedCost& cost, std::size_t current,
                         LinearCondition::Side side) {
  if (side == LinearCondition::Lower) {
    if (current == 0) throw PathError("no segment left of segment 0");
    return current - 1;
  }
  if (current + 1 >= cost.size()) throw PathError("no segment right of the last segment");
  return current + 1;
}

struct PassResult {
  std::vector<ScaledMsg> msgs;
  PathPiece piece;
};
using PassFn = std::function<PassResult(const std::vector<Segment>&)>;

// A failure before the first positive knot, i.e. the start was inconsistent.
class StartFailure : public PathError {
public:
  using PathError::PathError;
};

std::size_t iteration_cap(const std::vector<SegmentedCost>& costs, const PathOptions& opt) {
  if (opt.max_iterations) return opt.max_iterations;
  std::size_t total = 0;
  for (const auto& c : costs) total += c.size();
  return 10 * std::max<std::size_t>(total, 1);
}

std::vector<Segment> segments_of(const std::vector<SegmentedCost>& costs,
                                 const std::vector<std::size_t>& active) {
  std::vector<Segment> s;
  s.reserve(active.size());
  for (std::size_t n = 0; n < active.size(); ++n) s.push_back(costs[n].segment(active[n]));
  return s;
}

RegPath run_upward(const std::vector<SegmentedCost>& costs, const PassFn& pass,
                   std::vector<std::size_t> active, const PathOptions& opt) {
  RegPath path;
  path.initial_active = active;
  path.knots.push_back(0.0);
  const std::size_t cap = iteration_cap(costs, opt);
  const std::size_t N = costs.size();
  double prev = 0.0;
  // sigma2 unit of the knot tolerance, fixed from the first pass with a
  // positive candidate exit. An absolute unit would merge every interval of
  // problems whose knots are all tiny.
  double unit = 0.0;
  std::vector<Exit> exits(N);
  const auto t0 = std::chrono::steady_clock::now();

  for (;;) {
    if (++path.stats.iterations > cap)
      throw PathError("iteration cap " + std::to_string(cap) + " exceeded at sigma2=" +
                      std::to_string(prev) + " after " + std::to_string(path.knots.size()) +
                      " knots");
    PassResult res;
    try {
      res = pass(segments_of(costs, active));
    } catch (const SingularError& e) {
      if (path.pieces.empty()) throw StartFailure(e.what());
      throw;
    }
    if (unit == 0.0) {
      double top = 0.0;
      for (std::size_t n = 0; n < N; ++n)
        for (const Constraint& c : scaled_constraints(costs[n].segment(active[n]), res.msgs[n]))
          if (c.c1 < 0) top = std::max(top, -c.c0 / c.c1);
      if (top > 0.0 && top < kInf) unit = kUnitFraction * top;
    }
    double t = kInf;
    for (std::size_t n = 0; n < N; ++n) {
      try {
        exits[n] = coordinate_exit(costs[n].segment(active[n]), res.msgs[n], prev,
                                   unit > 0.0 ? unit : 1.0);
      } catch (const PathError& e) {
        std::string what = "coordinate " + std::to_string(n + 1) + ": " + e.what();
        if (path.pieces.empty()) throw StartFailure(what);
        throw PathError(what);
      }
      // Far above the knot scale an exit comes from a slope that is
      // cancellation noise; the true condition holds for good.
      if (unit > 0.0 && exits[n].sigma2 > unit / (kUnitFraction * kNoiseFloor))
        exits[n] = Exit{};
      t = std::min(t, exits[n].sigma2);
    }
    const double u = unit > 0.0 ? unit : 1.0;
    const bool zero_length = t <= prev + tol::knot(prev, u);
    // A start that only holds up to cancellation noise is not a start.
    if (path.pieces.empty() && !zero_length && unit > 0.0 && t < kNoiseFloor * (unit / kUnitFraction))
      throw StartFailure("start active set is valid only below sigma2=" + std::to_string(t));
    if (!zero_length) {
      path.pieces.push_back(std::move(res.piece));
      if (t == kInf) break;
    }
    const double at = zero_length ? prev : t;
    const double limit = at + tol::knot(at, u);
    std::size_t n = 0;
    while (exits[n].sigma2 > limit) ++n;
    const Segment& seg = costs[n].segment(active[n]);
    const auto side = in_subdomain_condition(seg)[static_cast<std::size_t>(exits[n].binding)].side;
    const std::size_t to = step_segment(costs[n], active[n], side);
    path.events.push_back({at, static_cast<Index>(n), active[n], to, path.pieces.size()});
    active[n] = to;
    if (!zero_length) {
      path.knots.push_back(t);
      prev = t;
      if (opt.knot_limit && path.knots.size() - 1 > opt.knot_limit) {
        path.truncated = true;
        // the last piece is only valid up to the dropped knot
        path.knots.pop_back();
        path.events.pop_back();
        break;
      }
    }
  }
  path.stats.loop_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return path;
}

// Walks sigma2 from infinity down to 0 starting with every coordinate on
// the point minimizing its cost. Returns the active set valid on (0, eps).
std::vector<std::size_t> sweep_down(const std::vector<SegmentedCost>& costs, const PassFn& pass,
                                    const PathOptions& opt) {
  const std::size_t N = costs.size();
  std::vector<std::size_t> active(N);
  for (std::size_t n = 0; n < N; ++n) {
    active[n] = costs[n].argmin_point();
    if (active[n] == SegmentedCost::npos)
      throw PathError("cannot determine the path start: cost of coordinate " +
                      std::to_string(n + 1) + " has no unique minimizing point");
  }
  const std::size_t cap = iteration_cap(costs, opt);
  double prev = kInf;
  double floor = 0.0, unit = 1.0;
  std::vector<Exit> entries(N);
  for (std::size_t it = 0;; ++it) {
    if (it > cap) throw PathError("descending sweep: iteration cap exceeded");
    PassResult res = pass(segments_of(costs, active));
    double t = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      entries[n] = coordinate_entry(costs[n].segment(active[n]), res.msgs[n], prev, floor, unit);
      t = std::max(t, entries[n].sigma2);
    }
    if (t <= 0.0) return active;
    // The first entry is the largest knot. Far below it, remaining entries
    // are cancellation noise of constraints that hold down to 0.
    if (floor == 0.0) {
      floor = kNoiseFloor * t;
      unit = kUnitFraction * t;
    }
    const double lim = t - tol::knot(t, unit);
    std::size_t n = 0;
    while (!(entries[n].binding >= 0 && entries[n].sigma2 >= lim)) ++n;
    const Segment& seg = costs[n].segment(active[n]);
    const auto side = in_subdomain_condition(seg)[static_cast<std::size_t>(entries[n].binding)].side;
    active[n] = step_segment(costs[n], active[n], side);
    prev = std::min(prev, t);
  }
}

// Inputs whose effect on every quadratic term can be reproduced by the free
// directions of x0 and earlier non-redundant inputs, with later inputs held
// fixed. Forward greedy, so earlier variables win.
std::vector<bool> redundant_inputs(const StateSpaceModel& m) {
  const Index N = m.horizon(), M = m.state_dim();
  std::vector<MatrixXd> O(static_cast<std::size_t>(N));
  MatrixXd Ob = m.QN;
  for (Index n = N - 1; n >= 0; --n) {
    const VectorXd& c = m.c[static_cast<std::size_t>(n)];
    Ob.noalias() += c * c.transpose();
    O[static_cast<std::size_t>(n)] = Ob;
    Ob = m.A.transpose() * Ob * m.A;
  }
  MatrixXd D(M, 0);
  if (!m.fixed_initial_state) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.Q0);
    const double top = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Index> cols;
    for (Index i = 0; i < M; ++i)
      if (es.eigenvalues()(i) <= tol::cond * top) cols.push_back(i);
    D.resize(M, static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) D.col(static_cast<Index>(j)) = es.eigenvectors().col(cols[j]);
  }
  std::vector<bool> red(static_cast<std::size_t>(N), false);
  for (Index n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const VectorXd& b = m.b[k];
    const MatrixXd& On = O[k];
    MatrixXd G = m.A * D;
    VectorXd y = On * b;
    double res;
    if (G.cols() == 0) {
      res = y.norm();
    } else {
      MatrixXd Z = On * G;
      VectorXd alpha = Z.completeOrthogonalDecomposition().solve(y);
      res = (y - Z * alpha).norm();
    }
    const double onorm = On.size() ? On.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
    red[k] = b.norm() == 0.0 || res <= 1e-9 * onorm * b.norm();
    if (!red[k]) {
      G.conservativeResize(M, G.cols() + 1);
      G.col(G.cols() - 1) = b;
    }
    if (G.cols() == 0) {
      D.resize(M, 0);
      continue;
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(G);
    qr.setThreshold(1e-10);
    const Index r = qr.rank();
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(M, r);
    const VectorXd& c = m.c[k];
    Eigen::RowVectorXd w = c.transpose() * Q;
    if (r == 0 || w.norm() <= 1e-12 * c.norm() || c.norm() == 0.0) {
      D = Q;
    } else {
      Eigen::JacobiSVD<MatrixXd> svd(MatrixXd(w), Eigen::ComputeFullV);
      D = Q * svd.matrixV().rightCols(r - 1);
    }
  }
  return red;
}

// Costs with infinite outer slopes do not cover the real line. A start value
// outside the domain is moved to the nearest boundary point; if that guess is
// wrong the first pass reports a violated condition.
std::size_t locate_clamped(const SegmentedCost& cost, double z) {
  const auto& bp = cost.breakpoints();
  if (!bp.empty() && z < bp.front() && cost.slopes().front() == -kInf) return 0;
  if (!bp.empty() && z > bp.back() && cost.slopes().back() == kInf) return cost.size() - 1;
  return locate(cost, z);
}

std::vector<std::size_t> locate_all(const std::vector<SegmentedCost>& costs, const VectorXd& z) {
  std::vector<std::size_t> a(costs.size());
  for (std::size_t n = 0; n < costs.size(); ++n) a[n] = locate_clamped(costs[n], z(static_cast<Index>(n)));
  return a;
}

// Start message: flat with zero slope, or the point itself for a cost that
// consists of a single point.
SegmentGaussParams start_params(const SegmentedCost& cost) {
  if (cost.size() == 1) return segment_params(cost.segment(0));
  return SegmentGaussParams::flat(0.0);
}

AffineVec affine_of(const std::vector<ParamAffine<double>>& v) {
  AffineVec a{VectorXd(static_cast<Index>(v.size())), VectorXd(static_cast<Index>(v.size()))};
  for (std::size_t i = 0; i < v.size(); ++i) {
    a.c1(static_cast<Index>(i)) = v[i].c1;
    a.c0(static_cast<Index>(i)) = v[i].c0;
  }
  return a;
}

} // namespace

std::size_t RegPath::interval_of(double sigma2) const {
  if (knots.empty()) throw PathError("empty path");
  auto it = std::upper_bound(knots.begin(), knots.end(), sigma2);
  if (it == knots.begin()) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(it - knots.begin()) - 1, pieces.size() - 1);
}

std::vector<std::size_t> RegPath::active_on(std::size_t interval) const {
  std::vector<std::size_t> a = initial_active;
  for (const PathEvent& e : events)
    if (e.interval <= interval) a[static_cast<std::size_t>(e.n)] = e.to;
  return a;
}

Exit coordinate_exit(const Segment& seg, const ScaledMsg& msg, double prev, double unit) {
  Exit best;
  const auto cs = scaled_constraints(seg, msg);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Constraint& c = cs[i];
    if (violated_at(c, prev, unit)) {
      std::ostringstream os;
      os << std::setprecision(17) << "condition of " << describe(seg) << " violated at sigma2="
         << prev << " (value " << c.c0 + c.c1 * prev << ", slope " << c.c1 << ")";
      throw PathError(os.str());
    }
    if (c.c1 >= 0) continue;
    const double t = std::max(prev, -c.c0 / c.c1);
    if (best.binding >= 0 && std::abs(t - best.sigma2) <= tol::knot(t, unit) && seg.is_point())
      throw PathError("both boundaries of " + describe(seg) + " bind at sigma2=" + std::to_string(t));
    if (t < best.sigma2) best = {t, static_cast<int>(i)};
  }
  return best;
}

double exit_sigma2(const Segment& seg, const ParamAffine<double>& mb,
                   const ParamAffine<double>& Vb, double prev_knot) {
  if (mb.param != Param::Sigma2 || Vb.param != Param::Sigma2 || Vb.c0 != 0.0)
    throw DegreeError("exit_sigma2: mb must be affine and Vb linear in sigma^2");
  if (Vb.c1 < -tol::num) throw PathError("exit_sigma2: negative variance coefficient");
  return coordinate_exit(seg, {mb.c0, mb.c1, Vb.c1, 1.0}, prev_knot).sigma2;
}

std::size_t next_segment(const SegmentedCost& cost, std::size_t current,
                         const ParamAffine<double>& mb, const ParamAffine<double>& Vb,
                         double knot) {
  const Segment& seg = cost.segment(current);
  const auto conds = in_subdomain_condition(seg);
  const auto cs = scaled_constraints(seg, {mb.c0, mb.c1, Vb.c1, 1.0});
  int binding = -1;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Constraint& c = cs[i];
    if (c.c1 >= 0) continue;
    const double root = -c.c0 / c.c1;
    if (std::abs(root - knot) > tol::knot(knot) + kViolationTol * (c.mag0 / -c.c1)) continue;
    if (binding >= 0) throw PathError("next_segment: both boundaries of " + describe(seg) + " bind");
    binding = static_cast<int>(i);
  }
  if (binding < 0) throw PathError("next_segment: no condition of " + describe(seg) + " binds at the knot");
  return step_segment(cost, current, conds[static_cast<std::size_t>(binding)].side);
}

RegPath path_bffd(const StateSpaceModel& model, const PathOptions& opt) {
  require_valid(model);
  if (model.side != RegSide::InputReg) throw ModelError("path_bffd: model must be InputReg");
  const std::vector<SegmentedCost>& costs = model.costs;
  const Index N = model.horizon();

  PassFn pass = [&](const std::vector<Segment>& segs) {
    ParamBffdOutput o = param_bffd(model, segs);
    PassResult r;
    r.msgs.resize(static_cast<std::size_t>(N));
    for (Index n = 0; n < N; ++n) r.msgs[static_cast<std::size_t>(n)] = {o.g1(n), o.g0(n), 1.0, o.P1(n)};
    r.piece.estimate = affine_of(o.u_hat);
    r.piece.secondary = affine_of(o.y_hat);
    r.piece.initial_state = {o.X1.col(0), o.X0.col(0)};
    return r;
  };

  // Line 2 of the algorithm: one run with flat zero-slope input messages.
  // Inputs that cannot be told apart from x0 or earlier inputs start on the
  // minimizing point of their cost instead.
  std::vector<bool> red = redundant_inputs(model);
  const bool any_red = std::find(red.begin(), red.end(), true) != red.end();
  std::vector<SegmentGaussParams> msgs;
  bool usable = true;
  for (Index n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    if (red[k]) {
      const std::size_t p = costs[k].argmin_point();
      if (p == SegmentedCost::npos) {
        usable = false;
        break;
      }
      msgs.push_back(segment_params(costs[k].segment(p)));
    } else {
      msgs.push_back(start_params(costs[k]));
    }
  }
  std::vector<std::size_t> start;
  if (usable) {
    try {
      BffdOutput b = bffd(model, opt.bootstrap_sigma2, msgs);
      const bool clean = !b.x0_rank_deficient &&
                         std::find(b.free_coordinate.begin(), b.free_coordinate.end(), true) ==
                             b.free_coordinate.end();
      if (clean) start = locate_all(costs, b.u_hat);
    } catch (const SingularError&) {
    }
  }
  if (!start.empty()) {
    try {
      RegPath p = run_upward(costs, pass, start, opt);
      p.side = RegSide::InputReg;
      p.stats.start = any_red ? "redundancy" : "flat";
      return p;
    } catch (const StartFailure&) {
    }
  }
  RegPath p = run_upward(costs, pass, sweep_down(costs, pass, opt), opt);
  p.side = RegSide::InputReg;
  p.stats.start = "sweep";
  return p;
}

RegPath path_ffbdd(const StateSpaceModel& model, const PathOptions& opt) {
  require_valid(model);
  if (model.side != RegSide::OutputReg) throw ModelError("path_ffbdd: model must be OutputReg");
  const Index N = model.horizon();
  std::vector<SegmentedCost> costs;
  for (Index n = 0; n < N; ++n) costs.push_back(model.variable_cost(n));

  PassFn pass = [&](const std::vector<Segment>& segs) {
    ParamFfbddOutput o = param_ffbdd(model, segs);
    PassResult r;
    r.msgs.resize(static_cast<std::size_t>(N));
    for (Index n = 0; n < N; ++n) {
      const auto k = static_cast<std::size_t>(n);
      r.msgs[k] = {o.mf_Y[k].c0, o.mf_Y[k].c1, o.Vf_Y[k].c1, 1.0};
    }
    r.piece.estimate = affine_of(o.y_hat);
    r.piece.secondary = affine_of(o.u_hat);
    r.piece.initial_state = {o.x0_hat.c1, o.x0_hat.c0};
    return r;
  };

  std::vector<SegmentGaussParams> msgs;
  for (const SegmentedCost& k : costs) msgs.push_back(start_params(k));
  FfbddOutput f = ffbdd(model, opt.bootstrap_sigma2, msgs);
  try {
    RegPath p = run_upward(costs, pass, locate_all(costs, f.y_hat), opt);
    p.side = RegSide::OutputReg;
    p.stats.start = "flat";
    return p;
  } catch (const StartFailure& e) {
    throw PathError(e.what());
  }
}

RegPath compute_path(const StateSpaceModel& model, const PathOptions& opt) {
  return model.side == RegSide::InputReg ? path_bffd(model, opt) : path_ffbdd(model, opt);
}

VectorXd eval_path(const RegPath& path, double sigma2, Series series) {
  if (!(sigma2 >= 0)) throw PathError("eval_path: sigma2 must be nonnegative");
  const PathPiece& p = path.pieces.at(path.interval_of(sigma2));
  switch (series) {
  case Series::Estimate: return p.estimate.at(sigma2);
  case Series::Secondary: return p.secondary.at(sigma2);
  case Series::InitialState: return p.initial_state.at(sigma2);
  }
  return {};
}

VectorXd eval_path(const RegPath& path, double sigma2) {
  return eval_path(path, sigma2, Series::Estimate);
}

std::vector<CheckResult> check_path_structure(const RegPath& path) {
  std::vector<CheckResult> out;
  {
    bool ok = !path.knots.empty() && path.knots.front() == 0.0 &&
              path.pieces.size() == path.knots.size();
    std::string detail;
    for (std::size_t i = 1; ok && i < path.knots.size(); ++i)
      if (!(path.knots[i] > path.knots[i - 1])) {
        ok = false;
        detail = "knot " + std::to_string(i) + " does not increase";
      }
    if (!ok && detail.empty()) detail = "knots/pieces malformed";
    out.push_back({"knots", ok, detail});
  }
  {
    bool ok = true;
    std::string detail;
    const std::size_t np = std::min(path.pieces.size(), path.knots.size());
    for (std::size_t i = 1; i < np; ++i) {
      const double t = path.knots[i];
      const PathPiece& a = path.pieces[i - 1];
      const PathPiece& b = path.pieces[i];
      auto cmp = [&](const AffineVec& x, const AffineVec& y, const char* what) {
        VectorXd u = x.at(t), v = y.at(t);
        for (Index n = 0; n < u.size(); ++n) {
          const double gap = std::abs(u(n) - v(n));
          if (gap > tol::knot(t) * (1.0 + std::max(std::abs(u(n)), std::abs(v(n))))) {
            if (ok) {
              std::ostringstream os;
              os << what << " jumps by " << gap << " at knot " << i << " (sigma2=" << t
                 << ", coordinate " << n + 1 << ")";
              detail = os.str();
            }
            ok = false;
          }
        }
      };
      cmp(a.estimate, b.estimate, "estimate");
      cmp(a.secondary, b.secondary, "secondary");
      cmp(a.initial_state, b.initial_state, "initial state");
    }
    out.push_back({"continuity", ok, detail});
  }
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < path.pieces.size() && i < path.knots.size(); ++i) {
      const double lo = path.knots[i];
      const double hi = i + 1 < path.knots.size() ? path.knots[i + 1] : 2.0 * lo + 1.0;
      const double h = (hi - lo) / 4.0;
      const VectorXd f1 = eval_path(path, lo + h), f2 = eval_path(path, lo + 2 * h),
                     f3 = eval_path(path, lo + 3 * h);
      const VectorXd d2 = f1 - 2.0 * f2 + f3;
      for (Index n = 0; n < d2.size(); ++n) {
        const double scale = 1.0 + f1.cwiseAbs()(n) + f2.cwiseAbs()(n) + f3.cwiseAbs()(n);
        if (std::abs(d2(n)) > tol::num * scale) {
          if (ok) detail = "interval " + std::to_string(i) + " is not affine";
          ok = false;
        }
      }
    }
    out.push_back({"affinity", ok, detail});
  }
  return out;
}

} // namespace l1path

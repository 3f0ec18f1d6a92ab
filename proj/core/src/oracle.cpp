#include "l1path/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "l1path/error.hpp"

namespace l1path::oracle {

namespace {

constexpr double kInfty = std::numeric_limits<double>::infinity();

// Convex piecewise linear function, zero at bp[0]. sl has one more entry than
// bp; infinite outer slopes bound the domain.
struct Pl {
  std::vector<double> bp, sl;

  double eval(double t) const {
    if (bp.empty()) return sl[0] * t;
    if (t < bp[0]) return sl[0] == -kInfty ? kInfty : sl[0] * (t - bp[0]);
    double acc = 0.0;
    for (std::size_t i = 0; i < bp.size(); ++i) {
      if (t <= bp[i]) break;
      const double s = sl[i + 1];
      const double end = i + 1 < bp.size() ? std::min(t, bp[i + 1]) : t;
      if (s == kInfty) return kInfty;
      acc += s * (end - bp[i]);
    }
    return acc;
  }
};

Pl pl_of(const SegmentedCost& c) { return {c.breakpoints(), c.slopes()}; }

// Convex conjugate (up to an additive constant per piece, which is fixed by
// continuity and irrelevant for minimization).
Pl conjugate(const Pl& f) {
  Pl g;
  const std::size_t m = f.bp.size();
  if (std::isfinite(f.sl.front())) {
    g.bp.push_back(f.sl.front());
    g.sl.push_back(-kInfty);
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) g.bp.push_back(f.sl[i]);
    g.sl.push_back(f.bp[i]);
  }
  if (std::isfinite(f.sl.back())) {
    g.bp.push_back(f.sl.back());
    g.sl.push_back(kInfty);
  }
  return g;
}

double weighted(double w, double v) {
  if (v == kInfty) return kInfty;
  return w * v;
}

// argmin of h t^2 - 2 g t + w f(t), h >= 0, w >= 0.
double scalar_min(double h, double g, double w, const Pl& f) {
  auto obj = [&](double t) { return h * t * t - 2.0 * g * t + weighted(w, f.eval(t)); };
  if (h <= 0.0) {
    if (std::isfinite(f.sl.front()) && -2.0 * g + w * f.sl.front() > 0.0)
      throw Error("oracle: subproblem unbounded below");
    if (std::isfinite(f.sl.back()) && -2.0 * g + w * f.sl.back() < 0.0)
      throw Error("oracle: subproblem unbounded below");
  }
  double best = 0.0, best_val = kInfty;
  auto consider = [&](double t) {
    const double v = obj(t);
    if (v < best_val) {
      best_val = v;
      best = t;
    }
  };
  for (double b : f.bp) consider(b);
  if (h > 0.0) {
    for (std::size_t j = 0; j < f.sl.size(); ++j) {
      if (!std::isfinite(f.sl[j])) continue;
      const double lo = j == 0 ? -kInfty : f.bp[j - 1];
      const double hi = j == f.bp.size() ? kInfty : f.bp[j];
      consider(std::clamp((2.0 * g - w * f.sl[j]) / (2.0 * h), lo, hi));
    }
  } else if (f.bp.empty()) {
    consider(0.0);
  }
  return best;
}

struct LinSolve {
  VectorXd x;
  bool singular = false;
  bool consistent = true;
};

// Gaussian elimination with complete pivoting. Variables without a usable
// pivot are set to zero.
LinSolve gauss(const MatrixXd& M0, const VectorXd& b0) {
  const Index n = M0.rows(), m = M0.cols();
  MatrixXd M = M0;
  VectorXd b = b0;
  std::vector<Index> col(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) col[static_cast<std::size_t>(j)] = j;
  const double scale = M0.size() ? M0.cwiseAbs().maxCoeff() : 0.0;
  const double piv_tol = 1e-12 * scale;
  Index rank = 0;
  for (Index k = 0; k < std::min(n, m); ++k) {
    Index pr = k, pc = k;
    double big = 0.0;
    for (Index i = k; i < n; ++i)
      for (Index j = k; j < m; ++j)
        if (std::abs(M(i, j)) > big) {
          big = std::abs(M(i, j));
          pr = i;
          pc = j;
        }
    if (big <= piv_tol || big == 0.0) break;
    M.row(k).swap(M.row(pr));
    std::swap(b(k), b(pr));
    M.col(k).swap(M.col(pc));
    std::swap(col[static_cast<std::size_t>(k)], col[static_cast<std::size_t>(pc)]);
    for (Index i = k + 1; i < n; ++i) {
      const double f = M(i, k) / M(k, k);
      if (f == 0.0) continue;
      for (Index j = k; j < m; ++j) M(i, j) -= f * M(k, j);
      b(i) -= f * b(k);
    }
    ++rank;
  }
  VectorXd y = VectorXd::Zero(m);
  for (Index k = rank - 1; k >= 0; --k) {
    double s = b(k);
    for (Index j = k + 1; j < rank; ++j) s -= M(k, j) * y(j);
    y(k) = s / M(k, k);
  }
  LinSolve out;
  out.x = VectorXd::Zero(m);
  for (Index j = 0; j < m; ++j) out.x(col[static_cast<std::size_t>(j)]) = y(j);
  out.singular = rank < m;
  const double res = (M0 * out.x - b0).norm();
  out.consistent = res <= 1e-8 * (scale * out.x.norm() + b0.norm() + 1e-300);
  return out;
}

MatrixXd inverse(const MatrixXd& H) {
  MatrixXd inv(H.rows(), H.cols());
  for (Index j = 0; j < H.cols(); ++j) {
    LinSolve s = gauss(H, VectorXd::Unit(H.rows(), j));
    if (s.singular) throw SingularError("oracle: quadratic part is singular");
    inv.col(j) = s.x;
  }
  return inv;
}

// Dense quadratic program in z = (x0 if free, u):
//   quad(z) = z^T H z - 2 r^T z + c,  y = Y z + yoff.
struct Qp {
  Index nx = 0;
  Index N = 0;
  MatrixXd H;
  VectorXd r;
  double c = 0.0;
  MatrixXd Y;
  VectorXd yoff;
  Index nz() const { return nx + N; }
  double quad(const VectorXd& z) const { return z.dot(H * z) - 2.0 * r.dot(z) + c; }
};

Qp build(const StateSpaceModel& m) {
  const Index M = m.state_dim(), N = m.horizon();
  Qp q;
  q.nx = m.fixed_initial_state ? 0 : M;
  q.N = N;
  const Index nz = q.nz();
  q.H = MatrixXd::Zero(nz, nz);
  q.r = VectorXd::Zero(nz);
  q.Y = MatrixXd::Zero(N, nz);
  q.yoff = VectorXd::Zero(N);
  const VectorXd x0b = m.x0_breve.size() == M ? m.x0_breve : VectorXd::Zero(M);
  MatrixXd Sx = MatrixXd::Identity(M, M);
  MatrixXd Su = MatrixXd::Zero(M, N);
  for (Index n = 0; n < N; ++n) {
    Sx = m.A * Sx;
    Su = m.A * Su;
    Su.col(n) += m.b[static_cast<std::size_t>(n)];
    const VectorXd& c = m.c[static_cast<std::size_t>(n)];
    if (q.nx) q.Y.row(n).head(q.nx) = c.transpose() * Sx;
    q.Y.row(n).tail(N) = c.transpose() * Su;
    if (!q.nx) q.yoff(n) = c.dot(Sx * x0b);
  }
  auto add = [&](const MatrixXd& J, const VectorXd& t, const MatrixXd& W) {
    q.H += J.transpose() * W * J;
    q.r += J.transpose() * (W * t);
    q.c += t.dot(W * t);
  };
  if (q.nx) {
    MatrixXd J = MatrixXd::Zero(M, nz);
    J.leftCols(M).setIdentity();
    add(J, x0b, m.Q0);
  }
  if (m.side == RegSide::InputReg) {
    add(q.Y, m.y_breve - q.yoff, MatrixXd::Identity(N, N));
  } else {
    MatrixXd J = MatrixXd::Zero(N, nz);
    J.rightCols(N).setIdentity();
    add(J, VectorXd::Zero(N), MatrixXd::Identity(N, N));
  }
  if (m.QN.size() && m.QN.cwiseAbs().maxCoeff() > 0.0) {
    MatrixXd J(M, nz);
    if (q.nx) J.leftCols(M) = Sx;
    J.rightCols(N) = Su;
    const VectorXd xNb = m.xN_breve.size() == M ? m.xN_breve : VectorXd::Zero(M);
    add(J, xNb - (q.nx ? VectorXd::Zero(M) : VectorXd(Sx * x0b)), m.QN);
  }
  q.H = 0.5 * (q.H + q.H.transpose());
  return q;
}

VectorXd stack(const Qp& q, const VectorXd& x0, const VectorXd& u) {
  if (u.size() != q.N) throw DimensionError("oracle: u has wrong length");
  VectorXd z(q.nz());
  if (q.nx) {
    if (x0.size() != q.nx) throw DimensionError("oracle: x0 has wrong length");
    z.head(q.nx) = x0;
  }
  z.tail(q.N) = u;
  return z;
}

// Subdifferential interval of a cost at t; empty (lo > hi) outside the domain.
std::pair<double, double> subdiff(const SegmentedCost& cost, double t, double tol = 1e-7) {
  for (const Segment& s : cost.segments())
    if (s.is_point() && std::abs(t - s.location) <= tol * (1.0 + std::abs(s.location)))
      return {s.left_slope, s.right_slope};
  for (const Segment& s : cost.segments())
    if (s.is_line() && t > s.lo && t < s.hi) return {s.slope, s.slope};
  return {kInfty, -kInfty};
}

std::size_t classify(const SegmentedCost& cost, double t, double tol = 1e-7) {
  std::size_t nearest = 0;
  double dist = kInfty;
  for (std::size_t i = 0; i < cost.size(); ++i) {
    const Segment& s = cost.segment(i);
    if (s.is_point()) {
      const double d = std::abs(t - s.location);
      if (d <= tol * (1.0 + std::abs(s.location))) return i;
      if (d < dist) {
        dist = d;
        nearest = i;
      }
    }
  }
  for (std::size_t i = 0; i < cost.size(); ++i) {
    const Segment& s = cost.segment(i);
    if (s.is_line() && t > s.lo && t < s.hi) return i;
  }
  return nearest;
}

double bound(double w, double slope) { return std::isinf(slope) ? slope : w * slope; }

double dist_to(double v, double lo, double hi) {
  if (lo > hi) return kInfty;
  if (v < lo) return lo - v;
  if (v > hi) return v - hi;
  return 0.0;
}

bool in_closure(const Segment& s, double t, double tol) {
  const double slack = tol * (1.0 + std::abs(t));
  return t >= s.lo - slack && t <= s.hi + slack;
}

bool mult_ok(const Segment& s, double g, double tol) {
  const double slack = tol * (1.0 + std::abs(g));
  return g >= s.left_slope - slack && g <= s.right_slope + slack;
}

constexpr double kFeasTol = 1e-8;

bool feasible_input(const StateSpaceModel& m, const std::vector<std::size_t>& a,
                    const FixedSolution& f) {
  for (Index n = 0; n < m.horizon(); ++n) {
    const Segment& s = m.costs[static_cast<std::size_t>(n)].segment(a[static_cast<std::size_t>(n)]);
    if (s.is_line() ? !in_closure(s, f.u(n), kFeasTol) : !mult_ok(s, f.multiplier(n), kFeasTol))
      return false;
  }
  return true;
}

bool feasible_output(const StateSpaceModel& m, const std::vector<std::size_t>& a,
                     const FixedSolution& f) {
  for (Index n = 0; n < m.horizon(); ++n) {
    const Segment& s = m.costs[static_cast<std::size_t>(n)].segment(a[static_cast<std::size_t>(n)]);
    if (s.is_line() ? !in_closure(s, f.y(n) - m.y_breve(n), kFeasTol)
                    : !mult_ok(s, f.multiplier(n), kFeasTol))
      return false;
  }
  return true;
}

FixedSolution fixed_input(const StateSpaceModel& m, const Qp& q, double sigma2,
                          const std::vector<std::size_t>& a) {
  const double w = 2.0 * sigma2;
  const Index nz = q.nz();
  VectorXd z = VectorXd::Zero(nz);
  VectorXd lin = VectorXd::Zero(nz); // w/2 * slope for line coordinates
  std::vector<Index> freev, fixedv;
  for (Index i = 0; i < q.nx; ++i) freev.push_back(i);
  for (Index n = 0; n < q.N; ++n) {
    const Segment& s = m.costs[static_cast<std::size_t>(n)].segment(a[static_cast<std::size_t>(n)]);
    if (s.is_point()) {
      z(q.nx + n) = s.location;
      fixedv.push_back(q.nx + n);
    } else {
      lin(q.nx + n) = 0.5 * w * s.slope;
      freev.push_back(q.nx + n);
    }
  }
  FixedSolution out;
  const Index nf = static_cast<Index>(freev.size());
  if (nf) {
    MatrixXd K(nf, nf);
    VectorXd rhs(nf);
    for (Index i = 0; i < nf; ++i) {
      const Index gi = freev[static_cast<std::size_t>(i)];
      double v = q.r(gi) - lin(gi);
      for (Index fj : fixedv) v -= q.H(gi, fj) * z(fj);
      rhs(i) = v;
      for (Index j = 0; j < nf; ++j) K(i, j) = q.H(gi, freev[static_cast<std::size_t>(j)]);
    }
    LinSolve s = gauss(K, rhs);
    if (!s.consistent) return out;
    for (Index i = 0; i < nf; ++i) z(freev[static_cast<std::size_t>(i)]) = s.x(i);
  }
  out.ok = true;
  out.x0 = q.nx ? VectorXd(z.head(q.nx)) : (m.x0_breve.size() ? m.x0_breve : VectorXd::Zero(m.state_dim()));
  out.u = z.tail(q.N);
  out.y = q.Y * z + q.yoff;
  const VectorXd grad = 2.0 * (q.H * z - q.r);
  out.multiplier = VectorXd::Constant(q.N, std::numeric_limits<double>::quiet_NaN());
  for (Index fj : fixedv) out.multiplier(fj - q.nx) = w > 0 ? -grad(fj) / w : 0.0;
  return out;
}

FixedSolution fixed_output(const StateSpaceModel& m, const Qp& q, double sigma2,
                           const std::vector<std::size_t>& a) {
  const double w = 2.0 * sigma2;
  const Index nz = q.nz();
  std::vector<Index> pts;
  VectorXd rhs_z = 2.0 * q.r;
  for (Index n = 0; n < q.N; ++n) {
    const Segment& s = m.costs[static_cast<std::size_t>(n)].segment(a[static_cast<std::size_t>(n)]);
    if (s.is_point()) pts.push_back(n);
    else rhs_z -= w * s.slope * q.Y.row(n).transpose();
  }
  const Index P = static_cast<Index>(pts.size());
  MatrixXd K = MatrixXd::Zero(nz + P, nz + P);
  VectorXd rhs(nz + P);
  K.topLeftCorner(nz, nz) = 2.0 * q.H;
  rhs.head(nz) = rhs_z;
  for (Index k = 0; k < P; ++k) {
    const Index n = pts[static_cast<std::size_t>(k)];
    const Segment& s = m.costs[static_cast<std::size_t>(n)].segment(a[static_cast<std::size_t>(n)]);
    K.block(0, nz + k, nz, 1) = q.Y.row(n).transpose();
    K.block(nz + k, 0, 1, nz) = q.Y.row(n);
    rhs(nz + k) = s.location + m.y_breve(n) - q.yoff(n);
  }
  FixedSolution out;
  LinSolve s = gauss(K, rhs);
  if (!s.consistent) return out;
  const VectorXd z = s.x.head(nz);
  out.ok = true;
  out.x0 = q.nx ? VectorXd(z.head(q.nx)) : (m.x0_breve.size() ? m.x0_breve : VectorXd::Zero(m.state_dim()));
  out.u = z.tail(q.N);
  out.y = q.Y * z + q.yoff;
  out.multiplier = VectorXd::Constant(q.N, std::numeric_limits<double>::quiet_NaN());
  for (Index k = 0; k < P; ++k) out.multiplier(pts[static_cast<std::size_t>(k)]) = w > 0 ? s.x(nz + k) / w : 0.0;
  return out;
}

double obj_input(const StateSpaceModel& m, const Qp& q, double sigma2, const VectorXd& z) {
  double pen = 0.0;
  for (Index n = 0; n < q.N; ++n) pen += pl_of(m.costs[static_cast<std::size_t>(n)]).eval(z(q.nx + n));
  return q.quad(z) + weighted(2.0 * sigma2, pen);
}

double obj_output(const StateSpaceModel& m, const Qp& q, double sigma2, const VectorXd& z) {
  const VectorXd y = q.Y * z + q.yoff;
  double pen = 0.0;
  for (Index n = 0; n < q.N; ++n)
    pen += pl_of(m.costs[static_cast<std::size_t>(n)]).eval(y(n) - m.y_breve(n));
  return q.quad(z) + weighted(2.0 * sigma2, pen);
}

double feasible_start(const Pl& f) {
  double t = 0.0;
  if (!f.bp.empty()) {
    if (f.sl.front() == -kInfty) t = std::max(t, f.bp.front());
    if (f.sl.back() == kInfty) t = std::min(t, f.bp.back());
  }
  return t;
}

double rel_change_tol(const VectorXd& z) { return 1e-14 * (1.0 + z.cwiseAbs().maxCoeff()); }

} // namespace

double objective_input(const StateSpaceModel& model, double sigma2, const VectorXd& x0,
                       const VectorXd& u) {
  const Qp q = build(model);
  return obj_input(model, q, sigma2, stack(q, x0, u));
}

double objective_output(const StateSpaceModel& model, double sigma2, const VectorXd& x0,
                        const VectorXd& u) {
  const Qp q = build(model);
  return obj_output(model, q, sigma2, stack(q, x0, u));
}

double kkt_residual_input(const StateSpaceModel& model, double sigma2, const VectorXd& u) {
  const Qp q = build(model);
  const double w = 2.0 * sigma2;
  VectorXd z = stack(q, q.nx ? VectorXd::Zero(q.nx) : VectorXd(), u);
  if (q.nx) {
    const VectorXd rhs = q.r.head(q.nx) - q.H.topRightCorner(q.nx, q.N) * u;
    z.head(q.nx) = gauss(q.H.topLeftCorner(q.nx, q.nx), rhs).x;
  }
  const VectorXd grad = 2.0 * (q.H * z - q.r);
  double res = 0.0;
  for (Index n = 0; n < q.N; ++n) {
    auto [lo, hi] = subdiff(model.costs[static_cast<std::size_t>(n)], u(n));
    res = std::max(res, dist_to(-grad(q.nx + n), lo > hi ? lo : bound(w, lo), lo > hi ? hi : bound(w, hi)));
  }
  return res;
}

double kkt_residual_output(const StateSpaceModel& model, double sigma2, const VectorXd& x0,
                           const VectorXd& u) {
  const Qp q = build(model);
  const double w = 2.0 * sigma2;
  const VectorXd z = stack(q, x0, u);
  const VectorXd y = q.Y * z + q.yoff;
  VectorXd R = 2.0 * (q.H * z - q.r);
  if (w == 0.0) return R.cwiseAbs().maxCoeff();
  std::vector<std::pair<double, double>> box(static_cast<std::size_t>(q.N));
  std::vector<Index> open; // coordinates whose subgradient is not a single value
  VectorXd g(q.N);
  for (Index n = 0; n < q.N; ++n) {
    box[static_cast<std::size_t>(n)] = subdiff(model.costs[static_cast<std::size_t>(n)], y(n) - model.y_breve(n));
    auto [lo, hi] = box[static_cast<std::size_t>(n)];
    if (lo > hi) return kInfty;
    g(n) = std::clamp(0.0, lo, hi);
    if (lo < hi && q.Y.row(n).squaredNorm() > 0.0) open.push_back(n);
    else R += w * g(n) * q.Y.row(n).transpose();
  }
  // Unconstrained least squares for the open subgradients first; usually it
  // lands inside the boxes and is the answer.
  const auto P = static_cast<Index>(open.size());
  bool inside = true;
  if (P) {
    MatrixXd B(q.nz(), P);
    for (Index k = 0; k < P; ++k) B.col(k) = w * q.Y.row(open[static_cast<std::size_t>(k)]).transpose();
    const VectorXd gp = gauss(B.transpose() * B, -(B.transpose() * R)).x;
    for (Index k = 0; k < P; ++k) {
      const Index n = open[static_cast<std::size_t>(k)];
      auto [lo, hi] = box[static_cast<std::size_t>(n)];
      g(n) = std::clamp(gp(k), lo, hi);
      inside = inside && g(n) == gp(k);
      R += w * g(n) * q.Y.row(n).transpose();
    }
  }
  // Projected coordinate descent from there.
  for (int sweep = 0; !inside && sweep < 5000; ++sweep) {
    double change = 0.0;
    for (Index n : open) {
      const double aa = q.Y.row(n).squaredNorm();
      auto [lo, hi] = box[static_cast<std::size_t>(n)];
      const double gn = std::clamp(g(n) - q.Y.row(n).dot(R) / (w * aa), lo, hi);
      const double d = gn - g(n);
      if (d == 0.0) continue;
      R += w * d * q.Y.row(n).transpose();
      g(n) = gn;
      change = std::max(change, std::abs(d));
    }
    if (change <= 1e-15 * (1.0 + g.cwiseAbs().maxCoeff())) break;
  }
  return R.cwiseAbs().maxCoeff();
}

FixedSolution fixed_assignment_input(const StateSpaceModel& model, double sigma2,
                                     const std::vector<std::size_t>& segments) {
  if (model.side != RegSide::InputReg) throw ModelError("oracle: model is not InputReg");
  if (segments.size() != static_cast<std::size_t>(model.horizon()))
    throw DimensionError("oracle: assignment has wrong length");
  return fixed_input(model, build(model), sigma2, segments);
}

FixedSolution fixed_assignment_output(const StateSpaceModel& model, double sigma2,
                                      const std::vector<std::size_t>& segments) {
  if (model.side != RegSide::OutputReg) throw ModelError("oracle: model is not OutputReg");
  if (segments.size() != static_cast<std::size_t>(model.horizon()))
    throw DimensionError("oracle: assignment has wrong length");
  return fixed_output(model, build(model), sigma2, segments);
}

InputSolution solve_input_reg(const StateSpaceModel& model, double sigma2) {
  if (!(sigma2 > 0)) throw Error("oracle: sigma2 must be positive");
  if (model.side != RegSide::InputReg) throw ModelError("oracle: model is not InputReg");
  const Qp q = build(model);
  const double w = 2.0 * sigma2;
  std::vector<Pl> f;
  for (const auto& c : model.costs) f.push_back(pl_of(c));
  VectorXd z = VectorXd::Zero(q.nz());
  for (Index n = 0; n < q.N; ++n) z(q.nx + n) = feasible_start(f[static_cast<std::size_t>(n)]);
  VectorXd Hz = q.H * z;
  InputSolution sol;
  const std::size_t cap = std::max<std::size_t>(
      2000, static_cast<std::size_t>(2e8 / static_cast<double>(std::max<Index>(1, q.nz() * q.nz()))));
  for (std::size_t sweep = 1; sweep <= cap; ++sweep) {
    sol.report.iterations = sweep;
    double change = 0.0;
    if (q.nx) {
      const VectorXd rhs = q.r.head(q.nx) - q.H.topRightCorner(q.nx, q.N) * z.tail(q.N);
      const VectorXd x = gauss(q.H.topLeftCorner(q.nx, q.nx), rhs).x;
      change = (x - z.head(q.nx)).cwiseAbs().maxCoeff();
      z.head(q.nx) = x;
      Hz = q.H * z;
    }
    for (Index n = 0; n < q.N; ++n) {
      const Index i = q.nx + n;
      const double h = q.H(i, i);
      const double g = q.r(i) - (Hz(i) - h * z(i));
      const double t = scalar_min(h, g, w, f[static_cast<std::size_t>(n)]);
      const double d = t - z(i);
      if (d == 0.0) continue;
      z(i) = t;
      Hz += q.H.col(i) * d;
      change = std::max(change, std::abs(d));
    }
    if (sweep % 64 == 0) Hz = q.H * z;
    if (change <= rel_change_tol(z)) {
      sol.report.converged = true;
      break;
    }
  }
  double best = obj_input(model, q, sigma2, z);
  std::vector<std::size_t> a(static_cast<std::size_t>(q.N));
  for (Index n = 0; n < q.N; ++n) a[static_cast<std::size_t>(n)] = classify(model.costs[static_cast<std::size_t>(n)], z(q.nx + n));
  FixedSolution fs = fixed_input(model, q, sigma2, a);
  if (fs.ok && feasible_input(model, a, fs)) {
    const VectorXd zp = stack(q, fs.x0, fs.u);
    const double v = obj_input(model, q, sigma2, zp);
    if (v <= best + 1e-9 * (1.0 + std::abs(best))) {
      z = zp;
      best = v;
      sol.report.polished = true;
    }
  }
  sol.u = z.tail(q.N);
  sol.x0 = q.nx ? VectorXd(z.head(q.nx)) : (model.x0_breve.size() ? model.x0_breve : VectorXd::Zero(model.state_dim()));
  sol.y = q.Y * z + q.yoff;
  sol.report.objective = best;
  sol.report.kkt_residual = kkt_residual_input(model, sigma2, sol.u);
  return sol;
}

OutputSolution solve_output_reg(const StateSpaceModel& model, double sigma2) {
  if (!(sigma2 > 0)) throw Error("oracle: sigma2 must be positive");
  if (model.side != RegSide::OutputReg) throw ModelError("oracle: model is not OutputReg");
  const Qp q = build(model);
  const double w = 2.0 * sigma2;
  const MatrixXd Hi = inverse(q.H);
  const MatrixXd K = q.Y * Hi * q.Y.transpose();
  const VectorXd p = q.Y * (Hi * q.r) + q.yoff - model.y_breve;
  std::vector<Pl> fs;
  for (const auto& c : model.costs) fs.push_back(conjugate(pl_of(c)));
  VectorXd lam(q.N);
  for (Index n = 0; n < q.N; ++n) lam(n) = feasible_start(fs[static_cast<std::size_t>(n)]);
  VectorXd Kl = K * lam;
  OutputSolution sol;
  const double c2 = 0.5 * w; // s^2 / 2
  const std::size_t cap = std::max<std::size_t>(
      20000, static_cast<std::size_t>(2e8 / static_cast<double>(std::max<Index>(1, q.N * q.N))));
  for (std::size_t sweep = 1; sweep <= cap; ++sweep) {
    sol.report.iterations = sweep;
    double change = 0.0;
    for (Index n = 0; n < q.N; ++n) {
      const double h = 0.5 * c2 * K(n, n);
      const double g = 0.5 * (p(n) - c2 * (Kl(n) - K(n, n) * lam(n)));
      const double t = scalar_min(h, g, 1.0, fs[static_cast<std::size_t>(n)]);
      const double d = t - lam(n);
      if (d == 0.0) continue;
      lam(n) = t;
      Kl += K.col(n) * d;
      change = std::max(change, std::abs(d));
    }
    if (sweep % 64 == 0) Kl = K * lam;
    if (change <= rel_change_tol(lam)) {
      sol.report.converged = true;
      break;
    }
  }
  VectorXd z = Hi * (q.r - c2 * q.Y.transpose() * lam);
  double best = obj_output(model, q, sigma2, z);

  // Exact polish from two readings of the active set: the primal y and the
  // dual multipliers.
  std::vector<std::vector<std::size_t>> tries(2, std::vector<std::size_t>(static_cast<std::size_t>(q.N)));
  const VectorXd y = q.Y * z + q.yoff;
  for (Index n = 0; n < q.N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const SegmentedCost& cost = model.costs[k];
    tries[0][k] = classify(cost, y(n) - model.y_breve(n));
    tries[1][k] = tries[0][k];
    const double l = lam(n);
    for (std::size_t i = 0; i < cost.size(); ++i) {
      const Segment& s = cost.segment(i);
      const double tol = 1e-9 * (1.0 + std::abs(l));
      if (s.is_line() && std::abs(l - s.slope) <= tol) {
        tries[1][k] = i;
        break;
      }
      if (s.is_point() && l > s.left_slope + tol && l < s.right_slope - tol) {
        tries[1][k] = i;
        break;
      }
    }
  }
  for (const auto& a : tries) {
    FixedSolution f = fixed_output(model, q, sigma2, a);
    if (!f.ok || !feasible_output(model, a, f)) continue;
    const VectorXd zp = stack(q, f.x0, f.u);
    const double v = obj_output(model, q, sigma2, zp);
    if (v <= best + 1e-9 * (1.0 + std::abs(best))) {
      z = zp;
      best = v;
      sol.report.polished = true;
    }
  }
  sol.x0 = q.nx ? VectorXd(z.head(q.nx)) : (model.x0_breve.size() ? model.x0_breve : VectorXd::Zero(model.state_dim()));
  sol.u = z.tail(q.N);
  sol.y = q.Y * z + q.yoff;
  sol.report.objective = best;
  sol.report.kkt_residual = kkt_residual_output(model, sigma2, sol.x0, sol.u);
  return sol;
}

BruteForceResult brute_force_active_sets(const StateSpaceModel& model, double sigma2,
                                         std::size_t max_assignments) {
  const Qp q = build(model);
  const bool input = model.side == RegSide::InputReg;
  const std::size_t N = static_cast<std::size_t>(q.N);
  double total = 1.0;
  for (const auto& c : model.costs) total *= static_cast<double>(c.size());
  if (total > static_cast<double>(max_assignments))
    throw Error("oracle: too many segment assignments to enumerate");
  BruteForceResult best;
  std::vector<std::size_t> a(N, 0);
  for (;;) {
    FixedSolution f = input ? fixed_input(model, q, sigma2, a) : fixed_output(model, q, sigma2, a);
    if (f.ok && (input ? feasible_input(model, a, f) : feasible_output(model, a, f))) {
      const VectorXd z = stack(q, f.x0, f.u);
      const double v = input ? obj_input(model, q, sigma2, z) : obj_output(model, q, sigma2, z);
      if (!best.found || v < best.objective) {
        best.found = true;
        best.objective = v;
        best.u = f.u;
        best.x0 = f.x0;
        best.y = f.y;
        best.estimate = input ? f.u : f.y;
        best.assignment = a;
      }
    }
    std::size_t k = 0;
    while (k < N && ++a[k] == model.costs[k].size()) a[k++] = 0;
    if (k == N) break;
  }
  return best;
}

} // namespace l1path::oracle

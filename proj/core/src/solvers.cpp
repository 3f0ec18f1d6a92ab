#include "l1path/solvers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "l1path/error.hpp"
#include "l1path/linalg.hpp"
#include "l1path/tolerance.hpp"

namespace l1path {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0) || !std::isfinite(sigma2))
    throw ModelError("sigma2 must be positive and finite");
}

double norm_inf(const MatrixXd& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().rowwise().sum().maxCoeff();
}

bool all_zero(const MatrixXd& M) { return (M.array() == 0.0).all(); }

std::string step(Index n) { return " at step " + std::to_string(n + 1); }

} // namespace

BffdOutput bffd_general(const StateSpaceModel& m, double sigma2,
                        const std::vector<SegmentGaussParams>& u_msgs,
                        const std::vector<GaussianMsg>& y_msgs) {
  check_sigma2(sigma2);
  const Index N = m.horizon(), M = m.state_dim();
  if (static_cast<Index>(u_msgs.size()) != N || static_cast<Index>(y_msgs.size()) != N)
    throw DimensionError("bffd: need one input and one observation message per step");
  const double s2inv = 1.0 / sigma2;

  // Backward pass. Per step keep only W''b, b^T xi'' and b^T W'' b.
  MatrixXd Wb(M, N);
  VectorXd q(N), P(N);
  BffdOutput out;
  out.free_coordinate.assign(static_cast<std::size_t>(N), false);

  GaussianMsg msg = GaussianMsg::canonical(s2inv * m.QN * m.xN_breve, s2inv * m.QN);
  for (Index n = N - 1; n >= 0; --n) {
    const auto k = static_cast<std::size_t>(n);
    const VectorXd& b = m.b[k];
    msg = equality_fwd(msg, linear_bwd(m.c[k].transpose(), y_msgs[k]));
    Wb.col(n) = msg.precision() * b;
    q(n) = b.dot(msg.xi());
    P(n) = b.dot(Wb.col(n));
    const SegmentGaussParams& u = u_msgs[k];
    const double guard = tol::scalar * norm_inf(msg.precision()) * b.squaredNorm();
    if (u.kind == SegmentKind::Line && !(P(n) > guard)) {
      const double net = u.value + q(n);
      const double scale = std::abs(u.value) + b.norm() * msg.xi().norm();
      if (std::abs(net) <= tol::num * scale || net == 0.0) {
        out.free_coordinate[k] = true;
        P(n) = 0.0;
      } else {
        throw SingularError("bffd: input has no curvature but a nonzero net slope" + step(n) +
                            " (objective unbounded on the active segment)");
      }
    } else {
      msg = input_through_column(msg, b, u.message());
    }
    msg = linear_bwd(m.A, msg);
  }

  // Initial state.
  VectorXd x;
  if (m.fixed_initial_state) {
    x = m.x0_breve;
  } else {
    MatrixXd S = s2inv * m.Q0 + msg.precision();
    VectorXd r = s2inv * m.Q0 * m.x0_breve + msg.xi();
    SymSolve sol = sym_solve(S, r);
    x = sol.x;
    out.x0_rank_deficient = sol.rank_deficient;
  }

  // Forward decisions.
  out.u_hat.resize(N);
  out.y_hat.resize(N);
  out.mb_U.resize(N);
  out.Vb_U.resize(N);
  out.x_hat.reserve(static_cast<std::size_t>(N + 1));
  out.x_hat.push_back(x);
  for (Index n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    VectorXd xppp = m.A * x;
    if (P(n) > 0) {
      out.Vb_U(n) = 1.0 / P(n);
      out.mb_U(n) = out.Vb_U(n) * (q(n) - Wb.col(n).dot(xppp));
    } else {
      out.Vb_U(n) = kInf;
      out.mb_U(n) = kNaN;
    }
    const SegmentGaussParams& u = u_msgs[k];
    double uh;
    if (u.kind == SegmentKind::Point) uh = u.value;
    else if (out.free_coordinate[k]) uh = 0.0;
    else uh = out.mb_U(n) + out.Vb_U(n) * u.value;
    out.u_hat(n) = uh;
    x = xppp + m.b[k] * uh;
    out.y_hat(n) = m.c[k].dot(x);
    out.x_hat.push_back(x);
  }
  return out;
}

BffdOutput bffd(const StateSpaceModel& m, double sigma2,
                const std::vector<SegmentGaussParams>& u_msgs) {
  check_sigma2(sigma2);
  std::vector<GaussianMsg> ys;
  ys.reserve(static_cast<std::size_t>(m.horizon()));
  for (Index n = 0; n < m.horizon(); ++n)
    ys.push_back(GaussianMsg::canonical(m.y_breve(n) / sigma2, 1.0 / sigma2));
  return bffd_general(m, sigma2, u_msgs, ys);
}

BffdOutput bffd_matrix(const MatrixXd& F, const VectorXd& y, double sigma2,
                       const std::vector<SegmentGaussParams>& u_msgs) {
  check_sigma2(sigma2);
  const Index L = F.rows(), K = F.cols();
  if (y.size() != L || static_cast<Index>(u_msgs.size()) != K)
    throw DimensionError("bffd_matrix: dimension mismatch");
  const double s2inv = 1.0 / sigma2;
  MatrixXd W = s2inv * MatrixXd::Identity(L, L);
  VectorXd xi = s2inv * y;
  MatrixXd Wb(L, K);
  VectorXd q(K), P(K);
  for (Index n = K - 1; n >= 0; --n) {
    const auto b = F.col(n);
    Wb.col(n) = W * b;
    q(n) = b.dot(xi);
    P(n) = b.dot(Wb.col(n));
    const SegmentGaussParams& u = u_msgs[static_cast<std::size_t>(n)];
    if (u.kind == SegmentKind::Point) {
      xi -= Wb.col(n) * u.value;
    } else {
      if (!(P(n) > tol::scalar * norm_inf(W) * b.squaredNorm()))
        throw SingularError("bffd_matrix: b^T W b is zero" + step(n));
      const double H = 1.0 / P(n);
      xi -= Wb.col(n) * (H * (u.value + q(n)));
      W -= H * Wb.col(n) * Wb.col(n).transpose();
      symmetrize(W);
    }
  }
  BffdOutput out;
  out.free_coordinate.assign(static_cast<std::size_t>(K), false);
  out.u_hat.resize(K);
  out.y_hat = VectorXd::Zero(K);
  out.mb_U.resize(K);
  out.Vb_U.resize(K);
  VectorXd x = VectorXd::Zero(L);
  out.x_hat.push_back(x);
  for (Index n = 0; n < K; ++n) {
    out.Vb_U(n) = 1.0 / P(n);
    out.mb_U(n) = out.Vb_U(n) * (q(n) - Wb.col(n).dot(x));
    const SegmentGaussParams& u = u_msgs[static_cast<std::size_t>(n)];
    out.u_hat(n) = u.kind == SegmentKind::Point ? u.value : out.mb_U(n) + out.Vb_U(n) * u.value;
    x += F.col(n) * out.u_hat(n);
    out.x_hat.push_back(x);
  }
  return out;
}

FfbddOutput ffbdd_general(const StateSpaceModel& m, double sigma2,
                          const std::vector<SegmentGaussParams>& y_msgs,
                          const std::vector<GaussianMsg>& u_msgs) {
  check_sigma2(sigma2);
  const Index N = m.horizon(), M = m.state_dim();
  if (static_cast<Index>(u_msgs.size()) != N || static_cast<Index>(y_msgs.size()) != N)
    throw DimensionError("ffbdd: need one input and one observation message per step");
  if (m.fixed_initial_state) throw ModelError("ffbdd: initial state must carry a prior");
  const MatrixXd Q0inv = sym_inverse(m.Q0, "ffbdd: Q0");

  // Forward pass. Per step keep V''c, c^T m'' and c^T V'' c.
  MatrixXd Vc(M, N);
  VectorXd r(N), R(N);
  GaussianMsg msg = GaussianMsg::moment(m.x0_breve, sigma2 * Q0inv);
  for (Index n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const VectorXd& c = m.c[k];
    MatrixXd bcol = m.b[k];
    msg = addition_fwd(linear_fwd(m.A, msg), linear_fwd(bcol, u_msgs[k]));
    Vc.col(n) = msg.cov() * c;
    r(n) = c.dot(msg.mean());
    R(n) = c.dot(Vc.col(n));
    try {
      msg = observe_through_row(msg, c, y_msgs[k].message());
    } catch (const SingularError&) {
      throw SingularError("ffbdd: c^T V c is zero for a point observation" + step(n));
    }
  }

  FfbddOutput out;
  VectorXd xt = VectorXd::Zero(M);
  if (!all_zero(m.QN)) {
    const MatrixXd QNinv = sym_inverse(m.QN, "ffbdd: QN");
    DualPair d = dual_mean(msg, GaussianMsg::moment(m.xN_breve, sigma2 * QNinv));
    xt = d.xi_t;
  }

  out.xi_tilde_X.assign(static_cast<std::size_t>(N + 1), VectorXd());
  out.xi_tilde_X[static_cast<std::size_t>(N)] = xt;
  out.xi_tilde_Y.resize(N);
  out.mf_Y.resize(N);
  out.Vf_Y.resize(N);
  out.y_hat.resize(N);
  out.u_hat.resize(N);
  for (Index n = N - 1; n >= 0; --n) {
    const auto k = static_cast<std::size_t>(n);
    out.Vf_Y(n) = R(n);
    out.mf_Y(n) = r(n) - Vc.col(n).dot(xt);
    const SegmentGaussParams& y = y_msgs[k];
    double xY;
    if (y.kind == SegmentKind::Line) {
      xY = -y.value;
      out.y_hat(n) = out.mf_Y(n) - out.Vf_Y(n) * xY;
    } else {
      xY = (out.mf_Y(n) - y.value) / out.Vf_Y(n);
      out.y_hat(n) = y.value;
    }
    out.xi_tilde_Y(n) = xY;
    xt += m.c[k] * xY;
    const GaussianMsg& u = u_msgs[k];
    out.u_hat(n) = u.mean()(0) - u.cov()(0, 0) * m.b[k].dot(xt);
    xt = m.A.transpose() * xt;
    out.xi_tilde_X[k] = xt;
  }
  out.x0_hat = m.x0_breve - sigma2 * Q0inv * xt;
  return out;
}

FfbddOutput ffbdd(const StateSpaceModel& m, double sigma2,
                  const std::vector<SegmentGaussParams>& y_msgs) {
  check_sigma2(sigma2);
  std::vector<GaussianMsg> us(static_cast<std::size_t>(m.horizon()),
                              GaussianMsg::moment(0.0, sigma2));
  return ffbdd_general(m, sigma2, y_msgs, us);
}

FfbddOutput ffbdd_matrix(const MatrixXd& F, const VectorXd& y, double sigma2,
                         const std::vector<SegmentGaussParams>& y_msgs) {
  check_sigma2(sigma2);
  (void)y; // the costs carry y_breve through the point locations and slopes
  const Index L = F.rows(), K = F.cols();
  if (static_cast<Index>(y_msgs.size()) != L) throw DimensionError("ffbdd_matrix: dimension mismatch");
  MatrixXd V = sigma2 * MatrixXd::Identity(K, K);
  VectorXd mean = VectorXd::Zero(K);
  MatrixXd Vc(K, L);
  VectorXd r(L), R(L);
  for (Index n = 0; n < L; ++n) {
    const VectorXd c = F.row(n).transpose();
    Vc.col(n) = V * c;
    r(n) = c.dot(mean);
    R(n) = c.dot(Vc.col(n));
    const SegmentGaussParams& ym = y_msgs[static_cast<std::size_t>(n)];
    if (ym.kind == SegmentKind::Line) {
      mean += Vc.col(n) * ym.value;
    } else {
      if (!(R(n) > tol::scalar * norm_inf(V) * c.squaredNorm()))
        throw SingularError("ffbdd_matrix: c^T V c is zero" + step(n));
      const double G = 1.0 / R(n);
      mean += Vc.col(n) * (G * (ym.value - r(n)));
      V -= G * Vc.col(n) * Vc.col(n).transpose();
      symmetrize(V);
    }
  }
  FfbddOutput out;
  VectorXd xt = VectorXd::Zero(K);
  out.xi_tilde_X.assign(static_cast<std::size_t>(L + 1), VectorXd());
  out.xi_tilde_X[static_cast<std::size_t>(L)] = xt;
  out.xi_tilde_Y.resize(L);
  out.mf_Y.resize(L);
  out.Vf_Y.resize(L);
  out.y_hat.resize(L);
  out.u_hat = VectorXd::Zero(L);
  for (Index n = L - 1; n >= 0; --n) {
    out.Vf_Y(n) = R(n);
    out.mf_Y(n) = r(n) - Vc.col(n).dot(xt);
    const SegmentGaussParams& ym = y_msgs[static_cast<std::size_t>(n)];
    double xY;
    if (ym.kind == SegmentKind::Line) {
      xY = -ym.value;
      out.y_hat(n) = out.mf_Y(n) - out.Vf_Y(n) * xY;
    } else {
      xY = (out.mf_Y(n) - ym.value) / out.Vf_Y(n);
      out.y_hat(n) = ym.value;
    }
    out.xi_tilde_Y(n) = xY;
    xt += F.row(n).transpose() * xY;
    out.xi_tilde_X[static_cast<std::size_t>(n)] = xt;
  }
  out.x0_hat = -sigma2 * xt;
  return out;
}

CrosscheckReport gaussian_map_crosscheck(const StateSpaceModel& m, double sigma2,
                                         const VectorXd& u_clamp, const VectorXd& y_xi) {
  const Index N = m.horizon();
  if (u_clamp.size() != N || y_xi.size() != N) throw DimensionError("crosscheck: bad sizes");
  std::vector<SegmentGaussParams> u_pts, y_flats;
  std::vector<GaussianMsg> u_msgs, y_msgs;
  for (Index n = 0; n < N; ++n) {
    u_pts.push_back(SegmentGaussParams::point(u_clamp(n)));
    u_msgs.push_back(GaussianMsg::point(u_clamp(n)));
    y_flats.push_back(SegmentGaussParams::flat(y_xi(n)));
    y_msgs.push_back(GaussianMsg::flat(y_xi(n)));
  }
  BffdOutput fb = bffd_general(m, sigma2, u_pts, y_msgs);
  FfbddOutput ff = ffbdd_general(m, sigma2, y_flats, u_msgs);
  CrosscheckReport rep;
  rep.u_discrepancy = (fb.u_hat - ff.u_hat).cwiseAbs().maxCoeff();
  rep.y_discrepancy = (fb.y_hat - ff.y_hat).cwiseAbs().maxCoeff();
  rep.x0_discrepancy = (fb.x_hat.front() - ff.x0_hat).cwiseAbs().maxCoeff();
  return rep;
}

CrosscheckReport gaussian_map_crosscheck(const StateSpaceModel& m, double sigma2) {
  return gaussian_map_crosscheck(m, sigma2, VectorXd::Zero(m.horizon()), m.y_breve);
}

} // namespace l1path

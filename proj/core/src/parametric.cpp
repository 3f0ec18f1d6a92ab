#include "l1path/parametric.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "l1path/linalg.hpp"
#include "l1path/tolerance.hpp"

namespace l1path {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double norm_inf(const MatrixXd& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().rowwise().sum().maxCoeff();
}

bool all_zero(const MatrixXd& M) { return (M.array() == 0.0).all(); }

void check_active(const StateSpaceModel& m, const std::vector<Segment>& active) {
  if (static_cast<Index>(active.size()) != m.horizon())
    throw DimensionError("parametric pass: need one active segment per step");
}

} // namespace

// Coefficient naming: for a backward (canonical) quantity Z = Z1/sigma^2 + Z0,
// for a forward quantity Z = sigma^2 Z1 + Z0.
ParamBffdOutput param_bffd(const StateSpaceModel& m, const std::vector<Segment>& active) {
  check_active(m, active);
  const Index N = m.horizon(), M = m.state_dim();

  MatrixXd W1 = m.QN;
  VectorXd xi1 = m.QN * m.xN_breve;
  VectorXd xi0 = VectorXd::Zero(M);

  MatrixXd WB(M, N); // W1'' b per step
  VectorXd P1(N), q1(N), q0(N);

  for (Index n = N - 1; n >= 0; --n) {
    const auto k = static_cast<std::size_t>(n);
    const VectorXd& b = m.b[k];
    const VectorXd& c = m.c[k];
    // observation: xi_Y = y/sigma^2, W_Y = 1/sigma^2
    xi1.noalias() += c * m.y_breve(n);
    W1.noalias() += c * c.transpose();

    WB.col(n).noalias() = W1 * b;
    const auto wb = WB.col(n);
    P1(n) = b.dot(wb);
    q1(n) = b.dot(xi1);
    q0(n) = b.dot(xi0);
    const bool unidentified = !(P1(n) > tol::scalar * norm_inf(W1) * b.squaredNorm());

    const Segment& seg = active[k];
    if (seg.is_point()) {
      // H = 0, h = b a (no sigma^2 part)
      xi1.noalias() -= wb * seg.location;
      if (unidentified) P1(n) = 0.0;
    } else {
      if (unidentified)
        throw SingularError("param_bffd: coordinate " + std::to_string(n + 1) +
                            " has no curvature on a line segment");
      // H = sigma^2 H1, h = sigma^2 h1 + h0
      const double H1 = 1.0 / P1(n);
      const double xiU = -seg.slope;
      xi1.noalias() -= wb * (H1 * q1(n));
      xi0.noalias() -= wb * (H1 * (xiU + q0(n)));
      W1.noalias() -= H1 * wb * wb.transpose();
      symmetrize(W1);
    }
    xi1 = m.A.transpose() * xi1;
    xi0 = m.A.transpose() * xi0;
    W1 = m.A.transpose() * W1 * m.A;
    symmetrize(W1);
  }

  ParamBffdOutput out;
  out.X1.resize(M, N + 1);
  out.X0.resize(M, N + 1);
  VectorXd x1, x0;
  if (m.fixed_initial_state) {
    x1 = VectorXd::Zero(M);
    x0 = m.x0_breve;
  } else {
    // (Q0 + W1)/sigma^2 x = (Q0 x0_breve + xi1)/sigma^2 + xi0
    MatrixXd rhs(M, 2);
    rhs.col(0) = m.Q0 * m.x0_breve + xi1;
    rhs.col(1) = xi0;
    bool deficient = false;
    MatrixXd sol = sym_solve(m.Q0 + W1, rhs, deficient);
    x0 = sol.col(0);
    x1 = sol.col(1);
    out.x0_rank_deficient = deficient;
  }
  out.X1.col(0) = x1;
  out.X0.col(0) = x0;

  out.u_hat.resize(static_cast<std::size_t>(N));
  out.y_hat.resize(static_cast<std::size_t>(N));
  out.mb_U.resize(static_cast<std::size_t>(N));
  out.Vb_U.resize(static_cast<std::size_t>(N));
  out.P1 = P1;
  out.g1.resize(N);
  out.g0.resize(N);
  VectorXd xp1(M), xp0(M);
  for (Index n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    xp1.noalias() = m.A * x1;
    xp0.noalias() = m.A * x0;
    const double g1 = q1(n) - WB.col(n).dot(xp0);
    const double g0 = q0(n) - WB.col(n).dot(xp1);
    out.g1(n) = g1;
    out.g0(n) = g0;
    if (P1(n) > 0) {
      out.mb_U[k] = {Param::Sigma2, g0 / P1(n), g1 / P1(n)};
      out.Vb_U[k] = {Param::Sigma2, 1.0 / P1(n), 0.0};
    } else {
      out.mb_U[k] = {Param::Sigma2, kNaN, kNaN};
      out.Vb_U[k] = {Param::Sigma2, kInf, 0.0};
    }
    const Segment& seg = active[k];
    ParamAffine<double> u;
    if (seg.is_point()) u = {Param::Sigma2, 0.0, seg.location};
    else u = {Param::Sigma2, (g0 - seg.slope) / P1(n), g1 / P1(n)};
    out.u_hat[k] = u;
    const VectorXd& b = m.b[k];
    x1 = xp1 + b * u.c1;
    x0 = xp0 + b * u.c0;
    out.X1.col(n + 1) = x1;
    out.X0.col(n + 1) = x0;
    out.y_hat[k] = {Param::Sigma2, m.c[k].dot(x1), m.c[k].dot(x0)};
  }
  return out;
}

ParamFfbddOutput param_ffbdd(const StateSpaceModel& m, const std::vector<Segment>& active) {
  check_active(m, active);
  if (m.fixed_initial_state) throw ModelError("param_ffbdd: initial state must carry a prior");
  const Index N = m.horizon(), M = m.state_dim();
  const MatrixXd Q0inv = sym_inverse(m.Q0, "param_ffbdd: Q0");

  MatrixXd V1 = Q0inv;
  // Unconditioned prior covariance. It sets the scale against which c^T V c
  // is judged: once earlier points pin c^T x, V1 only holds rounding noise.
  MatrixXd Vp = Q0inv;
  VectorXd m1 = VectorXd::Zero(M);
  VectorXd m0 = m.x0_breve;
  MatrixXd VC(M, N); // V1'' c per step
  VectorXd R1(N), r1(N), r0(N);

  for (Index n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const VectorXd& b = m.b[k];
    const VectorXd& c = m.c[k];
    m1 = m.A * m1;
    m0 = m.A * m0;
    V1 = m.A * V1 * m.A.transpose();
    V1.noalias() += b * b.transpose(); // input variance sigma^2, mean 0
    symmetrize(V1);
    Vp = m.A * Vp * m.A.transpose();
    Vp.noalias() += b * b.transpose();

    VC.col(n).noalias() = V1 * c;
    R1(n) = c.dot(VC.col(n));
    if (!(R1(n) > tol::scalar * c.dot(Vp * c))) {
      R1(n) = 0.0;
      VC.col(n).setZero();
    }
    const auto vc = VC.col(n);
    r1(n) = c.dot(m1);
    r0(n) = c.dot(m0);

    const Segment& seg = active[k];
    if (seg.is_line()) {
      // G = 0, g = c xi_Y with xi_Y = -slope (sigma-free)
      m1.noalias() += vc * (-seg.slope);
    } else {
      if (R1(n) == 0.0)
        throw SingularError("param_ffbdd: c^T V c is zero for point observation " +
                            std::to_string(n + 1));
      // G = G1/sigma^2, g = (c G1 (a - r0))/sigma^2 - c G1 r1
      const double G1 = 1.0 / R1(n);
      m0.noalias() += vc * (G1 * (seg.location - r0(n)));
      m1.noalias() -= vc * (G1 * r1(n));
      V1.noalias() -= G1 * vc * vc.transpose();
      symmetrize(V1);
    }
  }

  // Terminal dual mean, xi = xi1/sigma^2 + xi0.
  VectorXd xi1 = VectorXd::Zero(M), xi0 = VectorXd::Zero(M);
  if (!all_zero(m.QN)) {
    const MatrixXd QNinv = sym_inverse(m.QN, "param_ffbdd: QN");
    MatrixXd rhs(M, 2);
    rhs.col(0) = m0 - m.xN_breve;
    rhs.col(1) = m1;
    bool deficient = false;
    MatrixXd sol = sym_solve(V1 + QNinv, rhs, deficient);
    if (deficient) throw SingularError("param_ffbdd: fused terminal covariance is singular");
    xi1 = sol.col(0);
    xi0 = sol.col(1);
  }

  ParamFfbddOutput out;
  const auto sz = static_cast<std::size_t>(N);
  out.y_hat.resize(sz);
  out.u_hat.resize(sz);
  out.mf_Y.resize(sz);
  out.Vf_Y.resize(sz);
  out.xi_tilde_Y.resize(sz);
  out.Xi1.resize(M, N + 1);
  out.Xi0.resize(M, N + 1);
  out.Xi1.col(N) = xi1;
  out.Xi0.col(N) = xi0;
  for (Index n = N - 1; n >= 0; --n) {
    const auto k = static_cast<std::size_t>(n);
    const auto vc = VC.col(n);
    ParamAffine<double> mf{Param::Sigma2, r1(n) - vc.dot(xi0), r0(n) - vc.dot(xi1)};
    out.mf_Y[k] = mf;
    out.Vf_Y[k] = {Param::Sigma2, R1(n), 0.0};
    const Segment& seg = active[k];
    ParamAffine<double> xY;
    if (seg.is_line()) {
      xY = {Param::InvSigma2, 0.0, seg.slope};
      out.y_hat[k] = {Param::Sigma2, mf.c1 - seg.slope * R1(n), mf.c0};
    } else {
      xY = {Param::InvSigma2, (mf.c0 - seg.location) / R1(n), mf.c1 / R1(n)};
      out.y_hat[k] = {Param::Sigma2, 0.0, seg.location};
    }
    out.xi_tilde_Y[k] = xY;
    const VectorXd& c = m.c[k];
    xi1.noalias() += c * xY.c1;
    xi0.noalias() += c * xY.c0;
    const VectorXd& b = m.b[k];
    out.u_hat[k] = {Param::Sigma2, -b.dot(xi0), -b.dot(xi1)};
    xi1 = m.A.transpose() * xi1;
    xi0 = m.A.transpose() * xi0;
    out.Xi1.col(n) = xi1;
    out.Xi0.col(n) = xi0;
  }
  out.x0_hat = {Param::Sigma2, -Q0inv * xi0, m.x0_breve - Q0inv * xi1};
  return out;
}

} // namespace l1path

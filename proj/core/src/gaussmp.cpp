#include "l1path/gaussmp.hpp"

#include <Eigen/LU>
#include <string>
#include <utility>

#include "l1path/error.hpp"
#include "l1path/linalg.hpp"
#include "l1path/tolerance.hpp"

namespace l1path {

namespace {

void require_same_dim(const GaussianMsg& a, const GaussianMsg& b, const char* op) {
  if (a.dim() != b.dim())
    throw DimensionError(std::string(op) + ": dimension mismatch (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

void require_form(const GaussianMsg& z, Form f, const char* op) {
  if (z.form() != f)
    throw FormError(std::string(op) + ": expected " +
                    (f == Form::Moment ? "moment" : "canonical") + " form");
}

bool all_zero(const MatrixXd& M) { return (M.array() == 0.0).all(); }

double scalar_guard(const MatrixXd& M, const VectorXd& v) {
  double norm = M.size() == 0 ? 0.0 : M.cwiseAbs().rowwise().sum().maxCoeff();
  return tol::scalar * norm * v.squaredNorm();
}

} // namespace

GaussianMsg::GaussianMsg(Form f, VectorXd v, MatrixXd M)
    : form_(f), vec_(std::move(v)), mat_(std::move(M)) {
  if (vec_.size() == 0) throw DimensionError("GaussianMsg: empty message");
  if (mat_.rows() != vec_.size() || mat_.cols() != vec_.size())
    throw DimensionError("GaussianMsg: matrix does not match vector dimension");
}

GaussianMsg GaussianMsg::moment(VectorXd m, MatrixXd V) {
  return GaussianMsg(Form::Moment, std::move(m), std::move(V));
}
GaussianMsg GaussianMsg::canonical(VectorXd xi, MatrixXd W) {
  return GaussianMsg(Form::Canonical, std::move(xi), std::move(W));
}
GaussianMsg GaussianMsg::point(VectorXd m) {
  const Index n = m.size();
  return GaussianMsg(Form::Moment, std::move(m), MatrixXd::Zero(n, n));
}
GaussianMsg GaussianMsg::flat(VectorXd xi) {
  const Index n = xi.size();
  return GaussianMsg(Form::Canonical, std::move(xi), MatrixXd::Zero(n, n));
}
GaussianMsg GaussianMsg::moment(double m, double V) {
  return moment(VectorXd::Constant(1, m), MatrixXd::Constant(1, 1, V));
}
GaussianMsg GaussianMsg::canonical(double xi, double W) {
  return canonical(VectorXd::Constant(1, xi), MatrixXd::Constant(1, 1, W));
}
GaussianMsg GaussianMsg::point(double m) { return point(VectorXd::Constant(1, m)); }
GaussianMsg GaussianMsg::flat(double xi) { return flat(VectorXd::Constant(1, xi)); }

const VectorXd& GaussianMsg::mean() const {
  require_form(*this, Form::Moment, "mean");
  return vec_;
}
const MatrixXd& GaussianMsg::cov() const {
  require_form(*this, Form::Moment, "cov");
  return mat_;
}
const VectorXd& GaussianMsg::xi() const {
  require_form(*this, Form::Canonical, "xi");
  return vec_;
}
const MatrixXd& GaussianMsg::precision() const {
  require_form(*this, Form::Canonical, "precision");
  return mat_;
}

bool GaussianMsg::is_point() const { return form_ == Form::Moment && all_zero(mat_); }
bool GaussianMsg::is_flat() const { return form_ == Form::Canonical && all_zero(mat_); }

GaussianMsg GaussianMsg::to_canonical() const {
  if (form_ == Form::Canonical) return *this;
  MatrixXd W = sym_inverse(mat_, "to_canonical");
  VectorXd xi = W * vec_;
  return canonical(std::move(xi), std::move(W));
}

GaussianMsg GaussianMsg::to_moment() const {
  if (form_ == Form::Moment) return *this;
  MatrixXd V = sym_inverse(mat_, "to_moment");
  VectorXd m = V * vec_;
  return moment(std::move(m), std::move(V));
}

GaussianMsg equality_fwd(const GaussianMsg& z1, const GaussianMsg& z2) {
  require_form(z1, Form::Canonical, "equality_fwd");
  require_form(z2, Form::Canonical, "equality_fwd");
  require_same_dim(z1, z2, "equality_fwd");
  return GaussianMsg::canonical(z1.xi() + z2.xi(), z1.precision() + z2.precision());
}

GaussianMsg addition_fwd(const GaussianMsg& z1, const GaussianMsg& z2) {
  require_form(z1, Form::Moment, "addition_fwd");
  require_form(z2, Form::Moment, "addition_fwd");
  require_same_dim(z1, z2, "addition_fwd");
  return GaussianMsg::moment(z1.mean() + z2.mean(), z1.cov() + z2.cov());
}

GaussianMsg linear_fwd(const MatrixXd& A, const GaussianMsg& z) {
  require_form(z, Form::Moment, "linear_fwd");
  if (A.cols() != z.dim()) throw DimensionError("linear_fwd: A has wrong column count");
  MatrixXd V = A * z.cov() * A.transpose();
  symmetrize(V);
  return GaussianMsg::moment(A * z.mean(), std::move(V));
}

GaussianMsg linear_bwd(const MatrixXd& A, const GaussianMsg& z) {
  require_form(z, Form::Canonical, "linear_bwd");
  if (A.rows() != z.dim()) throw DimensionError("linear_bwd: A has wrong row count");
  MatrixXd W = A.transpose() * z.precision() * A;
  symmetrize(W);
  return GaussianMsg::canonical(A.transpose() * z.xi(), std::move(W));
}

GaussianMsg observe_through_row(const GaussianMsg& zin, const VectorXd& c,
                                const GaussianMsg& y_msg) {
  require_form(zin, Form::Moment, "observe_through_row");
  if (c.size() != zin.dim() || y_msg.dim() != 1)
    throw DimensionError("observe_through_row: dimension mismatch");
  const VectorXd& m = zin.mean();
  const MatrixXd& V = zin.cov();
  if (y_msg.is_flat()) {
    // G = 0, g = c xi_Y
    return GaussianMsg::moment(m + V * c * y_msg.xi()(0), V);
  }
  if (y_msg.is_point()) {
    const VectorXd Vc = V * c;
    const double R = c.dot(Vc);
    if (!(R > scalar_guard(V, c)))
      throw SingularError("observe_through_row: c^T V c is zero");
    const double G = 1.0 / R;
    VectorXd mo = m + Vc * (G * (y_msg.mean()(0) - c.dot(m)));
    MatrixXd Vo = V - G * Vc * Vc.transpose();
    symmetrize(Vo);
    return GaussianMsg::moment(std::move(mo), std::move(Vo));
  }
  throw UnsupportedError("observe_through_row: nondegenerate observation message");
}

GaussianMsg input_through_column(const GaussianMsg& zin, const VectorXd& b,
                                 const GaussianMsg& u_msg) {
  require_form(zin, Form::Canonical, "input_through_column");
  if (b.size() != zin.dim() || u_msg.dim() != 1)
    throw DimensionError("input_through_column: dimension mismatch");
  const VectorXd& xi = zin.xi();
  const MatrixXd& W = zin.precision();
  if (u_msg.is_point()) {
    // H = 0, h = b m_U
    return GaussianMsg::canonical(xi - W * b * u_msg.mean()(0), W);
  }
  if (u_msg.is_flat()) {
    const VectorXd Wb = W * b;
    const double P = b.dot(Wb);
    if (!(P > scalar_guard(W, b)))
      throw SingularError("input_through_column: b^T W b is zero");
    const double H = 1.0 / P;
    VectorXd xo = xi - Wb * (H * (u_msg.xi()(0) + b.dot(xi)));
    MatrixXd Wo = W - H * Wb * Wb.transpose();
    symmetrize(Wo);
    return GaussianMsg::canonical(std::move(xo), std::move(Wo));
  }
  throw UnsupportedError("input_through_column: nondegenerate input message");
}

namespace {

// Posterior with one moment and one canonical message:
// m = (I + V W)^{-1} (m + V xi), V_Z = (I + V W)^{-1} V.
PosteriorPair mixed_posterior(const GaussianMsg& mom, const GaussianMsg& can) {
  const Index n = mom.dim();
  MatrixXd K = MatrixXd::Identity(n, n) + mom.cov() * can.precision();
  Eigen::PartialPivLU<MatrixXd> lu(K);
  PosteriorPair p;
  p.m = lu.solve(mom.mean() + mom.cov() * can.xi());
  p.V = lu.solve(mom.cov());
  symmetrize(p.V);
  return p;
}

} // namespace

PosteriorPair posterior(const GaussianMsg& fwd, const GaussianMsg& bwd) {
  require_same_dim(fwd, bwd, "posterior");
  if (fwd.form() == Form::Canonical && bwd.form() == Form::Canonical) {
    bool deficient = false;
    MatrixXd W = fwd.precision() + bwd.precision();
    MatrixXd V = sym_solve(W, MatrixXd::Identity(W.rows(), W.cols()), deficient);
    if (deficient) throw SingularError("posterior: fused precision is singular");
    PosteriorPair p{V * (fwd.xi() + bwd.xi()), V};
    symmetrize(p.V);
    return p;
  }
  if (fwd.form() == Form::Moment && bwd.form() == Form::Moment) {
    if (fwd.is_point()) return {fwd.mean(), fwd.cov()};
    if (bwd.is_point()) return {bwd.mean(), bwd.cov()};
    bool deficient = false;
    MatrixXd Wt = sym_solve(fwd.cov() + bwd.cov(),
                            MatrixXd::Identity(fwd.dim(), fwd.dim()), deficient);
    if (deficient) throw SingularError("posterior: fused covariance is singular");
    VectorXd xt = Wt * (fwd.mean() - bwd.mean());
    PosteriorPair p{fwd.mean() - fwd.cov() * xt, fwd.cov() - fwd.cov() * Wt * fwd.cov()};
    symmetrize(p.V);
    return p;
  }
  if (fwd.form() == Form::Moment) return mixed_posterior(fwd, bwd);
  return mixed_posterior(bwd, fwd);
}

DualPair dual_mean(const GaussianMsg& fwd, const GaussianMsg& bwd) {
  require_same_dim(fwd, bwd, "dual_mean");
  if (bwd.form() == Form::Canonical) {
    PosteriorPair p = posterior(fwd, bwd);
    const MatrixXd& W = bwd.precision();
    MatrixXd Wt = W - W * p.V * W;
    symmetrize(Wt);
    return {W * p.m - bwd.xi(), std::move(Wt)};
  }
  if (fwd.form() == Form::Canonical) {
    PosteriorPair p = posterior(fwd, bwd);
    const MatrixXd& W = fwd.precision();
    MatrixXd Wt = W - W * p.V * W;
    symmetrize(Wt);
    return {fwd.xi() - W * p.m, std::move(Wt)};
  }
  bool deficient = false;
  MatrixXd Wt = sym_solve(fwd.cov() + bwd.cov(),
                          MatrixXd::Identity(fwd.dim(), fwd.dim()), deficient);
  if (deficient) throw SingularError("dual_mean: fused covariance is singular");
  VectorXd xt = Wt * (fwd.mean() - bwd.mean());
  return {std::move(xt), std::move(Wt)};
}

} // namespace l1path

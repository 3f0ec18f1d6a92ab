#pragma once

#include <Eigen/Core>
#include <optional>

namespace l1path {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Form { Moment, Canonical };

// A Gaussian message that may be degenerate. Moment form stores (m, V),
// canonical form stores (xi, W). V = 0 is a point mass, W = 0 is flat.
// The degeneracy class is part of the value: is_point()/is_flat() test for
// exact zeros, never for small numbers.
class GaussianMsg {
public:
  static GaussianMsg moment(VectorXd m, MatrixXd V);
  static GaussianMsg canonical(VectorXd xi, MatrixXd W);
  static GaussianMsg point(VectorXd m);
  static GaussianMsg flat(VectorXd xi);

  // scalar conveniences
  static GaussianMsg moment(double m, double V);
  static GaussianMsg canonical(double xi, double W);
  static GaussianMsg point(double m);
  static GaussianMsg flat(double xi);

  Form form() const { return form_; }
  Index dim() const { return vec_.size(); }

  const VectorXd& mean() const;
  const MatrixXd& cov() const;
  const VectorXd& xi() const;
  const MatrixXd& precision() const;

  bool is_point() const;
  bool is_flat() const;

  // Form conversion; throws SingularError when the stored matrix is not
  // invertible against tol::cond.
  GaussianMsg to_canonical() const;
  GaussianMsg to_moment() const;

private:
  GaussianMsg(Form f, VectorXd v, MatrixXd M);

  Form form_;
  VectorXd vec_;
  MatrixXd mat_;
};

struct PosteriorPair {
  VectorXd m;
  MatrixXd V;
};

struct DualPair {
  VectorXd xi_t;
  std::optional<MatrixXd> W_t;
};

GaussianMsg equality_fwd(const GaussianMsg& z1, const GaussianMsg& z2);
GaussianMsg addition_fwd(const GaussianMsg& z1, const GaussianMsg& z2);
GaussianMsg linear_fwd(const MatrixXd& A, const GaussianMsg& z);
GaussianMsg linear_bwd(const MatrixXd& A, const GaussianMsg& z);

// Forward moment message through an equality node whose third edge is the
// scalar observation Y = c^T X carrying y_msg (flat or point).
GaussianMsg observe_through_row(const GaussianMsg& zin, const VectorXd& c,
                                const GaussianMsg& y_msg);

// Backward canonical message through an equality node whose third edge is
// b U with U carrying u_msg (point or flat).
GaussianMsg input_through_column(const GaussianMsg& zin, const VectorXd& b,
                                 const GaussianMsg& u_msg);

PosteriorPair posterior(const GaussianMsg& fwd, const GaussianMsg& bwd);
DualPair dual_mean(const GaussianMsg& fwd, const GaussianMsg& bwd);

} // namespace l1path

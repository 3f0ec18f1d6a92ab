#pragma once

#include <string>
#include <type_traits>
#include <vector>

#include "l1path/error.hpp"
#include "l1path/gaussmp.hpp"
#include "l1path/plcost.hpp"
#include "l1path/ssm.hpp"

namespace l1path {

// t = sigma^2 or t = sigma^-2
enum class Param { Sigma2, InvSigma2 };

namespace detail {

inline bool is_zero(double x) { return x == 0.0; }
template <class D>
bool is_zero(const Eigen::MatrixBase<D>& x) {
  return (x.array() == 0.0).all();
}
inline double zero_like(double) { return 0.0; }
template <class D>
typename D::PlainObject zero_like(const Eigen::MatrixBase<D>& x) {
  return D::PlainObject::Zero(x.rows(), x.cols());
}
inline int power(Param p) { return p == Param::Sigma2 ? 1 : -1; }

} // namespace detail

// value(t) = t * c1 + c0. A quantity linear in t carries c0 == 0 exactly.
template <class T>
struct ParamAffine {
  Param param = Param::Sigma2;
  T c1{};
  T c0{};

  static ParamAffine constant(const T& v, Param p = Param::Sigma2) {
    return {p, detail::zero_like(v), v};
  }
  static ParamAffine linear(const T& v, Param p = Param::Sigma2) {
    return {p, v, detail::zero_like(v)};
  }

  // Evaluate at sigma2 (the tag decides whether sigma2 or 1/sigma2 is used).
  T at_sigma2(double sigma2) const {
    const double t = param == Param::Sigma2 ? sigma2 : 1.0 / sigma2;
    return eval_at(t);
  }
  T eval_at(double t) const {
    if constexpr (std::is_arithmetic_v<T>) {
      return t * c1 + c0;
    } else {
      return (t * c1 + c0).eval();
    }
  }
  bool is_linear() const { return detail::is_zero(c0); }
};

template <class T>
T eval_at(const ParamAffine<T>& p, double t) {
  return p.eval_at(t);
}

template <class T>
ParamAffine<T> add(const ParamAffine<T>& a, const ParamAffine<T>& b) {
  Param p = a.param;
  if (a.param != b.param) {
    if (detail::is_zero(a.c1)) p = b.param;
    else if (!detail::is_zero(b.c1))
      throw DegreeError("ParamAffine add: mixing sigma^2 and sigma^-2 terms");
  }
  if constexpr (std::is_arithmetic_v<T>) {
    return {p, a.c1 + b.c1, a.c0 + b.c0};
  } else {
    return {p, (a.c1 + b.c1).eval(), (a.c0 + b.c0).eval()};
  }
}

template <class T>
ParamAffine<T> sub(const ParamAffine<T>& a, const ParamAffine<T>& b) {
  ParamAffine<T> nb = b;
  if constexpr (std::is_arithmetic_v<T>) {
    nb.c1 = -b.c1;
    nb.c0 = -b.c0;
  } else {
    nb.c1 = (-b.c1).eval();
    nb.c0 = (-b.c0).eval();
  }
  return add(a, nb);
}

template <class T>
ParamAffine<T> scale(const ParamAffine<T>& a, double s) {
  if constexpr (std::is_arithmetic_v<T>) {
    return {a.param, s * a.c1, s * a.c0};
  } else {
    return {a.param, (s * a.c1).eval(), (s * a.c0).eval()};
  }
}

// Product of two affine quantities with an arbitrary bilinear coefficient
// product f. Degrees add; the result must stay within {-1, 0, +1} and may
// not contain both a sigma^2 and a sigma^-2 term.
template <class A, class B, class F>
auto compose(const ParamAffine<A>& a, const ParamAffine<B>& b, F f) {
  using R = std::decay_t<decltype(f(a.c1, b.c1))>;
  const int pa = detail::power(a.param), pb = detail::power(b.param);
  const bool a1 = !detail::is_zero(a.c1), a0 = !detail::is_zero(a.c0);
  const bool b1 = !detail::is_zero(b.c1), b0 = !detail::is_zero(b.c0);
  R r11 = f(a.c1, b.c1), r10 = f(a.c1, b.c0), r01 = f(a.c0, b.c1), r00 = f(a.c0, b.c0);
  R zero = detail::zero_like(r00);
  // coefficient of t^k, k in {-2..2}, using only structurally nonzero terms
  R terms[5] = {zero, zero, zero, zero, zero};
  auto put = [&](int k, const R& v, bool live) {
    if (!live) return;
    if constexpr (std::is_arithmetic_v<R>) terms[k + 2] += v;
    else terms[k + 2] = (terms[k + 2] + v).eval();
  };
  put(pa + pb, r11, a1 && b1);
  put(pa, r10, a1 && b0);
  put(pb, r01, a0 && b1);
  put(0, r00, a0 && b0);
  if (!detail::is_zero(terms[0]) || !detail::is_zero(terms[4]))
    throw DegreeError("ParamAffine product: sigma^4 or sigma^-4 term");
  const bool plus = !detail::is_zero(terms[3]);
  const bool minus = !detail::is_zero(terms[1]);
  if (plus && minus) throw DegreeError("ParamAffine product: mixed sigma^2 and sigma^-2 terms");
  ParamAffine<R> out;
  out.param = minus ? Param::InvSigma2 : (plus ? Param::Sigma2 : a.param);
  out.c1 = minus ? terms[1] : terms[3];
  out.c0 = terms[2];
  return out;
}

template <class A, class B>
auto mul(const ParamAffine<A>& a, const ParamAffine<B>& b) {
  return compose(a, b, [](const auto& x, const auto& y) {
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(x * y)>>) return x * y;
    else return (x * y).eval();
  });
}

struct ParamBffdOutput {
  // per coordinate, all in sigma^2
  std::vector<ParamAffine<double>> u_hat;
  std::vector<ParamAffine<double>> y_hat;
  std::vector<ParamAffine<double>> mb_U; // NaN coefficients where P1 == 0
  std::vector<ParamAffine<double>> Vb_U; // c1 = +inf where P1 == 0
  // Precision form of the backward input message: b^T W'' b = P1 / sigma^2
  // and b^T xi'' - b^T W'' x''' = g1 / sigma^2 + g0, so that
  // mb = (g1 + sigma^2 g0) / P1 and Vb = sigma^2 / P1.
  VectorXd P1, g1, g0;
  // x_hat(n) = sigma^2 X1.col(n) + X0.col(n), n = 0..N
  MatrixXd X1, X0;
  bool x0_rank_deficient = false;

  ParamAffine<VectorXd> x_hat(Index n) const { return {Param::Sigma2, X1.col(n), X0.col(n)}; }
};

struct ParamFfbddOutput {
  std::vector<ParamAffine<double>> y_hat;
  std::vector<ParamAffine<double>> u_hat;
  std::vector<ParamAffine<double>> mf_Y;
  std::vector<ParamAffine<double>> Vf_Y;
  std::vector<ParamAffine<double>> xi_tilde_Y; // in sigma^-2
  // xi_tilde_X(n) = Xi1.col(n) / sigma^2 + Xi0.col(n), n = 0..N
  MatrixXd Xi1, Xi0;
  ParamAffine<VectorXd> x0_hat;

  ParamAffine<VectorXd> xi_tilde_X(Index n) const {
    return {Param::InvSigma2, Xi1.col(n), Xi0.col(n)};
  }
};

// Parametric BFFD for the active segments (u_n variables).
ParamBffdOutput param_bffd(const StateSpaceModel& model, const std::vector<Segment>& active);

// Parametric FFBDD for the active segments (absolute y_n variables, i.e.
// segments of model.variable_cost(n)).
ParamFfbddOutput param_ffbdd(const StateSpaceModel& model, const std::vector<Segment>& active);

} // namespace l1path

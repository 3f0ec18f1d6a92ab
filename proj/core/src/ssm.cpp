#include "l1path/ssm.hpp"

#include <sstream>

#include "l1path/error.hpp"
#include "l1path/linalg.hpp"

namespace l1path {

SegmentedCost StateSpaceModel::variable_cost(Index n) const {
  const SegmentedCost& k = costs.at(static_cast<std::size_t>(n));
  return side == RegSide::OutputReg ? k.shifted(y_breve(n)) : k;
}

StateSpaceModel lasso_model(const MatrixXd& F, const VectorXd& y_breve,
                            std::vector<SegmentedCost> costs) {
  if (F.rows() != y_breve.size()) throw DimensionError("lasso_model: F rows != length of y");
  if (static_cast<Index>(costs.size()) != F.cols())
    throw DimensionError("lasso_model: need one cost per column of F");
  const Index L = F.rows(), K = F.cols();
  StateSpaceModel m;
  m.A = MatrixXd::Identity(L, L);
  for (Index n = 0; n < K; ++n) {
    m.b.push_back(F.col(n));
    m.c.push_back(VectorXd::Zero(L));
  }
  m.fixed_initial_state = true;
  m.Q0 = MatrixXd::Zero(L, L);
  m.QN = MatrixXd::Identity(L, L);
  m.x0_breve = VectorXd::Zero(L);
  m.xN_breve = y_breve;
  m.y_breve = VectorXd::Zero(K);
  m.costs = std::move(costs);
  m.side = RegSide::InputReg;
  return m;
}

StateSpaceModel output_model(const MatrixXd& F, const VectorXd& y_breve,
                             std::vector<SegmentedCost> costs) {
  if (F.rows() != y_breve.size()) throw DimensionError("output_model: F rows != length of y");
  if (static_cast<Index>(costs.size()) != F.rows())
    throw DimensionError("output_model: need one cost per row of F");
  const Index L = F.rows(), K = F.cols();
  StateSpaceModel m;
  m.A = MatrixXd::Identity(K, K);
  for (Index n = 0; n < L; ++n) {
    m.b.push_back(VectorXd::Zero(K));
    m.c.push_back(F.row(n).transpose());
  }
  m.fixed_initial_state = false;
  m.Q0 = MatrixXd::Identity(K, K);
  m.QN = MatrixXd::Zero(K, K);
  m.x0_breve = VectorXd::Zero(K);
  m.xN_breve = VectorXd::Zero(K);
  m.y_breve = y_breve;
  m.costs = std::move(costs);
  m.side = RegSide::OutputReg;
  return m;
}

namespace {

StateSpaceModel second_order_random_walk(const VectorXd& y_breve) {
  const Index N = y_breve.size();
  StateSpaceModel m;
  m.A.resize(2, 2);
  m.A << 1, 1, 0, 1;
  VectorXd b(2), c(2);
  b << 0, 1;
  c << 1, 0;
  m.b.assign(static_cast<std::size_t>(N), b);
  m.c.assign(static_cast<std::size_t>(N), c);
  m.Q0 = MatrixXd::Zero(2, 2);
  m.QN = MatrixXd::Zero(2, 2);
  m.x0_breve = VectorXd::Zero(2);
  m.xN_breve = VectorXd::Zero(2);
  m.y_breve = y_breve;
  m.costs.assign(static_cast<std::size_t>(N), make_l1(0.0));
  return m;
}

} // namespace

StateSpaceModel trend_filter_model(const VectorXd& y_breve) {
  if (y_breve.size() < 2) throw ModelError("trend_filter_model: need at least 2 samples");
  StateSpaceModel m = second_order_random_walk(y_breve);
  m.side = RegSide::InputReg;
  return m;
}

StateSpaceModel median_smoother_model(const VectorXd& y_breve, double q0) {
  if (!(q0 > 0)) throw ModelError("median_smoother_model: q0 must be positive");
  if (y_breve.size() < 1) throw ModelError("median_smoother_model: no samples");
  StateSpaceModel m = second_order_random_walk(y_breve);
  m.Q0 = q0 * MatrixXd::Identity(2, 2);
  m.side = RegSide::OutputReg;
  return m;
}

ValidationReport validate(const StateSpaceModel& m) {
  ValidationReport r;
  auto bad = [&](const std::string& s) { r.violations.push_back(s); };
  const Index M = m.A.rows();
  const Index N = m.horizon();
  if (M == 0 || m.A.cols() != M) bad("A must be square and nonempty");
  if (N == 0) bad("horizon must be positive");
  if (static_cast<Index>(m.c.size()) != N) bad("need one c_n per b_n");
  for (Index n = 0; n < N; ++n) {
    if (m.b[static_cast<std::size_t>(n)].size() != M) bad("b_" + std::to_string(n + 1) + " has wrong size");
    if (n < static_cast<Index>(m.c.size()) && m.c[static_cast<std::size_t>(n)].size() != M)
      bad("c_" + std::to_string(n + 1) + " has wrong size");
  }
  if (m.Q0.rows() != M || m.Q0.cols() != M) bad("Q0 has wrong shape");
  else if (!is_symmetric_psd(m.Q0)) bad("Q0 is not symmetric PSD");
  if (m.QN.rows() != M || m.QN.cols() != M) bad("QN has wrong shape");
  else if (!is_symmetric_psd(m.QN)) bad("QN is not symmetric PSD");
  if (m.x0_breve.size() != M) bad("x0_breve has wrong size");
  if (m.xN_breve.size() != M) bad("xN_breve has wrong size");
  if (m.y_breve.size() != N) bad("y_breve must have one entry per step");
  if (static_cast<Index>(m.costs.size()) != N)
    bad("costs length " + std::to_string(m.costs.size()) + " != N = " + std::to_string(N));
  if (!m.A.allFinite() || !m.y_breve.allFinite() || !m.x0_breve.allFinite() ||
      !m.xN_breve.allFinite())
    bad("non-finite model data");
  return r;
}

void require_valid(const StateSpaceModel& model) {
  ValidationReport r = validate(model);
  if (r.ok()) return;
  std::ostringstream os;
  os << "invalid model:";
  for (const auto& v : r.violations) os << "\n  " << v;
  throw ModelError(os.str());
}

Trajectory simulate(const StateSpaceModel& m, const VectorXd& x0, const VectorXd& u) {
  const Index N = m.horizon();
  if (x0.size() != m.state_dim() || u.size() != N) throw DimensionError("simulate: bad sizes");
  Trajectory t;
  t.x.reserve(static_cast<std::size_t>(N + 1));
  t.x.push_back(x0);
  t.y.resize(N);
  for (Index n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    t.x.push_back(m.A * t.x.back() + m.b[k] * u(n));
    t.y(n) = m.c[k].dot(t.x.back());
  }
  return t;
}

} // namespace l1path

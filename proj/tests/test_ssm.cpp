#include <doctest.h>

#include "l1path/error.hpp"
#include "l1path/ssm.hpp"
#include "test_util.hpp"

using namespace l1path;
using l1test::random_matrix;
using l1test::random_vector;

namespace {

std::vector<SegmentedCost> l1_costs(Index n) { return std::vector<SegmentedCost>(n, make_l1(0.0)); }

MatrixXd random_walk_A() {
  MatrixXd A(2, 2);
  A << 1, 1, 0, 1;
  return A;
}

} // namespace

TEST_CASE("lasso embedding") {
  Eigen::Vector2d y(1.0, 0.0);
  auto m = lasso_model(MatrixXd::Identity(2, 2), y, l1_costs(2));
  CHECK(m.state_dim() == 2);
  CHECK(m.horizon() == 2);
  CHECK(m.b[0] == Eigen::Vector2d(1, 0));
  CHECK(m.b[1] == Eigen::Vector2d(0, 1));
  CHECK(m.fixed_initial_state);
  CHECK(m.QN.isIdentity());
  CHECK(m.xN_breve == y);
  CHECK(m.side == RegSide::InputReg);
  CHECK(validate(m).ok());

  auto m3 = lasso_model(random_matrix(3, 2), random_vector(3), l1_costs(2));
  CHECK(m3.state_dim() == 3);
  CHECK(m3.horizon() == 2);
  for (const auto& k : m3.costs) CHECK(k == make_l1(0.0));

  CHECK_THROWS_AS(lasso_model(random_matrix(3, 2), random_vector(2), l1_costs(2)), DimensionError);
  CHECK_THROWS_AS(lasso_model(random_matrix(3, 2), random_vector(3), l1_costs(3)), DimensionError);
}

TEST_CASE("lasso embedding ends in F u") {
  for (int trial = 0; trial < 50; ++trial) {
    const Index L = l1test::uniform_int(1, 8), K = l1test::uniform_int(1, 8);
    const MatrixXd F = random_matrix(L, K);
    auto m = lasso_model(F, random_vector(L), l1_costs(K));
    const VectorXd u = random_vector(K);
    auto t = simulate(m, m.x0_breve, u);
    CHECK((t.x.back() - F * u).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + (F * u).norm()));
    CHECK(t.y.isZero());
  }
}

TEST_CASE("output embedding") {
  auto m = output_model(MatrixXd::Identity(2, 2), Eigen::Vector2d(3, 1), l1_costs(2));
  CHECK(m.state_dim() == 2);
  CHECK(m.horizon() == 2);
  CHECK(m.side == RegSide::OutputReg);
  CHECK(m.Q0.isIdentity());
  CHECK(m.QN.isZero());
  CHECK(m.b[0].isZero());
  CHECK(validate(m).ok());
  // the Vapnik variant is the linear SVR layout
  auto svr = output_model(random_matrix(4, 2), random_vector(4),
                          std::vector<SegmentedCost>(4, make_vapnik(-1.0, 1.0)));
  CHECK(validate(svr).ok());
  CHECK(svr.variable_cost(2).breakpoints()[0] == doctest::Approx(svr.y_breve(2) - 1.0));

  for (int trial = 0; trial < 50; ++trial) {
    const Index L = l1test::uniform_int(1, 8), K = l1test::uniform_int(1, 6);
    const MatrixXd F = random_matrix(L, K);
    auto om = output_model(F, random_vector(L), l1_costs(L));
    const VectorXd x0 = random_vector(K);
    auto t = simulate(om, x0, random_vector(L));
    CHECK((t.y - F * x0).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + (F * x0).norm()));
  }
}

TEST_CASE("trend filter model") {
  auto m = trend_filter_model(Eigen::Vector3d(1, 1, 1));
  CHECK(m.A == random_walk_A());
  for (Index n = 0; n < 3; ++n) {
    CHECK(m.b[n] == Eigen::Vector2d(0, 1));
    CHECK(m.c[n] == Eigen::Vector2d(1, 0));
    CHECK(m.costs[n] == make_l1(0.0));
  }
  CHECK(m.Q0.isZero());
  CHECK(m.QN.isZero());
  CHECK(!m.fixed_initial_state);
  CHECK(m.side == RegSide::InputReg);
  CHECK(validate(m).ok());
  CHECK_THROWS_AS(trend_filter_model(VectorXd::Ones(1)), ModelError);
}

TEST_CASE("median smoother model") {
  auto m = median_smoother_model(random_vector(6), 1e-3);
  CHECK(m.A == random_walk_A());
  CHECK(m.Q0.isApprox(1e-3 * MatrixXd::Identity(2, 2)));
  CHECK(m.QN.isZero());
  CHECK(m.x0_breve.isZero());
  CHECK(m.side == RegSide::OutputReg);
  CHECK(m.b[0] == Eigen::Vector2d(0, 1));
  CHECK(m.c[0] == Eigen::Vector2d(1, 0));
  CHECK(validate(m).ok());
  CHECK_THROWS_AS(median_smoother_model(random_vector(6), 0.0), ModelError);
  CHECK_THROWS_AS(median_smoother_model(random_vector(6), -1.0), ModelError);
}

TEST_CASE("validation") {
  auto m = lasso_model(random_matrix(3, 4), random_vector(3), l1_costs(4));
  CHECK(validate(m).ok());

  auto bad = m;
  bad.QN = -MatrixXd::Identity(3, 3);
  CHECK(!validate(bad).ok());
  CHECK_THROWS_AS(require_valid(bad), ModelError);

  bad = m;
  bad.costs.pop_back();
  auto r = validate(bad);
  REQUIRE(!r.ok());
  CHECK(r.violations[0].find("costs") != std::string::npos);

  bad = m;
  bad.c[1] = VectorXd::Zero(2);
  CHECK(!validate(bad).ok());
}

TEST_CASE("simulation follows the recursion") {
  for (int trial = 0; trial < 20; ++trial) {
    auto m = l1test::random_input_model(3, 5, false);
    const VectorXd x0 = random_vector(3), u = random_vector(5);
    auto t = simulate(m, x0, u);
    REQUIRE(t.x.size() == 6);
    VectorXd x = x0;
    for (Index n = 0; n < 5; ++n) {
      x = m.A * x + m.b[n] * u(n);
      CHECK((t.x[n + 1] - x).norm() < 1e-12 * (1 + x.norm()));
      CHECK(t.y(n) == doctest::Approx(m.c[n].dot(x)));
    }
  }
  auto m = l1test::random_input_model(2, 3, false);
  CHECK_THROWS_AS(simulate(m, VectorXd::Zero(3), VectorXd::Zero(3)), DimensionError);
}

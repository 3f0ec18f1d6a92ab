#include <doctest.h>

#include <cmath>

#include "l1path/error.hpp"
#include "l1path/plcost.hpp"
#include "test_util.hpp"

using namespace l1path;

namespace {

// argmin of kappa(z) + (z - mb)^2 / (2 Vb): dense grid, then golden section.
double argmax_oracle(const SegmentedCost& k, double mb, double Vb) {
  auto f = [&](double z) { return k.eval(z) + (z - mb) * (z - mb) / (2.0 * Vb); };
  double smax = 0.0;
  for (double s : k.slopes())
    if (std::isfinite(s)) smax = std::max(smax, std::abs(s));
  double lo = mb - smax * Vb - 1.0, hi = mb + smax * Vb + 1.0;
  for (double p : k.breakpoints()) {
    lo = std::min(lo, p - 1.0);
    hi = std::max(hi, p + 1.0);
  }
  const int G = 4000;
  double best = lo, fb = f(lo);
  for (int i = 1; i <= G; ++i) {
    double z = lo + (hi - lo) * i / G;
    if (f(z) < fb) fb = f(z), best = z;
  }
  double a = best - (hi - lo) / G, b = best + (hi - lo) / G;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (f(x1) <= f(x2)) b = x2;
    else a = x1;
  }
  double z = 0.5 * (a + b);
  // snap to a kink when one sits inside the final bracket
  for (double p : k.breakpoints())
    if (std::abs(p - z) < 1e-7 && f(p) <= f(z)) z = p;
  return z;
}

} // namespace

TEST_CASE("L1 cost") {
  auto k = make_l1(0.0);
  REQUIRE(k.size() == 3);
  CHECK(k.segment(0).is_line());
  CHECK(k.segment(0).slope == -1.0);
  CHECK(k.segment(1).is_point());
  CHECK(k.segment(1).location == 0.0);
  CHECK(k.segment(2).slope == 1.0);
  CHECK(k.breakpoints() == std::vector<double>{0.0});
  CHECK(k.eval(3.0) == 3.0);
  CHECK(k.eval(-2.0) == 2.0);
  CHECK(make_l1(1.7).eval(1.7) == 0.0);
  CHECK(k.argmin_point() == 1);
}

TEST_CASE("hinge and Vapnik costs") {
  auto h1 = make_hinge1(1.0);
  CHECK(h1.eval(2.5) == 0.0);
  CHECK(h1.eval(0.0) == 1.0);
  auto h2 = make_hinge2(-1.0);
  CHECK(h2.eval(-3.0) == 0.0);
  CHECK(h2.eval(1.0) == 2.0);

  auto v = make_vapnik(-1.0, 2.0);
  REQUIRE(v.size() == 5);
  CHECK(v.eval(-3.0) == 2.0 * (-1.0 - -3.0));
  CHECK(v.eval(0.5) == 0.0);
  CHECK(v.eval(3.0) == 2.0);
  CHECK(v.segment(0).slope == -2.0);
  CHECK(v.segment(2).slope == 0.0);
  CHECK(v.segment(4).slope == 2.0);
  CHECK(v.argmin_point() == SegmentedCost::npos);
  CHECK_THROWS_AS(make_vapnik(1.0, 1.0), ModelError);
  CHECK_THROWS_AS(make_vapnik(2.0, 1.0), ModelError);
}

TEST_CASE("shifted Vapnik cost is the symmetric epsilon-insensitive loss") {
  const double yb = 0.75;
  auto k = make_vapnik(-20.0, 20.0).shifted(yb);
  for (double y : {-50.0, -20.0, -3.0, 0.0, 19.0, 33.0, 70.0}) {
    const double loss = std::abs(y - yb + 20.0) + std::abs(y - yb - 20.0);
    CHECK(k.eval(y) - loss == doctest::Approx(-40.0));
  }
}

TEST_CASE("custom costs") {
  const double a = -0.5, b = 1.25;
  auto k = make_custom({{a, -1.0, 1.0}, {b, 1.0, 2.0}});
  REQUIRE(k.size() == 5);
  CHECK(k.segment(0).slope == -1.0);
  CHECK(k.segment(1).location == a);
  CHECK(k.segment(2).slope == 1.0);
  CHECK(k.segment(3).location == b);
  CHECK(k.segment(4).slope == 2.0);
  // beyond b the cost is 2u - a - b
  CHECK(k.eval(3.0) == doctest::Approx(2.0 * 3.0 - a - b));

  CHECK(make_custom({{0.3, -1.0, 1.0}}) == make_l1(0.3));
  CHECK_THROWS_AS(make_custom({{0.0, 1.0, 1.0}}), ModelError);
  CHECK_THROWS_AS(make_custom({{0.0, 1.0, -1.0}}), ModelError);
  CHECK_THROWS_AS(make_custom({{1.0, -1.0, 0.0}, {0.0, 0.0, 1.0}}), ModelError);
  CHECK_THROWS_AS(make_custom({}), ModelError);
}

TEST_CASE("segment Gaussian parameters") {
  auto k = make_custom({{-1.0, -1.0, 1.0}, {2.0, 1.0, 2.0}});
  auto p0 = segment_params(k.segment(0));
  CHECK(p0.kind == SegmentKind::Line);
  CHECK(p0.value == 1.0);
  auto p1 = segment_params(k.segment(1));
  CHECK(p1.kind == SegmentKind::Point);
  CHECK(p1.value == -1.0);
  CHECK(segment_params(k.segment(4)).value == -2.0);
  CHECK(p1.message().is_point());
  CHECK(p0.message().is_flat());
}

TEST_CASE("locate") {
  auto k = make_l1(0.0);
  CHECK(locate(k, -0.5) == 0);
  CHECK(locate(k, 0.0) == 1);
  CHECK(locate(k, 1e-300) == 2);
  auto v = make_vapnik(-1.0, 3.0);
  CHECK(locate(v, 1.0) == 2);
  CHECK(locate(v, 3.0) == 3);
}

TEST_CASE("decision rules") {
  auto k = make_l1(0.4);
  const Segment& left = k.segment(0);
  CHECK(decide(left, 1.0, 0.25) == 1.25);
  CHECK(in_subdomain(left, -1.0, 1.0));  // -1 < -1 + 0.4
  CHECK(!in_subdomain(left, -0.6, 1.0)); // boundary goes to the point
  CHECK(in_subdomain(k.segment(1), -0.6, 1.0));

  auto v = make_vapnik(-1.0, 1.0);
  CHECK(decide(v.segment(0), 0.5, 1.0) == 2.5);
  CHECK(in_subdomain(v.segment(0), -3.5, 1.0));  // -3.5 < -2 - 1
  CHECK(!in_subdomain(v.segment(0), -2.5, 1.0));
  CHECK(decide(v.segment(1), 5.0, 1.0) == -1.0);
  CHECK(in_subdomain(v.segment(1), -2.5, 1.0));
}

TEST_CASE("exactly one segment holds and it decides the argmax") {
  for (int trial = 0; trial < 2000; ++trial) {
    const SegmentedCost k = l1test::random_cost();
    const double mb = l1test::uniform(-4.0, 4.0);
    const double Vb = l1test::log_uniform(1e-2, 10.0);
    int holds = 0;
    std::size_t which = 0;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (in_subdomain(k.segment(i), mb, Vb)) ++holds, which = i;
    REQUIRE(holds == 1);
    const double z = decide(k.segment(which), mb, Vb);
    CHECK(k.segment(which).contains(z));
    CHECK(std::abs(z - argmax_oracle(k, mb, Vb)) <= 1e-6);
  }
}

TEST_CASE("costs are convex") {
  for (int trial = 0; trial < 2000; ++trial) {
    const SegmentedCost k = l1test::random_cost();
    const double z1 = l1test::uniform(-5, 5), z2 = l1test::uniform(-5, 5), lam = l1test::uniform(0, 1);
    CHECK(k.eval(lam * z1 + (1 - lam) * z2) <= lam * k.eval(z1) + (1 - lam) * k.eval(z2) + 1e-9);
  }
}

TEST_CASE("segment parameters reconstruct the cost") {
  for (int trial = 0; trial < 200; ++trial) {
    const SegmentedCost k = l1test::random_cost();
    std::vector<double> bp, sl;
    for (const Segment& s : k.segments()) {
      auto p = segment_params(s);
      if (p.kind == SegmentKind::Line) sl.push_back(-p.value);
      else bp.push_back(p.value);
    }
    auto r = SegmentedCost::from_breakpoints(bp, sl);
    for (int i = 0; i < 20; ++i) {
      const double z = l1test::uniform(-4, 4);
      CHECK(r.eval(z) == doctest::Approx(k.eval(z)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cost json round trip") {
  auto k = make_custom({{-1.0, -1.0, 0.5}, {2.0, 0.5, 2.0}});
  CHECK(cost_from_json(cost_to_json(k)) == k);
  auto clamp = SegmentedCost::from_breakpoints({0.0}, {-kInf, kInf});
  CHECK(clamp.size() == 1);
  CHECK(cost_from_json(cost_to_json(clamp)) == clamp);
  CHECK_THROWS_AS(cost_from_json("{\"breakpoints\": [0], \"slopes\": [1]}"), ModelError);
  CHECK_THROWS_AS(cost_from_json("not json"), ParseError);
}

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "l1path/error.hpp"
#include "l1path/oracle.hpp"
#include "l1path/parametric.hpp"
#include "l1path/path.hpp"
#include "l1path/solvers.hpp"
#include "test_util.hpp"

using namespace l1path;
using l1test::max_rel_err;
using l1test::random_matrix;
using l1test::random_vector;
using l1test::rel_err;
using l1test::uniform_int;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the worst value of a quantity against its bound.
struct Worst {
  double value = 0.0;
  void add(double v) { value = std::max(value, std::isnan(v) ? kInf : v); }
};

std::vector<SegmentedCost> l1_costs(Index n) { return std::vector<SegmentedCost>(n, make_l1(0.0)); }

std::vector<double> midpoints(const RegPath& p) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < p.knots.size(); ++i) out.push_back(0.5 * (p.knots[i] + p.knots[i + 1]));
  out.push_back(2.0 * p.sigma2_max() + 1.0);
  return out;
}

// count log-spaced values up to 1.5 sigma2_max.
std::vector<double> global_samples(const RegPath& p, int count) {
  std::vector<double> out;
  const double hi = std::max(1e-6, 1.5 * p.sigma2_max());
  for (int i = 0; i < count; ++i) out.push_back(hi * std::pow(1e-4, 1.0 - double(i) / (count - 1)));
  return out;
}

// Every path the run produces goes through the structural checks.
std::vector<std::string> structure_failures;
std::size_t structure_checked = 0;

void record_structure(const RegPath& p, const std::string& label) {
  ++structure_checked;
  for (const auto& c : check_path_structure(p))
    if (!c.pass) structure_failures.push_back(label + " " + c.name + ": " + c.detail);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Outcome parametric_vs_concrete() {
  Worst err;
  int models[2] = {0, 0};
  for (int side = 0; side < 2; ++side) {
    for (int trial = 0; trial < 500 && models[side] < 50; ++trial) {
      const Index M = uniform_int(1, 4), N = uniform_int(1, 12);
      StateSpaceModel m = side == 0 ? l1test::random_input_model(M, N, uniform_int(0, 1) == 1)
                                    : l1test::random_output_model(M, N);
      std::vector<Segment> segs;
      std::vector<SegmentGaussParams> msgs;
      for (Index n = 0; n < N; ++n) {
        const SegmentedCost k = m.variable_cost(n);
        const auto i = static_cast<std::size_t>(uniform_int(0, static_cast<int>(k.size()) - 1));
        segs.push_back(k.segment(i));
        msgs.push_back(segment_params(k.segment(i)));
      }
      try {
        if (side == 0) {
          const auto p = param_bffd(m, segs);
          ++models[side];
          for (int s = 0; s < 10; ++s) {
            const double s2 = l1test::log_uniform(1e-3, 1e3);
            const auto c = bffd(m, s2, msgs);
            for (Index n = 0; n < N; ++n) {
              err.add(rel_err(p.u_hat[n].at_sigma2(s2), c.u_hat(n)));
              err.add(rel_err(p.y_hat[n].at_sigma2(s2), c.y_hat(n)));
              if (p.P1(n) > 0) {
                err.add(rel_err(p.mb_U[n].at_sigma2(s2), c.mb_U(n)));
                err.add(rel_err(p.Vb_U[n].at_sigma2(s2), c.Vb_U(n)));
              }
            }
          }
        } else {
          const auto p = param_ffbdd(m, segs);
          ++models[side];
          for (int s = 0; s < 10; ++s) {
            const double s2 = l1test::log_uniform(1e-3, 1e3);
            const auto c = ffbdd(m, s2, msgs);
            for (Index n = 0; n < N; ++n) {
              err.add(rel_err(p.y_hat[n].at_sigma2(s2), c.y_hat(n)));
              err.add(rel_err(p.u_hat[n].at_sigma2(s2), c.u_hat(n)));
              err.add(rel_err(p.mf_Y[n].at_sigma2(s2), c.mf_Y(n)));
              err.add(rel_err(p.Vf_Y[n].at_sigma2(s2), c.Vf_Y(n)));
              err.add(rel_err(p.xi_tilde_Y[n].at_sigma2(s2), c.xi_tilde_Y(n)));
            }
          }
        }
      } catch (const SingularError&) {
        // inadmissible active set for this model, draw another
      }
    }
  }
  Outcome o;
  o.pass = models[0] == 50 && models[1] == 50 && err.value <= 1e-9;
  o.detail = std::to_string(models[0]) + "+" + std::to_string(models[1]) +
             " models, max rel err " + fmt(err.value);
  return o;
}

Outcome worked_example() {
  const auto k = make_l1(0.0);
  const ParamAffine<double> mb{Param::Sigma2, 1.0, 2.0}, Vb{Param::Sigma2, 2.0, 0.0};
  const double right = exit_sigma2(k.segment(2), mb, Vb, 0.0);
  const double zero = exit_sigma2(k.segment(1), mb, Vb, right);
  bool left_rejected = false;
  try {
    exit_sigma2(k.segment(0), mb, Vb, 0.0);
  } catch (const PathError&) {
    left_rejected = true;
  }
  Outcome o;
  o.pass = right == 2.0 && zero == kInf && left_rejected;
  o.detail = "u>0 exits at " + fmt(right) + ", {0} at " + fmt(zero) +
             (left_rejected ? ", u<0 infeasible" : ", u<0 accepted");
  return o;
}

struct LassoRun {
  StateSpaceModel model;
  RegPath path;
};
std::vector<LassoRun> lasso_runs;

Outcome lasso_optimality() {
  Worst kkt, brute;
  int bf_instances = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Index L = uniform_int(1, 8), K = uniform_int(1, 12);
    const MatrixXd F = random_matrix(L, K);
    const VectorXd y = 2.0 * random_vector(L);
    auto m = lasso_model(F, y, l1_costs(K));
    RegPath p = path_bffd(m);
    record_structure(p, "lasso " + std::to_string(trial));
    std::vector<double> at = midpoints(p);
    for (double s2 : global_samples(p, 25)) at.push_back(s2);
    for (double s2 : at) kkt.add(oracle::kkt_residual_input(m, s2, eval_path(p, s2)));
    if (K <= 6) {
      ++bf_instances;
      for (double s2 : at) {
        if (s2 <= 0.0) continue;
        const auto ref = oracle::brute_force_active_sets(m, s2);
        if (!ref.found) {
          brute.add(kInf);
          continue;
        }
        brute.add(max_rel_err(eval_path(p, s2), ref.estimate));
      }
    }
    lasso_runs.push_back({std::move(m), std::move(p)});
  }
  Outcome o;
  o.pass = kkt.value <= 1e-6 && brute.value <= 1e-6;
  o.detail = "max KKT residual " + fmt(kkt.value) + ", brute force gap " + fmt(brute.value) +
             " on " + std::to_string(bf_instances) + " instances";
  return o;
}

Outcome orthogonal_design() {
  Worst err;
  for (int trial = 0; trial < 20; ++trial) {
    const Index L = uniform_int(1, 8);
    VectorXd d(L), y(L);
    for (Index i = 0; i < L; ++i) {
      d(i) = (uniform_int(0, 1) ? 1.0 : -1.0) * l1test::uniform(0.3, 3.0);
      y(i) = l1test::uniform(-3.0, 3.0);
    }
    const MatrixXd F = d.asDiagonal();
    auto m = lasso_model(F, y, l1_costs(L));
    const RegPath p = path_bffd(m);
    record_structure(p, "orthogonal " + std::to_string(trial));
    // (d u - y)^2 + 2 sigma2 |u| is minimized by soft thresholding d y at sigma2.
    std::vector<double> knots{0.0};
    for (Index i = 0; i < L; ++i) knots.push_back(std::abs(d(i) * y(i)));
    std::sort(knots.begin(), knots.end());
    if (knots.size() != p.knots.size()) {
      err.add(kInf);
      continue;
    }
    for (std::size_t i = 0; i < knots.size(); ++i) err.add(rel_err(p.knots[i], knots[i]));
    std::vector<double> at = midpoints(p);
    at.insert(at.end(), knots.begin(), knots.end());
    for (double s2 : at) {
      const VectorXd u = eval_path(p, s2);
      for (Index i = 0; i < L; ++i) {
        const double dy = d(i) * y(i);
        const double ref = std::copysign(std::max(std::abs(dy) - s2, 0.0), dy) / (d(i) * d(i));
        err.add(rel_err(u(i), ref));
      }
    }
  }
  Outcome o;
  o.pass = err.value <= 1e-8;
  o.detail = "max rel err " + fmt(err.value);
  return o;
}

Outcome output_duality() {
  Worst kkt, gap;
  for (int trial = 0; trial < 30; ++trial) {
    const Index K = uniform_int(1, 6), L = uniform_int(1, 10);
    const MatrixXd F = random_matrix(L, K);
    const VectorXd y = 2.0 * random_vector(L);
    auto m = output_model(F, y, l1_costs(L));
    const RegPath p = path_ffbdd(m);
    record_structure(p, "output " + std::to_string(trial));
    std::vector<double> at = midpoints(p);
    for (double s2 : global_samples(p, 10)) at.push_back(s2);
    for (double s2 : at) {
      const VectorXd x0 = eval_path(p, s2, Series::InitialState);
      const VectorXd u = eval_path(p, s2, Series::Secondary);
      kkt.add(oracle::kkt_residual_output(m, s2, x0, u));
      const double obj = oracle::objective_output(m, s2, x0, u);
      gap.add(obj - oracle::solve_output_reg(m, s2).report.objective);
    }
  }
  Outcome o;
  o.pass = kkt.value <= 1e-6 && gap.value <= 1e-6;
  o.detail = "max KKT residual " + fmt(kkt.value) + ", path minus oracle objective " + fmt(gap.value);
  return o;
}

Outcome terminal_behavior(const std::string& fixtures) {
  bool lasso_zero = true;
  for (const auto& r : lasso_runs) {
    const auto& last = r.path.pieces.back().estimate;
    lasso_zero = lasso_zero && last.c1.isZero(0.0) && last.c0.isZero(0.0);
  }
  std::vector<VectorXd> series;
  for (int trial = 0; trial < 10; ++trial) {
    const Index N = uniform_int(5, 40);
    VectorXd y(N);
    for (Index i = 0; i < N; ++i) y(i) = 0.05 * double(i) + (i % 4 == 0 ? 1.0 : 0.0) + 0.2 * l1test::uniform(-1, 1);
    series.push_back(y);
  }
  series.push_back(cli::ingest_csv(fixtures + "/steps.csv").values.col(0));
  Worst slope;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto m = median_smoother_model(series[i], 1e-3);
    const RegPath p = path_ffbdd(m);
    record_structure(p, "median smoother " + std::to_string(i));
    const auto& last = p.pieces.back().estimate;
    slope.add(last.c1.cwiseAbs().maxCoeff() / (1.0 + last.c0.cwiseAbs().maxCoeff()));
  }
  Outcome o;
  o.pass = lasso_zero && slope.value <= 1e-9;
  o.detail = std::string(lasso_zero ? "lasso final pieces zero" : "nonzero final lasso piece") +
             ", median smoother final slope " + fmt(slope.value);
  return o;
}

Outcome structure_and_cli(const std::string& fixtures) {
  struct Fixture {
    const char* preset;
    const char* file;
  };
  const Fixture all[] = {{"trend_filter", "trend.csv"},
                         {"median_smoother", "steps.csv"},
                         {"lasso", "regression.csv"},
                         {"svr", "svr.csv"}};
  std::vector<std::string> cli_failures;
  for (const Fixture& f : all) {
    const std::string data = fixtures + "/" + f.file;
    const std::string out = "acceptance_" + std::string(f.preset) + ".json";
    std::ostringstream sink, err;
    std::vector<std::string> run_args{"l1path", "run", "--preset", f.preset, "--data", data, "--out", out};
    std::vector<std::string> check_args{"l1path", "check", "--preset", f.preset, "--data", data, "--path", out};
    for (auto* args : {&run_args, &check_args}) {
      std::vector<char*> argv;
      for (auto& a : *args) argv.push_back(a.data());
      const int rc = cli::main_entry(static_cast<int>(argv.size()), argv.data(), sink, err);
      if (rc != 0) {
        cli_failures.push_back((*args)[1] + " " + f.preset);
        break;
      }
    }
    std::remove(out.c_str());
  }
  Outcome o;
  o.pass = structure_failures.empty() && cli_failures.empty();
  o.detail = std::to_string(structure_checked) + " paths, " +
             std::to_string(structure_failures.size()) + " structure failures";
  if (!structure_failures.empty()) o.detail += " (first: " + structure_failures.front() + ")";
  o.detail += ", CLI check on " + std::to_string(std::size(all)) + " fixtures";
  for (const auto& c : cli_failures) o.detail += ", failed: " + c;
  return o;
}

Outcome trend_scaling() {
  const Index sizes[] = {2000, 4000, 8000};
  PathOptions opt;
  opt.knot_limit = 40;
  std::vector<double> per_knot;
  for (Index N : sizes) {
    VectorXd y(N);
    for (Index i = 0; i < N; ++i)
      y(i) = std::sin(6.0 * double(i) / double(N)) + 0.3 * l1test::uniform(-1, 1);
    const auto m = trend_filter_model(y);
    std::vector<double> runs;
    for (int r = 0; r < 5; ++r) {
      const RegPath p = path_bffd(m, opt);
      runs.push_back(p.stats.loop_seconds / double(p.stats.iterations));
    }
    std::nth_element(runs.begin(), runs.begin() + 2, runs.end());
    per_knot.push_back(runs[2]);
  }
  Outcome o;
  o.detail = "per-knot seconds";
  for (double t : per_knot) o.detail += " " + fmt(t);
  o.detail += ", ratios";
  for (std::size_t i = 1; i < per_knot.size(); ++i) {
    const double ratio = per_knot[i] / per_knot[i - 1];
    o.detail += " " + fmt(ratio);
    o.pass = o.pass && ratio <= 2.6;
  }
  return o;
}

} // namespace

int main(int argc, char** argv) {
  const std::string fixtures = argc > 1 ? argv[1] : L1PATH_FIXTURE_DIR;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"parametric passes match concrete passes", parametric_vs_concrete},
      {"exit rule on the worked example", worked_example},
      {"lasso path optimality", lasso_optimality},
      {"orthogonal design soft thresholding", orthogonal_design},
      {"output path against the dual oracle", output_duality},
      {"terminal behavior", [&] { return terminal_behavior(fixtures); }},
      {"piecewise affinity, continuity and CLI check", [&] { return structure_and_cli(fixtures); }},
      {"per-knot time scaling on trend filters", trend_scaling},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "l1path/error.hpp"
#include "l1path/oracle.hpp"

namespace l1path::cli {

namespace {

// Problems with the invocation itself (exit code 2).
class UsageError : public Error {
public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

VectorXd single_column(const CsvData& d, const std::string& preset) {
  if (d.values.cols() != 1)
    throw ModelError(preset + " expects a single data column, got " +
                     std::to_string(d.values.cols()));
  return d.values.col(0);
}

MatrixXd json_matrix(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string("model json: '") + name + "' must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j[0].size());
  MatrixXd M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw ParseError(std::string("model json: '") + name + "' is ragged");
    for (Index k = 0; k < cols; ++k) M(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return M;
}

VectorXd json_vector(const nlohmann::json& j, const char* name) {
  if (!j.is_array()) throw ParseError(std::string("model json: '") + name + "' must be an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

std::vector<VectorXd> json_vectors(const nlohmann::json& j, const char* name) {
  if (!j.is_array()) throw ParseError(std::string("model json: '") + name + "' must be an array");
  std::vector<VectorXd> out;
  for (const auto& e : j) out.push_back(json_vector(e, name));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Series parse_series(const std::string& s) {
  if (s == "estimate") return Series::Estimate;
  if (s == "secondary") return Series::Secondary;
  if (s == "x0") return Series::InitialState;
  throw UsageError("unknown series '" + s + "' (estimate, secondary, x0)");
}

double probe_sigma2(const RegPath& p, std::size_t i) {
  if (i + 1 < p.knots.size()) return 0.5 * (p.knots[i] + p.knots[i + 1]);
  return p.knots[i] > 0 ? 2.0 * p.knots[i] : 1.0;
}

} // namespace

CsvData parse_csv(const std::string& text, const std::string& source) {
  CsvData d;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0, width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(line);
    if (rows.empty() && d.header.empty()) {
      bool numeric = true;
      for (const auto& c : cells) {
        double v;
        if (!c.empty() && !parse_number(c, v)) numeric = false;
      }
      if (!numeric) {
        d.header = cells;
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ParseError(source + ": row " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " fields, expected " + std::to_string(width));
    std::vector<double> r;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double v;
      if (cells[k].empty())
        throw ParseError(source + ": blank cell at row " + std::to_string(lineno) + ", column " +
                         std::to_string(k + 1));
      if (!parse_number(cells[k], v) || !std::isfinite(v))
        throw ParseError(source + ": invalid number '" + cells[k] + "' at row " +
                         std::to_string(lineno) + ", column " + std::to_string(k + 1));
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");
  d.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < width; ++k)
      d.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  return d;
}

CsvData ingest_csv(const std::string& path) { return parse_csv(read_file(path), path); }

bool known_preset(const std::string& name) {
  static const std::set<std::string> names{"trend_filter", "median_smoother", "lasso", "svr",
                                           "custom"};
  return names.count(name) > 0;
}

StateSpaceModel model_from_json(const std::string& text, const std::optional<VectorXd>& y_breve) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }
  try {
    StateSpaceModel m;
    const std::string side = j.value("side", std::string("input"));
    if (side == "input") m.side = RegSide::InputReg;
    else if (side == "output") m.side = RegSide::OutputReg;
    else throw ParseError("model json: side must be 'input' or 'output'");
    m.A = json_matrix(j.at("A"), "A");
    const Index M = m.A.rows();
    m.b = json_vectors(j.at("b"), "b");
    m.c = json_vectors(j.at("c"), "c");
    m.fixed_initial_state = j.value("fixed_initial_state", false);
    m.Q0 = j.contains("Q0") ? json_matrix(j["Q0"], "Q0") : MatrixXd::Zero(M, M);
    m.QN = j.contains("QN") ? json_matrix(j["QN"], "QN") : MatrixXd::Zero(M, M);
    m.x0_breve = j.contains("x0_breve") ? json_vector(j["x0_breve"], "x0_breve") : VectorXd::Zero(M);
    m.xN_breve = j.contains("xN_breve") ? json_vector(j["xN_breve"], "xN_breve") : VectorXd::Zero(M);
    if (j.contains("y_breve")) m.y_breve = json_vector(j["y_breve"], "y_breve");
    else if (y_breve) m.y_breve = *y_breve;
    else throw ParseError("model json: no y_breve and no data column");
    const std::size_t N = m.b.size();
    if (j.contains("costs")) {
      for (const auto& c : j["costs"]) m.costs.push_back(cost_from_json(c.dump()));
    } else {
      const SegmentedCost c = j.contains("cost") ? cost_from_json(j["cost"].dump()) : make_l1(0.0);
      m.costs.assign(N, c);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }
}

StateSpaceModel build_model(const ModelOptions& opt) {
  if (!known_preset(opt.preset)) throw UsageError("unknown preset '" + opt.preset + "'");
  std::optional<SegmentedCost> cost;
  if (opt.cost_path) cost = cost_from_json(read_file(*opt.cost_path));
  StateSpaceModel m;
  if (opt.preset == "custom") {
    std::string text = read_file(opt.data_path);
    std::optional<VectorXd> y;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{')
      throw ModelError("custom preset expects a model JSON file as --data");
    m = model_from_json(text, y);
    if (cost) m.costs.assign(m.b.size(), *cost);
    return m;
  }
  const CsvData d = ingest_csv(opt.data_path);
  if (opt.preset == "trend_filter") {
    m = trend_filter_model(single_column(d, opt.preset));
    if (cost) m.costs.assign(m.b.size(), *cost);
  } else if (opt.preset == "median_smoother") {
    m = median_smoother_model(single_column(d, opt.preset), opt.q0.value_or(1e-3));
    if (cost) m.costs.assign(m.b.size(), *cost);
  } else {
    if (d.values.cols() < 2)
      throw ModelError(opt.preset + " expects design columns followed by a response column");
    const MatrixXd F = d.values.leftCols(d.values.cols() - 1);
    const VectorXd y = d.values.col(d.values.cols() - 1);
    if (opt.preset == "lasso") {
      m = lasso_model(F, y, std::vector<SegmentedCost>(static_cast<std::size_t>(F.cols()),
                                                       cost.value_or(make_l1(0.0))));
    } else {
      const double eps = opt.epsilon.value_or(1.0);
      if (!(eps > 0)) throw UsageError("--epsilon must be positive");
      m = output_model(F, y, std::vector<SegmentedCost>(static_cast<std::size_t>(F.rows()),
                                                        cost.value_or(make_vapnik(-eps, eps))));
    }
  }
  return m;
}

std::vector<double> plot_grid(const RegPath& path) {
  std::vector<double> g(path.knots.begin(), path.knots.end());
  double lo = 1e-3, hi = 1e3;
  if (path.knots.size() > 1) {
    lo = path.knots[1] / 10.0;
    hi = 2.0 * path.sigma2_max();
  }
  const int n = 200;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

void write_plot(const RegPath& path, const std::vector<double>& grid, Series series,
                std::ostream& os) {
  const char* prefix = "u";
  if (series == Series::InitialState) prefix = "x0_";
  else if ((series == Series::Estimate) == (path.side == RegSide::OutputReg)) prefix = "y";
  const Index d = eval_path(path, grid.empty() ? 0.0 : grid.front(), series).size();
  os << "sigma2";
  for (Index n = 0; n < d; ++n) os << '\t' << prefix << n + 1;
  os << '\n';
  for (double s : grid) {
    const VectorXd v = eval_path(path, s, series);
    os << fmt(s);
    for (Index n = 0; n < v.size(); ++n) os << '\t' << fmt(v(n));
    os << '\n';
  }
}

std::vector<CheckResult> check_path(const RegPath& path, const StateSpaceModel& model) {
  std::vector<CheckResult> out;
  const Index N = model.horizon();
  if (path.side != model.side || path.dim() != N) {
    out.push_back({"model", false, "path does not match the model (side or dimension)"});
    return out;
  }
  for (CheckResult& r : check_path_structure(path)) out.push_back(std::move(r));

  CheckResult active{"active segments", true, ""};
  CheckResult kkt{"kkt", true, ""};
  const double scale = 1.0 + (model.y_breve.size() ? model.y_breve.cwiseAbs().maxCoeff() : 0.0);
  const double kkt_tol = 1e-6 * scale;
  double worst = 0.0;
  for (std::size_t i = 0; i < path.pieces.size(); ++i) {
    const double s = probe_sigma2(path, i);
    const VectorXd est = eval_path(path, s);
    const std::vector<std::size_t> act = path.active_on(i);
    for (Index n = 0; n < N && active.pass; ++n) {
      const SegmentedCost cost = model.variable_cost(n);
      std::size_t where = SegmentedCost::npos;
      try {
        where = locate(cost, est(n));
      } catch (const Error&) {
      }
      if (where != act[static_cast<std::size_t>(n)]) {
        active.pass = false;
        active.detail = "interval " + std::to_string(i) + ", coordinate " + std::to_string(n + 1) +
                        " is not on its recorded segment";
      }
    }
    if (s <= 0) continue;
    const double r =
        model.side == RegSide::InputReg
            ? oracle::kkt_residual_input(model, s, est)
            : oracle::kkt_residual_output(model, s, eval_path(path, s, Series::InitialState),
                                          eval_path(path, s, Series::Secondary));
    worst = std::max(worst, r);
    if (!(r <= kkt_tol) && kkt.pass) {
      kkt.pass = false;
      kkt.detail = "residual " + fmt(r) + " at sigma2=" + fmt(s) + " (interval " +
                   std::to_string(i) + ")";
    }
  }
  if (kkt.pass) kkt.detail = "max residual " + fmt(worst);
  out.push_back(active);
  out.push_back(kkt);
  return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const StateSpaceModel m = build_model(cfg.model);
    const RegPath p = compute_path(m);
    std::ofstream js(cfg.output_path);
    if (!js) throw UsageError("cannot write '" + cfg.output_path + "'");
    js << path_to_json(p) << '\n';
    if (cfg.plot_path) {
      std::ofstream tsv(*cfg.plot_path);
      if (!tsv) throw UsageError("cannot write '" + *cfg.plot_path + "'");
      write_plot(p, cfg.sigma2_grid ? *cfg.sigma2_grid : plot_grid(p), cfg.plot_series, tsv);
    }
    out << "knots " << p.knots.size() - 1 << '\n';
    out << "sigma2_max " << fmt(p.sigma2_max()) << '\n';
    out << "s2_max " << fmt(2.0 * p.sigma2_max()) << '\n';
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int check(const CheckConfig& cfg, std::ostream& out, std::ostream& err) {
  RegPath p;
  StateSpaceModel m;
  try {
    p = path_from_json(read_file(cfg.path_path));
    m = build_model(cfg.model);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  try {
    bool ok = true;
    for (const CheckResult& r : check_path(p, m)) {
      out << (r.pass ? "PASS " : "FAIL ") << r.name;
      if (!r.detail.empty()) out << ": " << r.detail;
      out << '\n';
      ok = ok && r.pass;
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int eval(const std::string& path_path, double sigma2, Series series, std::ostream& out,
         std::ostream& err) {
  try {
    const RegPath p = path_from_json(read_file(path_path));
    if (!(sigma2 >= 0)) throw UsageError("--sigma2 must be nonnegative");
    const VectorXd v = eval_path(p, sigma2, series);
    out << fmt(sigma2);
    for (Index n = 0; n < v.size(); ++n) out << '\t' << fmt(v(n));
    out << '\n';
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact L1 regularization paths for linear state space models"};
  app.require_subcommand(1);

  auto add_model_opts = [](CLI::App* sub, ModelOptions& mo) {
    sub->add_option("--preset", mo.preset, "trend_filter, median_smoother, lasso, svr or custom")
        ->required();
    sub->add_option("--data", mo.data_path, "CSV data (model JSON for custom)")->required();
    sub->add_option("--cost", mo.cost_path, "cost JSON {breakpoints, slopes} for every coordinate");
    sub->add_option("--q0", mo.q0, "initial state weight for median_smoother (default 1e-3)");
    sub->add_option("--epsilon", mo.epsilon, "svr insensitivity half-width (default 1)");
  };

  RunConfig rc;
  std::string run_series = "estimate";
  std::vector<double> grid;
  CLI::App* run_cmd = app.add_subcommand("run", "compute a path and write it as JSON");
  add_model_opts(run_cmd, rc.model);
  run_cmd->add_option("--out", rc.output_path, "output path JSON")->required();
  run_cmd->add_option("--plot", rc.plot_path, "write sampled path as TSV");
  run_cmd->add_option("--plot-series", run_series, "estimate, secondary or x0");
  run_cmd->add_option("--grid", grid, "sigma2 values for --plot instead of the default grid");

  CheckConfig cc;
  CLI::App* check_cmd = app.add_subcommand("check", "verify a stored path against its model");
  add_model_opts(check_cmd, cc.model);
  check_cmd->add_option("--path", cc.path_path, "path JSON")->required();

  std::string eval_path_file, eval_series = "estimate";
  double sigma2 = 0.0;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a stored path");
  eval_cmd->add_option("--path", eval_path_file, "path JSON")->required();
  eval_cmd->add_option("--sigma2", sigma2, "sigma^2 (s^2 / 2)")->required();
  eval_cmd->add_option("--series", eval_series, "estimate, secondary or x0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    if (*run_cmd) {
      if (!known_preset(rc.model.preset)) throw UsageError("unknown preset '" + rc.model.preset + "'");
      rc.plot_series = parse_series(run_series);
      if (!grid.empty()) rc.sigma2_grid = grid;
      return run(rc, out, err);
    }
    if (*check_cmd) {
      if (!known_preset(cc.model.preset)) throw UsageError("unknown preset '" + cc.model.preset + "'");
      return check(cc, out, err);
    }
    return eval(eval_path_file, sigma2, parse_series(eval_series), out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace l1path::cli

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "l1path/error.hpp"
#include "test_util.hpp"

using namespace l1path;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "l1path");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
public:
  TempDir() {
    dir_ = fs::temp_directory_path() / ("l1path_cli_" + std::to_string(l1test::uniform_int(0, 1 << 30)));
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
  fs::path dir_;
};

std::string column_csv(const VectorXd& y, bool header) {
  std::ostringstream os;
  os.precision(17);
  if (header) os << "value\n";
  for (Index i = 0; i < y.size(); ++i) os << y(i) << '\n';
  return os.str();
}

std::string matrix_csv(const MatrixXd& F, const VectorXd& y) {
  std::ostringstream os;
  os.precision(17);
  for (Index i = 0; i < F.rows(); ++i) {
    for (Index k = 0; k < F.cols(); ++k) os << F(i, k) << ',';
    os << y(i) << '\n';
  }
  return os.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("csv parsing") {
  auto d = cli::parse_csv("a,b\n1,2\n3, 4\n\n5,6\n");
  CHECK(d.header == std::vector<std::string>{"a", "b"});
  CHECK(d.values.rows() == 3);
  CHECK(d.values(1, 1) == 4.0);

  d = cli::parse_csv("1.5\n-2e-3\n");
  CHECK(d.header.empty());
  CHECK(d.values(1, 0) == -2e-3);

  auto message = [](const std::string& text) {
    try {
      cli::parse_csv(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("1,2\n3\n").find("row 2") != std::string::npos);
  CHECK(message("1,2\n3,\n").find("column 2") != std::string::npos);
  CHECK(message("1,2\nnan,1\n").find("row 2, column 1") != std::string::npos);
  CHECK(message("1,2\n3,x\n").find("'x'") != std::string::npos);
  CHECK(message("").find("no data") != std::string::npos);
  CHECK(message("only,a,header\n").find("no data") != std::string::npos);
}

TEST_CASE("csv shapes of the data sets") {
  TempDir t;
  VectorXd y(143);
  for (Index i = 0; i < 143; ++i) y(i) = 0.01 * double(i) + 0.1 * std::sin(double(i));
  auto d = cli::ingest_csv(t.file("temps.csv", column_csv(y, true)));
  CHECK(d.values.rows() == 143);
  CHECK(d.values.cols() == 1);

  const MatrixXd F = l1test::random_matrix(442, 10);
  const VectorXd r = l1test::random_vector(442);
  cli::ModelOptions mo;
  mo.preset = "lasso";
  mo.data_path = t.file("diabetes.csv", matrix_csv(F, r));
  auto m = cli::build_model(mo);
  CHECK(m.state_dim() == 442);
  CHECK(m.horizon() == 10);
  CHECK_THROWS_AS(cli::ingest_csv(t.file("empty.csv", "")), ParseError);
}

TEST_CASE("presets") {
  TempDir t;
  cli::ModelOptions mo;
  mo.preset = "median_smoother";
  mo.data_path = t.file("y.csv", column_csv(l1test::random_vector(8), false));
  auto m = cli::build_model(mo);
  CHECK(m.side == RegSide::OutputReg);
  CHECK(m.Q0(0, 0) == 1e-3);
  mo.q0 = 0.5;
  CHECK(cli::build_model(mo).Q0(0, 0) == 0.5);

  mo = {};
  mo.preset = "svr";
  mo.data_path = t.file("svr.csv", matrix_csv(l1test::random_matrix(5, 2), l1test::random_vector(5)));
  mo.epsilon = 0.25;
  m = cli::build_model(mo);
  CHECK(m.horizon() == 5);
  CHECK(m.costs[0] == make_vapnik(-0.25, 0.25));

  mo.cost_path = t.file("cost.json", cost_to_json(make_hinge1(0.0)));
  CHECK(cli::build_model(mo).costs[3] == make_hinge1(0.0));

  mo = {};
  mo.preset = "custom";
  mo.data_path = t.file("model.json", R"({"side": "input", "A": [[1]], "b": [[1], [1]], "c": [[1], [1]],
    "Q0": [[1]], "y_breve": [1, 2], "cost": {"breakpoints": [0], "slopes": [-1, 1]}})");
  m = cli::build_model(mo);
  CHECK(m.horizon() == 2);
  CHECK(validate(m).ok());
  CHECK(cli::known_preset("trend_filter"));
  CHECK(!cli::known_preset("ridge"));
}

TEST_CASE("run, check and eval") {
  TempDir t;
  VectorXd ramp(20);
  for (Index i = 0; i < 20; ++i) ramp(i) = 0.5 * double(i) + (i % 4 == 0 ? 1.0 : 0.0);
  const std::string data = t.file("ramp.csv", column_csv(ramp, true));
  const std::string out = t.path("path.json"), plot = t.path("plot.tsv");

  auto r = invoke({"run", "--preset", "trend_filter", "--data", data, "--out", out, "--plot", plot});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("knots ") != std::string::npos);
  CHECK(r.out.find("sigma2_max ") != std::string::npos);
  CHECK(r.out.find("s2_max ") != std::string::npos);

  const RegPath p = path_from_json(slurp(out));
  CHECK(p.knots.size() >= 2);
  for (const auto& c : check_path_structure(p)) CHECK(c.pass);

  const std::string tsv = slurp(plot);
  CHECK(tsv.rfind("sigma2\tu1\tu2", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(tsv.begin(), tsv.end(), '\n')) >= 201);

  r = invoke({"check", "--preset", "trend_filter", "--data", data, "--path", out});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS kkt") != std::string::npos);

  r = invoke({"eval", "--path", out, "--sigma2", "0.5"});
  CHECK(r.code == 0);
  std::istringstream ev(r.out);
  double s;
  ev >> s;
  CHECK(s == 0.5);
  int fields = 0;
  for (double v; ev >> v;) ++fields;
  CHECK(fields == 20);

  r = invoke({"run", "--preset", "trend_filter", "--data", data, "--out", out, "--plot", plot,
              "--plot-series", "secondary", "--grid", "0.1", "1", "10"});
  CHECK(r.code == 0);
  CHECK(slurp(plot).rfind("sigma2\ty1", 0) == 0);
}

TEST_CASE("check catches a corrupted coefficient") {
  TempDir t;
  const MatrixXd F = l1test::random_matrix(6, 4);
  const std::string data = t.file("lasso.csv", matrix_csv(F, 2.0 * l1test::random_vector(6)));
  const std::string out = t.path("path.json");
  REQUIRE(invoke({"run", "--preset", "lasso", "--data", data, "--out", out}).code == 0);
  auto r = invoke({"check", "--preset", "lasso", "--data", data, "--path", out});
  CHECK(r.code == 0);

  RegPath p = path_from_json(slurp(out));
  REQUIRE(p.size() >= 2);
  p.pieces[0].estimate.c0(0) += 0.05;
  const std::string bad = t.file("bad.json", path_to_json(p));
  r = invoke({"check", "--preset", "lasso", "--data", data, "--path", bad});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL continuity") != std::string::npos);
}

TEST_CASE("output presets run and check") {
  TempDir t;
  VectorXd y(12);
  for (Index i = 0; i < 12; ++i) y(i) = std::cos(0.5 * double(i)) + (i == 5 ? 3.0 : 0.0);
  const std::string ms = t.file("ms.csv", column_csv(y, false));
  const std::string out = t.path("ms.json");
  REQUIRE(invoke({"run", "--preset", "median_smoother", "--data", ms, "--out", out}).code == 0);
  auto r = invoke({"check", "--preset", "median_smoother", "--data", ms, "--path", out});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);

  const std::string svr = t.file("svr.csv", matrix_csv(l1test::random_matrix(10, 3), l1test::random_vector(10)));
  REQUIRE(invoke({"run", "--preset", "svr", "--data", svr, "--epsilon", "0.5", "--out", out}).code == 0);
  r = invoke({"check", "--preset", "svr", "--data", svr, "--epsilon", "0.5", "--path", out});
  CHECK(r.code == 0);
  // a different model does not match the stored path
  r = invoke({"check", "--preset", "median_smoother", "--data", ms, "--path", out});
  CHECK(r.code == 1);
}

TEST_CASE("usage errors") {
  TempDir t;
  const std::string data = t.file("y.csv", "1\n2\n3\n");
  CHECK(invoke({"run", "--preset", "ridge", "--data", data, "--out", t.path("o.json")}).code == 2);
  CHECK(invoke({"run", "--preset", "trend_filter", "--data", t.path("missing.csv"), "--out",
                t.path("o.json")}).code == 2);
  CHECK(invoke({"check", "--preset", "trend_filter", "--data", data, "--path", t.path("missing.json")}).code == 2);
  CHECK(invoke({"eval", "--path", t.path("missing.json"), "--sigma2", "1"}).code == 2);
  CHECK(invoke({"run"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"run", "--preset", "trend_filter", "--data", data, "--out", t.path("o.json"),
                "--plot-series", "bogus"}).code == 2);
  // bad data is a computation failure, not a usage error
  const std::string ragged = t.file("r.csv", "1,2\n3\n");
  auto r = invoke({"run", "--preset", "lasso", "--data", ragged, "--out", t.path("o.json")});
  CHECK(r.code == 1);
  CHECK(r.err.find("row 2") != std::string::npos);
}

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l1path/path.hpp"
#include "l1path/ssm.hpp"

namespace l1path::cli {

// Numeric CSV. A first row containing a non-numeric field is taken as header.
struct CsvData {
  MatrixXd values;
  std::vector<std::string> header;
};

CsvData ingest_csv(const std::string& path);
CsvData parse_csv(const std::string& text, const std::string& source = "<string>");

struct ModelOptions {
  std::string preset; // trend_filter, median_smoother, lasso, svr, custom
  std::string data_path;
  std::optional<std::string> cost_path; // cost JSON replacing the preset cost
  std::optional<double> q0;             // median_smoother
  std::optional<double> epsilon;        // svr half-width
};

struct RunConfig {
  ModelOptions model;
  std::string output_path;
  std::optional<std::string> plot_path;
  Series plot_series = Series::Estimate;
  std::optional<std::vector<double>> sigma2_grid; // replaces the default plot grid
};

struct CheckConfig {
  ModelOptions model;
  std::string path_path;
};

bool known_preset(const std::string& name);
StateSpaceModel build_model(const ModelOptions& opt);
// Custom model from JSON; y_breve may come from the data file instead.
StateSpaceModel model_from_json(const std::string& text, const std::optional<VectorXd>& y_breve);

// 200 log-spaced points from the first positive knot / 10 to 2 sigma2_max,
// merged with every knot.
std::vector<double> plot_grid(const RegPath& path);
void write_plot(const RegPath& path, const std::vector<double>& grid, Series series,
                std::ostream& os);

// Per-criterion verification of a stored path against its model.
std::vector<CheckResult> check_path(const RegPath& path, const StateSpaceModel& model);

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int check(const CheckConfig& cfg, std::ostream& out, std::ostream& err);
int eval(const std::string& path_path, double sigma2, Series series, std::ostream& out,
         std::ostream& err);

// Full command line handling. Exit codes: 0 ok, 1 failure, 2 usage.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace l1path::cli

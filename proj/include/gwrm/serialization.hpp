#pragma once

#include "gwrm/chebyshev.hpp"
#include "gwrm/gwrm.hpp"
#include "gwrm/problems.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace gwrm {

using json = nlohmann::ordered_json;

// JSON forms preserve doubles exactly (shortest round-trip encoding).
json to_json(const ChebSeries& s);
ChebSeries series_from_json(const json& j);

json to_json(const GwrmSolution& sol);
GwrmSolution solution_from_json(const json& j);

// One benchmark run: inputs, config snapshot, timing, and artifact paths.
struct RunRecord {
  std::string problem;
  std::map<std::string, double> params;
  std::string method;
  json config = json::object();
  double wall_time = 0.0;  // seconds
  json stats = json::object();
  std::vector<std::string> outputs;
};

json to_json(const RunRecord& r);
RunRecord run_record_from_json(const json& j);

// Derived CSV column, evaluated per sample from (t, state).
struct ExtraColumn {
  std::string name;
  std::function<double(double, const Eigen::VectorXd&)> value;
};

// Header `t,<labels...>[,extras...]`; one row per time, %.17g throughout.
// states is N x M (variable-major), column j belonging to times[j].
void write_series_csv(std::ostream& os, const std::vector<double>& times,
                      const Eigen::MatrixXd& states, const std::vector<std::string>& labels,
                      const std::vector<ExtraColumn>& extras = {});

void write_series_csv(std::ostream& os, const Trajectory& traj,
                      const std::vector<std::string>& labels,
                      const std::vector<ExtraColumn>& extras = {});

std::string format_double(double v);  // %.17g

}  // namespace gwrm

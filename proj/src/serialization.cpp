#include "gwrm/serialization.hpp"

#include <cstdio>
#include <stdexcept>

namespace gwrm {

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw std::invalid_argument("serialization: coefficient matrix must be a non-empty array");
  const auto nrows = static_cast<Eigen::Index>(rows.size());
  const auto ncols = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(nrows, ncols);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != ncols)
      throw std::invalid_argument("serialization: ragged coefficient matrix");
    for (Eigen::Index j = 0; j < ncols; ++j)
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

GwrmStatus status_from_string(const std::string& s) {
  if (s == "completed") return GwrmStatus::completed;
  if (s == "partial") return GwrmStatus::partial;
  throw std::invalid_argument("serialization: unknown status '" + s + "'");
}

const char* status_to_string(GwrmStatus s) {
  return s == GwrmStatus::completed ? "completed" : "partial";
}

}  // namespace

json to_json(const ChebSeries& s) {
  json j = json::object();
  j["t0"] = s.interval().t0;
  j["t1"] = s.interval().t1;
  j["dim"] = s.dim();
  j["order"] = s.order();
  j["coeffs"] = matrix_to_json(s.coeffs());
  return j;
}

ChebSeries series_from_json(const json& j) {
  const Interval iv(j.at("t0").get<double>(), j.at("t1").get<double>());
  Eigen::MatrixXd m = matrix_from_json(j.at("coeffs"));
  if (m.rows() != j.at("dim").get<Eigen::Index>() ||
      m.cols() != j.at("order").get<Eigen::Index>() + 1)
    throw std::invalid_argument("serialization: coefficient shape disagrees with dim/order");
  return ChebSeries(iv, std::move(m));
}

json to_json(const GwrmSolution& sol) {
  json j = json::object();
  j["t_start"] = sol.t_start();
  j["t_end"] = sol.t_end();
  j["interval_count"] = sol.interval_count;
  j["total_iterations"] = sol.total_iterations;
  j["resolve_count"] = sol.resolve_count;
  j["total_modes"] = sol.total_modes();
  j["status"] = status_to_string(sol.status);
  j["message"] = sol.message;
  j["tail_ratios"] = sol.tail_ratios;
  json pieces = json::array();
  for (const ChebSeries& p : sol.pieces) pieces.push_back(to_json(p));
  j["pieces"] = std::move(pieces);
  return j;
}

GwrmSolution solution_from_json(const json& j) {
  GwrmSolution sol;
  for (const json& p : j.at("pieces")) sol.pieces.push_back(series_from_json(p));
  if (sol.pieces.empty()) throw std::invalid_argument("serialization: solution has no pieces");
  sol.interval_count = j.at("interval_count").get<int>();
  sol.total_iterations = j.at("total_iterations").get<long>();
  sol.resolve_count = j.at("resolve_count").get<int>();
  sol.status = status_from_string(j.at("status").get<std::string>());
  sol.message = j.value("message", std::string{});
  sol.tail_ratios = j.at("tail_ratios").get<std::vector<double>>();
  return sol;
}

json to_json(const RunRecord& r) {
  json j = json::object();
  j["problem"] = r.problem;
  j["params"] = r.params;
  j["method"] = r.method;
  j["config"] = r.config;
  j["wall_time"] = r.wall_time;
  j["stats"] = r.stats;
  j["outputs"] = r.outputs;
  return j;
}

RunRecord run_record_from_json(const json& j) {
  RunRecord r;
  r.problem = j.at("problem").get<std::string>();
  r.params = j.at("params").get<std::map<std::string, double>>();
  r.method = j.at("method").get<std::string>();
  r.config = j.at("config");
  r.wall_time = j.at("wall_time").get<double>();
  r.stats = j.at("stats");
  r.outputs = j.at("outputs").get<std::vector<std::string>>();
  return r;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_series_csv(std::ostream& os, const std::vector<double>& times,
                      const Eigen::MatrixXd& states, const std::vector<std::string>& labels,
                      const std::vector<ExtraColumn>& extras) {
  if (static_cast<Eigen::Index>(labels.size()) != states.rows())
    throw std::invalid_argument("write_series_csv: one label per variable required");
  if (static_cast<Eigen::Index>(times.size()) != states.cols())
    throw std::invalid_argument("write_series_csv: one time per column required");

  os << "t";
  for (const std::string& l : labels) os << "," << l;
  for (const ExtraColumn& e : extras) os << "," << e.name;
  os << "\n";
  for (std::size_t j = 0; j < times.size(); ++j) {
    const Eigen::Index col = static_cast<Eigen::Index>(j);
    os << format_double(times[j]);
    for (Eigen::Index i = 0; i < states.rows(); ++i) os << "," << format_double(states(i, col));
    if (!extras.empty()) {
      const Eigen::VectorXd u = states.col(col);
      for (const ExtraColumn& e : extras) os << "," << format_double(e.value(times[j], u));
    }
    os << "\n";
  }
}

void write_series_csv(std::ostream& os, const Trajectory& traj,
                      const std::vector<std::string>& labels,
                      const std::vector<ExtraColumn>& extras) {
  Eigen::MatrixXd states(traj.states.empty() ? 0 : traj.states.front().size(),
                         static_cast<Eigen::Index>(traj.states.size()));
  for (std::size_t j = 0; j < traj.states.size(); ++j)
    states.col(static_cast<Eigen::Index>(j)) = traj.states[j];
  write_series_csv(os, traj.times, states, labels, extras);
}

}  // namespace gwrm

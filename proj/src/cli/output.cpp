#include <charconv>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "desitter/cli.hpp"

namespace desitter::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Column values for one sample, in trajectory_columns() order.
std::vector<double> row_of(const Sample& smp) {
  std::vector<double> r;
  r.reserve(31);
  r.push_back(smp.s);
  for (int i = 0; i < 4; ++i) r.push_back(smp.chart ? smp.chart->point.x[i] : kNaN);
  for (int i = 0; i < 4; ++i) r.push_back(smp.chart ? smp.chart->velocity[i] : kNaN);
  for (int i = 0; i < 5; ++i) r.push_back(smp.bulk.position[i]);
  for (int i = 0; i < 5; ++i) r.push_back(smp.bulk.velocity[i]);
  for (double l : smp.angular_momentum.components()) r.push_back(l);
  r.push_back(smp.norm);
  r.push_back(smp.constraint_residual);
  return r;
}

/// Indices of written samples: every n-th plus the last one.
std::vector<std::size_t> written(const Trajectory& traj, std::size_t every) {
  std::vector<std::size_t> idx;
  const std::size_t n = traj.samples.size();
  if (every == 0) every = 1;
  for (std::size_t i = 0; i < n; i += every) idx.push_back(i);
  if (n > 0 && idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"s"};
    for (int i = 0; i < 4; ++i) c.push_back("x" + std::to_string(i));
    for (int i = 0; i < 4; ++i) c.push_back("u" + std::to_string(i));
    for (int i = 0; i < 5; ++i) c.push_back("X" + std::to_string(i));
    for (int i = 0; i < 5; ++i) c.push_back("V" + std::to_string(i));
    for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) c.push_back(BulkBivector::label(k));
    c.push_back("norm");
    c.push_back("constraint_residual");
    return c;
  }();
  return cols;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t every) {
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (std::size_t k : written(traj, every)) {
    const std::vector<double> r = row_of(traj.samples[k]);
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
  if (!traj.completed()) {
    out << "# status: " << to_string(traj.status);
    if (!traj.message.empty()) out << ": " << traj.message;
    out << '\n';
  }
}

void write_trajectory_json(std::ostream& out, const Trajectory& traj, std::size_t every) {
  nlohmann::ordered_json j;
  j["flow"] = to_string(traj.flow);
  j["status"] = to_string(traj.status);
  j["message"] = traj.message;
  j["ell"] = traj.ell;
  j["mass"] = traj.mass;
  j["steps"] = traj.steps;
  j["columns"] = trajectory_columns();
  // One row per line keeps large files diffable.
  std::string head = j.dump();
  head.pop_back();
  out << head << ",\"rows\":[";
  bool first = true;
  for (std::size_t k : written(traj, every)) {
    auto row = nlohmann::ordered_json::array();
    // JSON has no NaN; samples outside the chart carry null there.
    for (double v : row_of(traj.samples[k])) {
      if (std::isfinite(v)) {
        row.push_back(v);
      } else {
        row.push_back(nullptr);
      }
    }
    out << (first ? "\n" : ",\n") << row.dump();
    first = false;
  }
  out << "\n]}\n";
}

}  // namespace desitter::cli

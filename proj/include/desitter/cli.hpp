#pragma once

#include <cmath>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "desitter/analysis.hpp"
#include "desitter/dynamics.hpp"
#include "desitter/errors.hpp"

namespace desitter::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kSingularity = 3,
  kNumericalFailure = 4,
  kDisagreement = 5,
};

enum class Mode { Intrinsic, Bulk, Both };
enum class Format { Csv, Json };

enum class SweepParameter { Step, Ell, SSpan };

struct Sweep {
  SweepParameter parameter = SweepParameter::Step;
  std::vector<double> values;
};

/// A run description loaded from a JSON scenario file.
struct Scenario {
  double ell = 1.0;
  double mass = 1.0;
  Mode mode = Mode::Intrinsic;
  /// False when the file leaves the mode to the subcommand's default.
  bool mode_given = false;
  /// Exactly one of the two initial-state forms is set.
  std::optional<ChartState> chart_initial;
  std::optional<BulkState> bulk_initial;
  IntegratorConfig integrator;
  double null_tolerance = kDefaultNullTolerance;
  /// Constant chart acceleration added to the intrinsic flow.
  std::optional<ChartVector> external_acceleration;
  Format format = Format::Csv;
  /// Write every n-th sample (the last sample is always written).
  std::size_t output_every = 1;
  std::optional<Sweep> sweep;

  ChartState chart_state() const;
  BulkState bulk_state() const;
};

/// Thrown for malformed or inconsistent scenario input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

Mode parse_mode(const std::string& s);
Format parse_format(const std::string& s);

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

/// Trajectory column names in file order.
const std::vector<std::string>& trajectory_columns();

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t every = 1);
void write_trajectory_json(std::ostream& out, const Trajectory& traj, std::size_t every = 1);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace desitter::cli

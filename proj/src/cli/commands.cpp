#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "desitter/cli.hpp"
#include "desitter/errors.hpp"
#include "desitter/shooting.hpp"

namespace desitter::cli {

namespace {

using ojson = nlohmann::ordered_json;

/// Pairs this close to a classifier threshold, relative to ell^2, are not held
/// to solver agreement.
constexpr double kBoundaryBand = 1e-3;

/// Threshold on |<X,X> + ell^2| / ell^2 for bulk runs without projection.
constexpr double kConstraintThreshold = 1e-8;

/// Added to the calibrated finite-difference floor to absorb roundoff when the
/// floor itself is near machine precision.
constexpr double kFdAbsoluteSlack = 1e-10;

int status_code(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed: return kOk;
    case TrajectoryStatus::SingularityReached: return kSingularity;
    case TrajectoryStatus::MaxStepsExceeded:
    case TrajectoryStatus::NumericalFailure: return kNumericalFailure;
  }
  return kNumericalFailure;
}

/// Nonzero codes ordered by severity for combining several runs.
int worse(int a, int b) {
  auto rank = [](int c) {
    switch (c) {
      case kOk: return 0;
      case kCheckFailed: return 1;
      case kSingularity: return 2;
      case kNumericalFailure: return 3;
      case kDisagreement: return 4;
      default: return 5;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson number_or_null(const std::optional<double>& v) { return v ? number_or_null(*v) : ojson(nullptr); }

template <std::size_t N>
ojson array_of(const Vector<N>& v) {
  auto a = ojson::array();
  for (double c : v.c) a.push_back(c);
  return a;
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads; each index is handled
/// exactly once and results must be stored by index.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Destination stream: the named file, or `fallback` when the path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

Trajectory run_flow(const Scenario& sc, Flow flow) {
  if (flow == Flow::Bulk) return integrate_bulk(sc.bulk_state(), sc.ell, sc.mass, sc.integrator);
  ExternalAcceleration forcing;
  if (sc.external_acceleration) {
    const ChartVector a = *sc.external_acceleration;
    forcing = [a](double, const ChartState&) { return a; };
  }
  return integrate_intrinsic(sc.chart_state(), sc.mass, sc.integrator, forcing);
}

std::vector<Flow> flows_for(Mode m) {
  switch (m) {
    case Mode::Intrinsic: return {Flow::Intrinsic};
    case Mode::Bulk: return {Flow::Bulk};
    case Mode::Both: return {Flow::Intrinsic, Flow::Bulk};
  }
  return {};
}

void write_trajectory(std::ostream& out, const Trajectory& traj, Format f, std::size_t every) {
  if (f == Format::Json) {
    write_trajectory_json(out, traj, every);
  } else {
    write_trajectory_csv(out, traj, every);
  }
}

void warn_if_incomplete(std::ostream& err, const Trajectory& traj) {
  if (traj.completed()) return;
  err << "warning: " << to_string(traj.flow) << " run stopped at s=" << format_double(traj.samples.back().s)
      << ": " << to_string(traj.status);
  if (!traj.message.empty()) err << " (" << traj.message << ")";
  err << '\n';
}

/// Max chart deviation of a trajectory from the analytic geodesic through its
/// initial bulk state, on its own grid.
double oracle_deviation(const Trajectory& traj) {
  std::vector<double> grid;
  grid.reserve(traj.samples.size());
  for (const Sample& smp : traj.samples) grid.push_back(smp.s);
  const Trajectory oracle = sample_analytic_geodesic(traj.samples.front().bulk, traj.ell, traj.mass, grid);
  return chart_agreement(traj, oracle);
}

bool same_grid(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (std::fabs(a.samples[i].s - b.samples[i].s) > 1e-12 * std::fmax(1.0, std::fabs(a.samples[i].s))) {
      return false;
    }
  }
  return true;
}

/// Endpoint mismatch against the analytic geodesic: chart max norm when both
/// ends have chart data, bulk position otherwise.
double endpoint_error(const Trajectory& traj) {
  const Sample& last = traj.samples.back();
  const BulkState exact = analytic_bulk_geodesic(traj.samples.front().bulk, traj.ell, last.s - traj.samples.front().s);
  if (last.chart) {
    try {
      const ChartState ec = bulk_to_chart(exact, traj.ell);
      return (last.chart->point.x - ec.point.x).max_abs();
    } catch (const Error&) {
    }
  }
  return (last.bulk.position - exact.position).max_abs();
}

struct Check {
  std::string name;
  double value;
  double threshold;
};

struct FlowReport {
  ojson json;
  std::vector<Check> checks;
};

FlowReport report_flow(const Trajectory& traj, const VerifyThresholds& th) {
  const ConservationReport rep = conservation_report(traj);
  FlowReport fr;
  ojson& j = fr.json;
  const std::string prefix = std::string(to_string(traj.flow)) + ".";
  j["status"] = to_string(traj.status);
  if (!traj.message.empty()) j["message"] = traj.message;
  j["samples"] = rep.samples;
  j["steps"] = traj.steps;
  j["s0"] = rep.s0;
  j["s1"] = rep.s1;
  ojson drift = ojson::object();
  for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) {
    drift[BulkBivector::label(k)] = rep.l_drift.relative[k];
  }
  j["l_drift_relative"] = std::move(drift);
  j["max_l_drift_relative"] = rep.l_drift.max_relative;
  j["max_l_drift_absolute"] = rep.l_drift.max_absolute;
  j["norm_drift"] = rep.norm_drift;
  j["max_constraint_residual"] = rep.max_constraint_residual;
  j["mac_residual"] = number_or_null(rep.mac_residual);
  j["maca_residual"] = number_or_null(rep.maca_residual);
  j["geodesic_residual"] = number_or_null(rep.geodesic_residual);

  if (rep.samples >= 2) {
    fr.checks.push_back({prefix + "l_drift_relative", rep.l_drift.max_relative, th.l_drift_relative});
    fr.checks.push_back({prefix + "norm_drift", rep.norm_drift, th.norm_drift});
  }
  if (traj.flow == Flow::Bulk) {
    fr.checks.push_back({prefix + "constraint_residual", rep.max_constraint_residual / (traj.ell * traj.ell),
                         kConstraintThreshold});
  }
  if (rep.mac_residual) fr.checks.push_back({prefix + "mac_residual", *rep.mac_residual, th.mac_residual});
  if (rep.maca_residual) fr.checks.push_back({prefix + "maca_residual", *rep.maca_residual, th.maca_residual});
  if (rep.geodesic_residual) {
    const double floor = calibrated_fd_floor(traj);
    j["fd_floor"] = floor;
    fr.checks.push_back(
        {prefix + "geodesic_residual", *rep.geodesic_residual, th.fd_floor_slack * floor + kFdAbsoluteSlack});
  }
  return fr;
}

// ---------------------------------------------------------------- simulate

struct CommonOptions {
  std::string config;
  std::string out;
  std::string format;
  std::string mode;
  unsigned jobs = 1;
};

Scenario scenario_from(const CommonOptions& o) {
  Scenario sc = load_scenario(o.config);
  if (!o.mode.empty()) {
    sc.mode = parse_mode(o.mode);
    sc.mode_given = true;
  }
  if (!o.format.empty()) sc.format = parse_format(o.format);
  return sc;
}

std::string suffixed(const std::string& path, const std::string& tag) {
  const std::filesystem::path p(path);
  std::filesystem::path q = p.parent_path() / (p.stem().string() + "_" + tag + p.extension().string());
  return q.string();
}

int cmd_simulate(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const Scenario sc = scenario_from(o);
  const std::vector<Flow> flows = flows_for(sc.mode);
  if (flows.size() > 1 && o.out.empty()) {
    throw ConfigError("mode both writes two files and needs --out");
  }
  std::vector<Trajectory> runs;
  for (Flow f : flows) runs.push_back(run_flow(sc, f));

  int code = kOk;
  for (const Trajectory& traj : runs) {
    const std::string path = flows.size() > 1 ? suffixed(o.out, to_string(traj.flow)) : o.out;
    Sink sink(path, out);
    write_trajectory(*sink, traj, sc.format, sc.output_every);
    warn_if_incomplete(err, traj);
    code = worse(code, status_code(traj.status));
  }
  return code;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  Scenario sc = scenario_from(o);
  if (!sc.mode_given) sc.mode = Mode::Both;
  const VerifyThresholds th = thresholds_for(sc.integrator);

  ojson report;
  report["mode"] = sc.mode == Mode::Both ? "both" : sc.mode == Mode::Bulk ? "bulk" : "intrinsic";
  report["ell"] = sc.ell;
  report["mass"] = sc.mass;
  report["integrator"] = {{"method", to_string(sc.integrator.method)},
                          {"step", sc.integrator.step},
                          {"abs_tol", sc.integrator.abs_tol},
                          {"rel_tol", sc.integrator.rel_tol},
                          {"s_span", {sc.integrator.s0, sc.integrator.s1}},
                          {"constraint_projection", sc.integrator.constraint_projection}};
  const BulkState b0 = sc.bulk_state();
  report["causal_class"] = to_string(classify(b0.velocity, sc.null_tolerance));
  if (sc.external_acceleration) report["external_acceleration"] = array_of(*sc.external_acceleration);

  std::vector<Trajectory> runs;
  std::vector<Check> checks;
  int code = kOk;
  ojson flows = ojson::object();
  for (Flow f : flows_for(sc.mode)) {
    runs.push_back(run_flow(sc, f));
    warn_if_incomplete(err, runs.back());
    code = worse(code, status_code(runs.back().status));
    FlowReport fr = report_flow(runs.back(), th);
    flows[to_string(f)] = std::move(fr.json);
    checks.insert(checks.end(), fr.checks.begin(), fr.checks.end());
  }
  report["flows"] = std::move(flows);

  if (runs.size() == 2 && runs[0].completed() && runs[1].completed()) {
    // Fixed-step runs share a grid; otherwise bound the gap through the oracle.
    const bool direct = same_grid(runs[0], runs[1]);
    const double agreement =
        direct ? chart_agreement(runs[0], runs[1]) : oracle_deviation(runs[0]) + oracle_deviation(runs[1]);
    report["agreement"] = number_or_null(agreement);
    report["agreement_method"] = direct ? "pointwise" : "oracle_bound";
    checks.push_back({"agreement", agreement, th.agreement});
  }

  bool pass = true;
  auto jchecks = ojson::array();
  for (const Check& c : checks) {
    const bool ok = c.value <= c.threshold;
    pass = pass && ok;
    jchecks.push_back({{"name", c.name}, {"value", number_or_null(c.value)}, {"threshold", c.threshold}, {"pass", ok}});
  }
  report["checks"] = std::move(jchecks);
  report["pass"] = pass && code == kOk;

  Sink sink(o.out, out);
  *sink << report.dump(2) << '\n';
  if (code != kOk) return code;
  return pass ? kOk : kCheckFailed;
}

// ------------------------------------------------------- shoot / classify

bool boundary_pair(double c, double ell) {
  const double l2 = ell * ell;
  return std::fabs(c + l2) <= kBoundaryBand * l2 || std::fabs(c - l2) <= kBoundaryBand * l2;
}

bool verdicts_agree(Connectability k, const ShootResult& r) {
  switch (k) {
    case Connectability::Coincident: return r.status == ShootStatus::Coincident;
    case Connectability::NoGeodesic: return r.status == ShootStatus::NoGeodesic;
    case Connectability::TimelikeGeodesic:
      return r.status == ShootStatus::Converged && r.causal_class == CausalClass::Timelike;
    case Connectability::NullGeodesic:
      return r.status == ShootStatus::Converged && r.causal_class == CausalClass::Null;
    case Connectability::SpacelikeGeodesic:
      return r.status == ShootStatus::Converged && r.causal_class == CausalClass::Spacelike;
  }
  return false;
}

struct PairVerdict {
  double c = 0.0;
  Connectability klass = Connectability::Coincident;
  bool boundary = false;
  std::optional<ShootResult> shot;
  bool agree = true;
  int code = kOk;
};

/// Classifies a pair and cross-checks it with the shooting solver when both
/// points have conformal coordinates.
PairVerdict judge_pair(const BulkVector& xa, const BulkVector& xb, double ell, const ShootConfig& cfg) {
  PairVerdict v;
  v.c = bulk_inner(xa, xb);
  v.klass = connectability(xa, xb, ell);
  v.boundary = boundary_pair(v.c, ell);
  ChartPoint pa, pb;
  try {
    pa = unembed(xa, ell);
    pb = unembed(xb, ell);
    conformal_factor(pa);
    conformal_factor(pb);
  } catch (const Error&) {
    return v;
  }
  v.shot = shoot_geodesic(pa, pb, cfg);
  v.agree = verdicts_agree(v.klass, *v.shot);
  if (!v.agree && !v.boundary) {
    v.code = v.shot->status == ShootStatus::NoConvergence ? kNumericalFailure : kDisagreement;
  }
  return v;
}

ojson shot_json(const ShootResult& r) {
  ojson j;
  j["status"] = to_string(r.status);
  j["velocity"] = array_of(r.velocity);
  j["arc_parameter"] = r.arc_parameter;
  j["causal_class"] = r.causal_class ? ojson(to_string(*r.causal_class)) : ojson(nullptr);
  j["endpoint_error"] = number_or_null(r.endpoint_error);
  j["iterations"] = r.iterations;
  j["guesses_tried"] = r.guesses_tried;
  return j;
}

ojson verdict_json(const PairVerdict& v) {
  ojson j;
  j["invariant"] = v.c;
  j["connectability"] = to_string(v.klass);
  j["boundary"] = v.boundary;
  j["shoot"] = v.shot ? shot_json(*v.shot) : ojson(nullptr);
  j["agree"] = v.agree;
  return j;
}

struct PairOptions {
  std::vector<double> from, to, bulk_from, bulk_to;
  double ell = 1.0;
  bool grid_only = false;
  std::size_t random = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  unsigned jobs = 1;
};

ShootConfig shoot_config(const PairOptions& o) {
  ShootConfig cfg;
  if (o.grid_only) cfg.analytic_seed = false;
  return cfg;
}

template <std::size_t N>
Vector<N> as_vector(const std::vector<double>& v, const char* flag) {
  if (v.size() != N) throw ConfigError(std::string(flag) + " needs " + std::to_string(N) + " numbers");
  Vector<N> r;
  std::copy(v.begin(), v.end(), r.c.begin());
  if (!r.all_finite()) throw ConfigError(std::string(flag) + " must be finite");
  return r;
}

void check_ell(double ell) {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("--ell must be a positive number");
}

int cmd_shoot(const PairOptions& o, std::ostream& out) {
  check_ell(o.ell);
  const ChartPoint from{as_vector<4>(o.from, "--from"), o.ell};
  const ChartPoint to{as_vector<4>(o.to, "--to"), o.ell};
  conformal_factor(from);
  conformal_factor(to);
  const PairVerdict v = judge_pair(embed(from), embed(to), o.ell, shoot_config(o));

  ojson j = shot_json(*v.shot);
  j["connectability"] = to_string(v.klass);
  j["invariant"] = v.c;
  j["boundary"] = v.boundary;
  j["agree"] = v.agree;
  Sink sink(o.out, out);
  *sink << j.dump(2) << '\n';
  if (v.code != kOk) return v.code;
  return v.shot->status == ShootStatus::NoConvergence ? kNumericalFailure : kOk;
}

int cmd_classify(const PairOptions& o, std::ostream& out, std::ostream& err) {
  check_ell(o.ell);
  const ShootConfig cfg = shoot_config(o);
  if (o.random == 0) {
    BulkVector xa, xb;
    if (!o.bulk_from.empty() || !o.bulk_to.empty()) {
      xa = as_vector<5>(o.bulk_from, "--bulk-from");
      xb = as_vector<5>(o.bulk_to, "--bulk-to");
    } else if (!o.from.empty() || !o.to.empty()) {
      xa = embed({as_vector<4>(o.from, "--from"), o.ell});
      xb = embed({as_vector<4>(o.to, "--to"), o.ell});
    } else {
      throw ConfigError("classify needs --bulk-from/--bulk-to, --from/--to or --random N");
    }
    const PairVerdict v = judge_pair(xa, xb, o.ell, cfg);
    Sink sink(o.out, out);
    *sink << verdict_json(v).dump(2) << '\n';
    return v.code;
  }

  std::mt19937_64 rng(o.seed);
  std::vector<std::pair<BulkVector, BulkVector>> pairs(o.random);
  for (auto& [a, b] : pairs) {
    a = random_brane_point(rng, o.ell);
    b = random_brane_point(rng, o.ell);
  }
  std::vector<PairVerdict> verdicts(pairs.size());
  parallel_for(pairs.size(), o.jobs,
               [&](std::size_t i) { verdicts[i] = judge_pair(pairs[i].first, pairs[i].second, o.ell, cfg); });

  const Format f = o.format.empty() ? Format::Csv : parse_format(o.format);
  Sink sink(o.out, out);
  std::size_t boundary = 0, disagreements = 0, unconverged = 0;
  int code = kOk;
  auto rows = ojson::array();
  if (f == Format::Csv) {
    *sink << "index,invariant,connectability,boundary,shoot_status,shoot_class,agree,iterations,endpoint_error\n";
  }
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const PairVerdict& v = verdicts[i];
    boundary += v.boundary;
    if (!v.agree && !v.boundary) {
      ++disagreements;
      if (v.shot && v.shot->status == ShootStatus::NoConvergence) ++unconverged;
    }
    code = worse(code, v.code);
    if (f == Format::Json) {
      ojson row = verdict_json(v);
      row["index"] = i;
      rows.push_back(std::move(row));
      continue;
    }
    const std::string sclass = v.shot && v.shot->causal_class ? to_string(*v.shot->causal_class) : "";
    *sink << i << ',' << format_double(v.c) << ',' << to_string(v.klass) << ',' << (v.boundary ? 1 : 0) << ','
          << (v.shot ? to_string(v.shot->status) : "") << ',' << sclass << ',' << (v.agree ? 1 : 0) << ','
          << (v.shot ? v.shot->iterations : 0) << ','
          << (v.shot ? format_double(v.shot->endpoint_error) : std::string("nan")) << '\n';
  }
  if (f == Format::Json) *sink << ojson{{"seed", o.seed}, {"ell", o.ell}, {"pairs", rows}}.dump(1) << '\n';
  err << ojson{{"pairs", verdicts.size()},
               {"boundary", boundary},
               {"disagreements", disagreements},
               {"no_convergence", unconverged}}
             .dump()
      << '\n';
  return code;
}

// ------------------------------------------------------------------- sweep

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Step: return "step";
    case SweepParameter::Ell: return "ell";
    case SweepParameter::SSpan: return "s_span";
  }
  return "unknown";
}

struct SweepPoint {
  std::optional<Trajectory> traj;
  std::string error;
  int code = kOk;
  double endpoint_error = 0.0;
  ConservationReport report;
  std::optional<double> line_deviation;
};

Scenario at_grid_value(const Scenario& base, SweepParameter p, double v) {
  Scenario sc = base;
  switch (p) {
    case SweepParameter::Step: sc.integrator.step = v; break;
    case SweepParameter::SSpan: sc.integrator.s1 = sc.integrator.s0 + v; break;
    case SweepParameter::Ell:
      sc.ell = v;
      if (sc.chart_initial) sc.chart_initial->point.ell = v;
      break;
  }
  return sc;
}

SweepPoint evaluate_point(const Scenario& sc, Flow flow) {
  SweepPoint pt;
  try {
    sc.integrator.validate();
    pt.traj = run_flow(sc, flow);
  } catch (const Error& e) {
    pt.error = e.what();
    pt.code = kConfigError;
    return pt;
  }
  const Trajectory& t = *pt.traj;
  pt.code = status_code(t.status);
  pt.report = conservation_report(t);
  pt.endpoint_error = endpoint_error(t);
  try {
    pt.line_deviation = straight_line_deviation(t);
  } catch (const InsufficientSamples&) {
  }
  return pt;
}

int cmd_sweep(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const Scenario sc = scenario_from(o);
  if (!sc.sweep) throw ConfigError("sweep needs a 'sweep' block in the scenario");
  if (sc.mode == Mode::Both) throw ConfigError("sweep runs a single flow; use mode intrinsic or bulk");
  const Flow flow = sc.mode == Mode::Bulk ? Flow::Bulk : Flow::Intrinsic;
  const Sweep& sw = *sc.sweep;

  std::vector<SweepPoint> points(sw.values.size());
  parallel_for(points.size(), o.jobs, [&](std::size_t i) {
    points[i] = evaluate_point(at_grid_value(sc, sw.parameter, sw.values[i]), flow);
  });

  static const std::vector<std::string> cols{"index",    "parameter",  "value", "status", "samples",
                                             "endpoint_error", "l_drift", "norm_drift", "constraint", "mac",
                                             "maca",     "geodesic",   "line_deviation"};
  std::vector<ojson> rows;
  std::optional<std::size_t> failed;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& pt = points[i];
    ojson row = ojson::array();
    row.push_back(i);
    row.push_back(to_string(sw.parameter));
    row.push_back(sw.values[i]);
    if (!pt.traj) {
      row.push_back("config_error");
      for (std::size_t k = 4; k < cols.size(); ++k) row.push_back(nullptr);
    } else {
      const ConservationReport& r = pt.report;
      row.push_back(to_string(pt.traj->status));
      row.push_back(r.samples);
      row.push_back(number_or_null(pt.endpoint_error));
      row.push_back(r.samples >= 2 ? ojson(r.l_drift.max_relative) : ojson(nullptr));
      row.push_back(r.norm_drift);
      row.push_back(r.max_constraint_residual);
      row.push_back(number_or_null(r.mac_residual));
      row.push_back(number_or_null(r.maca_residual));
      row.push_back(number_or_null(r.geodesic_residual));
      row.push_back(number_or_null(pt.line_deviation));
    }
    rows.push_back(std::move(row));
    if (pt.code != kOk) {
      failed = i;
      break;
    }
  }

  ojson summary;
  summary["parameter"] = to_string(sw.parameter);
  summary["points"] = sw.values.size();
  summary["reported"] = rows.size();
  if (!failed) {
    std::vector<std::pair<double, double>> series;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double y = sw.parameter == SweepParameter::Ell ? points[i].line_deviation.value_or(0.0)
                                                           : points[i].endpoint_error;
      series.emplace_back(sw.values[i], y);
    }
    try {
      if (sw.parameter == SweepParameter::Step && series.size() >= 3) {
        std::sort(series.begin(), series.end(), [](auto& a, auto& b) { return a.first > b.first; });
        summary["fitted_order"] = convergence_order(series);
      } else if (sw.parameter == SweepParameter::Ell && series.size() >= 2) {
        summary["fitted_slope"] = log_log_slope(series);
      }
    } catch (const Error& e) {
      summary["fit_error"] = e.what();
    }
  } else {
    const SweepPoint& pt = points[*failed];
    summary["aborted_at"] = *failed;
    summary["reason"] = pt.traj ? std::string(to_string(pt.traj->status)) + (pt.traj->message.empty() ? "" : ": " + pt.traj->message)
                                : pt.error;
  }

  const Format f = sc.format;
  Sink sink(o.out, out);
  if (f == Format::Json) {
    ojson j;
    j["columns"] = cols;
    j["rows"] = rows;
    j["summary"] = summary;
    *sink << j.dump(1) << '\n';
  } else {
    for (std::size_t k = 0; k < cols.size(); ++k) *sink << (k ? "," : "") << cols[k];
    *sink << '\n';
    for (const ojson& row : rows) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) *sink << ',';
        const ojson& v = row[k];
        if (v.is_null()) {
          *sink << "nan";
        } else if (v.is_string()) {
          *sink << v.get<std::string>();
        } else if (v.is_number_integer() || v.is_number_unsigned()) {
          *sink << v.dump();
        } else {
          *sink << format_double(v.get<double>());
        }
      }
      *sink << '\n';
    }
    if (failed) *sink << "# aborted at index " << *failed << ": " << summary["reason"].get<std::string>() << '\n';
  }
  err << summary.dump() << '\n';
  return failed ? points[*failed].code : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geodesic and constant bulk angular momentum dynamics on the de Sitter pseudo-sphere"};
  app.require_subcommand(1);

  CommonOptions common;
  PairOptions pair;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_mode) {
    sub->add_option("--config", common.config, "Scenario file (JSON)")->required();
    sub->add_option("--out", common.out, "Output path (default: stdout)");
    sub->add_option("--format", common.format, "csv or json");
    if (with_mode) sub->add_option("--mode", common.mode, "intrinsic, bulk or both");
    sub->add_option("--seed", seed, "Seed for randomized fixtures");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate a scenario and write its trajectory");
  add_common(simulate, true);
  CLI::App* verify = app.add_subcommand("verify", "Check conservation and equivalence thresholds");
  add_common(verify, true);
  CLI::App* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  add_common(sweep, true);
  sweep->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* shoot = app.add_subcommand("shoot", "Solve the two-point geodesic problem in the chart");
  shoot->add_option("--from", pair.from, "Start chart point x0,x1,x2,x3")->required()->delimiter(',');
  shoot->add_option("--to", pair.to, "Target chart point")->required()->delimiter(',');
  shoot->add_option("--ell", pair.ell, "Pseudo-sphere radius");
  shoot->add_flag("--grid-only", pair.grid_only, "Skip the analytic initial guess");
  shoot->add_option("--out", pair.out, "Output path (default: stdout)");

  CLI::App* classify = app.add_subcommand("classify", "Classify point pairs and cross-check with shooting");
  classify->add_option("--bulk-from", pair.bulk_from, "Bulk point X0..X4")->delimiter(',');
  classify->add_option("--bulk-to", pair.bulk_to, "Bulk point X0..X4")->delimiter(',');
  classify->add_option("--from", pair.from, "Chart point x0..x3")->delimiter(',');
  classify->add_option("--to", pair.to, "Chart point x0..x3")->delimiter(',');
  classify->add_option("--ell", pair.ell, "Pseudo-sphere radius");
  classify->add_option("--random", pair.random, "Number of random pairs");
  classify->add_option("--seed", pair.seed, "Seed for --random");
  classify->add_option("--jobs", pair.jobs, "Worker threads")->check(CLI::PositiveNumber);
  classify->add_flag("--grid-only", pair.grid_only, "Skip the analytic initial guess");
  classify->add_option("--format", pair.format, "csv or json (with --random)");
  classify->add_option("--out", pair.out, "Output path (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common, out, err);
    if (verify->parsed()) return cmd_verify(common, out, err);
    if (sweep->parsed()) return cmd_sweep(common, out, err);
    if (shoot->parsed()) return cmd_shoot(pair, out);
    if (classify->parsed()) return cmd_classify(pair, out, err);
  } catch (const ChartSingularity& e) {
    err << "error: ChartSingularity: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace desitter::cli

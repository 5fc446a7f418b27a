#include "poses/io.hpp"

#include "poses/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace poses::io {

namespace {

[[noreturn]] void fail(const std::string& what) { throw IoError(what); }

void expect(bool ok, const std::string& what) {
  if (!ok) fail(what);
}

double to_double(const std::string& token) {
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  expect(end == token.c_str() + token.size() && !token.empty(),
         "malformed number '" + token + "'");
  return v;
}

long long to_int(const std::string& token) {
  char* end = nullptr;
  long long v = std::strtoll(token.c_str(), &end, 10);
  expect(end == token.c_str() + token.size() && !token.empty(),
         "malformed integer '" + token + "'");
  return v;
}

std::uint64_t to_uint64(const std::string& token) {
  char* end = nullptr;
  std::uint64_t v = std::strtoull(token.c_str(), &end, 10);
  expect(end == token.c_str() + token.size() && !token.empty(),
         "malformed unsigned integer '" + token + "'");
  return v;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// Pulls the next non-blank, non-comment line; returns false at end of input.
bool next_line(std::istream& in, std::vector<std::string>& toks) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    toks = tokens_of(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    return true;
  }
  return false;
}

void expect_header(std::istream& in, const std::string& kind) {
  std::vector<std::string> toks;
  expect(next_line(in, toks), "missing header line");
  expect(toks.size() == 2 && toks[0] == kVersionTag && toks[1] == kind,
         "expected header '" + std::string(kVersionTag) + " " + kind + "'");
}

std::string opt_g17(const std::optional<double>& v) { return v ? format_g17(*v) : "none"; }

const char* verdict_word(verify::Verdict v) {
  switch (v) {
    case verify::Verdict::Holds: return "holds";
    case verify::Verdict::Fails: return "fails";
    case verify::Verdict::Vacuous: return "vacuous";
  }
  return "vacuous";
}

verify::Verdict verdict_from(const std::string& word) {
  if (word == "holds") return verify::Verdict::Holds;
  if (word == "fails") return verify::Verdict::Fails;
  if (word == "vacuous") return verify::Verdict::Vacuous;
  fail("unknown verdict '" + word + "'");
}

const char* kind_word(verify::PropertyKind k) {
  return k == verify::PropertyKind::Robustness ? "robustness" : "resilience";
}

verify::PropertyKind kind_from(const std::string& word) {
  if (word == "robustness") return verify::PropertyKind::Robustness;
  if (word == "resilience") return verify::PropertyKind::Resilience;
  fail("unknown property kind '" + word + "'");
}

}  // namespace

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_f2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

LoadedConfig read_scenario_config(std::istream& in) {
  expect_header(in, "scenario-config");
  LoadedConfig out;
  world::ScenarioConfig& c = out.config;
  est::ModelParams& p = out.params;

  std::vector<std::string> t;
  while (next_line(in, t)) {
    const std::string& key = t[0];
    auto want = [&](std::size_t n) {
      expect(t.size() == n + 1, "key '" + key + "' expects " + std::to_string(n) + " values");
    };
    if (key == "n_steps") {
      want(1);
      c.n_steps = static_cast<int>(to_int(t[1]));
    } else if (key == "seed") {
      want(1);
      c.seed = to_uint64(t[1]);
    } else if (key == "misdetect_prob") {
      want(1);
      c.misdetect_prob = to_double(t[1]);
    } else if (key == "false_alarm_rate") {
      want(1);
      c.false_alarm_rate = to_double(t[1]);
    } else if (key == "detection_noise_sigma") {
      want(1);
      c.detection_noise_sigma = to_double(t[1]);
    } else if (key == "max_detections_per_step") {
      want(1);
      c.max_detections_per_step = static_cast<int>(to_int(t[1]));
    } else if (key == "scene") {
      want(4);
      c.scene_min = world::Vec2(to_double(t[1]), to_double(t[2]));
      c.scene_max = world::Vec2(to_double(t[3]), to_double(t[4]));
    } else if (key == "payoff") {
      expect(t.size() >= 2, "payoff model missing");
      if (t[1] == "constant") {
        want(2);
        c.payoff_model.kind = world::PayoffModel::Kind::Constant;
        c.payoff_model.a = to_double(t[2]);
      } else if (t[1] == "uniform") {
        want(3);
        c.payoff_model.kind = world::PayoffModel::Kind::Uniform;
        c.payoff_model.a = to_double(t[2]);
        c.payoff_model.b = to_double(t[3]);
      } else if (t[1] == "distance-scaled") {
        want(3);
        c.payoff_model.kind = world::PayoffModel::Kind::DistanceScaled;
        c.payoff_model.a = to_double(t[2]);
        c.payoff_model.b = to_double(t[3]);
      } else {
        fail("unknown payoff model '" + t[1] + "'");
      }
    } else if (key == "vehicle") {
      expect(t.size() >= 5 && (t.size() - 5) % 4 == 0,
             "vehicle expects x y vx vy [waypoint k x y]...");
      world::VehicleSpec v;
      v.position = world::Vec2(to_double(t[1]), to_double(t[2]));
      v.velocity = world::Vec2(to_double(t[3]), to_double(t[4]));
      for (std::size_t i = 5; i < t.size(); i += 4) {
        expect(t[i] == "waypoint", "expected 'waypoint', got '" + t[i] + "'");
        int k = static_cast<int>(to_int(t[i + 1]));
        v.waypoints[k] = world::Vec2(to_double(t[i + 2]), to_double(t[i + 3]));
      }
      c.vehicles.push_back(std::move(v));
    } else if (key == "init_state") {
      want(4);
      world::Vec4 s;
      s << to_double(t[1]), to_double(t[2]), to_double(t[3]), to_double(t[4]);
      c.init_state = s;
    } else if (key == "init_cov") {
      want(4);
      world::Vec4 d;
      d << to_double(t[1]), to_double(t[2]), to_double(t[3]), to_double(t[4]);
      c.init_cov_diag = d;
    } else if (key == "sigma_q") {
      want(1);
      p.sigma_q = to_double(t[1]);
    } else if (key == "sigma_r") {
      want(1);
      p.sigma_r = to_double(t[1]);
    } else if (key == "dt") {
      want(1);
      p.dt = to_double(t[1]);
    } else if (key == "gate") {
      want(1);
      p.gate = to_double(t[1]);
    } else if (key == "trace_halt") {
      want(1);
      p.trace_halt = to_double(t[1]);
    } else if (key == "refine_radius") {
      want(1);
      p.refine_radius = to_double(t[1]);
    } else if (key == "spawn_speed_max") {
      want(1);
      p.spawn_speed_max = to_double(t[1]);
    } else {
      fail("unknown scenario-config key '" + key + "'");
    }
  }
  p.rebuild();
  return out;
}

void write_scenario(std::ostream& out, const world::Scenario& scenario,
                    const est::ModelParams& params, const est::FilterState& init) {
  out << kVersionTag << " scenario\n";
  out << "params " << format_g17(params.sigma_q) << ' ' << format_g17(params.sigma_r) << ' '
      << format_g17(params.dt) << ' ' << format_g17(params.gate) << ' '
      << format_g17(params.trace_halt) << ' ' << format_g17(params.refine_radius) << ' '
      << format_g17(params.spawn_speed_max) << '\n';
  out << "init";
  for (int i = 0; i < 4; ++i) out << ' ' << format_g17(init.s(i));
  out << '\n';
  out << "init_cov";
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << ' ' << format_g17(init.P(r, c));
  }
  out << '\n';
  out << "steps " << scenario.detections.size() << '\n';
  out << "vehicles " << scenario.truth.size() << '\n';
  for (std::size_t v = 0; v < scenario.truth.size(); ++v) {
    for (std::size_t k = 0; k < scenario.truth[v].size(); ++k) {
      out << "truth " << v << ' ' << k << ' ' << format_g17(scenario.truth[v][k].x()) << ' '
          << format_g17(scenario.truth[v][k].y()) << '\n';
    }
  }
  for (std::size_t k = 0; k < scenario.detections.size(); ++k) {
    const auto& dets = scenario.detections[k];
    out << "step " << k << ' ' << dets.size() << '\n';
    for (const auto& d : dets) {
      out << "det " << d.id << ' ' << format_g17(d.z.x()) << ' ' << format_g17(d.z.y()) << ' '
          << format_g17(d.payoff) << ' ' << (d.truth_id ? *d.truth_id : -1) << '\n';
    }
  }
}

TrackingInput read_scenario(std::istream& in) {
  expect_header(in, "scenario");
  TrackingInput out;
  std::vector<std::string> t;

  expect(next_line(in, t) && t[0] == "params" && t.size() == 8, "expected params line");
  out.params.sigma_q = to_double(t[1]);
  out.params.sigma_r = to_double(t[2]);
  out.params.dt = to_double(t[3]);
  out.params.gate = to_double(t[4]);
  out.params.trace_halt = to_double(t[5]);
  out.params.refine_radius = to_double(t[6]);
  out.params.spawn_speed_max = to_double(t[7]);
  out.params.rebuild();

  expect(next_line(in, t) && t[0] == "init" && t.size() == 5, "expected init line");
  for (int i = 0; i < 4; ++i) out.init.s(i) = to_double(t[static_cast<std::size_t>(i) + 1]);
  expect(next_line(in, t) && t[0] == "init_cov" && t.size() == 17, "expected init_cov line");
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out.init.P(r, c) = to_double(t[static_cast<std::size_t>(r * 4 + c) + 1]);
    }
  }
  out.init.step = 0;

  expect(next_line(in, t) && t[0] == "steps" && t.size() == 2, "expected steps line");
  std::size_t n_steps = static_cast<std::size_t>(to_int(t[1]));
  expect(n_steps >= 2, "scenario needs at least two steps");
  expect(next_line(in, t) && t[0] == "vehicles" && t.size() == 2, "expected vehicles line");
  std::size_t n_vehicles = static_cast<std::size_t>(to_int(t[1]));

  out.scenario.truth.assign(n_vehicles, std::vector<world::Vec2>(n_steps, world::Vec2::Zero()));
  for (std::size_t i = 0; i < n_vehicles * n_steps; ++i) {
    expect(next_line(in, t) && t[0] == "truth" && t.size() == 5, "expected truth line");
    std::size_t v = static_cast<std::size_t>(to_int(t[1]));
    std::size_t k = static_cast<std::size_t>(to_int(t[2]));
    expect(v < n_vehicles && k < n_steps, "truth line out of range");
    out.scenario.truth[v][k] = world::Vec2(to_double(t[3]), to_double(t[4]));
  }

  out.scenario.detections.assign(n_steps, {});
  for (std::size_t k = 0; k < n_steps; ++k) {
    expect(next_line(in, t) && t[0] == "step" && t.size() == 3, "expected step line");
    expect(static_cast<std::size_t>(to_int(t[1])) == k, "step lines out of order");
    std::size_t m = static_cast<std::size_t>(to_int(t[2]));
    for (std::size_t j = 0; j < m; ++j) {
      expect(next_line(in, t) && t[0] == "det" && t.size() == 6, "expected det line");
      world::Detection d;
      d.id = static_cast<int>(to_int(t[1]));
      d.z = world::Vec2(to_double(t[2]), to_double(t[3]));
      d.payoff = to_double(t[4]);
      long long truth = to_int(t[5]);
      if (truth >= 0) d.truth_id = static_cast<int>(truth);
      out.scenario.detections[k].push_back(std::move(d));
    }
  }
  return out;
}

TrackingInput load_tracking_input(const std::string& path) {
  std::ifstream file(path);
  if (!file) fail("cannot open '" + path + "'");
  std::stringstream content;
  content << file.rdbuf();

  std::istringstream peek(content.str());
  std::vector<std::string> t;
  expect(next_line(peek, t) && t.size() == 2 && t[0] == kVersionTag,
         "'" + path + "' has no recognizable header");

  std::istringstream in(content.str());
  if (t[1] == "scenario-config") {
    LoadedConfig loaded = read_scenario_config(in);
    TrackingInput out;
    out.scenario = world::generate(loaded.config);
    out.params = loaded.params;
    out.init.s = world::initial_state_vector(loaded.config);
    out.init.P = world::initial_covariance(loaded.config);
    out.init.step = 0;
    return out;
  }
  if (t[1] == "scenario") return read_scenario(in);
  fail("'" + path + "' holds unsupported content kind '" + t[1] + "'");
}

MeasuresFixture read_measures_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  expect_header(in, "measures");

  MeasuresFixture out;
  std::vector<std::string> t;
  expect(next_line(in, t) && t[0] == "window" && t.size() == 4, "expected window line");
  out.l = static_cast<int>(to_int(t[1]));
  out.u = static_cast<int>(to_int(t[2]));
  out.e = static_cast<int>(to_int(t[3]));
  expect(next_line(in, t) && t[0] == "rows" && t.size() == 2, "expected rows line");
  std::size_t n = static_cast<std::size_t>(to_int(t[1]));
  for (std::size_t i = 0; i < n; ++i) {
    expect(next_line(in, t) && t[0] == "row" && t.size() == 8, "expected row line");
    out.labels.push_back(t[1]);
    verify::TrackMeasures m;
    m.phi = to_double(t[2]);
    m.dist_acc = to_double(t[3]);
    m.dist_max = to_double(t[4]);
    m.max_step = static_cast<int>(to_int(t[5]));
    m.dist_end = to_double(t[6]);
    m.gamma_ok = to_int(t[7]) != 0;
    out.rows.push_back(m);
  }
  return out;
}

void write_report(std::ostream& out, const Report& report) {
  out << kVersionTag << " report\n";
  out << "command " << report.command << '\n';
  out << "window " << report.l << ' ' << report.u << ' ' << report.e << '\n';
  out << "rows " << report.rows.size() << '\n';
  for (const auto& row : report.rows) {
    out << "row " << row.label << ' ' << format_g17(row.m.phi) << ' '
        << format_g17(row.m.dist_acc) << ' ' << format_g17(row.m.dist_max) << ' '
        << row.m.max_step << ' ' << format_g17(row.m.dist_end) << ' '
        << (row.m.gamma_ok ? 1 : 0) << '\n';
  }
  out << "entries " << report.entries.size() << '\n';
  for (const auto& entry : report.entries) {
    const auto& prob = entry.problem;
    const auto& res = entry.result;
    out << "entry " << kind_word(prob.kind) << '\n';
    out << "window " << prob.l << ' ' << prob.u << ' ' << prob.e << '\n';
    out << "max_window " << prob.max_begin << ' ' << prob.max_end << '\n';
    out << "epsilon " << format_g17(prob.epsilon) << '\n';
    out << "theta " << format_g17(prob.theta) << '\n';
    out << "sol_opt " << opt_g17(res.sol_opt) << '\n';
    out << "theta_star " << opt_g17(res.theta_star) << '\n';
    if (res.rho_star) {
      out << "rho_star " << *res.rho_star << '\n';
    } else {
      out << "rho_star none\n";
    }
    out << "p_plus " << res.p_plus.size();
    for (std::size_t i : res.p_plus) out << ' ' << i;
    out << '\n';
    out << "p_minus " << res.p_minus.size();
    for (std::size_t i : res.p_minus) out << ' ' << i;
    out << '\n';
    out << "verdict " << verdict_word(res.verdict) << '\n';
    out << "end\n";
  }
}

Report read_report(std::istream& in) {
  expect_header(in, "report");
  Report report;
  std::vector<std::string> t;

  expect(next_line(in, t) && t[0] == "command" && t.size() == 2, "expected command line");
  report.command = t[1];
  expect(next_line(in, t) && t[0] == "window" && t.size() == 4, "expected window line");
  report.l = static_cast<int>(to_int(t[1]));
  report.u = static_cast<int>(to_int(t[2]));
  report.e = static_cast<int>(to_int(t[3]));

  expect(next_line(in, t) && t[0] == "rows" && t.size() == 2, "expected rows line");
  std::size_t n_rows = static_cast<std::size_t>(to_int(t[1]));
  for (std::size_t i = 0; i < n_rows; ++i) {
    expect(next_line(in, t) && t[0] == "row" && t.size() == 8, "expected row line");
    ReportRow row;
    row.label = t[1];
    row.m.phi = to_double(t[2]);
    row.m.dist_acc = to_double(t[3]);
    row.m.dist_max = to_double(t[4]);
    row.m.max_step = static_cast<int>(to_int(t[5]));
    row.m.dist_end = to_double(t[6]);
    row.m.gamma_ok = to_int(t[7]) != 0;
    report.rows.push_back(std::move(row));
  }

  expect(next_line(in, t) && t[0] == "entries" && t.size() == 2, "expected entries line");
  std::size_t n_entries = static_cast<std::size_t>(to_int(t[1]));
  for (std::size_t i = 0; i < n_entries; ++i) {
    ReportEntry entry;
    expect(next_line(in, t) && t[0] == "entry" && t.size() == 2, "expected entry line");
    entry.problem.kind = kind_from(t[1]);
    expect(next_line(in, t) && t[0] == "window" && t.size() == 4, "expected entry window line");
    entry.problem.l = static_cast<int>(to_int(t[1]));
    entry.problem.u = static_cast<int>(to_int(t[2]));
    entry.problem.e = static_cast<int>(to_int(t[3]));
    expect(next_line(in, t) && t[0] == "max_window" && t.size() == 3, "expected max_window line");
    entry.problem.max_begin = static_cast<int>(to_int(t[1]));
    entry.problem.max_end = static_cast<int>(to_int(t[2]));
    expect(next_line(in, t) && t[0] == "epsilon" && t.size() == 2, "expected epsilon line");
    entry.problem.epsilon = to_double(t[1]);
    expect(next_line(in, t) && t[0] == "theta" && t.size() == 2, "expected theta line");
    entry.problem.theta = to_double(t[1]);
    expect(next_line(in, t) && t[0] == "sol_opt" && t.size() == 2, "expected sol_opt line");
    if (t[1] != "none") entry.result.sol_opt = to_double(t[1]);
    expect(next_line(in, t) && t[0] == "theta_star" && t.size() == 2, "expected theta_star line");
    if (t[1] != "none") entry.result.theta_star = to_double(t[1]);
    expect(next_line(in, t) && t[0] == "rho_star" && t.size() == 2, "expected rho_star line");
    if (t[1] != "none") entry.result.rho_star = static_cast<std::size_t>(to_int(t[1]));
    expect(next_line(in, t) && t[0] == "p_plus" && t.size() >= 2, "expected p_plus line");
    std::size_t n_plus = static_cast<std::size_t>(to_int(t[1]));
    expect(t.size() == n_plus + 2, "p_plus count mismatch");
    for (std::size_t j = 0; j < n_plus; ++j) {
      entry.result.p_plus.push_back(static_cast<std::size_t>(to_int(t[j + 2])));
    }
    expect(next_line(in, t) && t[0] == "p_minus" && t.size() >= 2, "expected p_minus line");
    std::size_t n_minus = static_cast<std::size_t>(to_int(t[1]));
    expect(t.size() == n_minus + 2, "p_minus count mismatch");
    for (std::size_t j = 0; j < n_minus; ++j) {
      entry.result.p_minus.push_back(static_cast<std::size_t>(to_int(t[j + 2])));
    }
    expect(next_line(in, t) && t[0] == "verdict" && t.size() == 2, "expected verdict line");
    entry.result.verdict = verdict_from(t[1]);
    expect(next_line(in, t) && t[0] == "end", "expected end line");
    report.entries.push_back(std::move(entry));
  }
  return report;
}

void write_report_table(std::ostream& out, const Report& report) {
  out << kVersionTag << " table\n";
  out << "command " << report.command << '\n';
  out << "measures\n";
  out << "track phi dist_acc dist_max dist_end\n";
  for (const auto& row : report.rows) {
    out << row.label << ' ' << format_f2(row.m.phi) << ' ' << format_f2(row.m.dist_acc) << ' '
        << format_f2(row.m.dist_max) << ' ' << format_f2(row.m.dist_end) << '\n';
  }
  for (const auto& entry : report.entries) {
    const auto& res = entry.result;
    out << "outcome " << kind_word(entry.problem.kind) << '\n';
    out << "epsilon " << format_f2(entry.problem.epsilon) << '\n';
    out << "sol_opt " << (res.sol_opt ? format_f2(*res.sol_opt) : "inf.") << '\n';
    out << "theta_star " << (res.theta_star ? format_f2(*res.theta_star) : "inf.") << '\n';
    std::string rho_label = "none";
    if (res.rho_star) {
      expect(*res.rho_star < report.rows.size(), "rho_star row index out of range");
      rho_label = report.rows[*res.rho_star].label;
    }
    out << "rho_star " << rho_label << '\n';
    out << "verdict " << verdict_word(res.verdict) << '\n';
  }
}

}  // namespace poses::io

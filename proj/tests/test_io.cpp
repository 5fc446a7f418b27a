#include "poses/io.hpp"

#include "poses/errors.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace est = poses::est;
namespace io = poses::io;
namespace world = poses::world;
namespace verify = poses::verify;

namespace {

std::string data_path(const std::string& name) {
  return std::string(POSES_DATA_DIR) + "/" + name;
}

// Unique scratch file removed at scope exit.
struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& stem) {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(rng()) + ".txt");
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  void write(const std::string& content) const {
    std::ofstream out(path);
    out << content;
  }
};

bool detections_equal(const world::Scenario& a, const world::Scenario& b) {
  if (a.detections.size() != b.detections.size()) return false;
  for (std::size_t k = 0; k < a.detections.size(); ++k) {
    if (a.detections[k].size() != b.detections[k].size()) return false;
    for (std::size_t i = 0; i < a.detections[k].size(); ++i) {
      const auto& da = a.detections[k][i];
      const auto& db = b.detections[k][i];
      if (da.id != db.id || da.z != db.z || da.payoff != db.payoff || da.truth_id != db.truth_id) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST(Format, G17RoundTripsDoubles) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(io::format_g17(v)), v);
  }
  EXPECT_EQ(io::format_f2(6.81), "6.81");
  EXPECT_EQ(io::format_f2(0.0), "0.00");
  EXPECT_EQ(io::format_f2(5447.39), "5447.39");
}

TEST(ScenarioConfig, LoadsBundledConfigDeterministically) {
  io::TrackingInput a = io::load_tracking_input(data_path("scenarios/single_vehicle.cfg"));
  io::TrackingInput b = io::load_tracking_input(data_path("scenarios/single_vehicle.cfg"));
  EXPECT_EQ(a.scenario.horizon(), 19);
  EXPECT_TRUE(detections_equal(a.scenario, b.scenario));
  EXPECT_EQ(a.init.s, b.init.s);
  EXPECT_EQ(a.params.sigma_r, 5.0);
  EXPECT_EQ(a.params.gate, 2.0);
  // R rebuilt from sigma_r
  EXPECT_DOUBLE_EQ(a.params.R(0, 0), 25.0);
  EXPECT_DOUBLE_EQ(a.params.Q(2, 2), 9.0);
}

TEST(ScenarioConfig, ParsesVehiclesWaypointsAndOverrides) {
  std::istringstream in(
      "poses-verify/1 scenario-config\n"
      "# comment\n"
      "n_steps 6\n"
      "seed 11\n"
      "vehicle 1 2 3 4 waypoint 2 50 60\n"
      "init_state 9 8 7 6\n"
      "init_cov 1 2 3 4\n"
      "gate 1.5\n");
  io::LoadedConfig loaded = io::read_scenario_config(in);
  ASSERT_EQ(loaded.config.vehicles.size(), 1u);
  EXPECT_EQ(loaded.config.vehicles[0].position, world::Vec2(1, 2));
  EXPECT_EQ(loaded.config.vehicles[0].velocity, world::Vec2(3, 4));
  ASSERT_EQ(loaded.config.vehicles[0].waypoints.count(2), 1u);
  EXPECT_EQ(loaded.config.vehicles[0].waypoints.at(2), world::Vec2(50, 60));
  ASSERT_TRUE(loaded.config.init_state.has_value());
  EXPECT_EQ((*loaded.config.init_state)(0), 9.0);
  ASSERT_TRUE(loaded.config.init_cov_diag.has_value());
  EXPECT_EQ((*loaded.config.init_cov_diag)(3), 4.0);
  EXPECT_EQ(loaded.params.gate, 1.5);
}

TEST(ScenarioConfig, RejectsUnknownKeysAndBadHeaders) {
  std::istringstream unknown(
      "poses-verify/1 scenario-config\n"
      "frobnicate 3\n");
  EXPECT_THROW(io::read_scenario_config(unknown), poses::IoError);

  std::istringstream bad_header("poses-verify/2 scenario-config\nn_steps 5\n");
  EXPECT_THROW(io::read_scenario_config(bad_header), poses::IoError);

  std::istringstream wrong_kind("poses-verify/1 report\n");
  EXPECT_THROW(io::read_scenario_config(wrong_kind), poses::IoError);

  std::istringstream bad_arity(
      "poses-verify/1 scenario-config\n"
      "scene 1 2 3\n");
  EXPECT_THROW(io::read_scenario_config(bad_arity), poses::IoError);
}

TEST(Scenario, MaterializedFormRoundTripsByteForByte) {
  world::ScenarioConfig c;
  c.n_steps = 12;
  world::VehicleSpec v;
  v.position = world::Vec2(3.25, -7.5);
  v.velocity = world::Vec2(1.125, 0.25);
  v.waypoints[5] = world::Vec2(40, 41);
  c.vehicles.push_back(v);
  c.misdetect_prob = 0.2;
  c.false_alarm_rate = 1.0;
  c.detection_noise_sigma = 0.77;
  c.seed = 1234;
  c.payoff_model.kind = world::PayoffModel::Kind::Uniform;
  c.payoff_model.a = 1.0;
  c.payoff_model.b = 9.0;
  world::Scenario s = world::generate(c);

  est::ModelParams params = est::ModelParams::from_sigmas(2.5, 4.75);
  est::FilterState init;
  init.s = world::initial_state_vector(c);
  init.P = world::initial_covariance(c);

  std::ostringstream first;
  io::write_scenario(first, s, params, init);
  std::istringstream parse(first.str());
  io::TrackingInput loaded = io::read_scenario(parse);
  std::ostringstream second;
  io::write_scenario(second, loaded.scenario, loaded.params, loaded.init);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_TRUE(detections_equal(s, loaded.scenario));
  EXPECT_EQ(loaded.params.sigma_r, 4.75);
  EXPECT_EQ(loaded.init.s, init.s);
  EXPECT_EQ(loaded.init.P, init.P);
  EXPECT_EQ(loaded.scenario.truth.size(), s.truth.size());
  EXPECT_EQ(loaded.scenario.truth[0], s.truth[0]);
}

TEST(Scenario, LoaderDispatchesOnHeaderKind) {
  TempFile file("poses-io-materialized");
  io::TrackingInput from_cfg = io::load_tracking_input(data_path("scenarios/single_vehicle.cfg"));
  {
    std::ofstream out(file.path);
    io::write_scenario(out, from_cfg.scenario, from_cfg.params, from_cfg.init);
  }
  io::TrackingInput reloaded = io::load_tracking_input(file.path.string());
  EXPECT_TRUE(detections_equal(from_cfg.scenario, reloaded.scenario));
  EXPECT_EQ(from_cfg.init.s, reloaded.init.s);

  TempFile junk("poses-io-junk");
  junk.write("not a recognized file\n");
  EXPECT_THROW(io::load_tracking_input(junk.path.string()), poses::IoError);
  EXPECT_THROW(io::load_tracking_input("/nonexistent/poses-nowhere.txt"), poses::IoError);
}

TEST(Fixture, ParsesTheBundledMeasuresTable) {
  io::MeasuresFixture fx = io::read_measures_fixture(data_path("reference_track_measures.txt"));
  EXPECT_EQ(fx.l, 6);
  EXPECT_EQ(fx.u, 8);
  EXPECT_EQ(fx.e, 19);
  ASSERT_EQ(fx.rows.size(), 17u);
  ASSERT_EQ(fx.labels.size(), 17u);
  EXPECT_EQ(fx.labels.front(), "1");
  EXPECT_EQ(fx.labels.back(), "17");
  EXPECT_DOUBLE_EQ(fx.rows[0].phi, 20.32);
  EXPECT_DOUBLE_EQ(fx.rows[9].phi, 3.10);
  EXPECT_DOUBLE_EQ(fx.rows[10].dist_acc, 530.24);
  EXPECT_DOUBLE_EQ(fx.rows[11].dist_max, 0.0);
  EXPECT_DOUBLE_EQ(fx.rows[16].dist_end, 210.13);
  EXPECT_TRUE(fx.rows[5].gamma_ok);
  EXPECT_EQ(fx.rows[5].max_step, -1);
}

TEST(Report, StructuredFormRoundTripsByteForByte) {
  io::Report report;
  report.command = "verify";
  report.l = 6;
  report.u = 8;
  report.e = 19;
  verify::TrackMeasures m0;
  m0.phi = 0;
  m0.dist_acc = 0;
  m0.dist_max = 0;
  m0.max_step = -1;
  m0.dist_end = 0;
  m0.gamma_ok = true;
  verify::TrackMeasures m1;
  m1.phi = 6.81;
  m1.dist_acc = 530.24;
  m1.dist_max = 53.65;
  m1.max_step = 11;
  m1.dist_end = 53.65;
  m1.gamma_ok = false;
  report.rows.push_back({"6-0,7-0,8-0", m0});
  report.rows.push_back({"6-1,7-None,8-2", m1});

  io::ReportEntry with_solution;
  with_solution.problem.kind = verify::PropertyKind::Robustness;
  with_solution.problem.epsilon = 120;
  with_solution.problem.theta = 0;
  with_solution.problem.l = 6;
  with_solution.problem.u = 8;
  with_solution.problem.e = 19;
  with_solution.problem.max_begin = 6;
  with_solution.problem.max_end = 19;
  with_solution.result.sol_opt = 6.81;
  with_solution.result.theta_star = 3.1;
  with_solution.result.rho_star = 0;
  with_solution.result.p_plus = {1};
  with_solution.result.p_minus = {0};
  with_solution.result.verdict = verify::Verdict::Holds;
  report.entries.push_back(with_solution);

  io::ReportEntry vacuous;
  vacuous.problem.kind = verify::PropertyKind::Resilience;
  vacuous.problem.epsilon = 1;
  vacuous.problem.l = 6;
  vacuous.problem.u = 8;
  vacuous.problem.e = 19;
  vacuous.problem.max_begin = 6;
  vacuous.problem.max_end = 19;
  vacuous.result.verdict = verify::Verdict::Vacuous;
  vacuous.result.p_minus = {0, 1};
  report.entries.push_back(vacuous);

  std::ostringstream first;
  io::write_report(first, report);
  std::istringstream parse(first.str());
  io::Report loaded = io::read_report(parse);
  std::ostringstream second;
  io::write_report(second, loaded);
  EXPECT_EQ(first.str(), second.str());

  ASSERT_EQ(loaded.rows.size(), 2u);
  EXPECT_EQ(loaded.rows[1].label, "6-1,7-None,8-2");
  EXPECT_FALSE(loaded.rows[1].m.gamma_ok);
  ASSERT_EQ(loaded.entries.size(), 2u);
  EXPECT_EQ(*loaded.entries[0].result.sol_opt, 6.81);
  EXPECT_EQ(*loaded.entries[0].result.rho_star, 0u);
  EXPECT_FALSE(loaded.entries[1].result.sol_opt.has_value());
  EXPECT_EQ(loaded.entries[1].result.verdict, verify::Verdict::Vacuous);
  EXPECT_EQ(loaded.entries[1].result.p_minus, (std::vector<std::size_t>{0, 1}));
}

TEST(Report, TableFormPrintsTwoDecimalsAndUnboundedMarkers) {
  io::Report report;
  report.command = "verify";
  report.l = 2;
  report.u = 3;
  report.e = 5;
  verify::TrackMeasures m;
  m.phi = 1.2345;
  m.dist_acc = 10.005;
  m.dist_max = 3.333;
  m.dist_end = 0.004;
  report.rows.push_back({"2-0,3-None", m});

  io::ReportEntry entry;
  entry.problem.kind = verify::PropertyKind::Robustness;
  entry.problem.epsilon = 120;
  entry.result.verdict = verify::Verdict::Vacuous;
  report.entries.push_back(entry);

  std::ostringstream out;
  io::write_report_table(out, report);
  const std::string text = out.str();
  EXPECT_NE(text.find("poses-verify/1 table\n"), std::string::npos);
  EXPECT_NE(text.find("track phi dist_acc dist_max dist_end\n"), std::string::npos);
  EXPECT_NE(text.find("2-0,3-None 1.23 10.01 3.33 0.00\n"), std::string::npos);
  EXPECT_NE(text.find("sol_opt inf.\n"), std::string::npos);
  EXPECT_NE(text.find("theta_star inf.\n"), std::string::npos);
  EXPECT_NE(text.find("rho_star none\n"), std::string::npos);
  EXPECT_NE(text.find("verdict vacuous\n"), std::string::npos);
}

TEST(Report, ReaderRejectsStructuralDamage) {
  std::istringstream truncated(
      "poses-verify/1 report\n"
      "command verify\n"
      "window 6 8 19\n"
      "rows 1\n");
  EXPECT_THROW(io::read_report(truncated), poses::IoError);

  std::istringstream bad_verdict(
      "poses-verify/1 report\n"
      "command verify\n"
      "window 6 8 19\n"
      "rows 0\n"
      "entries 1\n"
      "entry robustness\n"
      "window 6 8 19\n"
      "max_window 6 19\n"
      "epsilon 120\n"
      "theta 0\n"
      "sol_opt none\n"
      "theta_star none\n"
      "rho_star none\n"
      "p_plus 0\n"
      "p_minus 0\n"
      "verdict maybe\n"
      "end\n");
  EXPECT_THROW(io::read_report(bad_verdict), poses::IoError);
}

#pragma once

#include "poses/estimator.hpp"
#include "poses/measures.hpp"
#include "poses/world.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace poses::io {

// Every on-disk artifact starts with "poses-verify/1 <kind>"; readers reject
// unknown versions or kinds. All floating-point fields are written with
// enough digits (%.17g) to round-trip exactly; the table renderer below is
// the only lossy output.
inline constexpr const char* kVersionTag = "poses-verify/1";

std::string format_g17(double v);
std::string format_f2(double v);

// --- scenario input ---------------------------------------------------------

// A scenario source plus the tracker configuration it carries.
struct TrackingInput {
  world::Scenario scenario;
  est::ModelParams params;
  est::FilterState init;
};

// Reads either input kind by header: a "scenario-config" file is generated
// on the fly; a materialized "scenario" file is parsed as-is.
TrackingInput load_tracking_input(const std::string& path);

// Reads a scenario-config file (for callers that need the config itself).
struct LoadedConfig {
  world::ScenarioConfig config;
  est::ModelParams params;
};
LoadedConfig read_scenario_config(std::istream& in);

// Materialized scenario: self-contained (embeds tracker params and the
// initial state), so downstream runs need no side-channel configuration.
void write_scenario(std::ostream& out, const world::Scenario& scenario,
                    const est::ModelParams& params, const est::FilterState& init);
TrackingInput read_scenario(std::istream& in);

// --- measure-table fixture --------------------------------------------------

struct MeasuresFixture {
  int l = 0, u = 0, e = 0;
  std::vector<std::string> labels;
  std::vector<verify::TrackMeasures> rows;
};
MeasuresFixture read_measures_fixture(const std::string& path);

// --- reports ----------------------------------------------------------------

struct ReportRow {
  std::string label;  // whitespace-free display key ("track" number or the
                      // attacked-window observation sequence)
  verify::TrackMeasures m;
};

struct ReportEntry {
  verify::VerificationProblem problem;
  verify::VerificationResult result;  // indices refer to Report::rows
};

struct Report {
  std::string command;
  int l = 0, u = 0, e = 0;
  std::vector<ReportRow> rows;
  std::vector<ReportEntry> entries;
};

// Structured text: machine-parseable, stable key order, exact round-trip
// through read_report.
void write_report(std::ostream& out, const Report& report);
Report read_report(std::istream& in);

// Table text: fixed two-decimal rendering in the measure-table column order
// (phi, dist_acc, dist_max, dist_end); absent optima print as "inf." and an
// absent representative path as "none".
void write_report_table(std::ostream& out, const Report& report);

}  // namespace poses::io

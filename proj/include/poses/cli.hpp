#pragma once

#include "poses/io.hpp"
#include "poses/measures.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace poses::cli {

// Sub-commands of the `poses-verify` binary:
//   simulate          materialize a scenario (generate detections from a config)
//   unfold            enumerate attacked tracks and report their measures
//   verify            unfold + constrained-optimisation verdict
//   knapsack          self-test: chain-model optima vs. exhaustive subset search
//   reproduce-tables  run both verdicts over a bundled measures fixture
enum class Command { Simulate, Unfold, Verify, Knapsack, ReproduceTables };

enum class OutputFormat { StructuredText, TableText };

struct RunSpec {
  Command command = Command::Verify;
  std::string scenario_path;  // --scenario
  std::string fixture_path;   // --fixture
  int attack_l = 0;           // --attack L:U
  int attack_u = 0;
  bool attack_set = false;
  verify::PropertyKind property = verify::PropertyKind::Robustness;  // --property
  bool property_set = false;
  std::optional<double> epsilon;  // --epsilon; defaults: 120 robustness, 1 resilience
  double theta = 0.0;             // --theta
  bool monitor = false;           // --monitor
  bool joint_kfs = false;         // --joint-kfs
  std::optional<std::pair<int, int>> dist_max_window;  // --dist-max-window A:B
  std::size_t max_paths = 1'000'000;                   // --max-paths
  std::string output_path = "-";                       // --output ("-" = stdout)
  OutputFormat format = OutputFormat::StructuredText;  // --format
  int instances = 50;                                  // --instances (knapsack)
  int max_items = 12;                                  // --max-items (knapsack)
  std::uint64_t seed = 1;                              // --seed (knapsack)
};

// One line per command plus the flag reference; printed on usage errors.
std::string usage();

// `args` excludes the program name. Throws UsageError on unknown commands,
// unknown flags, malformed values, or missing per-command requirements.
RunSpec parse_args(const std::vector<std::string>& args);

// Executes the pipeline and writes the requested artifact ("-" goes to `out`).
// Returns the process exit code: 0 success/Holds/Vacuous, 1 Fails or
// self-test mismatch. Errors are thrown, not mapped, so callers decide.
int run(const RunSpec& spec, std::ostream& out);

// Renders `report` as structured text or the 2-decimal table to
// `output_path`, with "-" meaning `fallback`.
void emit_report(const io::Report& report, OutputFormat format, const std::string& output_path,
                 std::ostream& fallback);

// Full entry point: parse, run, and map errors to exit codes
// (2 usage, 3 runtime).
int main_entry(int argc, char** argv);

}  // namespace poses::cli

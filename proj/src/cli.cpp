#include "poses/cli.hpp"

#include "poses/errors.hpp"
#include "poses/polts.hpp"
#include "poses/rng.hpp"
#include "poses/verify.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

namespace poses::cli {

namespace {

constexpr double kDefaultRobustnessEpsilon = 120.0;
constexpr double kDefaultResilienceEpsilon = 1.0;

[[noreturn]] void bad_usage(const std::string& what) { throw UsageError(what); }

double usage_double(const std::string& token, const std::string& flag) {
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(v)) {
    bad_usage("flag '" + flag + "' expects a finite number, got '" + token + "'");
  }
  return v;
}

long long usage_int(const std::string& token, const std::string& flag) {
  char* end = nullptr;
  long long v = std::strtoll(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size()) {
    bad_usage("flag '" + flag + "' expects an integer, got '" + token + "'");
  }
  return v;
}

std::pair<int, int> usage_window(const std::string& token, const std::string& flag) {
  std::size_t colon = token.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
    bad_usage("flag '" + flag + "' expects A:B, got '" + token + "'");
  }
  int a = static_cast<int>(usage_int(token.substr(0, colon), flag));
  int b = static_cast<int>(usage_int(token.substr(colon + 1), flag));
  if (a > b) bad_usage("flag '" + flag + "': window start exceeds end in '" + token + "'");
  return {a, b};
}

const char* command_word(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Unfold: return "unfold";
    case Command::Verify: return "verify";
    case Command::Knapsack: return "knapsack";
    case Command::ReproduceTables: return "reproduce-tables";
  }
  return "verify";
}

// Writes through `emit` to output_path, with "-" meaning `fallback`.
template <typename Emit>
void write_output(const std::string& output_path, std::ostream& fallback, Emit&& emit) {
  if (output_path == "-") {
    emit(fallback);
    return;
  }
  std::ofstream file(output_path);
  if (!file) throw IoError("cannot write '" + output_path + "'");
  emit(file);
  file.flush();
  if (!file.good()) throw IoError("failed while writing '" + output_path + "'");
}

bool same_optional(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || *a == *b;
}

std::string optional_word(const std::optional<double>& v) {
  return v ? io::format_g17(*v) : "none";
}

int run_simulate(const RunSpec& spec, std::ostream& out) {
  io::TrackingInput input = io::load_tracking_input(spec.scenario_path);
  write_output(spec.output_path, out, [&](std::ostream& os) {
    io::write_scenario(os, input.scenario, input.params, input.init);
  });
  return 0;
}

int run_tracking(const RunSpec& spec, std::ostream& out) {
  io::TrackingInput input = io::load_tracking_input(spec.scenario_path);
  const int e = input.scenario.horizon();
  if (spec.attack_u > e) {
    bad_usage("attack window " + std::to_string(spec.attack_l) + ":" +
              std::to_string(spec.attack_u) + " exceeds the scenario horizon " +
              std::to_string(e));
  }

  polts::Path original =
      spec.joint_kfs ? polts::run_original_joint(input.scenario, input.params, input.init)
                     : polts::run_original(input.scenario, input.params, input.init);
  std::vector<polts::Path> paths =
      spec.joint_kfs ? polts::unfold_joint(input.scenario, input.params, input.init,
                                           spec.attack_l, spec.attack_u, spec.max_paths)
                     : polts::unfold(input.scenario, input.params, input.init, spec.attack_l,
                                     spec.attack_u, spec.max_paths);

  verify::VerificationProblem problem;
  problem.kind = spec.property;
  problem.epsilon = spec.epsilon.value_or(problem.kind == verify::PropertyKind::Robustness
                                              ? kDefaultRobustnessEpsilon
                                              : kDefaultResilienceEpsilon);
  problem.theta = spec.theta;
  problem.l = spec.attack_l;
  problem.u = spec.attack_u;
  problem.e = e;
  problem.max_begin = spec.dist_max_window ? spec.dist_max_window->first : spec.attack_l;
  problem.max_end = spec.dist_max_window ? spec.dist_max_window->second : e;

  verify::compute_measures(original, paths, problem);
  if (spec.monitor) paths = verify::monitor_filter(std::move(paths));

  io::Report report;
  report.command = command_word(spec.command);
  report.l = spec.attack_l;
  report.u = spec.attack_u;
  report.e = e;
  report.rows.reserve(paths.size());
  for (const auto& path : paths) {
    report.rows.push_back({path.window_label(spec.attack_l, spec.attack_u), *path.measures});
  }

  int exit_code = 0;
  if (spec.command == Command::Verify) {
    verify::VerificationResult result = verify::solve(paths, problem);
    if (result.verdict == verify::Verdict::Fails) exit_code = 1;
    report.entries.push_back({problem, std::move(result)});
  }

  emit_report(report, spec.format, spec.output_path, out);
  return exit_code;
}

int run_reproduce_tables(const RunSpec& spec, std::ostream& out) {
  io::MeasuresFixture fixture = io::read_measures_fixture(spec.fixture_path);

  std::vector<polts::Path> paths(fixture.rows.size());
  for (std::size_t i = 0; i < fixture.rows.size(); ++i) paths[i].measures = fixture.rows[i];

  io::Report report;
  report.command = command_word(spec.command);
  report.l = fixture.l;
  report.u = fixture.u;
  report.e = fixture.e;
  for (std::size_t i = 0; i < fixture.rows.size(); ++i) {
    report.rows.push_back({fixture.labels[i], fixture.rows[i]});
  }

  int exit_code = 0;
  for (verify::PropertyKind kind :
       {verify::PropertyKind::Robustness, verify::PropertyKind::Resilience}) {
    verify::VerificationProblem problem;
    problem.kind = kind;
    problem.epsilon = kind == verify::PropertyKind::Robustness ? kDefaultRobustnessEpsilon
                                                               : kDefaultResilienceEpsilon;
    problem.theta = spec.theta;
    problem.l = fixture.l;
    problem.u = fixture.u;
    problem.e = fixture.e;
    problem.max_begin = fixture.l;
    problem.max_end = fixture.e;
    verify::VerificationResult result = verify::solve(paths, problem);
    if (result.verdict == verify::Verdict::Fails) exit_code = 1;
    report.entries.push_back({problem, std::move(result)});
  }

  emit_report(report, spec.format, spec.output_path, out);
  return exit_code;
}

// Chain-model self-test: random positive-integer instances solved through the
// transition-system pipeline and checked against exhaustive subset search.
// Draw order per instance: item count, then (value, weight) per item, then
// the capacity.
int run_knapsack(const RunSpec& spec, std::ostream& out) {
  std::ostringstream buf;
  buf << io::kVersionTag << " knapsack-selftest\n";
  buf << "instances " << spec.instances << '\n';
  buf << "max_items " << spec.max_items << '\n';
  buf << "seed " << spec.seed << '\n';

  world::Rng rng(spec.seed);
  int mismatches = 0;
  for (int i = 0; i < spec.instances; ++i) {
    int n = 1 + static_cast<int>(rng.uniform() * spec.max_items);
    if (n > spec.max_items) n = spec.max_items;

    polts::KnapsackInstance inst;
    double weight_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double value = 1.0 + std::floor(rng.uniform() * 20.0);
      double weight = 1.0 + std::floor(rng.uniform() * 15.0);
      inst.items.push_back({value, weight});
      weight_sum += weight;
    }
    // Occasionally at or above the weight sum, so unbeatable capacities
    // (vacuous verdicts) are exercised too.
    inst.capacity = std::floor(rng.uniform() * (weight_sum + 3.0));

    auto [model, problem] = polts::knapsack_lts(inst);
    std::vector<polts::Path> paths = polts::knapsack_paths(model);
    verify::VerificationResult result = verify::solve(paths, problem);

    std::optional<double> brute_sol;
    const std::uint64_t subsets = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
      double value = 0.0, weight = 0.0;
      for (int j = 0; j < n; ++j) {
        if (mask >> j & 1) {
          value += inst.items[static_cast<std::size_t>(j)].value;
          weight += inst.items[static_cast<std::size_t>(j)].weight;
        }
      }
      if (weight > inst.capacity && (!brute_sol || value < *brute_sol)) brute_sol = value;
    }
    std::optional<double> brute_theta;
    if (brute_sol) {
      for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        double value = 0.0, weight = 0.0;
        for (int j = 0; j < n; ++j) {
          if (mask >> j & 1) {
            value += inst.items[static_cast<std::size_t>(j)].value;
            weight += inst.items[static_cast<std::size_t>(j)].weight;
          }
        }
        if (weight <= inst.capacity && value < *brute_sol &&
            (!brute_theta || value > *brute_theta)) {
          brute_theta = value;
        }
      }
    }

    bool ok = same_optional(result.sol_opt, brute_sol) &&
              same_optional(result.theta_star, brute_theta);
    if (!ok) ++mismatches;
    buf << "instance " << i << " n " << n << " capacity " << io::format_g17(inst.capacity)
        << " sol_opt " << optional_word(result.sol_opt) << " theta_star "
        << optional_word(result.theta_star) << " brute_sol " << optional_word(brute_sol)
        << " brute_theta " << optional_word(brute_theta) << (ok ? " ok" : " mismatch") << '\n';
  }
  buf << "result " << (mismatches == 0 ? "ok" : "mismatch " + std::to_string(mismatches))
      << '\n';

  write_output(spec.output_path, out, [&](std::ostream& os) { os << buf.str(); });
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

std::string usage() {
  return
      "usage: poses-verify <command> [flags]\n"
      "\n"
      "commands:\n"
      "  simulate          --scenario <file> [--output <file>]\n"
      "  unfold            --scenario <file> --attack L:U [--joint-kfs] [--monitor]\n"
      "  verify            --scenario <file> --attack L:U --property <name> [...]\n"
      "  knapsack          [--instances N] [--max-items N] [--seed N]\n"
      "  reproduce-tables  --fixture <file> [--format table-text]\n"
      "\n"
      "flags:\n"
      "  --scenario <file>        scenario config or materialized scenario\n"
      "  --fixture <file>         measures fixture (reproduce-tables)\n"
      "  --attack L:U             attacked transition window, steps L..U, L >= 1\n"
      "  --property <name>        robustness | resilience\n"
      "  --epsilon <x>            violation threshold (default 120 robustness, 1 resilience)\n"
      "  --theta <x>              acceptance threshold on sol_opt (default 0)\n"
      "  --monitor                drop paths whose uncertainty monitor tripped\n"
      "  --joint-kfs              track neighbouring vehicles with auxiliary filters\n"
      "  --dist-max-window A:B    window for the peak-deviation measure (default L:horizon)\n"
      "  --max-paths <n>          unfolding explosion cap (default 1000000)\n"
      "  --output <file>          output path, '-' = stdout (default '-')\n"
      "  --format <name>          structured-text | table-text (default structured-text)\n"
      "  --instances <n>          self-test instance count (default 50)\n"
      "  --max-items <n>          self-test max items per instance (default 12)\n"
      "  --seed <n>               self-test seed (default 1)\n"
      "\n"
      "exit codes: 0 holds/success, 1 fails/self-test mismatch, 2 usage error,\n"
      "            3 runtime error\n";
}

RunSpec parse_args(const std::vector<std::string>& args) {
  if (args.empty()) bad_usage("missing command");

  RunSpec spec;
  const std::string& command = args[0];
  if (command == "simulate") {
    spec.command = Command::Simulate;
  } else if (command == "unfold") {
    spec.command = Command::Unfold;
  } else if (command == "verify") {
    spec.command = Command::Verify;
  } else if (command == "knapsack") {
    spec.command = Command::Knapsack;
  } else if (command == "reproduce-tables") {
    spec.command = Command::ReproduceTables;
  } else {
    bad_usage("unknown command '" + command + "'");
  }

  std::size_t i = 1;
  auto value_of = [&](const std::string& flag) -> const std::string& {
    if (i + 1 >= args.size()) bad_usage("flag '" + flag + "' needs a value");
    return args[++i];
  };

  for (; i < args.size(); ++i) {
    const std::string& flag = args[i];
    if (flag == "--scenario") {
      spec.scenario_path = value_of(flag);
      if (spec.scenario_path.empty()) bad_usage("--scenario path is empty");
    } else if (flag == "--fixture") {
      spec.fixture_path = value_of(flag);
      if (spec.fixture_path.empty()) bad_usage("--fixture path is empty");
    } else if (flag == "--attack") {
      auto [l, u] = usage_window(value_of(flag), flag);
      if (l < 1) bad_usage("--attack: the first attackable transition enters step 1");
      spec.attack_l = l;
      spec.attack_u = u;
      spec.attack_set = true;
    } else if (flag == "--property") {
      const std::string& word = value_of(flag);
      if (word == "robustness") {
        spec.property = verify::PropertyKind::Robustness;
      } else if (word == "resilience") {
        spec.property = verify::PropertyKind::Resilience;
      } else {
        bad_usage("--property expects robustness or resilience, got '" + word + "'");
      }
      spec.property_set = true;
    } else if (flag == "--epsilon") {
      double v = usage_double(value_of(flag), flag);
      if (v < 0) bad_usage("--epsilon must be >= 0");
      spec.epsilon = v;
    } else if (flag == "--theta") {
      spec.theta = usage_double(value_of(flag), flag);
    } else if (flag == "--monitor") {
      spec.monitor = true;
    } else if (flag == "--joint-kfs") {
      spec.joint_kfs = true;
    } else if (flag == "--dist-max-window") {
      auto [a, b] = usage_window(value_of(flag), flag);
      if (a < 0) bad_usage("--dist-max-window starts at step 0");
      spec.dist_max_window = {a, b};
    } else if (flag == "--max-paths") {
      long long v = usage_int(value_of(flag), flag);
      if (v < 1) bad_usage("--max-paths must be >= 1");
      spec.max_paths = static_cast<std::size_t>(v);
    } else if (flag == "--output") {
      spec.output_path = value_of(flag);
      if (spec.output_path.empty()) bad_usage("--output path is empty");
    } else if (flag == "--format") {
      const std::string& word = value_of(flag);
      if (word == "structured-text") {
        spec.format = OutputFormat::StructuredText;
      } else if (word == "table-text") {
        spec.format = OutputFormat::TableText;
      } else {
        bad_usage("--format expects structured-text or table-text, got '" + word + "'");
      }
    } else if (flag == "--instances") {
      long long v = usage_int(value_of(flag), flag);
      if (v < 1) bad_usage("--instances must be >= 1");
      spec.instances = static_cast<int>(v);
    } else if (flag == "--max-items") {
      long long v = usage_int(value_of(flag), flag);
      if (v < 1 || v > 62) bad_usage("--max-items must be in [1, 62]");
      spec.max_items = static_cast<int>(v);
    } else if (flag == "--seed") {
      long long v = usage_int(value_of(flag), flag);
      if (v < 0) bad_usage("--seed must be >= 0");
      spec.seed = static_cast<std::uint64_t>(v);
    } else {
      bad_usage("unknown flag '" + flag + "'");
    }
  }

  switch (spec.command) {
    case Command::Simulate:
      if (spec.scenario_path.empty()) bad_usage("simulate requires --scenario");
      break;
    case Command::Unfold:
      if (spec.scenario_path.empty()) bad_usage("unfold requires --scenario");
      if (!spec.attack_set) bad_usage("unfold requires --attack");
      break;
    case Command::Verify:
      if (spec.scenario_path.empty()) bad_usage("verify requires --scenario");
      if (!spec.attack_set) bad_usage("verify requires --attack");
      if (!spec.property_set) bad_usage("verify requires --property");
      break;
    case Command::Knapsack:
      break;
    case Command::ReproduceTables:
      if (spec.fixture_path.empty()) bad_usage("reproduce-tables requires --fixture");
      break;
  }
  return spec;
}

void emit_report(const io::Report& report, OutputFormat format, const std::string& output_path,
                 std::ostream& fallback) {
  write_output(output_path, fallback, [&](std::ostream& os) {
    if (format == OutputFormat::TableText) {
      io::write_report_table(os, report);
    } else {
      io::write_report(os, report);
    }
  });
}

int run(const RunSpec& spec, std::ostream& out) {
  switch (spec.command) {
    case Command::Simulate: return run_simulate(spec, out);
    case Command::Unfold:
    case Command::Verify: return run_tracking(spec, out);
    case Command::Knapsack: return run_knapsack(spec, out);
    case Command::ReproduceTables: return run_reproduce_tables(spec, out);
  }
  return 3;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    RunSpec spec = parse_args(args);
    return run(spec, std::cout);
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n\n" << usage();
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  }
}

}  // namespace poses::cli

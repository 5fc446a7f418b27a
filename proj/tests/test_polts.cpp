#include "poses/polts.hpp"

#include "poses/errors.hpp"
#include "poses/verify.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"

namespace est = poses::est;
namespace polts = poses::polts;
namespace world = poses::world;
namespace verify = poses::verify;

namespace {

world::Detection make_det(int id, double x, double y, double payoff) {
  world::Detection d;
  d.id = id;
  d.z = world::Vec2(x, y);
  d.payoff = payoff;
  return d;
}

// Parallel straight-line convoy: `offsets` lateral lanes, all eastbound at
// 10 units/step, noiseless and clutter-free.
world::ScenarioConfig convoy(const std::vector<double>& offsets) {
  world::ScenarioConfig c;
  c.n_steps = 20;
  for (double off : offsets) {
    world::VehicleSpec v;
    v.position = world::Vec2(0, off);
    v.velocity = world::Vec2(10, 0);
    c.vehicles.push_back(v);
  }
  return c;
}

est::FilterState init_from(const world::ScenarioConfig& c) {
  est::FilterState st;
  st.s = world::initial_state_vector(c);
  st.P = world::initial_covariance(c);
  st.step = 0;
  return st;
}

oracle::Model oracle_model(const est::ModelParams& p) {
  return {p.sigma_q, p.sigma_r, p.dt, p.gate, p.trace_halt};
}

std::vector<std::vector<oracle::Det>> oracle_detections(const world::Scenario& s) {
  std::vector<std::vector<oracle::Det>> out(s.detections.size());
  for (std::size_t k = 0; k < s.detections.size(); ++k) {
    for (const auto& d : s.detections[k]) {
      out[k].push_back({d.id, d.z.x(), d.z.y(), d.payoff});
    }
  }
  return out;
}

oracle::Gaussian oracle_init(const est::FilterState& st) {
  oracle::Gaussian g;
  for (int i = 0; i < 4; ++i) {
    g.s[static_cast<std::size_t>(i)] = st.s(i);
    for (int j = 0; j < 4; ++j) {
      g.P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = st.P(i, j);
    }
  }
  return g;
}

const polts::Transition& find_by_choice(const std::vector<polts::Transition>& ts,
                                        std::optional<int> id) {
  for (const auto& t : ts) {
    if (!id && !t.chosen) return t;
    if (id && t.chosen && t.chosen->id == *id) return t;
  }
  throw std::logic_error("transition not found");
}

}  // namespace

TEST(BuildTransitions, CombinedPayoffSumsStrictlyNearerDetections) {
  // sigma_q = 0 and a position-only prior keep S isotropic (S = 4·I), so the
  // nearness order is the plain Euclidean order and the gate radius is
  // gate·sqrt(4) = 4.
  est::ModelParams params = est::ModelParams::from_sigmas(0.0, 1.0);
  polts::PathNode node;
  node.state.s << 0, 0, 0, 0;
  node.state.P = est::Vec4(3, 3, 0, 0).asDiagonal();
  node.depth = 0;

  std::vector<world::Detection> z = {
      make_det(0, 0.5, 0, 2.0),   // nearest, payoff 2.0
      make_det(1, 1.0, 0, 3.0),   // second, payoff 3.0
      make_det(2, 1.5, 0, 1.5),   // third, payoff 1.5
      make_det(3, 10.0, 0, 99.0)  // outside the gate
  };
  std::vector<polts::Transition> ts = polts::build_transitions(node, z, params);
  ASSERT_EQ(ts.size(), 4u);  // three gated + no-observation

  EXPECT_DOUBLE_EQ(find_by_choice(ts, 2).combined_payoff, 5.0);  // 2.0 + 3.0
  EXPECT_DOUBLE_EQ(find_by_choice(ts, 0).combined_payoff, 0.0);
  EXPECT_DOUBLE_EQ(find_by_choice(ts, 1).combined_payoff, 2.0);
  EXPECT_DOUBLE_EQ(find_by_choice(ts, std::nullopt).combined_payoff, 6.5);

  EXPECT_DOUBLE_EQ(find_by_choice(ts, 2).payoff, 1.5);
  EXPECT_EQ(find_by_choice(ts, 0).rank, 0);
  EXPECT_EQ(find_by_choice(ts, 1).rank, 1);
  EXPECT_EQ(find_by_choice(ts, 2).rank, 2);
  EXPECT_EQ(find_by_choice(ts, std::nullopt).rank, 3);
  EXPECT_FALSE(ts.back().chosen.has_value());  // no-observation branch last

  // Child states: chosen branches are measurement updates (position gain
  // K = 3/4 here), the no-observation branch is the bare prediction.
  EXPECT_DOUBLE_EQ(find_by_choice(ts, 0).child_state.s(0), 0.375);
  EXPECT_DOUBLE_EQ(find_by_choice(ts, std::nullopt).child_state.s(0), 0.0);
  for (const auto& t : ts) EXPECT_EQ(t.child_state.step, 1);
}

TEST(BuildTransitions, RankOrderingImpliesNonDecreasingCombinedPayoff) {
  est::ModelParams params;  // defaults
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> pos(-8.0, 8.0);
  std::uniform_real_distribution<double> pay(0.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    polts::PathNode node;
    node.state.s << pos(rng) * 10, pos(rng) * 10, pos(rng), pos(rng);
    node.state.P = est::Vec4(40, 40, 16, 16).asDiagonal();
    std::vector<world::Detection> z;
    const int m = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < m; ++i) {
      z.push_back(make_det(i, node.state.s(0) + node.state.s(2) + pos(rng),
                           node.state.s(1) + node.state.s(3) + pos(rng), pay(rng)));
    }
    std::vector<polts::Transition> ts = polts::build_transitions(node, z, params);
    ASSERT_GE(ts.size(), 1u);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(ts[i].rank, static_cast<int>(i));
    for (std::size_t i = 1; i < ts.size(); ++i) {
      EXPECT_LE(ts[i - 1].combined_payoff, ts[i].combined_payoff);
    }
    EXPECT_DOUBLE_EQ(ts.front().combined_payoff, 0.0);
    EXPECT_FALSE(ts.back().chosen.has_value());

    // The no-observation branch pays for the whole gated set.
    double gated_sum = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) gated_sum += ts[i].payoff;
    EXPECT_NEAR(ts.back().combined_payoff, gated_sum, 1e-12);
  }
}

TEST(BuildTransitions, HaltedNodeOnlyCoasts) {
  est::ModelParams params;
  polts::PathNode node;
  node.state.s << 0, 0, 0, 0;
  node.state.P = est::Vec4(1500, 1500, 100, 100).asDiagonal();  // τ = 3000 > 2000
  std::vector<world::Detection> z = {make_det(0, 0, 0, 1.0)};
  std::vector<polts::Transition> ts = polts::build_transitions(node, z, params);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_FALSE(ts[0].chosen.has_value());
  EXPECT_DOUBLE_EQ(ts[0].combined_payoff, 0.0);
}

TEST(Unfold, TwoGatedDetectionsOverTwoStepsGiveNinePaths) {
  world::ScenarioConfig c = convoy({0.0, 5.0});
  world::Scenario s = world::generate(c);
  est::ModelParams params;
  std::vector<polts::Path> paths = polts::unfold(s, params, init_from(c), 2, 3);
  EXPECT_EQ(paths.size(), 9u);
}

TEST(Unfold, ThreeGatedDetectionsOneStepGiveFourPaths) {
  world::ScenarioConfig c = convoy({0.0, 6.0, 12.0});
  world::Scenario s = world::generate(c);
  est::ModelParams params;
  std::vector<polts::Path> paths = polts::unfold(s, params, init_from(c), 2, 2);
  EXPECT_EQ(paths.size(), 4u);
}

TEST(Unfold, NoGatedDetectionsGiveTheLonePath) {
  world::ScenarioConfig c;  // zero vehicles, zero clutter
  c.n_steps = 8;
  c.init_state = world::Vec4(0, 0, 0, 0);
  world::Scenario s = world::generate(c);
  est::ModelParams params;
  std::vector<polts::Path> paths = polts::unfold(s, params, init_from(c), 2, 3);
  ASSERT_EQ(paths.size(), 1u);
  for (double phi : paths[0].step_phi) EXPECT_DOUBLE_EQ(phi, 0.0);
  EXPECT_EQ(paths[0].nodes.size(), 8u);
}

TEST(Unfold, ContainsTheUnattackedRunWithZeroPayoff) {
  world::ScenarioConfig c = convoy({0.0, 5.0});
  world::Scenario s = world::generate(c);
  est::ModelParams params;
  est::FilterState init = init_from(c);
  polts::Path original = polts::run_original(s, params, init);
  EXPECT_DOUBLE_EQ(original.phi(), 0.0);

  std::vector<polts::Path> paths = polts::unfold(s, params, init, 2, 4);
  std::size_t idx = polts::original_path_index(paths, original);
  ASSERT_LT(idx, paths.size());
  EXPECT_DOUBLE_EQ(paths[idx].phi(), 0.0);
  EXPECT_EQ(paths[idx].observation_ids(), original.observation_ids());

  // Every unfolding keeps a zero-cost row: the all-nearest path.
  bool has_zero = false;
  for (const auto& p : paths) has_zero = has_zero || p.phi() == 0.0;
  EXPECT_TRUE(has_zero);
}

TEST(Unfold, WindowLabelsNameStepAndDetection) {
  world::ScenarioConfig c = convoy({0.0, 5.0});
  world::Scenario s = world::generate(c);
  est::ModelParams params;
  est::FilterState init = init_from(c);
  std::vector<polts::Path> paths = polts::unfold(s, params, init, 2, 3);
  polts::Path original = polts::run_original(s, params, init);
  std::size_t idx = polts::original_path_index(paths, original);
  EXPECT_EQ(paths[idx].window_label(2, 3), "2-0,3-0");

  bool saw_no_obs = false;
  for (const auto& p : paths) {
    saw_no_obs = saw_no_obs || p.window_label(2, 3) == "2-None,3-None";
  }
  EXPECT_TRUE(saw_no_obs);
}

TEST(Unfold, DeterministicAndSortedByObservationIds) {
  world::ScenarioConfig c = convoy({0.0, 4.0, 8.0});
  c.misdetect_prob = 0.1;
  c.false_alarm_rate = 1.0;
  c.detection_noise_sigma = 1.0;
  c.seed = 3;
  world::Scenario s = world::generate(c);
  est::ModelParams params;
  est::FilterState init = init_from(c);

  std::vector<polts::Path> a = polts::unfold(s, params, init, 5, 8);
  std::vector<polts::Path> b = polts::unfold(s, params, init, 5, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].observation_ids(), b[i].observation_ids());
    ASSERT_EQ(a[i].nodes.size(), b[i].nodes.size());
    for (std::size_t k = 0; k < a[i].nodes.size(); ++k) {
      ASSERT_EQ(a[i].nodes[k].s, b[i].nodes[k].s);
      ASSERT_EQ(a[i].nodes[k].P, b[i].nodes[k].P);
    }
  }
  std::vector<std::vector<int>> keys;
  for (const auto& p : a) keys.push_back(p.observation_ids());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST(Unfold, CountMatchesIndependentRecursiveEnumeration) {
  std::mt19937 seeds(2024);
  for (int trial = 0; trial < 20; ++trial) {
    world::ScenarioConfig c = convoy({0.0, 7.0});
    c.misdetect_prob = 0.15;
    c.false_alarm_rate = 1.5;
    c.detection_noise_sigma = 2.0;
    c.scene_min = world::Vec2(-50, -80);
    c.scene_max = world::Vec2(250, 80);
    c.seed = seeds();
    world::Scenario s = world::generate(c);
    est::ModelParams params;
    est::FilterState init = init_from(c);
    const int l = 4 + static_cast<int>(seeds() % 9);   // [4, 12]
    const int u = l + 1 + static_cast<int>(seeds() % 4);  // width in [1, 4]

    std::vector<polts::Path> paths = polts::unfold(s, params, init, l, u);
    long long expected =
        oracle::count_paths(oracle_init(init), oracle_detections(s), l, u, oracle_model(params));
    ASSERT_EQ(static_cast<long long>(paths.size()), expected)
        << "seed " << c.seed << " window " << l << ":" << u;
  }
}

TEST(Unfold, ThrowsWhenPathCountWouldExplode) {
  world::ScenarioConfig c = convoy({0.0, 4.0, 8.0, 12.0});
  world::Scenario s = world::generate(c);
  est::ModelParams params;
  EXPECT_THROW(polts::unfold(s, params, init_from(c), 1, 3, 100), poses::ExplosionError);
}

TEST(Knapsack, SingleItemMustBeSelected) {
  polts::KnapsackInstance inst;
  inst.items = {{5.0, 3.0}};
  inst.capacity = 2.0;
  auto [model, problem] = polts::knapsack_lts(inst);
  ASSERT_EQ(model.steps.size(), 1u);
  EXPECT_DOUBLE_EQ(model.steps[0][0].dist, 0.0);
  EXPECT_DOUBLE_EQ(model.steps[0][1].dist, 3.0);
  EXPECT_DOUBLE_EQ(model.steps[0][1].combined_payoff, 5.0);
  EXPECT_EQ(problem.kind, verify::PropertyKind::Robustness);
  EXPECT_DOUBLE_EQ(problem.epsilon, 2.0);

  std::vector<polts::Path> paths = polts::knapsack_paths(model);
  ASSERT_EQ(paths.size(), 2u);
  verify::VerificationResult r = verify::solve(paths, problem);
  ASSERT_TRUE(r.sol_opt.has_value());
  EXPECT_DOUBLE_EQ(*r.sol_opt, 5.0);
  ASSERT_TRUE(r.theta_star.has_value());
  EXPECT_DOUBLE_EQ(*r.theta_star, 0.0);
}

TEST(Knapsack, UnreachableCapacityIsVacuous) {
  polts::KnapsackInstance inst;
  inst.items = {{5.0, 3.0}, {2.0, 1.0}};
  inst.capacity = 4.0;  // equals Σ g_i; strict > is unreachable
  auto [model, problem] = polts::knapsack_lts(inst);
  verify::VerificationResult r = verify::solve(polts::knapsack_paths(model), problem);
  EXPECT_FALSE(r.sol_opt.has_value());
  EXPECT_FALSE(r.theta_star.has_value());
  EXPECT_EQ(r.verdict, verify::Verdict::Vacuous);
  EXPECT_TRUE(r.p_plus.empty());
}

TEST(Knapsack, ThreeItemExampleMatchesSubsetSearch) {
  polts::KnapsackInstance inst;
  inst.items = {{6.0, 4.0}, {5.0, 3.0}, {3.0, 2.0}};
  inst.capacity = 4.0;
  auto [model, problem] = polts::knapsack_lts(inst);
  verify::VerificationResult r = verify::solve(polts::knapsack_paths(model), problem);
  ASSERT_TRUE(r.sol_opt.has_value());
  EXPECT_DOUBLE_EQ(*r.sol_opt, 8.0);  // items 2 and 3: weights 3+2 > 4, value 5+3
  ASSERT_TRUE(r.theta_star.has_value());
  EXPECT_DOUBLE_EQ(*r.theta_star, 6.0);  // item 1 alone conforms with value 6

  oracle::SubsetOptima brute = oracle::subset_search({6, 5, 3}, {4, 3, 2}, 4.0);
  EXPECT_EQ(*r.sol_opt, *brute.sol_opt);
  EXPECT_EQ(*r.theta_star, *brute.theta_star);
}

TEST(Knapsack, RandomInstancesMatchSubsetSearch) {
  std::mt19937 rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    polts::KnapsackInstance inst;
    std::vector<double> values, weights;
    double sum_g = 0.0;
    for (int i = 0; i < n; ++i) {
      double v = 1.0 + static_cast<double>(rng() % 20);
      double g = 1.0 + static_cast<double>(rng() % 15);
      inst.items.push_back({v, g});
      values.push_back(v);
      weights.push_back(g);
      sum_g += g;
    }
    inst.capacity = static_cast<double>(rng() % static_cast<unsigned>(sum_g + 3));
    auto [model, problem] = polts::knapsack_lts(inst);
    verify::VerificationResult r = verify::solve(polts::knapsack_paths(model), problem);
    oracle::SubsetOptima brute = oracle::subset_search(values, weights, inst.capacity);
    ASSERT_EQ(r.sol_opt.has_value(), brute.sol_opt.has_value());
    if (brute.sol_opt) {
      ASSERT_DOUBLE_EQ(*r.sol_opt, *brute.sol_opt);
    }
    ASSERT_EQ(r.theta_star.has_value(), brute.theta_star.has_value());
    if (brute.theta_star) {
      ASSERT_DOUBLE_EQ(*r.theta_star, *brute.theta_star);
    }
  }
}

TEST(Knapsack, RejectsInvalidInstancesAndExplosions) {
  polts::KnapsackInstance bad;
  bad.items = {{0.0, 3.0}};
  bad.capacity = 1.0;
  EXPECT_THROW(bad.validate(), poses::ConfigError);
  EXPECT_THROW(polts::knapsack_lts(bad), poses::ConfigError);

  polts::KnapsackInstance big;
  for (int i = 0; i < 20; ++i) big.items.push_back({1.0, 1.0});
  big.capacity = 5.0;
  auto [model, problem] = polts::knapsack_lts(big);
  (void)problem;
  EXPECT_THROW(polts::knapsack_paths(model, 1000), poses::ExplosionError);
}

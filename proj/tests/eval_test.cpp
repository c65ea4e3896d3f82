#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "nxplay/error.hpp"
#include "nxplay/evaluation.hpp"
#include "nxplay/training.hpp"
#include "support.hpp"

namespace nxplay {
namespace {

Population scripted_pop(int n, std::vector<ScriptedName> names, std::uint64_t seed) {
  Population pop;
  pop.num_agents = n;
  pop.seed = seed;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Checkpoint c;
    c.id = "m" + std::to_string(i);
    c.params = scripted_policy(names[i]);
    pop.checkpoints.push_back(c);
  }
  return pop;
}

PolicyParams random_linear(int n, std::uint64_t seed) {
  Rng rng(seed);
  PolicyParams p = PolicyParams::zeros(feature_length(n));
  for (double& w : p.weights) w = rng.uniform() - 0.5;
  return p;
}

// Both seats run GreedyCook through the engine directly.
double greedy_pair_oracle(const Layout& l, int horizon) {
  EngineConfig cfg;
  cfg.horizon = horizon;
  GameState s = reset(l);
  std::vector<Action> acts(static_cast<std::size_t>(l.num_agents()));
  double total = 0;
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < l.num_agents(); ++i) acts[static_cast<std::size_t>(i)] = greedy_cook_action(s, i, l);
    StepOutcome o = step(s, acts, l, cfg);
    total += o.shared_reward;
    s = std::move(o.next);
  }
  return total;
}

TEST(EvaluateCell, GreedyCookPairOnOpenKitchen) {
  const Layout l = load_layout_file(testing::layout_path("open7"));
  const double oracle = greedy_pair_oracle(l, 400);
  EXPECT_EQ(oracle, 180.0);
  const Population cooks = scripted_pop(2, {ScriptedName::GreedyCook}, 1);
  const EvalRow row = evaluate_cell({scripted_policy(ScriptedName::GreedyCook), std::nullopt}, cooks, l, 2, 1, 5, 3);
  EXPECT_EQ(row.mean_reward, 180.0);
  EXPECT_EQ(row.std_reward, 0.0);
  EXPECT_EQ(row.episodes, 5);
  EXPECT_EQ(row.layout_name, "open7");
}

// Kitchen text with the given seat removed and later seats renumbered down.
std::string without_seat(std::string text, int seat) {
  for (char& c : text) {
    if (c < '1' || c > '9') continue;
    const int k = c - '1';
    if (k == seat) c = ' ';
    if (k > seat) --c;
  }
  return text;
}

// GreedyCook everywhere except `idle`, which stays put.
double idle_seat_oracle(const Layout& l, int idle, int horizon) {
  GameState s = reset(l);
  std::vector<Action> acts(static_cast<std::size_t>(l.num_agents()));
  double total = 0;
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < l.num_agents(); ++i) {
      acts[static_cast<std::size_t>(i)] = i == idle ? Action::Stay : greedy_cook_action(s, i, l);
    }
    StepOutcome o = step(s, acts, l, {});
    total += o.shared_reward;
    s = std::move(o.next);
  }
  return total;
}

TEST(EvaluateCell, StationaryEgoAgainstRolloutOracle) {
  const std::string text =
      "XXPXXXX\n"
      "O     X\n"
      "X 1   D\n"
      "X     X\n"
      "X   2 X\n"
      "X3    S\n"
      "XXXXXXX\n";
  const Layout l = parse_layout(text, "three");
  const Population cooks = scripted_pop(3, {ScriptedName::GreedyCook}, 9);
  std::vector<double> oracle(3);
  for (int seat = 0; seat < 3; ++seat) oracle[static_cast<std::size_t>(seat)] = idle_seat_oracle(l, seat, 400);
  // Seats 1 and 2 are non-blocking: the cooks score exactly what they score
  // without the ego. An idle seat 0 takes the dish job in the cooks' seat-order
  // split and never does it.
  for (int seat : {1, 2}) {
    EXPECT_EQ(oracle[static_cast<std::size_t>(seat)], greedy_pair_oracle(parse_layout(without_seat(text, seat)), 400));
  }
  EXPECT_EQ(oracle[0], 0.0);

  const int episodes = 12;
  const std::uint64_t seed = 21;
  double expected = 0;
  for (int e = 0; e < episodes; ++e) {
    Rng rng(derive_seed(seed, {stream::kEval, 2, static_cast<std::uint64_t>(e)}));
    const SeatAssignment s = compose_episode(3, 2, &cooks, rng);
    for (int seat = 0; seat < 3; ++seat) {
      if (s.seats[static_cast<std::size_t>(seat)].ego) expected += oracle[static_cast<std::size_t>(seat)];
    }
  }
  expected /= episodes;
  const EvalRow row =
      evaluate_cell({scripted_policy(ScriptedName::Stationary), std::nullopt}, cooks, l, 3, 2, episodes, seed);
  EXPECT_EQ(row.mean_reward, expected);
  EXPECT_GT(row.std_reward, 0.0);
}

TEST(EvaluateCell, SelfPlayCellOfDeterministicEgoHasNoSpread) {
  const Layout l = load_layout_file(testing::layout_path("open7"));
  const Population unused = scripted_pop(2, {ScriptedName::Random}, 1);
  const EvalRow row = evaluate_cell({random_linear(2, 4), std::nullopt}, unused, l, 2, 0, 6, 2, {200});
  EXPECT_EQ(row.std_reward, 0.0);
  EXPECT_EQ(row.x, 0);
  EXPECT_EQ(row.ratio, 0.0);
}

TEST(EvaluateCell, DoesNotTouchTheEgo) {
  const Layout l = load_layout_file(testing::layout_path("open7"));
  const PolicyParams p = random_linear(2, 5);
  const EgoPolicy ego{p, 1};
  const Population pop = scripted_pop(2, {ScriptedName::Random}, 2);
  evaluate_cell(ego, pop, l, 2, 1, 3, 1, {100});
  EXPECT_EQ(ego.params, p);
}

TEST(EvaluateCell, Errors) {
  const Layout l = load_layout_file(testing::layout_path("open7"));
  const Population pop = scripted_pop(2, {ScriptedName::Random}, 7);
  auto code = [&](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code([&] { evaluate_cell({random_linear(2, 1), 7}, pop, l, 2, 1, 2, 1); }), ErrorCode::SeedCollision);
  EXPECT_EQ(code([&] { evaluate_cell({random_linear(2, 1), 8}, pop, l, 2, 1, 0, 1); }), ErrorCode::EvalEpisodesZero);
  EXPECT_EQ(code([&] { evaluate_cell({random_linear(2, 1), 8}, pop, l, 2, 2, 1, 1); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code([&] { evaluate_cell({random_linear(3, 1), 8}, pop, l, 3, 1, 1, 1); }), ErrorCode::InvalidConfig);
}

TEST(RatioSweep, RatiosAndRowOrder) {
  const Layout l = load_layout_file(testing::layout_path("five_open"));
  const Population pop = scripted_pop(5, {ScriptedName::Stationary, ScriptedName::Random}, 3);
  EvalConfig cfg;
  cfg.layout_name = l.name();
  cfg.n = 5;
  cfg.x_values = {4, 1, 3};
  cfg.episodes_per_cell = 2;
  const EvalReport r = ratio_sweep(cfg, {random_linear(5, 2), std::nullopt}, pop, l, {50});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].x, 1);
  EXPECT_EQ(r.rows[2].x, 4);
  const std::string csv = emit_report(r, ReportFormat::Csv);
  EXPECT_NE(csv.find(",5,1,0.2000,"), std::string::npos);
  EXPECT_NE(csv.find(",5,3,0.6000,"), std::string::npos);
  EXPECT_NE(csv.find(",5,4,0.8000,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "layout,n,x,ratio,mean_reward,std_reward,episodes");
}

TEST(RatioSweep, TwoSeatsFullRange) {
  const Layout l = load_layout_file(testing::layout_path("open7"));
  const Population pop = scripted_pop(2, {ScriptedName::GreedyCook}, 3);
  EvalConfig cfg;
  cfg.n = 2;
  cfg.x_values = {0, 1};
  cfg.episodes_per_cell = 2;
  const EvalReport r = ratio_sweep(cfg, {random_linear(2, 2), std::nullopt}, pop, l, {40});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[1].ratio, 0.5);
  cfg.x_values.clear();
  EXPECT_TRUE(ratio_sweep(cfg, {random_linear(2, 2), std::nullopt}, pop, l).rows.empty());
  EXPECT_EQ(emit_report({}, ReportFormat::Csv), "layout,n,x,ratio,mean_reward,std_reward,episodes\n");
}

TEST(RatioSweep, RowsIndependentOfThreadsAndNeighbours) {
  const Layout l = load_layout_file(testing::layout_path("five_open"));
  const Population pop = scripted_pop(5, {ScriptedName::GreedyCook, ScriptedName::Random}, 3);
  EvalConfig cfg;
  cfg.n = 5;
  cfg.x_values = {1, 2, 4};
  cfg.episodes_per_cell = 6;
  cfg.seed = 17;
  const EgoPolicy ego{random_linear(5, 9), std::nullopt};
  const EvalReport one = ratio_sweep(cfg, ego, pop, l, {80, 1});
  const EvalReport four = ratio_sweep(cfg, ego, pop, l, {80, 4});
  EXPECT_EQ(one, four);
  EXPECT_EQ(emit_report(one, ReportFormat::Csv), emit_report(four, ReportFormat::Csv));
  cfg.x_values = {2};
  EXPECT_EQ(ratio_sweep(cfg, ego, pop, l, {80, 1}).rows[0], one.rows[1]);
}

TEST(Report, TextRoundTrip) {
  EvalReport r;
  r.rows.push_back({"open7", 2, 1, 0.5, 0.1 + 0.2, 1.0 / 3.0, 100});
  r.rows.push_back({"five_open", 5, 3, 0.6, 40.0, 0.0, 7});
  EXPECT_EQ(load_report(emit_report(r, ReportFormat::Text)), r);
  EXPECT_THROW(load_report("nonsense\n"), Error);
  EXPECT_THROW(load_report(emit_report(r, ReportFormat::Csv)), Error);
}

}  // namespace
}  // namespace nxplay

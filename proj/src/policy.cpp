#include "nxplay/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>
#include <tuple>

#include "nxplay/error.hpp"
#include "nxplay/text.hpp"

namespace nxplay {

std::string_view to_string(ScriptedName name) {
  switch (name) {
    case ScriptedName::Random: return "Random";
    case ScriptedName::Stationary: return "Stationary";
    case ScriptedName::GreedyCook: return "GreedyCook";
  }
  return "?";
}

ScriptedName scripted_name_from_string(std::string_view name) {
  if (name == "Random") return ScriptedName::Random;
  if (name == "Stationary") return ScriptedName::Stationary;
  if (name == "GreedyCook") return ScriptedName::GreedyCook;
  throw Error(ErrorCode::UnknownName, "no scripted policy named '" + std::string(name) + "'");
}

PolicyParams PolicyParams::zeros(std::size_t feature_len) {
  PolicyParams p;
  p.kind = PolicyKind::Linear;
  p.feature_len = feature_len;
  p.weights.assign(feature_len * kNumActions, 0.0);
  return p;
}

PolicyParams scripted_policy(ScriptedName name) {
  PolicyParams p;
  p.kind = PolicyKind::Scripted;
  p.script = name;
  return p;
}

PolicyParams scripted_policy(std::string_view name) { return scripted_policy(scripted_name_from_string(name)); }

namespace {

ActionDistribution one_hot(Action a) {
  ActionDistribution d{};
  d[static_cast<std::size_t>(a)] = 1.0;
  return d;
}

void check_linear_dims(const PolicyParams& params, std::size_t obs_len) {
  if (params.weights.size() != params.feature_len * kNumActions) {
    throw Error(ErrorCode::DimensionMismatch, "weight table does not have feature_len x 6 entries");
  }
  if (obs_len != params.feature_len) {
    throw Error(ErrorCode::DimensionMismatch, "observation length " + std::to_string(obs_len) +
                                                  " does not match policy feature length " +
                                                  std::to_string(params.feature_len));
  }
}

ActionDistribution linear_softmax(const PolicyParams& params, std::span<const double> obs) {
  ActionDistribution logits{};
  const double* w = params.weights.data();
  for (std::size_t f = 0; f < obs.size(); ++f, w += kNumActions) {
    const double x = obs[f];
    if (x == 0.0) continue;
    for (int a = 0; a < kNumActions; ++a) logits[static_cast<std::size_t>(a)] += x * w[a];
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - top);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

// ---- GreedyCook -----------------------------------------------------------

constexpr std::array<Orientation, 4> kDirections = {Orientation::North, Orientation::South, Orientation::East,
                                                    Orientation::West};

Orientation opposite(Orientation o) {
  switch (o) {
    case Orientation::North: return Orientation::South;
    case Orientation::South: return Orientation::North;
    case Orientation::East: return Orientation::West;
    case Orientation::West: return Orientation::East;
  }
  return o;
}

// Connected Floor regions, ignoring agents.
std::vector<int> floor_regions(const Layout& layout) {
  std::vector<int> region(layout.grid().size(), -1);
  int next = 0;
  for (int y = 0; y < layout.height(); ++y) {
    for (int x = 0; x < layout.width(); ++x) {
      const Cell seed{x, y};
      if (!layout.is_floor(seed) || region[static_cast<std::size_t>(layout.index(seed))] >= 0) continue;
      std::vector<Cell> stack{seed};
      region[static_cast<std::size_t>(layout.index(seed))] = next;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (Orientation d : kDirections) {
          const Cell n = facing_cell(c, d);
          if (!layout.is_floor(n) || region[static_cast<std::size_t>(layout.index(n))] >= 0) continue;
          region[static_cast<std::size_t>(layout.index(n))] = next;
          stack.push_back(n);
        }
      }
      ++next;
    }
  }
  return region;
}

struct Reach {
  const Layout& layout;
  std::vector<int> region;

  bool touches(Cell tile, Cell from) const {
    const int r = region[static_cast<std::size_t>(layout.index(from))];
    for (Orientation d : kDirections) {
      const Cell n = facing_cell(tile, d);
      if (layout.in_bounds(n) && layout.is_floor(n) && region[static_cast<std::size_t>(layout.index(n))] == r) return true;
    }
    return false;
  }
  std::vector<Cell> filter(const std::vector<Cell>& tiles, Cell from) const {
    std::vector<Cell> out;
    for (Cell t : tiles) {
      if (touches(t, from)) out.push_back(t);
    }
    return out;
  }
};

// The reachable goal tiles for the seat's current subgoal, or none.
std::vector<Cell> greedy_cook_targets(const GameState& state, int seat, const Layout& layout) {
  const Reach reach{layout, floor_regions(layout)};
  const auto& pots = layout.pot_cells();
  auto pots_where = [&](auto&& pred) {
    std::vector<Cell> out;
    for (std::size_t k = 0; k < pots.size(); ++k) {
      if (pred(state.pots[k])) out.push_back(pots[k]);
    }
    return out;
  };
  auto counters_holding = [&](HeldObject what) {
    std::vector<Cell> out;
    for (Cell c : layout.cells_of(Tile::Counter)) {
      if (state.counter_at(layout, c) == what) out.push_back(c);
    }
    return out;
  };
  auto onion_sources = [&] {
    auto out = layout.cells_of(Tile::OnionDispenser);
    const auto stored = counters_holding(HeldObject::Onion);
    out.insert(out.end(), stored.begin(), stored.end());
    return out;
  };
  auto pos_of = [&](std::size_t i) { return state.agents[i].pos; };

  // Free onion slots per pot after onions carried by lower seats are spoken for.
  // Each carrier claims its Manhattan-nearest reachable open pot, ties to the first pot.
  std::vector<int> room(pots.size(), 0);
  for (std::size_t k = 0; k < pots.size(); ++k) {
    if (state.pots[k].phase == PotPhase::Idle) room[k] = kOnionsPerSoup - state.pots[k].onions;
  }
  auto claim = [&](std::vector<int>& free, std::size_t i) {
    int best = -1;
    int best_d = 0;
    for (std::size_t k = 0; k < pots.size(); ++k) {
      if (free[k] <= 0 || !reach.touches(pots[k], pos_of(i))) continue;
      const int d = std::abs(pots[k].x - pos_of(i).x) + std::abs(pots[k].y - pos_of(i).y);
      if (best < 0 || d < best_d) best = static_cast<int>(k), best_d = d;
    }
    if (best >= 0) --free[static_cast<std::size_t>(best)];
  };
  std::vector<int> unclaimed = room;
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    if (state.agents[i].held != HeldObject::Onion) continue;
    claim(unclaimed, i);
    if (static_cast<int>(i) < seat) claim(room, i);
  }

  const Cell me = pos_of(static_cast<std::size_t>(seat));
  auto first_reachable = [&](std::initializer_list<std::vector<Cell>> groups) {
    for (const auto& g : groups) {
      auto r = reach.filter(g, me);
      if (!r.empty()) return r;
    }
    return std::vector<Cell>{};
  };

  switch (state.agents[static_cast<std::size_t>(seat)].held) {
    case HeldObject::Soup:
      return first_reachable({layout.cells_of(Tile::ServingStation), counters_holding(HeldObject::Nothing)});
    case HeldObject::Dish:
      return first_reachable({pots_where([](const PotState& p) { return p.phase == PotPhase::Ready; }),
                              pots_where([](const PotState& p) { return p.phase == PotPhase::Cooking; }),
                              counters_holding(HeldObject::Nothing)});
    case HeldObject::Onion: {
      std::vector<Cell> open;
      for (std::size_t k = 0; k < pots.size(); ++k) {
        if (room[k] > 0) open.push_back(pots[k]);
      }
      return first_reachable({open, counters_holding(HeldObject::Nothing)});
    }
    case HeldObject::Nothing: {
      // Empty-handed seats split the outstanding dish and onion demand in seat order.
      long dish_demand = std::count_if(state.pots.begin(), state.pots.end(),
                                       [](const PotState& p) { return p.phase != PotPhase::Idle; }) -
                         std::count_if(state.agents.begin(), state.agents.end(),
                                       [](const AgentState& a) { return a.held == HeldObject::Dish; });
      long onion_demand = std::accumulate(unclaimed.begin(), unclaimed.end(), 0L);
      const auto dishes = layout.cells_of(Tile::DishDispenser);
      const auto onions = onion_sources();
      for (std::size_t i = 0; i < state.agents.size(); ++i) {
        if (static_cast<int>(i) != seat && state.agents[i].held != HeldObject::Nothing) continue;
        const bool dish = dish_demand > 0 && !reach.filter(dishes, pos_of(i)).empty();
        const bool onion = !dish && onion_demand > 0 && !reach.filter(onions, pos_of(i)).empty();
        if (static_cast<int>(i) == seat) {
          if (dish) return reach.filter(dishes, me);
          if (onion) return reach.filter(onions, me);
          return {};
        }
        if (dish) --dish_demand;
        if (onion) --onion_demand;
      }
    }
  }
  return {};
}

struct Plan {
  bool found = false;
  Action action = Action::Stay;
};

Plan plan_toward(const GameState& state, int seat, const Layout& layout, const std::vector<Cell>& targets,
                 bool avoid_agents, const std::vector<Cell>& lower_intents = {}) {
  const AgentState& me = state.agents[static_cast<std::size_t>(seat)];
  const std::size_t cells = layout.grid().size();
  std::vector<int> dist(cells, -1);
  std::vector<Orientation> first(cells, Orientation::North);
  std::vector<char> blocked(cells, 0);
  if (avoid_agents) {
    // Lower seats are expected where they intend to go.
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
      if (static_cast<int>(i) == seat) continue;
      const Cell c = i < lower_intents.size() ? lower_intents[i] : state.agents[i].pos;
      blocked[static_cast<std::size_t>(layout.index(c))] = 1;
    }
  }

  std::queue<Cell> frontier;
  dist[static_cast<std::size_t>(layout.index(me.pos))] = 0;
  frontier.push(me.pos);
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    const auto ci = static_cast<std::size_t>(layout.index(c));
    for (Orientation d : kDirections) {
      const Cell n = facing_cell(c, d);
      if (!layout.is_floor(n)) continue;
      const auto ni = static_cast<std::size_t>(layout.index(n));
      if (blocked[ni] || dist[ni] >= 0) continue;
      dist[ni] = dist[ci] + 1;
      first[ni] = dist[ci] == 0 ? d : first[ci];
      frontier.push(n);
    }
  }

  // Key: (distance, target cell, standing cell); cells compare by (y, x).
  using Key = std::tuple<int, Cell, Cell>;
  bool have = false;
  Key best{};
  Orientation face = Orientation::North;
  for (Cell t : targets) {
    for (Orientation d : kDirections) {
      const Cell stand = facing_cell(t, d);
      if (!layout.is_floor(stand)) continue;
      const int dd = dist[static_cast<std::size_t>(layout.index(stand))];
      if (dd < 0) continue;
      Key k{dd, t, stand};
      if (!have || k < best) {
        have = true;
        best = k;
        face = opposite(d);
      }
    }
  }
  if (!have) return {};
  const auto& [d, target, stand] = best;
  if (d == 0) return {true, me.orientation == face ? Action::Interact : move_toward(face)};
  return {true, move_toward(first[static_cast<std::size_t>(layout.index(stand))])};
}

}  // namespace

namespace {

int occupant_of(const GameState& state, Cell c, int except) {
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    if (static_cast<int>(i) != except && state.agents[i].pos == c) return static_cast<int>(i);
  }
  return -1;
}

Action step_aside(const GameState& state, int seat, const Layout& layout, Cell avoid) {
  const Cell pos = state.agents[static_cast<std::size_t>(seat)].pos;
  for (Orientation d : kDirections) {
    const Cell side = facing_cell(pos, d);
    if (side != avoid && layout.is_floor(side) && occupant_of(state, side, seat) < 0) return move_toward(d);
  }
  return Action::Stay;
}

// Where a seat ends up if its move goes through.
Cell intended_cell(const GameState& state, int seat, const Layout& layout, Action a) {
  const Cell pos = state.agents[static_cast<std::size_t>(seat)].pos;
  if (!is_move(a)) return pos;
  const Cell next = facing_cell(pos, direction_of(a));
  return layout.is_floor(next) ? next : pos;
}

// GreedyCook decision for `seat`, given the decisions of every lower seat
// (as if they were GreedyCooks too). Higher seats give way on conflicts.
Action greedy_cook_decision(const GameState& state, int seat, const Layout& layout,
                            const std::vector<Cell>& lower_intents) {
  const std::vector<Cell> targets = greedy_cook_targets(state, seat, layout);
  const Cell pos = state.agents[static_cast<std::size_t>(seat)].pos;
  if (targets.empty()) {
    // An idle cook clears out of any busy cook's path.
    for (int k = 0; k < static_cast<int>(state.agents.size()); ++k) {
      if (k == seat) continue;
      const auto theirs = greedy_cook_targets(state, k, layout);
      if (theirs.empty()) continue;
      const Plan p = plan_toward(state, k, layout, theirs, false);
      const Cell from = state.agents[static_cast<std::size_t>(k)].pos;
      if (p.found && is_move(p.action) && facing_cell(from, direction_of(p.action)) == pos) {
        return step_aside(state, seat, layout, from);
      }
    }
    return Action::Stay;
  }

  Plan plan = plan_toward(state, seat, layout, targets, true, lower_intents);
  if (!plan.found) {
    // Other agents wall off every goal: push toward it anyway, or step aside
    // when the agent in the way has a lower seat index.
    plan = plan_toward(state, seat, layout, targets, false);
    if (!plan.found) return Action::Stay;
    if (is_move(plan.action)) {
      const Cell next = facing_cell(pos, direction_of(plan.action));
      const int blocker = occupant_of(state, next, seat);
      if (blocker >= 0 && blocker < seat) return step_aside(state, seat, layout, next);
    }
  }

  const Cell next = intended_cell(state, seat, layout, plan.action);
  if (next == pos) return plan.action;
  for (std::size_t k = 0; k < lower_intents.size(); ++k) {
    const Cell their_pos = state.agents[k].pos;
    if (lower_intents[k] == next && their_pos != next) return Action::Stay;         // contested cell
    if (lower_intents[k] == pos && their_pos == next) return step_aside(state, seat, layout, next);  // swap
  }
  return plan.action;
}

}  // namespace

Action greedy_cook_action(const GameState& state, int seat, const Layout& layout) {
  std::vector<Cell> intents;
  intents.reserve(static_cast<std::size_t>(seat));
  for (int k = 0; k < seat; ++k) {
    intents.push_back(intended_cell(state, k, layout, greedy_cook_decision(state, k, layout, intents)));
  }
  return greedy_cook_decision(state, seat, layout, intents);
}

ActionDistribution action_distribution(const PolicyParams& params, std::span<const double> obs,
                                       const PolicyContext* context) {
  if (params.kind == PolicyKind::Linear) {
    check_linear_dims(params, obs.size());
    return linear_softmax(params, obs);
  }
  switch (params.script) {
    case ScriptedName::Random: {
      ActionDistribution d;
      d.fill(1.0 / kNumActions);
      return d;
    }
    case ScriptedName::Stationary: return one_hot(Action::Stay);
    case ScriptedName::GreedyCook:
      if (!context) throw Error(ErrorCode::InvalidConfig, "GreedyCook needs the game state");
      return one_hot(greedy_cook_action(context->state, context->seat, context->layout));
  }
  return one_hot(Action::Stay);
}

Action argmax_action(const ActionDistribution& dist) {
  return static_cast<Action>(std::max_element(dist.begin(), dist.end()) - dist.begin());
}

Action sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (int a = 0; a < kNumActions; ++a) {
    const double p = dist[static_cast<std::size_t>(a)];
    if (p <= 0.0) continue;
    last_positive = a;
    acc += p;
    if (u < acc) return static_cast<Action>(a);
  }
  return static_cast<Action>(last_positive);
}

Action select_action(const PolicyParams& params, std::span<const double> obs, const PolicyContext* context,
                     ActionMode mode, Rng& rng) {
  if (params.kind == PolicyKind::Scripted) {
    switch (params.script) {
      case ScriptedName::Random: return static_cast<Action>(rng.below(kNumActions));
      case ScriptedName::Stationary: return Action::Stay;
      case ScriptedName::GreedyCook:
        if (!context) throw Error(ErrorCode::InvalidConfig, "GreedyCook needs the game state");
        return greedy_cook_action(context->state, context->seat, context->layout);
    }
  }
  const ActionDistribution dist = action_distribution(params, obs, context);
  return mode == ActionMode::Greedy ? argmax_action(dist) : sample_action(dist, rng);
}

// ---- learner --------------------------------------------------------------

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

std::vector<double> policy_gradient(const PolicyParams& params, std::span<const Trajectory> episodes, double gamma,
                                    double baseline) {
  if (params.kind != PolicyKind::Linear) {
    throw Error(ErrorCode::InvalidConfig, "only linear policies can be trained");
  }
  std::vector<double> grad(params.weights.size(), 0.0);
  std::size_t steps = 0;
  for (const Trajectory& traj : episodes) {
    if (traj.size() == 0) continue;
    check_linear_dims(params, traj.feature_len);
    const std::vector<double> returns = discounted_returns(traj.rewards, gamma);
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto obs = traj.obs(t);
      const ActionDistribution pi = linear_softmax(params, obs);
      const double adv = returns[t] - baseline;
      const auto taken = static_cast<std::size_t>(traj.actions[t]);
      if (adv != 0.0) {
        for (std::size_t f = 0; f < obs.size(); ++f) {
          const double x = obs[f];
          if (x == 0.0) continue;
          double* row = grad.data() + f * kNumActions;
          for (std::size_t a = 0; a < kNumActions; ++a) {
            row[a] += adv * x * ((a == taken ? 1.0 : 0.0) - pi[a]);
          }
        }
      }
      ++steps;
    }
  }
  if (steps == 0) throw Error(ErrorCode::InvalidConfig, "no timesteps to learn from");
  const double scale = 1.0 / static_cast<double>(steps);
  for (double& g : grad) g *= scale;
  return grad;
}

UpdateResult reinforce_update(const PolicyParams& params, std::span<const Trajectory> episodes, double lr,
                              double gamma, Baseline baseline) {
  if (!(lr > 0.0) || !(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "lr must be positive and gamma in [0, 1]");
  }
  double return_sum = 0.0;
  std::size_t steps = 0;
  for (const Trajectory& traj : episodes) {
    for (double g : discounted_returns(traj.rewards, gamma)) return_sum += g;
    steps += traj.size();
  }
  if (steps == 0) throw Error(ErrorCode::InvalidConfig, "no timesteps to learn from");
  const double mean_return = return_sum / static_cast<double>(steps);
  if (!baseline.initialized) baseline = {mean_return, true};

  const std::vector<double> grad = policy_gradient(params, episodes, gamma, baseline.value);
  UpdateResult out{params, baseline};
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw Error(ErrorCode::NonFiniteGradient, "gradient entry " + std::to_string(i) + " is not finite");
    }
    out.params.weights[i] += lr * grad[i];
    if (!std::isfinite(out.params.weights[i])) {
      throw Error(ErrorCode::NonFiniteGradient, "step overflowed weight " + std::to_string(i));
    }
  }
  out.baseline.value = kBaselineDecay * baseline.value + (1.0 - kBaselineDecay) * mean_return;
  return out;
}

void write_weights(std::ostream& out, const PolicyParams& params) {
  out << params.feature_len << " cols=" << kNumActions << '\n';
  for (std::size_t f = 0; f < params.feature_len; ++f) {
    for (int a = 0; a < kNumActions; ++a) {
      if (a) out << ' ';
      out << format_double(params.weight(f, a));
    }
    out << '\n';
  }
}

PolicyParams read_weights(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedFile, "empty weights file");
  const auto head = split(line, ' ');
  const auto rows = head.size() == 2 ? parse_int(head[0]) : std::nullopt;
  if (!rows || *rows < 0 || head[1] != "cols=6") {
    throw Error(ErrorCode::MalformedFile, "weights header must read '<feature_len> cols=6'");
  }
  PolicyParams p = PolicyParams::zeros(static_cast<std::size_t>(*rows));
  for (std::size_t f = 0; f < p.feature_len; ++f) {
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedFile, "weights table is truncated");
    const auto cells = split(line, ' ');
    if (cells.size() != kNumActions) throw Error(ErrorCode::MalformedFile, "weights row needs 6 values");
    for (int a = 0; a < kNumActions; ++a) {
      const auto v = parse_double(cells[static_cast<std::size_t>(a)]);
      if (!v || !std::isfinite(*v)) throw Error(ErrorCode::MalformedFile, "bad weight value");
      p.weight(f, a) = *v;
    }
  }
  return p;
}

}  // namespace nxplay

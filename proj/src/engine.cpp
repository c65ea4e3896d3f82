#include "nxplay/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>

#include "nxplay/error.hpp"
#include "nxplay/fnv.hpp"

namespace nxplay {

namespace {

using SeatCells = std::array<Cell, kMaxSeats>;
using SeatFlags = std::array<bool, kMaxSeats>;

// Works on fixed-size arrays so the step loop never allocates.
int resolve_in_place(int n, SeatCells& pos, const SeatCells& target) {
  SeatFlags moving{};
  int movers = 0;
  for (int i = 0; i < n; ++i) {
    moving[i] = !(target[i] == pos[i]);
    movers += moving[i];
  }

  int passes = 0;
  while (movers > 0) {
    ++passes;
    SeatFlags block{};
    bool any = false;
    for (int i = 0; i < n; ++i) {
      if (!moving[i]) continue;
      for (int j = 0; j < n && !block[i]; ++j) {
        if (j == i) continue;
        if (moving[j] && target[j] == target[i]) block[i] = true;                            // (a)
        else if (moving[j] && target[i] == pos[j] && target[j] == pos[i]) block[i] = true;  // (b)
        else if (!moving[j] && pos[j] == target[i]) block[i] = true;                         // (c)
      }
      any |= block[i];
    }

    if (!any) {
      // A mover whose target is occupied only succeeds if the occupant does;
      // chains that end in a cycle never ground.
      SeatFlags grounded{};
      bool grew = true;
      while (grew) {
        grew = false;
        for (int i = 0; i < n; ++i) {
          if (!moving[i] || grounded[i]) continue;
          int occupant = -1;
          for (int j = 0; j < n; ++j) {
            if (j != i && pos[j] == target[i]) occupant = j;
          }
          if (occupant < 0 || grounded[occupant]) {
            grounded[i] = true;
            grew = true;
          }
        }
      }
      for (int i = 0; i < n; ++i) {
        if (moving[i] && !grounded[i]) {
          block[i] = true;
          any = true;
        }
      }
      if (!any) break;
    }

    for (int i = 0; i < n; ++i) {
      if (block[i]) {
        moving[i] = false;
        --movers;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (moving[i]) pos[i] = target[i];
  }
  return passes;
}

void emit(std::vector<Event>* events, EventKind kind, int seat, HeldObject object, Cell where) {
  if (events) events->push_back({kind, seat, object, where});
}

}  // namespace

char action_code(Action a) {
  static constexpr std::array<char, kNumActions> kCodes = {'N', 'S', 'E', 'W', '.', 'I'};
  return kCodes[static_cast<std::size_t>(a)];
}

Action action_from_code(char c) {
  switch (c) {
    case 'N': return Action::North;
    case 'S': return Action::South;
    case 'E': return Action::East;
    case 'W': return Action::West;
    case '.': return Action::Stay;
    case 'I': return Action::Interact;
    default: break;
  }
  throw Error(ErrorCode::MalformedFile, std::string("unknown action symbol '") + c + "'");
}

std::string_view held_name(HeldObject h) {
  switch (h) {
    case HeldObject::Nothing: return "Nothing";
    case HeldObject::Onion: return "Onion";
    case HeldObject::Dish: return "Dish";
    case HeldObject::Soup: return "Soup";
  }
  return "?";
}

std::string to_string(const Event& e) {
  std::string kind;
  switch (e.kind) {
    case EventKind::Delivered: kind = "Delivered"; break;
    case EventKind::PotStarted: kind = "PotStarted"; break;
    case EventKind::PickedUp: kind = "PickedUp(" + std::string(held_name(e.object)) + ")"; break;
    case EventKind::PlacedInPot: kind = "PlacedInPot"; break;
    case EventKind::PlacedOnCounter: kind = "PlacedOnCounter"; break;
    case EventKind::TookFromCounter: kind = "TookFromCounter"; break;
  }
  return "seat" + std::to_string(e.seat + 1) + ":" + kind;
}

GameState reset(const Layout& layout) {
  GameState s;
  s.agents.reserve(layout.start_positions().size());
  for (Cell c : layout.start_positions()) s.agents.push_back({c, Orientation::North, HeldObject::Nothing});
  s.pots.assign(layout.pot_cells().size(), PotState{});
  s.counters.assign(layout.grid().size(), HeldObject::Nothing);
  return s;
}

MovementResolution resolve_movement(std::span<const Cell> current, std::span<const Cell> proposed) {
  if (current.size() != proposed.size() || current.size() > kMaxSeats) {
    throw Error(ErrorCode::ActionCountMismatch, "movement spans must match and hold at most 9 seats");
  }
  const int n = static_cast<int>(current.size());
  SeatCells pos{};
  SeatCells target{};
  std::copy(current.begin(), current.end(), pos.begin());
  std::copy(proposed.begin(), proposed.end(), target.begin());
  MovementResolution r;
  r.passes = resolve_in_place(n, pos, target);
  r.positions.assign(pos.begin(), pos.begin() + n);
  return r;
}

double advance(GameState& state, std::span<const Action> actions, const Layout& layout, const EngineConfig& config,
               std::span<double> shaped, std::vector<Event>* events) {
  const int n = static_cast<int>(state.agents.size());
  if (static_cast<int>(actions.size()) != n) {
    throw Error(ErrorCode::ActionCountMismatch,
                "expected " + std::to_string(n) + " actions, got " + std::to_string(actions.size()));
  }
  assert(static_cast<int>(shaped.size()) == n);
  std::fill(shaped.begin(), shaped.end(), 0.0);

  // Phase 1: movement.
  SeatCells pos{};
  SeatCells target{};
  for (int i = 0; i < n; ++i) {
    AgentState& a = state.agents[static_cast<std::size_t>(i)];
    pos[i] = a.pos;
    target[i] = a.pos;
    const Action act = actions[static_cast<std::size_t>(i)];
    if (is_move(act)) {
      a.orientation = direction_of(act);
      const Cell t = facing_cell(a.pos, a.orientation);
      if (layout.tile(t) == Tile::Floor) target[i] = t;
    }
  }
  resolve_in_place(n, pos, target);
  for (int i = 0; i < n; ++i) state.agents[static_cast<std::size_t>(i)].pos = pos[i];

  // Phase 2: interactions, ascending seat order.
  double reward = 0.0;
  for (int i = 0; i < n; ++i) {
    if (actions[static_cast<std::size_t>(i)] != Action::Interact) continue;
    AgentState& a = state.agents[static_cast<std::size_t>(i)];
    const Cell f = facing_cell(a.pos, a.orientation);
    switch (layout.tile(f)) {
      case Tile::OnionDispenser:
        if (a.held == HeldObject::Nothing) {
          a.held = HeldObject::Onion;
          emit(events, EventKind::PickedUp, i, HeldObject::Onion, f);
        }
        break;
      case Tile::DishDispenser:
        if (a.held == HeldObject::Nothing) {
          a.held = HeldObject::Dish;
          if (config.shaping) shaped[static_cast<std::size_t>(i)] += config.shaping_dish_pickup;
          emit(events, EventKind::PickedUp, i, HeldObject::Dish, f);
        }
        break;
      case Tile::Pot: {
        PotState& pot = state.pots[static_cast<std::size_t>(layout.pot_slot(f))];
        if (pot.phase == PotPhase::Idle && pot.onions < kOnionsPerSoup && a.held == HeldObject::Onion) {
          a.held = HeldObject::Nothing;
          ++pot.onions;
          if (config.shaping) shaped[static_cast<std::size_t>(i)] += config.shaping_onion_in_pot;
          emit(events, EventKind::PlacedInPot, i, HeldObject::Onion, f);
          if (pot.onions == kOnionsPerSoup) {
            pot.phase = PotPhase::Cooking;
            pot.ticks_remaining = config.cook_time;
            emit(events, EventKind::PotStarted, i, HeldObject::Nothing, f);
          }
        } else if (pot.phase == PotPhase::Ready && a.held == HeldObject::Dish) {
          a.held = HeldObject::Soup;
          pot = PotState{};
          if (config.shaping) shaped[static_cast<std::size_t>(i)] += config.shaping_soup_pickup;
          emit(events, EventKind::PickedUp, i, HeldObject::Soup, f);
        }
        break;
      }
      case Tile::ServingStation:
        if (a.held == HeldObject::Soup) {
          a.held = HeldObject::Nothing;
          reward += config.delivery_reward;
          ++state.deliveries;
          emit(events, EventKind::Delivered, i, HeldObject::Soup, f);
        }
        break;
      case Tile::Counter: {
        HeldObject& slot = state.counters[static_cast<std::size_t>(layout.index(f))];
        if (slot == HeldObject::Nothing && a.held != HeldObject::Nothing) {
          slot = a.held;
          a.held = HeldObject::Nothing;
          emit(events, EventKind::PlacedOnCounter, i, slot, f);
        } else if (slot != HeldObject::Nothing && a.held == HeldObject::Nothing) {
          a.held = slot;
          slot = HeldObject::Nothing;
          emit(events, EventKind::TookFromCounter, i, a.held, f);
        }
        break;
      }
      case Tile::Floor: break;
    }
  }

  // Phase 3: cooking.
  for (PotState& pot : state.pots) {
    if (pot.phase == PotPhase::Cooking && --pot.ticks_remaining <= 0) {
      pot.ticks_remaining = 0;
      pot.phase = PotPhase::Ready;
    }
  }

  ++state.tick;
  state.score += reward;
  return reward;
}

StepOutcome step(const GameState& state, std::span<const Action> actions, const Layout& layout,
                 const EngineConfig& config) {
  StepOutcome out{state, 0.0, std::vector<double>(state.agents.size(), 0.0), {}};
  out.shared_reward = advance(out.next, actions, layout, config, out.shaped, &out.events);
  return out;
}

std::uint64_t state_digest(const GameState& state, const Layout& layout) {
  Fnv1a h;
  h.i32(state.tick);
  h.u32(static_cast<std::uint32_t>(state.agents.size()));
  for (const AgentState& a : state.agents) {
    h.i32(a.pos.x);
    h.i32(a.pos.y);
    h.byte(static_cast<std::uint8_t>(a.orientation));
    h.byte(static_cast<std::uint8_t>(a.held));
  }
  h.u32(static_cast<std::uint32_t>(state.pots.size()));
  for (const PotState& p : state.pots) {
    h.i32(p.onions);
    h.byte(static_cast<std::uint8_t>(p.phase));
    h.i32(p.ticks_remaining);
  }
  for (Cell c : layout.cells_of(Tile::Counter)) h.byte(static_cast<std::uint8_t>(state.counter_at(layout, c)));
  h.i32(state.deliveries);
  h.f64(state.score);
  return h.value();
}

std::size_t feature_length(int num_agents) noexcept {
  return 25 + 6 * static_cast<std::size_t>(num_agents - 1);
}

namespace {

struct Nearest {
  Cell cell;
  bool found = false;
};

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

template <typename Pred>
Nearest nearest_of(const std::vector<Cell>& cells, Cell from, Pred&& keep) {
  Nearest best;
  int best_d = 0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!keep(k)) continue;
    const int d = manhattan(cells[k], from);
    if (!best.found || d < best_d) {
      best = {cells[k], true};
      best_d = d;
    }
  }
  return best;
}

}  // namespace

void featurize_into(const GameState& state, int seat, const Layout& layout, const EngineConfig& config,
                    std::span<double> out) {
  const int n = static_cast<int>(state.agents.size());
  if (seat < 0 || seat >= n) throw Error(ErrorCode::SeatOutOfRange, "seat " + std::to_string(seat));
  if (out.size() != feature_length(n)) {
    throw Error(ErrorCode::DimensionMismatch, "observation buffer has wrong length");
  }
  std::fill(out.begin(), out.end(), 0.0);

  const AgentState& me = state.agents[static_cast<std::size_t>(seat)];
  const double sx = 1.0 / std::max(1, layout.width() - 1);
  const double sy = 1.0 / std::max(1, layout.height() - 1);
  auto put_offset = [&](std::size_t at, Cell target) {
    out[at] = std::clamp((target.x - me.pos.x) * sx, -1.0, 1.0);
    out[at + 1] = std::clamp((target.y - me.pos.y) * sy, -1.0, 1.0);
  };

  out[static_cast<std::size_t>(me.held)] = 1.0;
  out[4 + static_cast<std::size_t>(me.orientation)] = 1.0;

  const auto all = [](std::size_t) { return true; };
  const auto& pots = layout.pot_cells();
  const std::array<Nearest, 5> targets = {
      nearest_of(layout.cells_of(Tile::OnionDispenser), me.pos, all),
      nearest_of(layout.cells_of(Tile::DishDispenser), me.pos, all),
      nearest_of(layout.cells_of(Tile::ServingStation), me.pos, all),
      nearest_of(pots, me.pos, [&](std::size_t k) { return state.pots[k].phase == PotPhase::Idle; }),
      nearest_of(pots, me.pos, [&](std::size_t k) { return state.pots[k].phase == PotPhase::Ready; }),
  };
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (!targets[t].found) continue;
    put_offset(8 + 2 * t, targets[t].cell);
    out[18 + t] = 1.0;
  }

  std::size_t at = 23;
  for (int other = 0; other < n; ++other) {
    if (other == seat) continue;
    const AgentState& a = state.agents[static_cast<std::size_t>(other)];
    put_offset(at, a.pos);
    out[at + 2 + static_cast<std::size_t>(a.held)] = 1.0;
    at += 6;
  }

  Nearest pot = nearest_of(pots, me.pos, all);
  const PotState& p = state.pot_at(layout, pot.cell);
  out[at] = static_cast<double>(p.onions) / kOnionsPerSoup;
  out[at + 1] = config.cook_time > 0 ? static_cast<double>(p.ticks_remaining) / config.cook_time : 0.0;
}

std::vector<double> featurize(const GameState& state, int seat, const Layout& layout, const EngineConfig& config) {
  if (seat < 0 || seat >= static_cast<int>(state.agents.size())) {
    throw Error(ErrorCode::SeatOutOfRange, "seat " + std::to_string(seat));
  }
  std::vector<double> out(feature_length(static_cast<int>(state.agents.size())));
  featurize_into(state, seat, layout, config, out);
  return out;
}

}  // namespace nxplay

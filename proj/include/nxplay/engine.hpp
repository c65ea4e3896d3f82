#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nxplay/layout.hpp"

namespace nxplay {

enum class Orientation : std::uint8_t { North, South, East, West };
enum class HeldObject : std::uint8_t { Nothing, Onion, Dish, Soup };
enum class Action : std::uint8_t { North, South, East, West, Stay, Interact };
enum class PotPhase : std::uint8_t { Idle, Cooking, Ready };

inline constexpr int kNumActions = 6;
inline constexpr int kOnionsPerSoup = 3;

constexpr Cell offset(Orientation o) noexcept {
  switch (o) {
    case Orientation::North: return {0, -1};
    case Orientation::South: return {0, 1};
    case Orientation::East: return {1, 0};
    case Orientation::West: return {-1, 0};
  }
  return {0, 0};
}

constexpr Cell facing_cell(Cell pos, Orientation o) noexcept {
  const Cell d = offset(o);
  return {pos.x + d.x, pos.y + d.y};
}

constexpr bool is_move(Action a) noexcept { return static_cast<int>(a) < 4; }
constexpr Orientation direction_of(Action a) noexcept { return static_cast<Orientation>(a); }
constexpr Action move_toward(Orientation o) noexcept { return static_cast<Action>(o); }

// Replay symbols: N S E W . I
char action_code(Action a);
Action action_from_code(char c);  // throws Error(MalformedFile) on unknown symbols
std::string_view held_name(HeldObject h);

struct EngineConfig {
  int cook_time = 20;
  double delivery_reward = 20.0;
  int horizon = 400;
  bool shaping = false;
  double shaping_onion_in_pot = 3.0;
  double shaping_dish_pickup = 3.0;
  double shaping_soup_pickup = 5.0;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct AgentState {
  Cell pos;
  Orientation orientation = Orientation::North;
  HeldObject held = HeldObject::Nothing;
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct PotState {
  int onions = 0;
  PotPhase phase = PotPhase::Idle;
  int ticks_remaining = 0;
  friend bool operator==(const PotState&, const PotState&) = default;
};

struct GameState {
  int tick = 0;
  std::vector<AgentState> agents;
  // Aligned with Layout::pot_cells().
  std::vector<PotState> pots;
  // One slot per grid cell; only Counter cells ever hold something other than Nothing.
  std::vector<HeldObject> counters;
  int deliveries = 0;
  // Accumulated shared (delivery) reward. Shaping never enters the score.
  double score = 0.0;

  const PotState& pot_at(const Layout& layout, Cell c) const { return pots[static_cast<std::size_t>(layout.pot_slot(c))]; }
  HeldObject counter_at(const Layout& layout, Cell c) const {
    return counters[static_cast<std::size_t>(layout.index(c))];
  }

  friend bool operator==(const GameState&, const GameState&) = default;
};

enum class EventKind : std::uint8_t { Delivered, PotStarted, PickedUp, PlacedInPot, PlacedOnCounter, TookFromCounter };

struct Event {
  EventKind kind;
  int seat;
  HeldObject object;  // the object involved (PickedUp(Onion) etc.)
  Cell where;
  friend bool operator==(const Event&, const Event&) = default;
};

std::string to_string(const Event& e);

struct StepOutcome {
  GameState next;
  double shared_reward = 0.0;
  std::vector<double> shaped;  // per seat, zero unless shaping is enabled
  std::vector<Event> events;
};

GameState reset(const Layout& layout);

// Advances `state` in place and appends this tick's events. Returns the shared
// reward. Hot-loop form of step(); `shaped` must have one slot per seat.
double advance(GameState& state, std::span<const Action> actions, const Layout& layout, const EngineConfig& config,
               std::span<double> shaped, std::vector<Event>* events);

StepOutcome step(const GameState& state, std::span<const Action> actions, const Layout& layout,
                 const EngineConfig& config = {});

struct MovementResolution {
  std::vector<Cell> positions;
  int passes = 0;  // conflict-resolution passes evaluated, never more than N
};

// Resolves simultaneous moves. proposed[i] == current[i] means seat i is not
// moving. A mover is blocked when (a) another mover targets the same cell,
// (b) it would swap cells with another mover, or (c) its target is held by a
// seat that ends up not moving; movement cycles never ground and are blocked.
MovementResolution resolve_movement(std::span<const Cell> current, std::span<const Cell> proposed);

// 64-bit FNV-1a over the canonical serialization of the state.
std::uint64_t state_digest(const GameState& state, const Layout& layout);

// Observation layout (length 25 + 6(N-1)):
//   [0,4)   held one-hot (Nothing, Onion, Dish, Soup)
//   [4,8)   orientation one-hot (N, S, E, W)
//   [8,18)  (dx, dy) to nearest onion dispenser, dish dispenser, serving
//           station, idle pot, ready pot
//   [18,23) presence bit for each of those five targets
//   then per other seat in seat order: (dx, dy) and held one-hot
//   last 2  nearest pot onions/3 and ticks_remaining/cook_time
// Offsets are divided by (width-1) and (height-1).
std::size_t feature_length(int num_agents) noexcept;
void featurize_into(const GameState& state, int seat, const Layout& layout, const EngineConfig& config,
                    std::span<double> out);
std::vector<double> featurize(const GameState& state, int seat, const Layout& layout, const EngineConfig& config = {});

}  // namespace nxplay

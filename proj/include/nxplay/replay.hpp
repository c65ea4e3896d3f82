#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nxplay/engine.hpp"
#include "nxplay/layout.hpp"

namespace nxplay {

// Newline-delimited JSON. The first record is a header carrying the layout
// text and engine config; then one record per tick:
//   {"actions":"NI","digest":"<16 hex>","shared_reward":0,"tick":0}
// where digest is state_digest() after the tick.
class ReplayWriter {
 public:
  ReplayWriter(const Layout& layout, const EngineConfig& config);

  void record(int tick, std::span<const Action> actions, double shared_reward, std::uint64_t digest);
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

struct ReplayTick {
  int tick = 0;
  std::vector<Action> actions;
  double shared_reward = 0.0;
  std::uint64_t digest = 0;
};

struct Replay {
  std::string layout_name;
  std::string layout_text;
  EngineConfig config;
  std::vector<ReplayTick> ticks;
};

Replay parse_replay(std::string_view text);

// Re-simulates the replay from its header and checks every digest. Returns the
// state after each tick; throws ChecksumMismatch naming the first bad tick.
std::vector<GameState> simulate_replay(const Replay& replay, const Layout& layout);

}  // namespace nxplay

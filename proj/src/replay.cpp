#include "nxplay/replay.hpp"

#include <json.hpp>

#include "nxplay/error.hpp"
#include "nxplay/text.hpp"

namespace nxplay {

using nlohmann::json;

ReplayWriter::ReplayWriter(const Layout& layout, const EngineConfig& config) {
  json header = {
      {"type", "header"},
      {"version", 1},
      {"layout_name", layout.name()},
      {"layout", render_layout(layout)},
      {"num_agents", layout.num_agents()},
      {"config",
       {{"cook_time", config.cook_time},
        {"delivery_reward", config.delivery_reward},
        {"horizon", config.horizon},
        {"shaping", config.shaping}}},
  };
  text_ = header.dump() + '\n';
}

void ReplayWriter::record(int tick, std::span<const Action> actions, double shared_reward, std::uint64_t digest) {
  std::string codes;
  codes.reserve(actions.size());
  for (Action a : actions) codes.push_back(action_code(a));
  json rec = {{"tick", tick}, {"actions", codes}, {"shared_reward", shared_reward}, {"digest", hex64(digest)}};
  text_ += rec.dump();
  text_ += '\n';
}

Replay parse_replay(std::string_view text) {
  Replay replay;
  bool have_header = false;
  try {
    for (std::string_view line : split(text, '\n')) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      if (!have_header) {
        if (rec.value("type", "") != "header") throw Error(ErrorCode::MalformedFile, "replay must start with a header");
        if (rec.at("version").get<int>() != 1) throw Error(ErrorCode::ManifestVersionMismatch, "replay version");
        replay.layout_name = rec.at("layout_name").get<std::string>();
        replay.layout_text = rec.at("layout").get<std::string>();
        const json& c = rec.at("config");
        replay.config.cook_time = c.at("cook_time").get<int>();
        replay.config.delivery_reward = c.at("delivery_reward").get<double>();
        replay.config.horizon = c.at("horizon").get<int>();
        replay.config.shaping = c.at("shaping").get<bool>();
        have_header = true;
        continue;
      }
      ReplayTick t;
      t.tick = rec.at("tick").get<int>();
      for (char c : rec.at("actions").get<std::string>()) t.actions.push_back(action_from_code(c));
      t.shared_reward = rec.at("shared_reward").get<double>();
      const std::string hex = rec.at("digest").get<std::string>();
      if (hex.size() != 16) throw Error(ErrorCode::MalformedFile, "digest must be 16 hex digits");
      t.digest = std::stoull(hex, nullptr, 16);
      replay.ticks.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("replay record: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::MalformedFile, "replay digest is not hexadecimal");
  }
  if (!have_header) throw Error(ErrorCode::MalformedFile, "replay has no header");
  return replay;
}

std::vector<GameState> simulate_replay(const Replay& replay, const Layout& layout) {
  std::vector<GameState> states;
  states.reserve(replay.ticks.size());
  GameState state = reset(layout);
  std::vector<double> shaped(state.agents.size());
  for (const ReplayTick& t : replay.ticks) {
    const double r = advance(state, t.actions, layout, replay.config, shaped, nullptr);
    if (state_digest(state, layout) != t.digest || r != t.shared_reward) {
      throw Error(ErrorCode::ChecksumMismatch, "replay diverges at tick " + std::to_string(t.tick));
    }
    states.push_back(state);
  }
  return states;
}

}  // namespace nxplay

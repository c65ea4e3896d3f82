#include "nxplay/render.hpp"

#include <algorithm>

namespace nxplay {

namespace {

char held_glyph(HeldObject h) {
  switch (h) {
    case HeldObject::Nothing: return ' ';
    case HeldObject::Onion: return 'o';
    case HeldObject::Dish: return 'd';
    case HeldObject::Soup: return 's';
  }
  return '?';
}

char orientation_glyph(Orientation o) {
  switch (o) {
    case Orientation::North: return '^';
    case Orientation::South: return 'v';
    case Orientation::East: return '>';
    case Orientation::West: return '<';
  }
  return '?';
}

}  // namespace

int glyph_width(const EngineConfig& config) {
  return std::max(4, 3 + static_cast<int>(std::to_string(std::max(0, config.cook_time)).size()));
}

std::string render_frame(const GameState& state, const Layout& layout, const EngineConfig& config) {
  const auto w = static_cast<std::size_t>(glyph_width(config));
  std::string out;
  out.reserve((static_cast<std::size_t>(layout.width()) * w + 1) * static_cast<std::size_t>(layout.height()));
  for (int y = 0; y < layout.height(); ++y) {
    for (int x = 0; x < layout.width(); ++x) {
      const Cell c{x, y};
      std::string glyph(1, tile_char(layout.tile(c)));
      if (layout.tile(c) == Tile::Pot) {
        const PotState& p = state.pot_at(layout, c);
        glyph = "P" + std::to_string(p.onions) + "/" + std::to_string(p.ticks_remaining);
      } else if (layout.tile(c) == Tile::Counter && state.counter_at(layout, c) != HeldObject::Nothing) {
        glyph.push_back(held_glyph(state.counter_at(layout, c)));
      }
      for (std::size_t seat = 0; seat < state.agents.size(); ++seat) {
        const AgentState& a = state.agents[seat];
        if (a.pos == c) {
          glyph = {static_cast<char>('1' + seat), orientation_glyph(a.orientation), held_glyph(a.held)};
        }
      }
      glyph.resize(w, ' ');
      out += glyph;
    }
    out += '\n';
  }
  return out;
}

}  // namespace nxplay

#pragma once

#include <string>

#include "nxplay/engine.hpp"
#include "nxplay/layout.hpp"

namespace nxplay {

// Characters per grid cell in a frame: wide enough for "P3/<cook_time>".
int glyph_width(const EngineConfig& config);

// One line per grid row, each exactly width * glyph_width characters plus
// '\n'. Agents: seat digit, orientation (^ v > <), held glyph (o d s).
// Pots: P{onions}/{ticks_remaining}. Counters show what they hold.
std::string render_frame(const GameState& state, const Layout& layout, const EngineConfig& config = {});

}  // namespace nxplay
